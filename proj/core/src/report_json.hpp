// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "json.hpp"
#include "noma/metrics.hpp"
#include "noma/sca.hpp"

namespace noma::detail {

nlohmann::json beamformers_json(const BeamformerSet& w);
nlohmann::json metrics_json(const MetricsReport& report);
nlohmann::json run_report_json(const sca::RunReport& report, bool include_beamformers);

}  // namespace noma::detail
