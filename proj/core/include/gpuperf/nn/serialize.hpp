/**
 * Copyright 2026 The gpuperf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <nlohmann/json_fwd.hpp>

#include "gpuperf/nn/loss.hpp"
#include "gpuperf/nn/mlp.hpp"
#include "gpuperf/nn/train.hpp"

namespace gpuperf::nn {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const Mlp& model);
/// Throws std::invalid_argument on malformed or inconsistent input.
Mlp mlp_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LossSpec& loss);
LossSpec loss_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace gpuperf::nn
