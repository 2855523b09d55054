// Copyright 2026 The shipsi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "core/lstm.hpp"

namespace shipsi {

// Versioned text checkpoint. A `shipsi-checkpoint 1` line, `key value...`
// metadata lines (dimensions, dropout, seeds, probe offsets, standardizers),
// then one block per tensor:
//   tensor <name> <rows> <cols>
//   <row-major values, one row per line>
// Tensors follow LstmParams::tensor_names() order. Every shape is checked on
// load.
void write_checkpoint(std::ostream& out, const LstmModel& model);
LstmModel read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const LstmModel& model);
LstmModel load_checkpoint(const std::filesystem::path& path);

// `epoch,loss` rows with a header line; epochs are 1-based.
void write_loss_history(std::ostream& out, const std::vector<double>& losses);
std::vector<double> read_loss_history(std::istream& in);

}  // namespace shipsi
