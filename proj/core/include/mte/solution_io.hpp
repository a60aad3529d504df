// Copyright 2026 The MTE Pricing Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTE_SOLUTION_IO_HPP_
#define MTE_SOLUTION_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include "mte/equilibrium.hpp"
#include "mte/instance.hpp"
#include "mte/pricing.hpp"

namespace mte {

// A solved scheme as written by `mte solve`.
struct StoredSolution {
  std::optional<SchemeSpec> scheme;
  ExpandedPrices prices;
  EquilibriumSolution solution;
};

std::string SolutionToJson(const Instance& instance, const StoredSolution& stored);
StoredSolution SolutionFromJson(const Instance& instance, const std::string& text);

void SaveSolution(const Instance& instance, const StoredSolution& stored,
                  const std::filesystem::path& path);
StoredSolution LoadSolution(const Instance& instance, const std::filesystem::path& path);

// Reads a whole file; throws ValidationError when it cannot be opened.
std::string ReadTextFile(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see partial
// content.
void WriteTextFileAtomic(const std::filesystem::path& path, const std::string& text);

}  // namespace mte

#endif  // MTE_SOLUTION_IO_HPP_
