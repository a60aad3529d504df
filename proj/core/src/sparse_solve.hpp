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

#ifndef MTE_SRC_SPARSE_SOLVE_HPP_
#define MTE_SRC_SPARSE_SOLVE_HPP_

#include <memory>
#include <span>
#include <vector>

#include "mte/network.hpp"

namespace mte::internal {

// Sparse LU factorization of I - P, where P is the node-to-node transition
// matrix of one destination restricted to the transient nodes (all nodes
// except the absorbing destination). Vectors passed in and out are indexed
// by network node; the destination entry is ignored on input and zero on
// output.
class ChainSolver {
 public:
  // arc_prob[a] is the probability of taking arc a at its tail.
  ChainSolver(const Network& network, NodeIndex destination,
              std::span<const double> arc_prob);
  ~ChainSolver();
  ChainSolver(ChainSolver&&) noexcept;
  ChainSolver& operator=(ChainSolver&&) noexcept;

  // Solves (I - P^T) x = y: node throughput for injected demand y.
  std::vector<double> SolveFlow(std::span<const double> y) const;
  // Solves (I - P) T = b: expected accumulated arc rewards until absorption.
  std::vector<double> SolveExpectation(std::span<const double> b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mte::internal

#endif  // MTE_SRC_SPARSE_SOLVE_HPP_
