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

#include "sparse_solve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <vector>

#include "mte/errors.hpp"

namespace mte::internal {
namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr double kRefineThreshold = 1e-8;
constexpr int kMaxRefinements = 3;

}  // namespace

struct ChainSolver::Impl {
  NodeIndex destination = 0;
  std::size_t num_nodes = 0;
  SpMat a;  // I - P over transient nodes
  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;

  int row(NodeIndex i) const {
    return static_cast<int>(i < destination ? i : i - 1);
  }
  NodeIndex node(int r) const {
    const auto i = static_cast<NodeIndex>(r);
    return i < destination ? i : i + 1;
  }

  Vec Pack(std::span<const double> v) const {
    if (v.size() != num_nodes) throw Error("chain solve: vector size mismatch");
    Vec out(static_cast<Eigen::Index>(num_nodes - 1));
    for (NodeIndex i = 0; i < num_nodes; ++i) {
      if (i != destination) out[row(i)] = v[i];
    }
    return out;
  }
  std::vector<double> Unpack(const Vec& v) const {
    std::vector<double> out(num_nodes, 0.0);
    for (int r = 0; r < v.size(); ++r) out[node(r)] = v[r];
    return out;
  }

  // Solves op(A) x = b with iterative refinement.
  template <bool kTranspose>
  Vec Solve(const Vec& b) const {
    auto apply = [&](const Vec& rhs) -> Vec {
      if constexpr (kTranspose) {
        return lu.transpose().solve(rhs);
      } else {
        return lu.solve(rhs);
      }
    };
    auto residual = [&](const Vec& x) -> Vec {
      if constexpr (kTranspose) {
        return b - a.transpose() * x;
      } else {
        return b - a * x;
      }
    };
    Vec x = apply(b);
    const double scale = b.size() == 0 ? 0.0 : b.cwiseAbs().maxCoeff();
    for (int k = 0; k < kMaxRefinements; ++k) {
      const Vec r = residual(x);
      if (r.size() == 0 || r.cwiseAbs().maxCoeff() <= kRefineThreshold * scale) break;
      x += apply(r);
    }
    if (!x.allFinite()) throw SingularSystemError("chain solve produced non-finite values");
    return x;
  }
};

ChainSolver::ChainSolver(const Network& network, NodeIndex destination,
                         std::span<const double> arc_prob)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.destination = destination;
  m.num_nodes = network.num_nodes();
  if (arc_prob.size() != network.num_arcs()) {
    throw Error("chain solve: arc probability size mismatch");
  }
  const auto n = static_cast<int>(m.num_nodes - 1);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(network.num_arcs() + m.num_nodes);
  for (int r = 0; r < n; ++r) entries.emplace_back(r, r, 1.0);
  for (ArcIndex a = 0; a < network.num_arcs(); ++a) {
    const NodeIndex i = network.tail(a);
    const NodeIndex j = network.head(a);
    if (i == destination || j == destination || arc_prob[a] == 0.0) continue;
    entries.emplace_back(m.row(i), m.row(j), -arc_prob[a]);
  }
  m.a.resize(n, n);
  m.a.setFromTriplets(entries.begin(), entries.end());
  m.a.makeCompressed();
  if (n == 0) return;
  m.lu.compute(m.a);
  if (m.lu.info() != Eigen::Success) {
    throw SingularSystemError("I - P is singular for destination " +
                              network.node(destination).id +
                              ": some node cannot reach the destination");
  }
}

ChainSolver::~ChainSolver() = default;
ChainSolver::ChainSolver(ChainSolver&&) noexcept = default;
ChainSolver& ChainSolver::operator=(ChainSolver&&) noexcept = default;

std::vector<double> ChainSolver::SolveFlow(std::span<const double> y) const {
  if (impl_->num_nodes <= 1) return std::vector<double>(impl_->num_nodes, 0.0);
  return impl_->Unpack(impl_->Solve<true>(impl_->Pack(y)));
}

std::vector<double> ChainSolver::SolveExpectation(std::span<const double> b) const {
  if (impl_->num_nodes <= 1) return std::vector<double>(impl_->num_nodes, 0.0);
  return impl_->Unpack(impl_->Solve<false>(impl_->Pack(b)));
}

}  // namespace mte::internal
