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

#include "mte/choice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "mte/errors.hpp"

namespace mte {
namespace {

void CheckKernelArgs(std::span<const double> z, double beta) {
  if (z.empty()) throw ValidationError("z", "cost-to-go vector is empty");
  if (!(beta > 0.0)) throw ValidationError("beta", "logit scale must be > 0");
}

// Sum in ascending order, so the result does not depend on the order of
// the alternatives.
double OrderFreeSum(std::span<const double> w) {
  constexpr std::size_t kSmall = 16;
  if (w.size() <= kSmall) {
    std::array<double, kSmall> buf;
    std::copy(w.begin(), w.end(), buf.begin());
    std::sort(buf.begin(), buf.begin() + w.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) sum += buf[k];
    return sum;
  }
  std::vector<double> buf(w.begin(), w.end());
  std::sort(buf.begin(), buf.end());
  double sum = 0.0;
  for (double v : buf) sum += v;
  return sum;
}

}  // namespace

double CostToGo(double time, double kappa, double beta_p, double beta_t,
                double tau_head) {
  if (!(beta_t > 0.0)) throw ValidationError("beta_t", "must be > 0");
  return time + beta_p / beta_t * kappa + tau_head;
}

double Phi(std::span<const double> z, double beta) {
  CheckKernelArgs(z, beta);
  const double lo = *std::min_element(z.begin(), z.end());
  if (z.size() == 1) return lo;
  constexpr std::size_t kSmall = 16;
  double sum;
  if (z.size() <= kSmall) {
    std::array<double, kSmall> w;
    for (std::size_t k = 0; k < z.size(); ++k) w[k] = std::exp(-beta * (z[k] - lo));
    sum = OrderFreeSum({w.data(), z.size()});
  } else {
    std::vector<double> w(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) w[k] = std::exp(-beta * (z[k] - lo));
    sum = OrderFreeSum(w);
  }
  return lo - std::log(sum) / beta;
}

void TransitionProbs(std::span<const double> z, double beta, std::span<double> out) {
  CheckKernelArgs(z, beta);
  if (out.size() != z.size()) throw ValidationError("out", "size mismatch");
  const double lo = *std::min_element(z.begin(), z.end());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = std::exp(-beta * (z[k] - lo));
  const double sum = OrderFreeSum(out);
  for (double& p : out) p /= sum;
}

std::vector<double> TransitionProbs(std::span<const double> z, double beta) {
  std::vector<double> out(z.size());
  TransitionProbs(z, beta, out);
  return out;
}

double OutsideProb(double outside_cost, std::span<const double> z, double beta_t,
                   double beta_t_out) {
  CheckKernelArgs(z, beta_t);
  if (!(beta_t_out > 0.0)) throw ValidationError("beta_t_out", "must be > 0");
  if (outside_cost == std::numeric_limits<double>::infinity()) return 0.0;
  const double a = -beta_t_out * outside_cost;
  double m = a;
  for (double v : z) m = std::max(m, -beta_t * v);
  const double outside = std::exp(a - m);
  std::vector<double> w(z.size() + 1);
  w[0] = outside;
  for (std::size_t k = 0; k < z.size(); ++k) w[k + 1] = std::exp(-beta_t * z[k] - m);
  return outside / OrderFreeSum(w);
}

}  // namespace mte
