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

#ifndef MTE_CHOICE_HPP_
#define MTE_CHOICE_HPP_

#include <span>
#include <vector>

namespace mte {

// Generalized cost of taking an arc and continuing optimally:
// t + (beta_p / beta_t) * kappa + tau_head.
double CostToGo(double time, double kappa, double beta_p, double beta_t,
                double tau_head);

// Expected minimum of Gumbel-perturbed costs,
// -(1/beta) * log(sum(exp(-beta * z))), evaluated with a max shift.
double Phi(std::span<const double> z, double beta);

// Multinomial-logit probabilities exp(-beta z_a) / sum_e exp(-beta z_e).
// `out` must have the same size as `z`.
void TransitionProbs(std::span<const double> z, double beta, std::span<double> out);
std::vector<double> TransitionProbs(std::span<const double> z, double beta);

// Probability of choosing the outside option over every driving
// continuation at the origin. An infinite outside cost gives 0.
double OutsideProb(double outside_cost, std::span<const double> z, double beta_t,
                   double beta_t_out);

}  // namespace mte

#endif  // MTE_CHOICE_HPP_
