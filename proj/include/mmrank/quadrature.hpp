// Copyright 2026 The mmrank Authors
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
//
// Exact (to quadrature precision) marginal likelihoods and posterior moments
// on small instances, a deterministic season simulator, and the bias study
// harness that compares estimation methods against simulated truth.

#ifndef MMRANK_QUADRATURE_HPP
#define MMRANK_QUADRATURE_HPP

#include <cstdint>
#include <random>

#include "mmrank/model.hpp"

namespace mmrank {

// Nodes/weights for ∫ f(x) e^{-x^2} dx (physicists' convention), via the
// Golub-Welsch tridiagonal eigenproblem. Cached per order.
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
const GaussHermite& gauss_hermite(int order);

struct OracleResult {
  double marginal_loglik = 0.0;
  Eigen::VectorXd posterior_mean;
  Eigen::MatrixXd posterior_cov;
  int nodes_per_dim = 0;
};

inline constexpr int kOracleMaxDims = 5;

// Tensor-product Gauss-Hermite integration of the model likelihood over the
// team effects (normal priors only). Refuses more than kOracleMaxDims teams.
OracleResult oracle_integrate(const DesignMatrices& design,
                              const std::vector<int>& outcomes, Link link,
                              const ParameterVector& params,
                              const TeamIndex& index, int nodes_per_dim = 40);

// Reproducible RNG: the fully specified mt19937_64 engine with explicit
// uniform and inverse-CDF normal transforms, so draws do not depend on the
// standard library's (implementation-defined) distribution objects.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform01();  // in (0,1)
  double normal() { return normal(0.0, 1.0); }
  double normal(double mean, double sd);
  int bernoulli(double p) { return uniform01() < p ? 1 : 0; }
  // Independent substream for replication k (splitmix64 mix of seed and k).
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t k);

 private:
  std::mt19937_64 engine_;
};

struct ScheduledGame {
  int home = 0;
  int away = 0;
  bool fcs_visit = false;
};

struct SyntheticSeason {
  std::vector<ScheduledGame> schedule;
  ParameterVector true_params;
  Eigen::VectorXd true_eta;
  std::vector<int> outcomes;
  std::uint64_t seed = 0;
};

// Draws the team effects once from the prior, then one Bernoulli outcome per
// scheduled game. Deterministic given the seed.
SyntheticSeason simulate_season(const std::vector<ScheduledGame>& schedule,
                                const ParameterVector& true_params,
                                const std::vector<Division>& divisions,
                                Link link, std::uint64_t seed);

struct BiasStudyRow {
  std::string method_label;
  int replications = 0;
  int failures = 0;
  double mean_sigma2 = 0.0;       // first variance component
  double sd_sigma2 = 0.0;
  double mean_sigma2_fcs = 0.0;   // second component when present, else 0
  double sd_sigma2_fcs = 0.0;
  double mean_beta = 0.0;
  double sd_beta = 0.0;
  double mean_rank_displacement = 0.0;
};

struct BiasStudyResult {
  std::vector<BiasStudyRow> rows;
  // Delimiter-separated table with header; deterministic bytes.
  std::string table() const;
};

// For each replication, simulates a season on the fixed schedule and fits
// every requested method; reports per-method means/SDs of the parameter
// estimates and the mean rank displacement of the fitted ordering against
// the true effect ordering. Individual fit failures are counted, not fatal.
BiasStudyResult bias_study(const std::vector<ScheduledGame>& schedule,
                           const std::vector<Division>& divisions,
                           const ParameterVector& true_params, Link link,
                           const std::vector<ModelConfig>& methods,
                           int replications, std::uint64_t seed, int jobs = 1);

// Deterministic builder for study schedules: every team plays `rounds`
// games against rotating opponents within its division, plus `cross` visits
// of FCS teams to FBS hosts when both divisions are present.
std::vector<ScheduledGame> round_robin_fragment(int fbs_teams, int fcs_teams,
                                                int rounds, int cross,
                                                std::uint64_t seed);

}  // namespace mmrank

#endif  // MMRANK_QUADRATURE_HPP
