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
// Model grid (link x FCS handling x estimation method), linear predictors,
// conditional likelihoods, random-effect log densities (normal and the Mease
// penalty), and the joint log density h with analytic derivatives in the
// team effects.

#ifndef MMRANK_MODEL_HPP
#define MMRANK_MODEL_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <optional>
#include <string>
#include <vector>

#include "mmrank/schedule.hpp"

namespace mmrank {

enum class Link { kProbit, kLogit };

enum class Method {
  kPqlMl,
  kPqlReml,
  kLaplace,            // EM with first-order Laplace E-step
  kFullyExponential,   // EM with fully exponential Laplace E-step
  kMease,              // penalized ranking likelihood (probit, consolidated)
  kFixedVariance,      // PQL with the team-effect variance held fixed
};

struct ModelConfig {
  Link link = Link::kProbit;
  FcsMode fcs_mode = FcsMode::kConsolidated;
  Method method = Method::kLaplace;
  double fixed_sigma2 = 0.0;  // kFixedVariance only

  double param_tol = 1e-6;       // outer-loop stopping on parameter change
  double loglik_rel_tol = 1e-8;  // EM alternative stop
  double mode_grad_tol = 1e-10;  // Newton mode search
  int max_outer = 200;           // PQL outer iterations
  int max_em = 500;
  int max_newton = 100;
  int gh_order = 30;           // 1-d expectations in the FCS-effect update
  double weight_floor = 1e-10; // working-weight underflow guard

  // Throws UsageError on invalid combinations (Mease requires probit and
  // consolidated mode; fixed variance requires sigma2 > 0 and a single
  // variance component).
  void validate() const;

  bool has_fcs_effect() const { return fcs_mode != FcsMode::kConsolidated; }
  bool separate_variances() const { return fcs_mode == FcsMode::kSeparate; }

  // Grid notation, e.g. "FE.P.2", "PQL(REML).P.1", "Mease", "FIX(0.0001).P.0".
  std::string label() const;
};

struct ParameterVector {
  bool has_beta = false;
  double beta = 0.0;                // FCS effect
  std::vector<double> variances;    // {sigma2_t} or {sigma2_fbs, sigma2_fcs}

  double variance_for(Division d) const {
    if (variances.size() == 1) return variances[0];
    return d == Division::FBS ? variances[0] : variances[1];
  }
  void validate() const;
};

struct LatentState {
  Eigen::VectorXd eta;                    // team effects, length p+q
  std::optional<Eigen::MatrixXd> cov;     // conditional covariance
};

struct FitResult {
  ModelConfig config;
  ParameterVector params;
  Eigen::VectorXd eta_hat;            // conditional means / EBLUPs
  Eigen::VectorXd cond_var_diag;      // diagonal of the conditional covariance
  std::optional<Eigen::MatrixXd> cond_cov;  // full matrix on request
  double loglik_approx = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// --- links ------------------------------------------------------------

double win_probability(Link link, double nu);

// d^k/dnu^k log P(r | nu) for k = 0..4 (value plus four derivatives).
struct LinkDerivs {
  double value;
  double d1, d2, d3, d4;
};
LinkDerivs link_loglik_derivs(Link link, double nu, int r);

double linear_predictor(const DesignMatrices& design, int game,
                        const ParameterVector& params,
                        const Eigen::VectorXd& eta);

double conditional_loglik(const DesignMatrices& design,
                          const std::vector<int>& outcomes, Link link,
                          const ParameterVector& params,
                          const Eigen::VectorXd& eta);

// --- random-effect log densities ---------------------------------------

enum class PriorKind { kNormal, kMeasePenalty };

// Per-coordinate prior: normal kinds carry a variance for every team
// effect; the Mease penalty log density is sum_j log[Φ(eta_j)Φ(-eta_j)]
// up to its (irrelevant) normalizing constant.
struct PriorSpec {
  PriorKind kind = PriorKind::kNormal;
  Eigen::VectorXd variance;  // unused for the penalty

  static PriorSpec normal(const Eigen::VectorXd& variance);
  static PriorSpec mease(int n_teams);

  static PriorSpec for_model(const ModelConfig& config,
                             const ParameterVector& params,
                             const TeamIndex& index);
};

double random_effect_logdensity(const PriorSpec& prior,
                                const Eigen::VectorXd& eta);

// The normalized penalty density is sqrt(pi)*Φ(x)Φ(-x); ∫Φ(x)Φ(-x)dx = 1/√π.
double mease_penalty_density(double x);

// --- joint log density --------------------------------------------------

// h(eta) = conditional loglik + prior log density, with analytic gradient
// and sparse Hessian in eta. Fill follows the schedule graph.
struct JointDensity {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::SparseMatrix<double> hessian;  // negative definite for normal priors
};

JointDensity joint_logdensity_h(const DesignMatrices& design,
                                const std::vector<int>& outcomes, Link link,
                                const ParameterVector& params,
                                const PriorSpec& prior,
                                const Eigen::VectorXd& eta);

}  // namespace mmrank

#endif  // MMRANK_MODEL_HPP
