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
// EM fitting with Laplace E-steps. The first-order E-step takes the
// conditional mean and covariance from the mode and curvature of the joint
// log density h; the fully exponential E-step corrects both using third and
// fourth directional derivatives of h (ratio-of-Laplace construction,
// coordinatewise means and covariance diagonal). M-steps: Newton-Raphson on
// the FCS-effect score, closed-form trace update for the variances.

#ifndef MMRANK_EM_HPP
#define MMRANK_EM_HPP

#include "mmrank/model.hpp"
#include "mmrank/pql.hpp"

namespace mmrank {

struct ModeResult {
  Eigen::VectorXd mode;                      // maximizer of h
  Eigen::SparseMatrix<double> neg_hessian;   // -h'' at the mode, PD
  double h_value = 0.0;
  double laplace_loglik = 0.0;  // h* + (m/2)log(2pi) - 0.5 logdet(-H)
  int iterations = 0;
};

// Damped Newton-Raphson with sparse Cholesky solves; at return the gradient
// infinity norm is below grad_tol. Throws ConvergenceError at the cap.
ModeResult find_mode(const DesignMatrices& design,
                     const std::vector<int>& outcomes, Link link,
                     const ParameterVector& params, const PriorSpec& prior,
                     const Eigen::VectorXd& start, double grad_tol = 1e-10,
                     int max_iter = 100);

enum class EStepOrder { kFirstOrder, kFullyExponential };

struct EStepResult {
  Eigen::VectorXd eta_tilde;        // conditional mean approximation
  Eigen::MatrixXd v_tilde;          // conditional covariance approximation
  Eigen::VectorXd mode;             // first-order center
  Eigen::MatrixXd first_order_cov;  // (-H)^-1 at the mode
  double laplace_loglik = 0.0;
  double h_value = 0.0;
  bool fe_fallback = false;  // corrections rejected, first-order used
  std::vector<std::string> warnings;
};

EStepResult estep(const DesignMatrices& design,
                  const std::vector<int>& outcomes, const ModelConfig& config,
                  const ParameterVector& params, EStepOrder order,
                  const TeamIndex& index, const Eigen::VectorXd& start);

// Solves the score equation for the FCS effect under the E-step Gaussian
// approximation N(eta_tilde, v_tilde): per-game expectations reduce to 1-d
// Gauss-Hermite integrals in the linear predictor. Newton with central
// differences, bisection fallback inside an expanded bracket.
double mstep_beta(const DesignMatrices& design,
                  const std::vector<int>& outcomes, const ModelConfig& config,
                  const EStepResult& estep_result, double beta_current);

// Pooled: sigma2 = trace(v + eta eta')/(p+q). Separate: the same average
// restricted to each division block.
std::vector<double> mstep_variance(const EStepResult& estep_result,
                                   const TeamIndex& index, FcsMode fcs_mode);

FitResult fit_em(const DesignMatrices& design, const std::vector<int>& outcomes,
                 const TeamIndex& index, const ModelConfig& config);

// Dispatch on config.method across both engines.
FitResult fit_model(const DesignMatrices& design,
                    const std::vector<int>& outcomes, const TeamIndex& index,
                    const ModelConfig& config);

}  // namespace mmrank

#endif  // MMRANK_EM_HPP
