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
// Penalized quasi-likelihood engine: iterate link linearization against
// weighted linear-mixed-model solves (Henderson equations), with ML or REML
// profiling of the variance components and the scale fixed at 1.

#ifndef MMRANK_PQL_HPP
#define MMRANK_PQL_HPP

#include "mmrank/model.hpp"

namespace mmrank {

struct WorkingModel {
  Eigen::VectorXd t;  // working response
  Eigen::VectorXd w;  // diagonal working weights, strictly positive
  ParameterVector params;
  LatentState state;
  bool weight_floored = false;
};

enum class VarianceMode { kMl, kReml };

WorkingModel working_variates(const DesignMatrices& design,
                              const std::vector<int>& outcomes,
                              const ModelConfig& config,
                              const ParameterVector& params,
                              const LatentState& state);

// Solves the weighted LMM t = X*beta + Z*eta + e, e ~ N(0, W^-1), scale 1,
// with variance components maximizing the ML or REML log likelihood of the
// working model (bracketed search on log sigma2, coordinatewise when two
// components). Returns updated (params, state) and the working log likelihood.
struct LmmSolution {
  ParameterVector params;
  LatentState state;
  double working_loglik = 0.0;
};

LmmSolution lmm_solve(const WorkingModel& working,
                      const DesignMatrices& design, const TeamIndex& index,
                      const ModelConfig& config, VarianceMode variance_mode,
                      bool estimate_variance = true);

FitResult fit_pql(const DesignMatrices& design,
                  const std::vector<int>& outcomes, const TeamIndex& index,
                  const ModelConfig& config);

// Direct Newton-Raphson maximization of the penalized ranking likelihood
// (probit, consolidated design, Mease penalty prior). Ratings are the joint
// maximizer; the conditional covariance is the inverse negative Hessian.
FitResult fit_mease(const DesignMatrices& design,
                    const std::vector<int>& outcomes, const TeamIndex& index,
                    const ModelConfig& config);

}  // namespace mmrank

#endif  // MMRANK_PQL_HPP
