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

#include "mmrank/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mmrank/errors.hpp"
#include "mmrank/normal.hpp"

namespace mmrank {

void ModelConfig::validate() const {
  if (method == Method::kMease) {
    if (link != Link::kProbit)
      throw UsageError("the Mease method requires the probit link");
    if (fcs_mode != FcsMode::kConsolidated)
      throw UsageError("the Mease method requires consolidated FCS handling");
  }
  if (method == Method::kFixedVariance) {
    if (!(fixed_sigma2 > 0.0))
      throw UsageError("fixed-variance fits require sigma2 > 0");
    if (fcs_mode == FcsMode::kSeparate)
      throw UsageError(
          "fixed-variance fits carry a single sigma2; use FCS mode 0 or 1");
  }
  if (method == Method::kPqlReml && !has_fcs_effect()) {
    // Allowed: REML coincides with ML when there are no fixed effects.
  }
}

std::string ModelConfig::label() const {
  if (method == Method::kMease) return "Mease";
  const char* l = link == Link::kProbit ? "P" : "L";
  const int m = static_cast<int>(fcs_mode);
  char buf[64];
  switch (method) {
    case Method::kPqlMl:
      std::snprintf(buf, sizeof(buf), "PQL.%s.%d", l, m);
      break;
    case Method::kPqlReml:
      std::snprintf(buf, sizeof(buf), "PQL(REML).%s.%d", l, m);
      break;
    case Method::kLaplace:
      std::snprintf(buf, sizeof(buf), "LA.%s.%d", l, m);
      break;
    case Method::kFullyExponential:
      std::snprintf(buf, sizeof(buf), "FE.%s.%d", l, m);
      break;
    case Method::kFixedVariance:
      std::snprintf(buf, sizeof(buf), "FIX(%g).%s.%d", fixed_sigma2, l, m);
      break;
    default:
      std::snprintf(buf, sizeof(buf), "?.%s.%d", l, m);
  }
  return buf;
}

void ParameterVector::validate() const {
  if (variances.empty() || variances.size() > 2)
    throw UsageError("parameter vector needs one or two variance components");
  for (double v : variances)
    if (!(v > 0.0)) throw UsageError("variance components must be positive");
}

double win_probability(Link link, double nu) {
  double p;
  if (link == Link::kProbit) {
    p = norm_cdf(nu);
  } else {
    // logistic CDF, stable on both tails
    if (nu >= 0.0) {
      p = 1.0 / (1.0 + std::exp(-nu));
    } else {
      const double e = std::exp(nu);
      p = e / (1.0 + e);
    }
  }
  // Never exactly 0 or 1; log-likelihoods go through the stable log-CDF
  // routines instead of log(p).
  constexpr double kOneBelow = 1.0 - 1.1102230246251565e-16;
  return std::min(std::max(p, 5e-324), kOneBelow);
}

LinkDerivs link_loglik_derivs(Link link, double nu, int r) {
  LinkDerivs d;
  if (link == Link::kProbit) {
    const double s = r == 1 ? 1.0 : -1.0;
    const double x = s * nu;
    const MillsChain m = mills_chain(x);
    d.value = log_norm_cdf(x);
    d.d1 = s * m.lambda;
    d.d2 = m.d1;
    d.d3 = s * m.d2;
    d.d4 = m.d3;
  } else {
    const double pi = win_probability(Link::kLogit, nu);
    const double q = pi * (1.0 - pi);
    // log P = r*nu - log(1+e^nu)
    const double softplus =
        std::max(nu, 0.0) + std::log1p(std::exp(-std::fabs(nu)));
    d.value = r * nu - softplus;
    d.d1 = static_cast<double>(r) - pi;
    d.d2 = -q;
    d.d3 = -q * (1.0 - 2.0 * pi);
    d.d4 = -q * (1.0 - 6.0 * q);
  }
  return d;
}

double linear_predictor(const DesignMatrices& design, int game,
                        const ParameterVector& params,
                        const Eigen::VectorXd& eta) {
  if (eta.size() != design.n_teams)
    throw UsageError("latent state length does not match the design");
  double nu = eta[design.home[game]] - eta[design.away[game]];
  if (design.has_fcs_effect && params.has_beta)
    nu += design.x[game] * params.beta;
  return nu;
}

double conditional_loglik(const DesignMatrices& design,
                          const std::vector<int>& outcomes, Link link,
                          const ParameterVector& params,
                          const Eigen::VectorXd& eta) {
  if (!eta.allFinite()) throw UsageError("non-finite team effects");
  double total = 0.0;
  for (int i = 0; i < design.n_games; ++i) {
    const double nu = linear_predictor(design, i, params, eta);
    total += link_loglik_derivs(link, nu, outcomes[i]).value;
  }
  return total;
}

PriorSpec PriorSpec::normal(const Eigen::VectorXd& variance) {
  PriorSpec p;
  p.kind = PriorKind::kNormal;
  p.variance = variance;
  return p;
}

PriorSpec PriorSpec::mease(int n_teams) {
  PriorSpec p;
  p.kind = PriorKind::kMeasePenalty;
  p.variance = Eigen::VectorXd::Zero(n_teams);
  return p;
}

PriorSpec PriorSpec::for_model(const ModelConfig& config,
                               const ParameterVector& params,
                               const TeamIndex& index) {
  if (config.method == Method::kMease) return mease(index.size());
  Eigen::VectorXd v(index.size());
  for (int j = 0; j < index.size(); ++j)
    v[j] = params.variance_for(index.division[j]);
  return normal(v);
}

double random_effect_logdensity(const PriorSpec& prior,
                                const Eigen::VectorXd& eta) {
  double total = 0.0;
  if (prior.kind == PriorKind::kMeasePenalty) {
    for (int j = 0; j < eta.size(); ++j)
      total += log_norm_cdf(eta[j]) + log_norm_cdf(-eta[j]);
    return total;  // normalizing constant omitted
  }
  for (int j = 0; j < eta.size(); ++j) {
    const double v = prior.variance[j];
    total += -0.5 * eta[j] * eta[j] / v - 0.5 * (kLog2Pi + std::log(v));
  }
  return total;
}

double mease_penalty_density(double x) {
  // ∫ Φ(x)Φ(-x) dx = E[(Z2-Z1)^+] = 1/sqrt(pi)
  constexpr double kSqrtPi = 1.7724538509055160273;
  return kSqrtPi * norm_cdf(x) * norm_cdf(-x);
}

JointDensity joint_logdensity_h(const DesignMatrices& design,
                                const std::vector<int>& outcomes, Link link,
                                const ParameterVector& params,
                                const PriorSpec& prior,
                                const Eigen::VectorXd& eta) {
  const int m = design.n_teams;
  if (eta.size() != m) throw UsageError("eta length does not match design");

  JointDensity out;
  out.gradient = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * design.n_games + m);

  double value = 0.0;
  for (int i = 0; i < design.n_games; ++i) {
    const int h = design.home[i];
    const int a = design.away[i];
    const double nu = linear_predictor(design, i, params, eta);
    const LinkDerivs d = link_loglik_derivs(link, nu, outcomes[i]);
    value += d.value;
    out.gradient[h] += d.d1;
    out.gradient[a] -= d.d1;
    trips.emplace_back(h, h, d.d2);
    trips.emplace_back(a, a, d.d2);
    trips.emplace_back(h, a, -d.d2);
    trips.emplace_back(a, h, -d.d2);
  }

  if (prior.kind == PriorKind::kMeasePenalty) {
    for (int j = 0; j < m; ++j) {
      value += log_norm_cdf(eta[j]) + log_norm_cdf(-eta[j]);
      const MillsChain pos = mills_chain(eta[j]);
      const MillsChain neg = mills_chain(-eta[j]);
      out.gradient[j] += pos.lambda - neg.lambda;
      trips.emplace_back(j, j, pos.d1 + neg.d1);
    }
  } else {
    for (int j = 0; j < m; ++j) {
      const double v = prior.variance[j];
      value += -0.5 * eta[j] * eta[j] / v - 0.5 * (kLog2Pi + std::log(v));
      out.gradient[j] += -eta[j] / v;
      trips.emplace_back(j, j, -1.0 / v);
    }
  }

  out.value = value;
  out.hessian.resize(m, m);
  out.hessian.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace mmrank
