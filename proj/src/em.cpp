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

#include "mmrank/em.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <cmath>

#include "mmrank/errors.hpp"
#include "mmrank/normal.hpp"
#include "mmrank/quadrature.hpp"

namespace mmrank {

ModeResult find_mode(const DesignMatrices& design,
                     const std::vector<int>& outcomes, Link link,
                     const ParameterVector& params, const PriorSpec& prior,
                     const Eigen::VectorXd& start, double grad_tol,
                     int max_iter) {
  const int m = design.n_teams;
  Eigen::VectorXd eta = start;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;

  JointDensity jd =
      joint_logdensity_h(design, outcomes, link, params, prior, eta);
  ModeResult out;
  for (int it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    const double gnorm = jd.gradient.cwiseAbs().maxCoeff();
    if (gnorm < grad_tol) {
      out.mode = eta;
      out.h_value = jd.value;
      out.neg_hessian = -jd.hessian;
      if (!analyzed) ldlt.analyzePattern(out.neg_hessian);
      ldlt.factorize(out.neg_hessian);
      if (ldlt.info() != Eigen::Success ||
          ldlt.vectorD().minCoeff() <= 0.0)
        throw ConvergenceError("negative Hessian not PD at the mode");
      const double log_det = ldlt.vectorD().array().log().sum();
      out.laplace_loglik = jd.value + 0.5 * m * kLog2Pi - 0.5 * log_det;
      return out;
    }

    Eigen::SparseMatrix<double> neg_h = -jd.hessian;
    if (!analyzed) {
      ldlt.analyzePattern(neg_h);
      analyzed = true;
    }
    ldlt.factorize(neg_h);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
      throw ConvergenceError("negative Hessian not PD during mode search");
    const Eigen::VectorXd direction = ldlt.solve(jd.gradient);

    // Step halving keeps early iterations inside the concave basin. Near the
    // optimum the objective change rounds to zero, so flat steps are accepted
    // rather than rejected (the gradient check above is the real stop).
    const double flat = 1e-13 * (1.0 + std::fabs(jd.value));
    double step = 1.0;
    JointDensity trial;
    for (int half = 0; half < 60; ++half) {
      trial = joint_logdensity_h(design, outcomes, link, params, prior,
                                 eta + step * direction);
      if (trial.value > jd.value - flat || step < 1e-14) break;
      step *= 0.5;
    }
    eta += step * direction;
    jd = std::move(trial);
  }
  throw ConvergenceError(
      "mode search hit its iteration cap; last gradient norm " +
      std::to_string(jd.gradient.cwiseAbs().maxCoeff()));
}

namespace {

// Per-game third/fourth derivative coefficients of h in the linear predictor
// (normal priors contribute nothing beyond the second derivative).
struct GameCurvature {
  Eigen::VectorXd c3;
  Eigen::VectorXd c4;
};

GameCurvature game_curvature(const DesignMatrices& design,
                             const std::vector<int>& outcomes, Link link,
                             const ParameterVector& params,
                             const Eigen::VectorXd& eta) {
  GameCurvature gc;
  gc.c3.resize(design.n_games);
  gc.c4.resize(design.n_games);
  for (int i = 0; i < design.n_games; ++i) {
    const double nu = linear_predictor(design, i, params, eta);
    const LinkDerivs d = link_loglik_derivs(link, nu, outcomes[i]);
    gc.c3[i] = d.d3;
    gc.c4[i] = d.d4;
  }
  return gc;
}

}  // namespace

EStepResult estep(const DesignMatrices& design,
                  const std::vector<int>& outcomes, const ModelConfig& config,
                  const ParameterVector& params, EStepOrder order,
                  const TeamIndex& index, const Eigen::VectorXd& start) {
  const int m = design.n_teams;
  const int n = design.n_games;
  const PriorSpec prior = PriorSpec::for_model(config, params, index);
  const ModeResult mode =
      find_mode(design, outcomes, config.link, params, prior, start,
                config.mode_grad_tol, config.max_newton);

  EStepResult r;
  r.mode = mode.mode;
  r.laplace_loglik = mode.laplace_loglik;
  r.h_value = mode.h_value;

  const Eigen::MatrixXd neg_h(mode.neg_hessian);
  Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
  if (llt.info() != Eigen::Success)
    throw ConvergenceError("negative Hessian not PD in the E-step");
  r.first_order_cov = llt.solve(Eigen::MatrixXd::Identity(m, m));

  if (order == EStepOrder::kFirstOrder) {
    r.eta_tilde = r.mode;
    r.v_tilde = r.first_order_cov;
    return r;
  }

  // Fully exponential corrections. With q = Sigma Z' (columns indexed by
  // game) and w_i = Z_i Sigma Z_i', the mean shift is 0.5 * Sigma * t with
  // t = sum_i c3_i w_i Z_i'. Each covariance diagonal entry j receives
  // 0.5 * (tr[(Sigma B)^2] + sum_i c4_i d_i^2 w_i + sum_i c3_i w_i (Z y)_i)
  // where d = Z Sigma e_j, B = Z' diag(c3 .* d) Z and y = Sigma B d-weights;
  // all contractions decompose game-by-game over the +-1 design rows.
  const Eigen::MatrixXd& sigma = r.first_order_cov;
  const GameCurvature gc =
      game_curvature(design, outcomes, config.link, params, mode.mode);

  Eigen::MatrixXd q(m, n);  // column i: Sigma (e_home - e_away)
  for (int i = 0; i < n; ++i)
    q.col(i) = sigma.col(design.home[i]) - sigma.col(design.away[i]);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i)
    w[i] = q(design.home[i], i) - q(design.away[i], i);

  Eigen::VectorXd t = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) {
    const double c = gc.c3[i] * w[i];
    t[design.home[i]] += c;
    t[design.away[i]] -= c;
  }
  r.eta_tilde = mode.mode + 0.5 * (sigma * t);

  Eigen::VectorXd corrections(m);
  Eigen::MatrixXd b(m, m);
  Eigen::VectorXd d(n), v(n), vp(n), y(m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) d[i] = q(j, i);
    v = gc.c3.cwiseProduct(d);
    vp = v.cwiseProduct(d);

    double term2 = 0.0;
    for (int i = 0; i < n; ++i) term2 += gc.c4[i] * d[i] * d[i] * w[i];

    y.noalias() = q * vp;
    double term3 = 0.0;
    for (int i = 0; i < n; ++i)
      term3 += gc.c3[i] * w[i] * (y[design.home[i]] - y[design.away[i]]);

    b.setZero();
    for (int i = 0; i < n; ++i) {
      b.col(design.home[i]) += v[i] * q.col(i);
      b.col(design.away[i]) -= v[i] * q.col(i);
    }
    const double term1 = b.cwiseProduct(b.transpose()).sum();
    corrections[j] = 0.5 * (term1 + term2 + term3);
  }

  // Keep the corrected covariance PD: shrink the diagonal corrections toward
  // the first-order values until Cholesky succeeds.
  double scale = 1.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd vt = sigma;
    for (int j = 0; j < m; ++j) vt(j, j) = sigma(j, j) + scale * corrections[j];
    bool ok = vt.diagonal().minCoeff() > 0.0;
    if (ok) {
      Eigen::LLT<Eigen::MatrixXd> check(vt);
      ok = check.info() == Eigen::Success;
    }
    if (ok) {
      if (scale < 1.0)
        r.warnings.push_back(
            "fully exponential covariance correction overshot; scaled by " +
            std::to_string(scale));
      r.v_tilde = std::move(vt);
      return r;
    }
    scale *= 0.5;
  }
  r.fe_fallback = true;
  r.warnings.push_back(
      "fully exponential covariance correction rejected; first-order "
      "covariance used for this iteration");
  r.v_tilde = sigma;
  return r;
}

double mstep_beta(const DesignMatrices& design,
                  const std::vector<int>& outcomes, const ModelConfig& config,
                  const EStepResult& es, double beta_current) {
  if (!design.has_fcs_effect)
    throw UsageError("no FCS effect in a consolidated design");
  const GaussHermite& gh = gauss_hermite(config.gh_order);
  constexpr double kInvSqrtPi = 0.5641895835477562869;

  // Conditional mean and variance of the game-level predictor, beta excluded.
  struct CrossGame {
    double mu0;
    double sd_sqrt2;  // sqrt(2 * Z v Z')
    int r;
  };
  std::vector<CrossGame> cross;
  for (int i = 0; i < design.n_games; ++i) {
    if (design.x[i] == 0.0) continue;
    const int h = design.home[i];
    const int a = design.away[i];
    const double mu0 = es.eta_tilde[h] - es.eta_tilde[a];
    const double var = es.v_tilde(h, h) + es.v_tilde(a, a) -
                       2.0 * es.v_tilde(h, a);
    cross.push_back({mu0, std::sqrt(2.0 * std::max(var, 0.0)),
                     outcomes[i]});
  }
  if (cross.empty())
    throw ConvergenceError(
        "no FCS-visit games: the FCS effect score has no information "
        "(separation should have been detected upstream)");

  auto score = [&](double beta) {
    double s = 0.0;
    for (const CrossGame& g : cross) {
      const double mu = beta + g.mu0;
      if (g.sd_sqrt2 == 0.0) {
        s += link_loglik_derivs(config.link, mu, g.r).d1;
        continue;
      }
      double acc = 0.0;
      for (int k = 0; k < gh.nodes.size(); ++k)
        acc += gh.weights[k] *
               link_loglik_derivs(config.link, mu + g.sd_sqrt2 * gh.nodes[k],
                                  g.r)
                   .d1;
      s += acc * kInvSqrtPi;
    }
    return s;
  };

  // The score is strictly decreasing in beta (log-concave likelihoods), so a
  // sign-changing bracket always exists unless the data are separated.
  double lo = beta_current - 1.0, hi = beta_current + 1.0;
  double slo = score(lo), shi = score(hi);
  for (int grow = 0; grow < 60 && slo * shi > 0.0; ++grow) {
    if (slo < 0.0) {  // root is to the left
      lo -= std::pow(2.0, grow * 0.25);
      slo = score(lo);
    } else {
      hi += std::pow(2.0, grow * 0.25);
      shi = score(hi);
    }
  }
  if (slo * shi > 0.0)
    throw ConvergenceError(
        "FCS-effect score has no sign change: separation missed upstream");

  // Newton with central differences, safeguarded by the bracket.
  double beta = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double s = score(beta);
    if (std::fabs(s) < 1e-12) break;
    if (s > 0.0) lo = beta; else hi = beta;
    const double step = 1e-5 * std::max(1.0, std::fabs(beta));
    const double deriv = (score(beta + step) - score(beta - step)) /
                         (2.0 * step);
    double next = (deriv < 0.0) ? beta - s / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - beta) < 1e-12 * std::max(1.0, std::fabs(beta))) {
      beta = next;
      break;
    }
    beta = next;
  }
  return beta;
}

std::vector<double> mstep_variance(const EStepResult& es,
                                   const TeamIndex& index, FcsMode fcs_mode) {
  const int m = static_cast<int>(es.eta_tilde.size());
  if (fcs_mode != FcsMode::kSeparate) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j)
      acc += es.v_tilde(j, j) + es.eta_tilde[j] * es.eta_tilde[j];
    return {acc / m};
  }
  double fbs = 0.0, fcs = 0.0;
  int n_fbs = 0, n_fcs = 0;
  for (int j = 0; j < m; ++j) {
    const double contrib =
        es.v_tilde(j, j) + es.eta_tilde[j] * es.eta_tilde[j];
    if (index.division[j] == Division::FBS) {
      fbs += contrib;
      ++n_fbs;
    } else {
      fcs += contrib;
      ++n_fcs;
    }
  }
  if (n_fbs == 0 || n_fcs == 0)
    throw UsageError("separate variances need teams in both divisions");
  return {fbs / n_fbs, fcs / n_fcs};
}

FitResult fit_em(const DesignMatrices& design, const std::vector<int>& outcomes,
                 const TeamIndex& index, const ModelConfig& config) {
  config.validate();
  if (config.method != Method::kLaplace &&
      config.method != Method::kFullyExponential)
    throw UsageError("fit_em handles the Laplace and fully exponential grids");
  const EStepOrder order = config.method == Method::kFullyExponential
                               ? EStepOrder::kFullyExponential
                               : EStepOrder::kFirstOrder;
  const int m = design.n_teams;

  FitResult fit;
  fit.config = config;
  fit.params.has_beta = design.has_fcs_effect;
  fit.params.beta = fit.params.has_beta ? 1.0 : 0.0;
  fit.params.variances.assign(config.separate_variances() ? 2 : 1, 0.5);

  Eigen::VectorXd warm = Eigen::VectorXd::Zero(m);
  double prev_loglik = 0.0;
  bool have_prev = false;
  bool fe_warned = false, overshoot_warned = false;
  EStepResult es;
  for (int it = 1; it <= config.max_em; ++it) {
    fit.iterations = it;
    es = estep(design, outcomes, config, fit.params, order, index, warm);
    warm = es.eta_tilde;
    for (const auto& wmsg : es.warnings) {
      const bool overshoot = wmsg.find("overshot") != std::string::npos;
      bool& flag = overshoot ? overshoot_warned : fe_warned;
      if (!flag) {
        fit.warnings.push_back(wmsg);
        flag = true;
      }
    }

    double delta = 0.0;
    if (fit.params.has_beta) {
      const double beta_new =
          mstep_beta(design, outcomes, config, es, fit.params.beta);
      delta = std::max(delta, std::fabs(beta_new - fit.params.beta));
      fit.params.beta = beta_new;
    }
    const std::vector<double> var_new =
        mstep_variance(es, index, config.fcs_mode);
    for (size_t k = 0; k < var_new.size(); ++k)
      delta = std::max(delta, std::fabs(var_new[k] - fit.params.variances[k]));
    fit.params.variances = var_new;

    const bool loglik_stable =
        have_prev && std::fabs(es.laplace_loglik - prev_loglik) <
                         config.loglik_rel_tol *
                             std::max(1.0, std::fabs(prev_loglik));
    prev_loglik = es.laplace_loglik;
    have_prev = true;
    if (delta < config.param_tol || loglik_stable) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged)
    fit.warnings.push_back("EM iteration cap reached");

  // Final E-step at the converged parameters so the reported ratings match.
  es = estep(design, outcomes, config, fit.params, order, index, warm);
  fit.eta_hat = es.eta_tilde;
  fit.cond_cov = es.v_tilde;
  fit.cond_var_diag = es.v_tilde.diagonal();
  fit.loglik_approx = es.laplace_loglik;
  return fit;
}

FitResult fit_model(const DesignMatrices& design,
                    const std::vector<int>& outcomes, const TeamIndex& index,
                    const ModelConfig& config) {
  config.validate();
  switch (config.method) {
    case Method::kLaplace:
    case Method::kFullyExponential:
      return fit_em(design, outcomes, index, config);
    default:
      return fit_pql(design, outcomes, index, config);
  }
}

}  // namespace mmrank
