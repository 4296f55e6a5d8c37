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

#include "mmrank/pql.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <functional>

#include "mmrank/em.hpp"
#include "mmrank/errors.hpp"
#include "mmrank/normal.hpp"

namespace mmrank {

namespace {

// Brent-style 1-d maximizer (golden section + parabolic steps).
double maximize_scalar(const std::function<double(double)>& f, double lo,
                       double hi, double tol = 1e-10, int max_iter = 200) {
  const double gold = 0.3819660112501051;
  double a = lo, b = hi;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (a + b);
    const double tol1 = tol * std::fabs(x) + 1e-12;
    if (std::fabs(x - mid) <= 2.0 * tol1 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::fabs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double etmp = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * etmp) && p > q * (a - x) &&
          p < q * (b - x)) {
        parabolic = true;
        d = p / q;
        const double u = x + d;
        if (u - a < 2.0 * tol1 || b - u < 2.0 * tol1)
          d = (mid > x) ? tol1 : -tol1;
      }
    }
    if (!parabolic) {
      e = (x < mid) ? b - x : a - x;
      d = gold * e;
    }
    const double u = (std::fabs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu >= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu >= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu >= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

// Sufficient statistics of the working LMM that do not depend on the
// variance components.
struct WorkingStats {
  Eigen::MatrixXd zwz;   // Z' W Z
  Eigen::VectorXd zwt;   // Z' W t
  Eigen::VectorXd zwx;   // Z' W X
  double xwx = 0.0;
  double xwt = 0.0;
  double twt = 0.0;
  double sum_log_w = 0.0;
  int n = 0;
  bool has_x = false;
};

WorkingStats accumulate_stats(const WorkingModel& wm,
                              const DesignMatrices& design) {
  const int m = design.n_teams;
  WorkingStats s;
  s.n = design.n_games;
  s.has_x = design.has_fcs_effect;
  s.zwz = Eigen::MatrixXd::Zero(m, m);
  s.zwt = Eigen::VectorXd::Zero(m);
  s.zwx = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < design.n_games; ++i) {
    const int h = design.home[i];
    const int a = design.away[i];
    const double w = wm.w[i];
    const double t = wm.t[i];
    s.zwz(h, h) += w;
    s.zwz(a, a) += w;
    s.zwz(h, a) -= w;
    s.zwz(a, h) -= w;
    s.zwt[h] += w * t;
    s.zwt[a] -= w * t;
    if (s.has_x && design.x[i] != 0.0) {
      const double wx = w * design.x[i];
      s.zwx[h] += wx;
      s.zwx[a] -= wx;
      s.xwx += wx * design.x[i];
      s.xwt += wx * t;
    }
    s.twt += w * t * t;
    s.sum_log_w += std::log(w);
  }
  return s;
}

Eigen::VectorXd prior_variance_vector(const std::vector<double>& variances,
                                      const TeamIndex& index) {
  Eigen::VectorXd v(index.size());
  for (int j = 0; j < index.size(); ++j) {
    v[j] = variances.size() == 1
               ? variances[0]
               : (index.division[j] == Division::FBS ? variances[0]
                                                     : variances[1]);
  }
  return v;
}

// Profile (ML or REML) log likelihood of the working LMM at the given
// variance components, scale fixed at 1.
double working_profile_loglik(const WorkingStats& s, const TeamIndex& index,
                              const std::vector<double>& variances,
                              VarianceMode mode) {
  const int m = static_cast<int>(s.zwz.rows());
  Eigen::VectorXd dvec = prior_variance_vector(variances, index);
  Eigen::MatrixXd m0 = s.zwz;
  double log_det_d = 0.0;
  for (int j = 0; j < m; ++j) {
    m0(j, j) += 1.0 / dvec[j];
    log_det_d += std::log(dvec[j]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m0);
  if (llt.info() != Eigen::Success)
    throw ConvergenceError("working LMM system is singular (random block)");
  double log_det_m0 = 0.0;
  for (int j = 0; j < m; ++j) log_det_m0 += 2.0 * std::log(llt.matrixL()(j, j));

  const Eigen::VectorXd u = llt.solve(s.zwt);
  const double tvt = s.twt - s.zwt.dot(u);  // t' V^-1 t
  const double log_det_v = -s.sum_log_w + log_det_d + log_det_m0;

  double quad = tvt;
  double log_xvx = 0.0;
  int nf = 0;
  if (s.has_x) {
    const Eigen::VectorXd v = llt.solve(s.zwx);
    const double xvx = s.xwx - s.zwx.dot(v);
    const double xvt = s.xwt - s.zwx.dot(u);
    if (!(xvx > 0.0))
      throw ConvergenceError("working LMM system is singular (fixed block)");
    quad = tvt - xvt * xvt / xvx;
    log_xvx = std::log(xvx);
    nf = 1;
  }
  if (mode == VarianceMode::kMl)
    return -0.5 * (s.n * kLog2Pi + log_det_v + quad);
  return -0.5 * ((s.n - nf) * kLog2Pi + log_det_v + log_xvx + quad);
}

}  // namespace

WorkingModel working_variates(const DesignMatrices& design,
                              const std::vector<int>& outcomes,
                              const ModelConfig& config,
                              const ParameterVector& params,
                              const LatentState& state) {
  WorkingModel wm;
  wm.params = params;
  wm.state = state;
  wm.t.resize(design.n_games);
  wm.w.resize(design.n_games);
  for (int i = 0; i < design.n_games; ++i) {
    const double nu = linear_predictor(design, i, params, state.eta);
    const double pi =
        std::min(std::max(win_probability(config.link, nu), 1e-12),
                 1.0 - 1e-12);
    const double mu_prime =
        config.link == Link::kProbit ? norm_pdf(nu) : pi * (1.0 - pi);
    const double resid = static_cast<double>(outcomes[i]) - pi;
    const double var = pi * (1.0 - pi);
    double w = mu_prime * mu_prime / var;
    double t = nu + resid / mu_prime;
    if (!std::isfinite(w) || w < config.weight_floor || !std::isfinite(t)) {
      // Underflowed tail: floor the weight and size the working residual so
      // the bounded product w*t_resid^2 = resid^2/var is preserved.
      w = config.weight_floor;
      t = nu + (resid >= 0 ? 1.0 : -1.0) * std::sqrt(resid * resid / var / w);
      wm.weight_floored = true;
    }
    wm.w[i] = w;
    wm.t[i] = t;
  }
  return wm;
}

LmmSolution lmm_solve(const WorkingModel& working,
                      const DesignMatrices& design, const TeamIndex& index,
                      [[maybe_unused]] const ModelConfig& config,
                      VarianceMode variance_mode, bool estimate_variance) {
  const WorkingStats stats = accumulate_stats(working, design);
  const int m = design.n_teams;

  std::vector<double> variances = working.params.variances;
  const double lo = std::log(1e-8), hi = std::log(1e6);
  if (estimate_variance) {
    if (variances.size() == 1) {
      const double ls = maximize_scalar(
          [&](double l) {
            return working_profile_loglik(stats, index, {std::exp(l)},
                                          variance_mode);
          },
          lo, hi);
      variances[0] = std::exp(ls);
    } else {
      // Coordinatewise sweeps; the profile is smooth and each sweep is a
      // bracketed 1-d search on the log scale.
      for (int sweep = 0; sweep < 40; ++sweep) {
        const std::vector<double> before = variances;
        for (size_t k = 0; k < variances.size(); ++k) {
          const double ls = maximize_scalar(
              [&](double l) {
                std::vector<double> v = variances;
                v[k] = std::exp(l);
                return working_profile_loglik(stats, index, v, variance_mode);
              },
              lo, hi);
          variances[k] = std::exp(ls);
        }
        double change = 0.0;
        for (size_t k = 0; k < variances.size(); ++k)
          change = std::max(change, std::fabs(std::log(variances[k]) -
                                              std::log(before[k])));
        if (change < 1e-9) break;
      }
    }
  }

  // Henderson equations at the chosen variances.
  const Eigen::VectorXd dvec = prior_variance_vector(variances, index);
  LmmSolution sol;
  sol.params = working.params;
  sol.params.variances = variances;
  if (stats.has_x) {
    if (!(stats.xwx > 0.0))
      throw ConvergenceError(
          "no FCS-visit games carry weight: the FCS effect is inestimable");
    Eigen::MatrixXd mme(m + 1, m + 1);
    mme(0, 0) = stats.xwx;
    mme.block(0, 1, 1, m) = stats.zwx.transpose();
    mme.block(1, 0, m, 1) = stats.zwx;
    mme.block(1, 1, m, m) = stats.zwz;
    for (int j = 0; j < m; ++j) mme(1 + j, 1 + j) += 1.0 / dvec[j];
    Eigen::VectorXd rhs(m + 1);
    rhs[0] = stats.xwt;
    rhs.tail(m) = stats.zwt;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(mme);
    if (ldlt.info() != Eigen::Success)
      throw ConvergenceError("mixed-model equations are singular");
    const Eigen::VectorXd blup = ldlt.solve(rhs);
    sol.params.has_beta = true;
    sol.params.beta = blup[0];
    sol.state.eta = blup.tail(m);
    // Conditional covariance of the random block: the eta-eta block of the
    // inverted MME.
    Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(m + 1, m + 1));
    sol.state.cov = inv.block(1, 1, m, m);
  } else {
    Eigen::MatrixXd m0 = stats.zwz;
    for (int j = 0; j < m; ++j) m0(j, j) += 1.0 / dvec[j];
    Eigen::LLT<Eigen::MatrixXd> llt(m0);
    if (llt.info() != Eigen::Success)
      throw ConvergenceError("mixed-model equations are singular");
    sol.state.eta = llt.solve(stats.zwt);
    sol.state.cov = llt.solve(Eigen::MatrixXd::Identity(m, m));
  }
  sol.working_loglik =
      working_profile_loglik(stats, index, variances, variance_mode);
  return sol;
}

namespace {

double laplace_loglik_at(const DesignMatrices& design,
                         const std::vector<int>& outcomes,
                         const ModelConfig& config,
                         const ParameterVector& params, const TeamIndex& index,
                         const Eigen::VectorXd& eta) {
  const PriorSpec prior = PriorSpec::for_model(config, params, index);
  const JointDensity jd =
      joint_logdensity_h(design, outcomes, config.link, params, prior, eta);
  Eigen::MatrixXd neg_h = -Eigen::MatrixXd(jd.hessian);
  Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
  if (llt.info() != Eigen::Success) return jd.value;  // penalty prior etc.
  double log_det = 0.0;
  for (int j = 0; j < neg_h.rows(); ++j)
    log_det += 2.0 * std::log(llt.matrixL()(j, j));
  return jd.value + 0.5 * neg_h.rows() * kLog2Pi - 0.5 * log_det;
}

}  // namespace

FitResult fit_pql(const DesignMatrices& design,
                  const std::vector<int>& outcomes, const TeamIndex& index,
                  const ModelConfig& config) {
  config.validate();
  if (config.method == Method::kMease)
    return fit_mease(design, outcomes, index, config);

  const int m = design.n_teams;
  FitResult fit;
  fit.config = config;
  fit.params.has_beta = design.has_fcs_effect;
  fit.params.beta = fit.params.has_beta ? 1.0 : 0.0;
  const bool fixed = config.method == Method::kFixedVariance;
  fit.params.variances.assign(config.separate_variances() ? 2 : 1,
                              fixed ? config.fixed_sigma2 : 0.5);
  LatentState state;
  state.eta = Eigen::VectorXd::Zero(m);

  const VarianceMode vmode = config.method == Method::kPqlReml
                                 ? VarianceMode::kReml
                                 : VarianceMode::kMl;
  bool floored = false;
  double delta = 0.0;
  for (int it = 1; it <= config.max_outer; ++it) {
    fit.iterations = it;
    WorkingModel wm = working_variates(design, outcomes, config, fit.params,
                                       state);
    floored = floored || wm.weight_floored;
    LmmSolution sol = lmm_solve(wm, design, index, config, vmode, !fixed);
    delta = (sol.state.eta - state.eta).cwiseAbs().maxCoeff();
    if (fit.params.has_beta)
      delta = std::max(delta, std::fabs(sol.params.beta - fit.params.beta));
    for (size_t k = 0; k < fit.params.variances.size(); ++k)
      delta = std::max(delta, std::fabs(sol.params.variances[k] -
                                        fit.params.variances[k]));
    fit.params = sol.params;
    state = sol.state;
    if (delta < config.param_tol) {
      fit.converged = true;
      break;
    }
  }
  if (floored)
    fit.warnings.push_back("working weights floored at configured epsilon");
  if (!fit.converged)
    fit.warnings.push_back("iteration cap reached; last parameter change " +
                           std::to_string(delta));

  fit.eta_hat = state.eta;
  fit.cond_cov = state.cov;
  fit.cond_var_diag = state.cov->diagonal();
  fit.loglik_approx =
      laplace_loglik_at(design, outcomes, config, fit.params, index, state.eta);
  return fit;
}

FitResult fit_mease(const DesignMatrices& design,
                    const std::vector<int>& outcomes,
                    [[maybe_unused]] const TeamIndex& index,
                    const ModelConfig& config) {
  if (design.has_fcs_effect)
    throw UsageError("the Mease fit needs a consolidated design");
  const int m = design.n_teams;
  ParameterVector params;  // no beta, no estimated variance
  params.variances = {1.0};

  const PriorSpec prior = PriorSpec::mease(m);
  const ModeResult mode =
      find_mode(design, outcomes, Link::kProbit, params, prior,
                Eigen::VectorXd::Zero(m), config.mode_grad_tol,
                config.max_newton);

  FitResult fit;
  fit.config = config;
  fit.params = params;
  fit.params.variances.clear();  // nothing is estimated under the penalty
  fit.eta_hat = mode.mode;
  const Eigen::MatrixXd neg_h(mode.neg_hessian);
  Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
  if (llt.info() != Eigen::Success)
    throw ConvergenceError("penalized likelihood Hessian not PD at optimum");
  fit.cond_cov = llt.solve(Eigen::MatrixXd::Identity(m, m));
  fit.cond_var_diag = fit.cond_cov->diagonal();
  fit.loglik_approx = mode.h_value;  // penalized objective, constant omitted
  fit.iterations = mode.iterations;
  fit.converged = true;
  return fit;
}

}  // namespace mmrank
