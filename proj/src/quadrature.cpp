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

#include "mmrank/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "mmrank/em.hpp"
#include "mmrank/errors.hpp"
#include "mmrank/normal.hpp"

namespace mmrank {

const GaussHermite& gauss_hermite(int order) {
  if (order < 1 || order > 200)
    throw UsageError("Gauss-Hermite order out of range");
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  // Golub-Welsch on the symmetric Jacobi matrix of the Hermite recurrence
  // (weight e^{-x^2}): off-diagonals sqrt(k/2), weights sqrt(pi)*v0^2.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(k / 2.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussHermite gh;
  gh.nodes = es.eigenvalues();
  gh.weights.resize(order);
  constexpr double kSqrtPi = 1.7724538509055160273;
  for (int k = 0; k < order; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    gh.weights[k] = kSqrtPi * v0 * v0;
  }
  return cache.emplace(order, std::move(gh)).first->second;
}

OracleResult oracle_integrate(const DesignMatrices& design,
                              const std::vector<int>& outcomes, Link link,
                              const ParameterVector& params,
                              const TeamIndex& index, int nodes_per_dim) {
  const int m = design.n_teams;
  if (m > kOracleMaxDims)
    throw UsageError("oracle_integrate refuses more than " +
                     std::to_string(kOracleMaxDims) +
                     " team effects (tensor-product cost)");
  const GaussHermite& gh = gauss_hermite(nodes_per_dim);

  Eigen::VectorXd scale(m);  // eta_j = sqrt(2 sigma2_j) * x_j
  for (int j = 0; j < m; ++j)
    scale[j] = std::sqrt(2.0 * params.variance_for(index.division[j]));

  // Odometer over the tensor grid; moments accumulated in one pass.
  std::vector<int> idx(m, 0);
  Eigen::VectorXd eta(m);
  double mass = 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(m, m);
  for (;;) {
    double logw = 0.0;
    for (int j = 0; j < m; ++j) {
      eta[j] = scale[j] * gh.nodes[idx[j]];
      logw += std::log(gh.weights[idx[j]]);
    }
    double ll = 0.0;
    for (int i = 0; i < design.n_games; ++i) {
      const double nu = linear_predictor(design, i, params, eta);
      ll += link_loglik_derivs(link, nu, outcomes[i]).value;
    }
    const double f = std::exp(logw + ll);
    mass += f;
    mean += f * eta;
    second.selfadjointView<Eigen::Lower>().rankUpdate(eta, f);

    int j = 0;
    while (j < m && ++idx[j] == nodes_per_dim) idx[j++] = 0;
    if (j == m) break;
  }

  OracleResult out;
  out.nodes_per_dim = nodes_per_dim;
  // The pi^{-m/2} prefactor of the normal-to-Hermite substitution.
  constexpr double kLogPi = 1.1447298858494001741;
  out.marginal_loglik = std::log(mass) - 0.5 * m * kLogPi;
  out.posterior_mean = mean / mass;
  Eigen::MatrixXd sec = second.selfadjointView<Eigen::Lower>();
  out.posterior_cov =
      sec / mass - out.posterior_mean * out.posterior_mean.transpose();
  return out;
}

double Rng::uniform01() {
  // 53-bit mantissa, strictly inside (0,1)
  const std::uint64_t bits = engine_() >> 11;
  double u = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  return u;
}

double Rng::normal(double mean, double sd) {
  return mean + sd * norm_quantile(uniform01());
}

std::uint64_t Rng::substream(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 finalizer over the combined word
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SyntheticSeason simulate_season(const std::vector<ScheduledGame>& schedule,
                                const ParameterVector& true_params,
                                const std::vector<Division>& divisions,
                                Link link, std::uint64_t seed) {
  if (schedule.empty()) throw UsageError("empty schedule");
  const int m = static_cast<int>(divisions.size());
  Rng rng(seed);
  SyntheticSeason season;
  season.schedule = schedule;
  season.true_params = true_params;
  season.seed = seed;
  season.true_eta.resize(m);
  for (int j = 0; j < m; ++j) {
    const double v = true_params.variance_for(divisions[j]);
    season.true_eta[j] = v > 0.0 ? rng.normal(0.0, std::sqrt(v)) : 0.0;
  }
  season.outcomes.reserve(schedule.size());
  for (const auto& g : schedule) {
    double nu = season.true_eta[g.home] - season.true_eta[g.away];
    if (g.fcs_visit && true_params.has_beta) nu += true_params.beta;
    season.outcomes.push_back(rng.bernoulli(win_probability(link, nu)));
  }
  return season;
}

std::vector<ScheduledGame> round_robin_fragment(int fbs_teams, int fcs_teams,
                                                int rounds, int cross,
                                                std::uint64_t seed) {
  if (fbs_teams < 2) throw UsageError("need at least two FBS teams");
  Rng rng(seed);
  std::vector<ScheduledGame> schedule;

  auto shuffled = [&](int count, int offset) {
    std::vector<int> order(count);
    for (int i = 0; i < count; ++i) order[i] = offset + i;
    for (int i = count - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform01() * (i + 1));
      std::swap(order[i], order[std::min(j, i)]);
    }
    return order;
  };
  auto add_division_round = [&](int count, int offset) {
    std::vector<int> order = shuffled(count, offset);
    for (int k = 0; k + 1 < count; k += 2)
      schedule.push_back({order[k], order[k + 1], false});
  };
  for (int r = 0; r < rounds; ++r) {
    add_division_round(fbs_teams, 0);
    if (fcs_teams >= 2) add_division_round(fcs_teams, fbs_teams);
  }
  // FCS visits to FBS hosts.
  if (fcs_teams > 0) {
    for (int c = 0; c < cross; ++c) {
      const int host = static_cast<int>(rng.uniform01() * fbs_teams);
      const int guest =
          fbs_teams + static_cast<int>(rng.uniform01() * fcs_teams);
      schedule.push_back({std::min(host, fbs_teams - 1),
                          std::min(guest, fbs_teams + fcs_teams - 1), true});
    }
  }
  return schedule;
}

namespace {

struct RepOutcome {
  bool ok = false;
  double sigma2 = 0.0;
  double sigma2_fcs = 0.0;
  double beta = 0.0;
  double rank_displacement = 0.0;
};

double mean_rank_displacement(const Eigen::VectorXd& fitted,
                              const Eigen::VectorXd& truth) {
  const int m = static_cast<int>(fitted.size());
  auto ranks = [m](const Eigen::VectorXd& v) {
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (v[a] != v[b]) return v[a] > v[b];
      return a < b;
    });
    std::vector<int> rank(m);
    for (int i = 0; i < m; ++i) rank[order[i]] = i;
    return rank;
  };
  const std::vector<int> rf = ranks(fitted);
  const std::vector<int> rt = ranks(truth);
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += std::abs(rf[i] - rt[i]);
  return acc / m;
}

}  // namespace

BiasStudyResult bias_study(const std::vector<ScheduledGame>& schedule,
                           const std::vector<Division>& divisions,
                           const ParameterVector& true_params, Link link,
                           const std::vector<ModelConfig>& methods,
                           int replications, std::uint64_t seed, int jobs) {
  if (replications < 1) throw UsageError("replications must be >= 1");
  const int m = static_cast<int>(divisions.size());

  // Shared design across replications; only outcomes change.
  TeamIndex index;
  for (int j = 0; j < m; ++j) {
    index.names.push_back("T" + std::to_string(j));
    index.division.push_back(divisions[j]);
    index.index_of[index.names.back()] = j;
    if (divisions[j] == Division::FBS) ++index.fbs_count;
    else ++index.fcs_count;
  }
  DesignMatrices design;
  design.n_games = static_cast<int>(schedule.size());
  design.n_teams = m;
  bool any_cross = false;
  for (const auto& g : schedule) {
    design.home.push_back(g.home);
    design.away.push_back(g.away);
    design.x.push_back(g.fcs_visit ? 1.0 : 0.0);
    any_cross = any_cross || g.fcs_visit;
  }
  design.has_fcs_effect = any_cross;

  std::vector<std::vector<RepOutcome>> results(
      methods.size(), std::vector<RepOutcome>(replications));

  std::atomic<int> next_rep{0};
  auto worker = [&]() {
    for (;;) {
      const int rep = next_rep.fetch_add(1);
      if (rep >= replications) return;
      const SyntheticSeason season = simulate_season(
          schedule, true_params, divisions, link,
          Rng::substream(seed, static_cast<std::uint64_t>(rep)));
      for (size_t mi = 0; mi < methods.size(); ++mi) {
        RepOutcome& out = results[mi][rep];
        try {
          ModelConfig cfg = methods[mi];
          const FitResult fit =
              fit_model(design, season.outcomes, index, cfg);
          out.ok = true;
          out.sigma2 = fit.params.variances[0];
          out.sigma2_fcs =
              fit.params.variances.size() > 1 ? fit.params.variances[1] : 0.0;
          out.beta = fit.params.has_beta ? fit.params.beta : 0.0;
          out.rank_displacement =
              mean_rank_displacement(fit.eta_hat, season.true_eta);
        } catch (const std::exception&) {
          out.ok = false;
        }
      }
    }
  };
  const int n_threads = std::max(1, std::min(jobs, replications));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int tix = 0; tix < n_threads; ++tix) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BiasStudyResult study;
  for (size_t mi = 0; mi < methods.size(); ++mi) {
    BiasStudyRow row;
    row.method_label = methods[mi].label();
    row.replications = replications;
    std::vector<double> s2, s2b, betas, disp;
    for (const RepOutcome& out : results[mi]) {
      if (!out.ok) {
        ++row.failures;
        continue;
      }
      s2.push_back(out.sigma2);
      s2b.push_back(out.sigma2_fcs);
      betas.push_back(out.beta);
      disp.push_back(out.rank_displacement);
    }
    auto mean_sd = [](const std::vector<double>& v) {
      if (v.empty()) return std::pair<double, double>{0.0, 0.0};
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      var = v.size() > 1 ? var / (v.size() - 1) : 0.0;
      return std::pair<double, double>{mean, std::sqrt(var)};
    };
    std::tie(row.mean_sigma2, row.sd_sigma2) = mean_sd(s2);
    std::tie(row.mean_sigma2_fcs, row.sd_sigma2_fcs) = mean_sd(s2b);
    std::tie(row.mean_beta, row.sd_beta) = mean_sd(betas);
    row.mean_rank_displacement = mean_sd(disp).first;
    study.rows.push_back(row);
  }
  return study;
}

std::string BiasStudyResult::table() const {
  std::string out =
      "method,replications,failures,mean_sigma2,sd_sigma2,mean_sigma2_fcs,"
      "sd_sigma2_fcs,mean_beta,sd_beta,mean_rank_displacement\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.4f\n",
                  r.method_label.c_str(), r.replications, r.failures,
                  r.mean_sigma2, r.sd_sigma2, r.mean_sigma2_fcs,
                  r.sd_sigma2_fcs, r.mean_beta, r.sd_beta,
                  r.mean_rank_displacement);
    out += buf;
  }
  return out;
}

}  // namespace mmrank
