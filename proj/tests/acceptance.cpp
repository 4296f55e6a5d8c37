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
// Acceptance suite. Each criterion prints exactly one PASS/FAIL/SKIP line;
// the process exits nonzero if any criterion fails. Criterion 1 needs the
// real processed season files (not redistributable here); when absent it is
// reported SKIP, never silently passed, and criterion 2 runs the same model
// grid against a frozen synthetic season with golden values instead.
//
// Run with --write-golden to regenerate the synthetic golden file after an
// intentional behavior change.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "mmrank/em.hpp"
#include "mmrank/errors.hpp"
#include "mmrank/normal.hpp"
#include "mmrank/quadrature.hpp"
#include "mmrank/report.hpp"
#include "mmrank/result_io.hpp"

#ifndef FIXTURES_DIR
#define FIXTURES_DIR "tests/fixtures"
#endif
#ifndef RANKCLI_BIN
#define RANKCLI_BIN "rankcli"
#endif

using namespace mmrank;
using Json = nlohmann::ordered_json;

namespace {

struct Criterion {
  std::string status;  // PASS / FAIL / SKIP
  std::string detail;
};

int g_failures = 0;

void report(int number, const std::string& name, const Criterion& c) {
  std::printf("criterion %d (%s): %s — %s\n", number, name.c_str(),
              c.status.c_str(), c.detail.c_str());
  std::fflush(stdout);
  if (c.status == "FAIL") ++g_failures;
}

std::string fixture(const std::string& name) {
  return std::string(FIXTURES_DIR) + "/" + name;
}

bool file_exists(const std::string& path) {
  return std::filesystem::exists(path);
}

struct SeasonData {
  BuiltDesign built;
  std::vector<GameRecord> records;
};

SeasonData load_built(const std::string& games_path,
                      const std::string& roster_path, FcsMode mode) {
  SeasonData s;
  const auto roster = parse_roster(read_file(roster_path));
  auto records = parse_games(read_file(games_path), canonical_mapping());
  s.records = preprocess_raw(records, roster);
  s.built = build_design(s.records, roster, mode);
  return s;
}

FitResult fit_on(const SeasonData& season, Method method, Link link,
                 FcsMode mode, double fixed_sigma2 = 0.0) {
  ModelConfig config;
  config.method = method;
  config.link = link;
  config.fcs_mode = mode;
  config.fixed_sigma2 = fixed_sigma2;
  return fit_model(season.built.design, season.built.outcomes,
                   season.built.index, config);
}

std::vector<std::string> top_teams(const FitResult& fit, const TeamIndex& idx,
                                   int k) {
  const RankingTable table = rank_teams(fit, idx, Division::FBS, true);
  std::vector<std::string> out;
  for (int i = 0; i < k && i < static_cast<int>(table.rows.size()); ++i)
    out.push_back(table.rows[i].team);
  return out;
}

// ---------------------------------------------------------------------------
// criterion 1: conditional reproduction of the published estimates
// ---------------------------------------------------------------------------

Criterion criterion1() {
  std::string dir;
  if (const char* env = std::getenv("RANKDATA_DIR")) dir = env;
  else dir = std::string(FIXTURES_DIR) + "/../data/real";

  const std::vector<int> years = {2008, 2009, 2010, 2011};
  bool any = false;
  for (int y : years)
    any = any || file_exists(dir + "/games_" + std::to_string(y) + ".csv");
  if (!any)
    return {"SKIP",
            "processed season files not present under " + dir +
                " (supply games_<year>.csv and roster_<year>.csv in the "
                "canonical format to enable the published-value checks)"};

  const std::map<int, std::vector<std::string>> expected_top3 = {
      {2008, {"Oklahoma", "Utah", "Texas"}},
      {2009, {"Alabama", "Cincinnati", "Texas"}},
      {2010, {"Auburn", "Oregon", "TCU"}},
      {2011, {"LSU", "Alabama", "Oklahoma St."}},
  };
  std::ostringstream detail;
  bool ok = true;
  auto check = [&](bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [FAILED: " << what << "]";
    }
  };

  for (int y : years) {
    const std::string games = dir + "/games_" + std::to_string(y) + ".csv";
    const std::string roster = dir + "/roster_" + std::to_string(y) + ".csv";
    if (!file_exists(games) || !file_exists(roster)) {
      detail << y << ": missing; ";
      continue;
    }
    const SeasonData cons = load_built(games, roster, FcsMode::kConsolidated);
    const FitResult fe0 =
        fit_on(cons, Method::kFullyExponential, Link::kProbit,
               FcsMode::kConsolidated);
    const auto top3 = top_teams(fe0, cons.built.index, 3);
    check(top3 == expected_top3.at(y),
          std::to_string(y) + " FE.P.0 top-3 ranking");
    detail << y << " FE.P.0 sigma2=" << fe0.params.variances[0] << "; ";

    if (y == 2008) {
      const FitResult pql0 =
          fit_on(cons, Method::kPqlMl, Link::kProbit, FcsMode::kConsolidated);
      const FitResult la0 =
          fit_on(cons, Method::kLaplace, Link::kProbit,
                 FcsMode::kConsolidated);
      check(std::fabs(pql0.params.variances[0] - 0.52) <= 0.02,
            "2008 PQL.P.0 sigma2 = 0.52 +- 0.02");
      check(std::fabs(la0.params.variances[0] - 0.54) <= 0.02,
            "2008 LA.P.0 sigma2 = 0.54 +- 0.02");
      check(std::fabs(fe0.params.variances[0] - 0.76) <= 0.03,
            "2008 FE.P.0 sigma2 = 0.76 +- 0.03");

      const SeasonData pooled = load_built(games, roster, FcsMode::kPooled);
      const FitResult ml =
          fit_on(pooled, Method::kPqlMl, Link::kProbit, FcsMode::kPooled);
      const FitResult reml =
          fit_on(pooled, Method::kPqlReml, Link::kProbit, FcsMode::kPooled);
      check(std::fabs(ml.params.variances[0] - 0.4763) <= 0.005,
            "2008 PQL.P.1 ML sigma2 = 0.4763 +- 0.005");
      check(std::fabs(reml.params.variances[0] - 0.4768) <= 0.005,
            "2008 PQL.P.1 REML sigma2 = 0.4768 +- 0.005");

      const SeasonData sep = load_built(games, roster, FcsMode::kSeparate);
      const FitResult fe2 = fit_on(sep, Method::kFullyExponential,
                                   Link::kProbit, FcsMode::kSeparate);
      check(std::fabs(fe2.params.variances[0] - 0.65) <= 0.03,
            "2008 FE.P.2 sigma2_fbs = 0.65 +- 0.03");
      check(std::fabs(fe2.params.variances[1] - 0.87) <= 0.03,
            "2008 FE.P.2 sigma2_fcs = 0.87 +- 0.03");
    }
    if (y == 2011) {
      const FitResult fel0 = fit_on(cons, Method::kFullyExponential,
                                    Link::kLogit, FcsMode::kConsolidated);
      const auto top_l = top_teams(fel0, cons.built.index, 3);
      check(top_l.size() == 3 && top_l[1] == "Oklahoma St.",
            "2011 FE.L.0 ranks Oklahoma St. second");
    }
  }
  return {ok ? "PASS" : "FAIL", detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 2: frozen synthetic fixture with golden values
// ---------------------------------------------------------------------------

Json fit_grid_on_fixture() {
  const std::string games = fixture("synthetic_season.csv");
  const std::string roster = fixture("synthetic_roster.csv");
  const SeasonData cons = load_built(games, roster, FcsMode::kConsolidated);
  const SeasonData pooled = load_built(games, roster, FcsMode::kPooled);
  const SeasonData sep = load_built(games, roster, FcsMode::kSeparate);

  Json g;
  auto put = [&](const char* key, const FitResult& fit, const SeasonData& s) {
    Json j;
    j["variances"] = fit.params.variances;
    if (fit.params.has_beta) j["fcs_effect"] = fit.params.beta;
    j["loglik"] = fit.loglik_approx;
    j["top3"] = top_teams(fit, s.built.index, 3);
    j["converged"] = fit.converged;
    g[key] = j;
  };
  put("PQL.P.0", fit_on(cons, Method::kPqlMl, Link::kProbit,
                        FcsMode::kConsolidated), cons);
  put("LA.P.0", fit_on(cons, Method::kLaplace, Link::kProbit,
                       FcsMode::kConsolidated), cons);
  put("FE.P.0", fit_on(cons, Method::kFullyExponential, Link::kProbit,
                       FcsMode::kConsolidated), cons);
  put("FE.L.0", fit_on(cons, Method::kFullyExponential, Link::kLogit,
                       FcsMode::kConsolidated), cons);
  put("Mease", fit_on(cons, Method::kMease, Link::kProbit,
                      FcsMode::kConsolidated), cons);
  put("PQL.P.1", fit_on(pooled, Method::kPqlMl, Link::kProbit,
                        FcsMode::kPooled), pooled);
  put("PQL(REML).P.1", fit_on(pooled, Method::kPqlReml, Link::kProbit,
                              FcsMode::kPooled), pooled);
  put("FE.P.2", fit_on(sep, Method::kFullyExponential, Link::kProbit,
                       FcsMode::kSeparate), sep);
  return g;
}

Criterion criterion2(bool write_golden) {
  const std::string golden_path = fixture("golden_synthetic.json");
  const Json actual = fit_grid_on_fixture();
  if (write_golden) {
    std::ofstream out(golden_path);
    out << actual.dump(2) << "\n";
    return {"PASS", "golden file regenerated at " + golden_path};
  }
  if (!file_exists(golden_path))
    return {"FAIL", "golden file missing: " + golden_path};
  Json golden;
  {
    std::ifstream in(golden_path);
    in >> golden;
  }

  std::ostringstream detail;
  bool ok = true;
  for (auto& [model, gj] : golden.items()) {
    if (!actual.contains(model)) {
      ok = false;
      detail << "[missing " << model << "]";
      continue;
    }
    const Json& aj = actual[model];
    const auto gv = gj["variances"].get<std::vector<double>>();
    const auto av = aj["variances"].get<std::vector<double>>();
    bool model_ok = gv.size() == av.size();
    for (size_t k = 0; model_ok && k < gv.size(); ++k)
      model_ok = std::fabs(gv[k] - av[k]) < 1e-6;
    if (gj.contains("fcs_effect"))
      model_ok = model_ok && aj.contains("fcs_effect") &&
                 std::fabs(gj["fcs_effect"].get<double>() -
                           aj["fcs_effect"].get<double>()) < 1e-6;
    model_ok = model_ok && gj["top3"] == aj["top3"];
    model_ok = model_ok && aj["converged"].get<bool>();
    if (!model_ok) {
      ok = false;
      detail << "[" << model << " drifted from golden]";
    }
  }
  // the published qualitative ordering is also pinned on the fixture
  const double pql = golden["PQL.P.0"]["variances"][0].get<double>();
  const double la = golden["LA.P.0"]["variances"][0].get<double>();
  const double fe = golden["FE.P.0"]["variances"][0].get<double>();
  if (!(pql <= la && la <= fe)) {
    ok = false;
    detail << "[sigma2 ordering PQL<=LA<=FE violated]";
  }
  if (ok)
    detail << "all " << golden.size()
           << " grid fits match golden values (tol 1e-6); sigma2 ordering "
           << pql << " <= " << la << " <= " << fe;
  return {ok ? "PASS" : "FAIL", detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 3: oracle equivalence on random small instances
// ---------------------------------------------------------------------------

struct SmallInstance {
  DesignMatrices design;
  TeamIndex index;
  std::vector<int> outcomes;
  double sigma2 = 1.0;
};

SmallInstance random_small_instance(Rng& rng, int teams, int max_games) {
  SmallInstance inst;
  inst.design.n_teams = teams;
  inst.design.has_fcs_effect = false;
  for (int j = 0; j < teams; ++j) {
    inst.index.names.push_back("T" + std::to_string(j));
    inst.index.division.push_back(Division::FBS);
    inst.index.index_of[inst.index.names.back()] = j;
  }
  inst.index.fbs_count = teams;
  const int n_games = 1 + static_cast<int>(rng.uniform01() * max_games);
  for (int g = 0; g < n_games; ++g) {
    int h = static_cast<int>(rng.uniform01() * teams);
    int a = static_cast<int>(rng.uniform01() * (teams - 1));
    if (a >= h) ++a;
    inst.design.home.push_back(std::min(h, teams - 1));
    inst.design.away.push_back(a);
    inst.design.x.push_back(0.0);
    inst.outcomes.push_back(rng.bernoulli(0.5));
  }
  inst.design.n_games = n_games;
  inst.sigma2 =
      std::exp(std::log(0.25) + rng.uniform01() * std::log(4.0 / 0.25));
  return inst;
}

Criterion criterion3() {
  Rng rng(33001);
  ModelConfig config;
  double worst_all = 0.0, worst_small = 0.0;
  int fe_closer = 0, n_small = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const SmallInstance inst = random_small_instance(rng, 3, 4);
    ParameterVector params;
    params.variances = {inst.sigma2};
    const OracleResult truth =
        oracle_integrate(inst.design, inst.outcomes, Link::kProbit, params,
                         inst.index, 64);
    const EStepResult first =
        estep(inst.design, inst.outcomes, config, params,
              EStepOrder::kFirstOrder, inst.index, Eigen::VectorXd::Zero(3));
    const EStepResult full = estep(inst.design, inst.outcomes, config, params,
                                   EStepOrder::kFullyExponential, inst.index,
                                   Eigen::VectorXd::Zero(3));
    const double err = std::fabs(first.laplace_loglik - truth.marginal_loglik);
    worst_all = std::max(worst_all, err);
    if (inst.sigma2 <= 0.5) {
      worst_small = std::max(worst_small, err);
      ++n_small;
    }
    const double d_mode = (first.eta_tilde - truth.posterior_mean).norm();
    const double d_fe = (full.eta_tilde - truth.posterior_mean).norm();
    if (d_fe < d_mode) ++fe_closer;
  }
  const bool ok_all = worst_all < 5e-2;
  const bool ok_small = worst_small < 1e-3;
  const bool ok_fe = fe_closer * 10 >= trials * 9;
  std::ostringstream detail;
  detail.precision(4);
  detail << "LA loglik worst error " << worst_all << " (tol 5e-2, "
         << (ok_all ? "ok" : "EXCEEDED") << "); worst for sigma2<=0.5 "
         << worst_small << " over " << n_small << " instances (tol 1e-3, "
         << (ok_small ? "ok" : "EXCEEDED")
         << "); FE means strictly closer in " << fe_closer << "/" << trials
         << " (need >=90%, " << (ok_fe ? "ok" : "MISSED") << ")";
  return {ok_all && ok_small && ok_fe ? "PASS" : "FAIL", detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 4: analytic derivatives vs central differences
// ---------------------------------------------------------------------------

Criterion criterion4() {
  Rng rng(44001);
  ModelConfig config;
  double worst = 0.0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const FcsMode mode = static_cast<FcsMode>(t % 3);
    const Link link = t % 2 == 0 ? Link::kProbit : Link::kLogit;
    const int m = 4;
    TeamIndex index;
    for (int j = 0; j < m; ++j) {
      index.names.push_back("T" + std::to_string(j));
      index.division.push_back(j >= 3 ? Division::FCS : Division::FBS);
      index.index_of[index.names.back()] = j;
    }
    index.fbs_count = 3;
    index.fcs_count = 1;
    DesignMatrices design;
    design.n_teams = m;
    design.has_fcs_effect = mode != FcsMode::kConsolidated;
    std::vector<int> outcomes;
    const int n_games = 3 + static_cast<int>(rng.uniform01() * 4);
    for (int g = 0; g < n_games; ++g) {
      int h = static_cast<int>(rng.uniform01() * 3);
      int a = static_cast<int>(rng.uniform01() * (m - 1));
      if (a >= h) ++a;
      design.home.push_back(std::min(h, 2));
      design.away.push_back(std::min(a, m - 1));
      design.x.push_back(design.has_fcs_effect && design.away.back() == 3
                             ? 1.0
                             : 0.0);
      outcomes.push_back(rng.bernoulli(0.5));
    }
    design.n_games = n_games;
    ParameterVector params;
    params.has_beta = design.has_fcs_effect;
    params.beta = 1.5;
    params.variances = mode == FcsMode::kSeparate
                           ? std::vector<double>{0.4 + rng.uniform01(),
                                                 0.4 + rng.uniform01()}
                           : std::vector<double>{0.4 + rng.uniform01()};
    const PriorSpec prior = PriorSpec::for_model(config, params, index);
    Eigen::VectorXd eta(m);
    for (int j = 0; j < m; ++j) eta[j] = rng.normal() * 0.8;
    const JointDensity jd =
        joint_logdensity_h(design, outcomes, link, params, prior, eta);
    const double step = 1e-5;
    Eigen::VectorXd ep = eta, fd_g(m);
    Eigen::MatrixXd fd_h(m, m);
    for (int j = 0; j < m; ++j) {
      ep[j] = eta[j] + step;
      const JointDensity up =
          joint_logdensity_h(design, outcomes, link, params, prior, ep);
      ep[j] = eta[j] - step;
      const JointDensity dn =
          joint_logdensity_h(design, outcomes, link, params, prior, ep);
      ep[j] = eta[j];
      fd_g[j] = (up.value - dn.value) / (2 * step);
      fd_h.col(j) = (up.gradient - dn.gradient) / (2 * step);
    }
    worst = std::max(worst, (jd.gradient - fd_g).norm() /
                                std::max(1.0, jd.gradient.norm()));
    const Eigen::MatrixXd an_h(jd.hessian);
    worst = std::max(worst,
                     (an_h - fd_h).norm() / std::max(1.0, an_h.norm()));
  }
  std::ostringstream detail;
  detail.precision(3);
  detail << "worst relative error " << worst << " over " << trials
         << " instances, both links, all FCS modes (tol 1e-6)";
  return {worst < 1e-6 ? "PASS" : "FAIL", detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 5: single-game closed form
// ---------------------------------------------------------------------------

Criterion criterion5() {
  double worst = 0.0;
  for (double beta : {0.0, 1.0, 2.03}) {
    for (double s2 : {0.25, 1.0, 4.0}) {
      TeamIndex index;
      index.names = {"H", "V"};
      index.division = {Division::FBS, Division::FCS};
      index.index_of = {{"H", 0}, {"V", 1}};
      index.fbs_count = index.fcs_count = 1;
      DesignMatrices design;
      design.n_games = 1;
      design.n_teams = 2;
      design.has_fcs_effect = true;
      design.home = {0};
      design.away = {1};
      design.x = {1.0};
      ParameterVector params;
      params.has_beta = true;
      params.beta = beta;
      params.variances = {s2};
      const OracleResult r =
          oracle_integrate(design, {1}, Link::kProbit, params, index, 64);
      const double closed = norm_cdf(beta / std::sqrt(1.0 + 2.0 * s2));
      worst = std::max(worst, std::fabs(std::exp(r.marginal_loglik) - closed));
    }
  }
  std::ostringstream detail;
  detail.precision(3);
  detail << "max |marginal - Phi(beta/sqrt(1+Z Sigma Z'))| = " << worst
         << " across the beta x sigma2 grid (tol 1e-8)";
  return {worst < 1e-8 ? "PASS" : "FAIL", detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 6: bias-study regression
// ---------------------------------------------------------------------------

Criterion criterion6() {
  const auto schedule = round_robin_fragment(40, 0, 10, 0, 66001);
  std::vector<Division> divisions(40, Division::FBS);
  ParameterVector truth;
  truth.variances = {0.8};
  ModelConfig pql, la, fe;
  pql.method = Method::kPqlMl;
  la.method = Method::kLaplace;
  fe.method = Method::kFullyExponential;
  const BiasStudyResult study =
      bias_study(schedule, divisions, truth, Link::kProbit, {pql, la, fe},
                 50, 66002);
  const double m_pql = study.rows[0].mean_sigma2;
  const double m_la = study.rows[1].mean_sigma2;
  const double m_fe = study.rows[2].mean_sigma2;
  const bool ordered = m_pql <= m_la && m_la <= m_fe;
  std::ostringstream detail;
  detail.precision(4);
  detail << "true sigma2 0.8, 50 replications: mean PQL " << m_pql << " <= LA "
         << m_la << " <= FE " << m_fe << "; PQL below truth by "
         << 0.8 - m_pql << " (direction asserted, margin reported); failures "
         << study.rows[0].failures + study.rows[1].failures +
                study.rows[2].failures;
  return {ordered && m_pql < 0.8 ? "PASS" : "FAIL", detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 7: degenerate-variance behavior
// ---------------------------------------------------------------------------

Criterion criterion7() {
  std::ostringstream detail;
  bool ok = true;

  // tiny variance reproduces wins-minus-losses on a tie-free schedule
  {
    const int n = 6;
    TeamIndex index;
    DesignMatrices design;
    design.n_teams = n;
    design.has_fcs_effect = false;
    std::vector<int> outcomes;
    for (int j = 0; j < n; ++j) {
      index.names.push_back("T" + std::to_string(j));
      index.division.push_back(Division::FBS);
      index.index_of[index.names.back()] = j;
    }
    index.fbs_count = n;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        design.home.push_back(i);
        design.away.push_back(j);
        design.x.push_back(0.0);
        outcomes.push_back(1);  // lower index always wins: W-L is tie-free
      }
    }
    design.n_games = static_cast<int>(design.home.size());
    ModelConfig config;
    config.method = Method::kFixedVariance;
    config.fixed_sigma2 = 1e-4;
    const FitResult fit = fit_model(design, outcomes, index, config);
    for (int i = 0; i + 1 < n; ++i)
      ok = ok && fit.eta_hat[i] > fit.eta_hat[i + 1];
    detail << "sigma2=1e-4 reproduces the W-L order ("
           << (ok ? "ok" : "violated") << ")";
  }

  // huge variance rewards strength of schedule on an engineered league
  {
    // team A: four wins over weak teams; team B: two wins over strong teams
    // that themselves beat the weak teams. W-L puts A first; a near-flat
    // prior (sigma2=100) must produce a different ordering.
    TeamIndex index;
    DesignMatrices design;
    design.n_teams = 8;  // A=0 B=1 C=2 D=3 w=4..7
    design.has_fcs_effect = false;
    std::vector<int> outcomes;
    auto game = [&](int h, int a, int r) {
      design.home.push_back(h);
      design.away.push_back(a);
      design.x.push_back(0.0);
      outcomes.push_back(r);
    };
    for (int j = 0; j < 8; ++j) {
      index.names.push_back(std::string(1, static_cast<char>('A' + j)));
      index.division.push_back(Division::FBS);
      index.index_of[index.names.back()] = j;
    }
    index.fbs_count = 8;
    game(0, 4, 1);
    game(0, 5, 1);
    game(0, 6, 1);
    game(0, 7, 1);            // A beats the cupcakes, 4-0
    game(1, 2, 1);
    game(1, 3, 1);            // B beats the contenders, 2-0
    game(2, 4, 1);
    game(2, 5, 1);
    game(2, 6, 1);            // C: 3-1
    game(3, 5, 1);
    game(3, 6, 1);
    game(3, 7, 1);            // D: 3-1
    game(4, 5, 1);
    game(6, 7, 1);            // the weak teams split among themselves
    design.n_games = static_cast<int>(design.home.size());

    auto order_of = [&](double sigma2) {
      ModelConfig config;
      config.method = Method::kFixedVariance;
      config.fixed_sigma2 = sigma2;
      const FitResult fit = fit_model(design, outcomes, index, config);
      const RankingTable t = rank_teams(fit, index, Division::FBS, true);
      std::vector<std::string> names;
      for (const auto& row : t.rows) names.push_back(row.team);
      return names;
    };
    const auto low = order_of(1e-4);
    const auto high = order_of(100.0);
    const bool differs = low != high;
    ok = ok && differs;
    detail << "; sigma2=100 reorders the engineered league ("
           << (differs ? "ok" : "identical") << "): W-L leader '" << low[0]
           << "' vs flat-prior leader '" << high[0] << "'";
  }
  return {ok ? "PASS" : "FAIL", detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 8: CLI byte determinism
// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Criterion criterion8() {
  namespace fs = std::filesystem;
  const fs::path work = fs::temp_directory_path() / "mmrank_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string bin = RANKCLI_BIN;
  const std::string games = fixture("synthetic_season.csv");
  const std::string roster = fixture("synthetic_roster.csv");

  auto run = [&](const std::string& args, const std::string& stdout_file) {
    const std::string cmd = "'" + bin + "' " + args + " > '" +
                            (work / stdout_file).string() + "' 2>/dev/null";
    return std::system(cmd.c_str());
  };

  struct Step {
    std::string name;
    std::string args;
    std::vector<std::string> outputs;  // relative to work, stdout included
  };
  const std::string w = work.string() + "/";
  std::vector<Step> steps = {
      {"ingest",
       "ingest --games '" + games + "' --roster '" + roster +
           "' --cutoff 2000-12-31 --out " + w + "RUN.canon.csv --manifest " +
           w + "RUN.manifest.json",
       {"RUN.canon.csv", "RUN.manifest.json", "RUN.ingest.out"}},
      {"fit",
       "fit --games '" + games + "' --roster '" + roster +
           "' --method pql-ml --fcs-mode 0 --link probit --out " + w +
           "RUN.fit.json --table " + w + "RUN.table.txt --format delimited",
       {"RUN.fit.json", "RUN.table.txt", "RUN.fit.out"}},
      {"compare",
       "compare --a " + w + "r1.fit.json --b " + w + "r1.fit.json --top 10 "
           "--out " + w + "RUN.cmp.txt --plot " + w + "RUN.scatter.csv "
           "--format delimited",
       {"RUN.cmp.txt", "RUN.scatter.csv", "RUN.compare.out"}},
      {"verify", "verify --dims 3 --trials 25 --seed 42",
       {"RUN.verify.out"}},
      {"simulate",
       "simulate --fbs-teams 8 --fcs-teams 4 --rounds 3 --cross 4 --seed 5 "
           "--out-games " + w + "RUN.sim.csv --out-roster " + w +
           "RUN.simroster.csv --out-truth " + w + "RUN.truth.csv",
       {"RUN.sim.csv", "RUN.simroster.csv", "RUN.truth.csv",
        "RUN.simulate.out"}},
      {"bias-study",
       "bias-study --fbs-teams 10 --rounds 6 --reps 3 --seed 13 --jobs 2 "
           "--methods pql-ml,la --true-sigma2 0.8 --out " + w + "RUN.bias.csv",
       {"RUN.bias.csv", "RUN.bias-study.out"}},
  };

  std::ostringstream detail;
  bool ok = true;
  for (const auto& step : steps) {
    for (int pass = 1; pass <= 2; ++pass) {
      std::string args = step.args;
      const std::string tag = "r" + std::to_string(pass);
      size_t pos;
      while ((pos = args.find("RUN.")) != std::string::npos)
        args.replace(pos, 4, tag + ".");
      const std::string out_file = tag + "." + step.name + ".out";
      const int rc = run(args, out_file);
      if (rc != 0) {
        ok = false;
        detail << "[" << step.name << " exited " << rc << "]";
      }
    }
    for (const auto& output : step.outputs) {
      std::string f1 = output, f2 = output;
      f1.replace(f1.find("RUN."), 4, "r1.");
      f2.replace(f2.find("RUN."), 4, "r2.");
      const std::string b1 = slurp((work / f1).string());
      const std::string b2 = slurp((work / f2).string());
      if (b1.empty() || b1 != b2) {
        ok = false;
        detail << "[" << output << (b1.empty() ? " empty" : " differs")
               << "]";
      }
    }
  }
  if (ok)
    detail << "all six subcommands byte-identical across reruns ("
           << steps.size() << " commands, stdout and files compared)";
  fs::remove_all(work);
  return {ok ? "PASS" : "FAIL", detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const bool write_golden = argc > 1 && std::string(argv[1]) == "--write-golden";
  try {
    report(1, "published-value reproduction", criterion1());
    report(2, "synthetic fixture golden values", criterion2(write_golden));
    report(3, "oracle equivalence", criterion3());
    report(4, "gradient/Hessian finite differences", criterion4());
    report(5, "single-game closed form", criterion5());
    report(6, "bias-study regression", criterion6());
    report(7, "degenerate-variance behavior", criterion7());
    report(8, "CLI determinism", criterion8());
  } catch (const std::exception& e) {
    std::printf("acceptance suite aborted: %s\n", e.what());
    return 99;
  }
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed (skips reported above, never silent)\n");
  return 0;
}
