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
// rankcli: ingest game files, fit ranking models across the link x FCS-mode
// x method grid, compare fitted rankings, and run the oracle verification,
// simulation, and bias-study harnesses. Exit codes: 0 success, 2 usage,
// 3 data integrity, 4 convergence failure, 5 verification failure.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmrank/em.hpp"
#include "mmrank/errors.hpp"
#include "mmrank/normal.hpp"
#include "mmrank/quadrature.hpp"
#include "mmrank/report.hpp"
#include "mmrank/result_io.hpp"

using namespace mmrank;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;
constexpr int kExitVerification = 5;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RANKCLI_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw UsageError("RANKCLI_SEED is not an unsigned integer");
    }
  }
  return 20120903;
}

Link parse_link(const std::string& s) {
  if (s == "probit") return Link::kProbit;
  if (s == "logit") return Link::kLogit;
  throw UsageError("unknown link '" + s + "' (probit|logit)");
}

FcsMode parse_fcs_mode(int m) {
  if (m < 0 || m > 2) throw UsageError("--fcs-mode must be 0, 1, or 2");
  return static_cast<FcsMode>(m);
}

void parse_method(const std::string& s, ModelConfig& config) {
  if (s == "pql-ml") config.method = Method::kPqlMl;
  else if (s == "pql-reml") config.method = Method::kPqlReml;
  else if (s == "la") config.method = Method::kLaplace;
  else if (s == "fe") config.method = Method::kFullyExponential;
  else if (s == "mease") config.method = Method::kMease;
  else if (s.rfind("fixed:", 0) == 0) {
    config.method = Method::kFixedVariance;
    try {
      config.fixed_sigma2 = std::stod(s.substr(6));
    } catch (...) {
      throw UsageError("bad fixed variance in '" + s + "'");
    }
  } else {
    throw UsageError("unknown method '" + s +
                     "' (pql-ml|pql-reml|la|fe|mease|fixed:<sigma2>)");
  }
}

TableFormat parse_format(const std::string& s) {
  if (s == "delimited") return TableFormat::kDelimited;
  if (s == "text") return TableFormat::kStructuredText;
  if (s == "markdown") return TableFormat::kAlignedMarkdown;
  throw UsageError("unknown table format '" + s + "'");
}

ManifestInput manifest_input(const std::string& path) {
  return {path, content_digest(read_file(path))};
}

struct LoadedSeason {
  std::vector<GameRecord> records;
  std::map<std::string, Division> roster;
};

LoadedSeason load_season(const std::vector<std::string>& game_files,
                         const std::string& roster_file,
                         const std::string& mapping_file,
                         const std::optional<Date>& cutoff) {
  LoadedSeason season;
  season.roster = parse_roster(read_file(roster_file));
  const ColumnMapping mapping = mapping_file.empty()
                                    ? canonical_mapping()
                                    : parse_mapping(read_file(mapping_file));
  std::vector<GameRecord> raw;
  for (const auto& path : game_files) {
    auto games = parse_games(read_file(path), mapping);
    raw.insert(raw.end(), games.begin(), games.end());
  }
  PreprocessOptions opt;
  opt.cutoff = cutoff;
  season.records = preprocess_raw(raw, season.roster, opt);
  return season;
}

// date layout for synthetic schedules: one calendar day per round
Date synthetic_date(int round) {
  return Date{2000, 1 + round / 28, 1 + round % 28};
}

int run_ingest(const std::vector<std::string>& game_files,
               const std::string& roster_file, const std::string& mapping_file,
               const std::string& cutoff_str, const std::string& out_path,
               const std::string& manifest_path) {
  const std::optional<Date> cutoff = parse_date(cutoff_str);
  const LoadedSeason season =
      load_season(game_files, roster_file, mapping_file, cutoff);
  write_file(out_path, write_canonical(season.records));

  RunManifest manifest;
  manifest.command = "ingest";
  for (const auto& f : game_files) manifest.inputs.push_back(manifest_input(f));
  manifest.inputs.push_back(manifest_input(roster_file));
  if (!mapping_file.empty())
    manifest.inputs.push_back(manifest_input(mapping_file));
  manifest.cutoff = cutoff_str;
  if (!manifest_path.empty()) write_file(manifest_path, manifest.json() + "\n");

  const SeparationReport sep = detect_separation(season.records);
  std::cout << "ingested " << season.records.size() << " games\n"
            << sep.summary() << "\n";
  return 0;
}

int run_fit(const std::string& games_file, const std::string& roster_file,
            const std::string& mapping_file, const std::string& cutoff_str,
            const std::string& link_str, int fcs_mode_int,
            const std::string& method_str, const std::string& out_path,
            const std::string& table_path, const std::string& format_str,
            bool allow_unconverged, bool full_cov, bool emit_timing) {
  const auto t_start = std::chrono::steady_clock::now();
  ModelConfig config;
  config.link = parse_link(link_str);
  config.fcs_mode = parse_fcs_mode(fcs_mode_int);
  parse_method(method_str, config);
  config.validate();  // usage errors before any data work
  const TableFormat format = parse_format(format_str);

  std::optional<Date> cutoff;
  if (!cutoff_str.empty()) cutoff = parse_date(cutoff_str);
  const LoadedSeason season =
      load_season({games_file}, roster_file, mapping_file, cutoff);

  const SeparationReport sep = detect_separation(season.records);
  if (config.has_fcs_effect() && sep.separated)
    throw DataIntegrityError(
        "quasi-complete separation: " + sep.summary() +
        "; refit with --fcs-mode 0 or drop the cross-division games");

  const BuiltDesign built =
      build_design(season.records, season.roster, config.fcs_mode);
  FitResult fit = fit_model(built.design, built.outcomes, built.index, config);
  for (const auto& w : built.warnings) fit.warnings.push_back(w);
  if (!fit.converged && !allow_unconverged) {
    std::cerr << "fit did not converge";
    for (const auto& w : fit.warnings) std::cerr << "; " << w;
    std::cerr << "\n";
    return kExitConvergence;
  }
  if (!full_cov) fit.cond_cov.reset();

  RunManifest manifest;
  manifest.command = "fit";
  manifest.inputs.push_back(manifest_input(games_file));
  manifest.inputs.push_back(manifest_input(roster_file));
  if (!mapping_file.empty())
    manifest.inputs.push_back(manifest_input(mapping_file));
  if (!cutoff_str.empty()) manifest.cutoff = cutoff_str;
  manifest.model_labels.push_back(config.label());
  if (emit_timing) {
    // opt-in: wall-clock time is the one nondeterministic manifest byte
    manifest.timing_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
  }
  if (!out_path.empty())
    write_file(out_path, write_result(fit, built.index, manifest));

  const RankingTable table =
      rank_teams(fit, built.index, Division::FBS, allow_unconverged);
  const std::string text = emit_table(table, format);
  std::cout << text;
  if (!table_path.empty()) write_file(table_path, text);
  return 0;
}

int run_compare(const std::string& a_path, const std::string& b_path,
                std::optional<int> top_k, const std::string& out_path,
                const std::string& plot_path, const std::string& format_str,
                bool allow_unconverged) {
  const TableFormat format = parse_format(format_str);
  const StoredResult a = read_result(read_file(a_path));
  const StoredResult b = read_result(read_file(b_path));
  const RankingTable ta =
      rank_teams(a.fit, a.index, Division::FBS, allow_unconverged);
  const RankingTable tb =
      rank_teams(b.fit, b.index, Division::FBS, allow_unconverged);
  const RankComparison cmp = compare_rankings(ta, tb, top_k);
  const std::string text = emit_table(cmp, format);
  std::cout << text;
  if (!out_path.empty()) write_file(out_path, text);
  if (!plot_path.empty())
    write_file(plot_path, emit_plot_data({ta, tb}, {PlotKind::kScatter}));
  return 0;
}

// Verification harness over the quadrature oracle. Prints one line per
// check; returns nonzero when a tolerance fails.
int run_verify(int dims, int trials, std::uint64_t seed) {
  if (dims < 2) throw UsageError("--dims must be at least 2");
  if (dims > kOracleMaxDims)
    throw UsageError("--dims exceeds the oracle bound of " +
                     std::to_string(kOracleMaxDims));
  Rng rng(seed);
  bool ok = true;
  char line[256];

  // 1. single-game closed form: quadrature equals Phi(beta/sqrt(1+2 sigma2))
  double worst_closed = 0.0;
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
      const OracleResult r = oracle_integrate(design, {1}, Link::kProbit,
                                              params, index, 40);
      const double closed = norm_cdf(beta / std::sqrt(1.0 + 2.0 * s2));
      worst_closed = std::max(
          worst_closed, std::fabs(std::exp(r.marginal_loglik) - closed));
    }
  }
  std::snprintf(line, sizeof(line),
                "closed-form single game: max |quad - analytic| = %.2e "
                "(tol 1e-8) %s",
                worst_closed, worst_closed < 1e-8 ? "PASS" : "FAIL");
  std::cout << line << "\n";
  ok = ok && worst_closed < 1e-8;

  // 2. quadrature self-consistency under node doubling
  // 3. Laplace loglik error (diagnostic) and fully exponential means
  double worst_self = 0.0, worst_la = 0.0;
  int fe_closer = 0;
  ModelConfig config;
  for (int t = 0; t < trials; ++t) {
    TeamIndex index;
    DesignMatrices design;
    design.n_teams = dims;
    design.has_fcs_effect = false;
    for (int j = 0; j < dims; ++j) {
      index.names.push_back("T" + std::to_string(j));
      index.division.push_back(Division::FBS);
      index.index_of[index.names.back()] = j;
    }
    index.fbs_count = dims;
    const int n_games = 1 + static_cast<int>(rng.uniform01() * 4);
    std::vector<int> outcomes;
    for (int g = 0; g < n_games; ++g) {
      int h = static_cast<int>(rng.uniform01() * dims);
      int a = static_cast<int>(rng.uniform01() * (dims - 1));
      if (a >= h) ++a;
      design.home.push_back(std::min(h, dims - 1));
      design.away.push_back(a);
      design.x.push_back(0.0);
      outcomes.push_back(rng.bernoulli(0.5));
    }
    design.n_games = n_games;
    ParameterVector params;
    params.variances = {std::exp(std::log(0.25) +
                                 rng.uniform01() * std::log(16.0))};

    // 64 nodes/dim is the accepted resolution for variances up to 4;
    // doubling it must leave the marginal loglik unchanged to 1e-8.
    const OracleResult coarse = oracle_integrate(design, outcomes,
                                                 Link::kProbit, params, index,
                                                 64);
    const OracleResult fine = oracle_integrate(design, outcomes,
                                               Link::kProbit, params, index,
                                               128);
    worst_self = std::max(worst_self, std::fabs(coarse.marginal_loglik -
                                                fine.marginal_loglik));

    const EStepResult first =
        estep(design, outcomes, config, params, EStepOrder::kFirstOrder,
              index, Eigen::VectorXd::Zero(dims));
    const EStepResult full =
        estep(design, outcomes, config, params,
              EStepOrder::kFullyExponential, index,
              Eigen::VectorXd::Zero(dims));
    worst_la = std::max(worst_la, std::fabs(first.laplace_loglik -
                                            fine.marginal_loglik));
    const double err_mode = (first.eta_tilde - fine.posterior_mean).norm();
    const double err_fe = (full.eta_tilde - fine.posterior_mean).norm();
    if (err_fe < err_mode) ++fe_closer;
  }
  std::snprintf(line, sizeof(line),
                "quadrature self-consistency: max drift %.2e (tol 1e-8) %s",
                worst_self, worst_self < 1e-8 ? "PASS" : "FAIL");
  std::cout << line << "\n";
  ok = ok && worst_self < 1e-8;
  std::snprintf(line, sizeof(line),
                "first-order Laplace loglik: worst |LA - truth| = %.3e "
                "(diagnostic; tol 0.25) %s",
                worst_la, worst_la < 0.25 ? "PASS" : "FAIL");
  std::cout << line << "\n";
  ok = ok && worst_la < 0.25;
  std::snprintf(line, sizeof(line),
                "fully exponential means closer to truth: %d/%d (need 90%%) %s",
                fe_closer, trials,
                fe_closer * 10 >= trials * 9 ? "PASS" : "FAIL");
  std::cout << line << "\n";
  ok = ok && fe_closer * 10 >= trials * 9;

  // 4. analytic derivatives against central differences
  double worst_grad = 0.0, worst_hess = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int m = dims;
    TeamIndex index;
    for (int j = 0; j < m; ++j) {
      index.names.push_back("T" + std::to_string(j));
      index.division.push_back(j == m - 1 ? Division::FCS : Division::FBS);
      index.index_of[index.names.back()] = j;
    }
    index.fbs_count = m - 1;
    index.fcs_count = 1;
    DesignMatrices design;
    design.n_teams = m;
    design.has_fcs_effect = t % 3 != 0;
    std::vector<int> outcomes;
    const int n_games = 2 + static_cast<int>(rng.uniform01() * 4);
    for (int g = 0; g < n_games; ++g) {
      int h = static_cast<int>(rng.uniform01() * (m - 1));
      int a = static_cast<int>(rng.uniform01() * (m - 1));
      if (a >= h) ++a;
      design.home.push_back(h);
      design.away.push_back(std::min(a, m - 1));
      design.x.push_back(design.has_fcs_effect &&
                                 design.away.back() == m - 1
                             ? 1.0
                             : 0.0);
      outcomes.push_back(rng.bernoulli(0.5));
    }
    design.n_games = n_games;
    ParameterVector params;
    params.has_beta = design.has_fcs_effect;
    params.beta = 1.0;
    params.variances = t % 2 == 0
                           ? std::vector<double>{0.4 + rng.uniform01()}
                           : std::vector<double>{0.4 + rng.uniform01(),
                                                 0.4 + rng.uniform01()};
    const Link link = t % 2 == 0 ? Link::kProbit : Link::kLogit;
    const PriorSpec prior = PriorSpec::for_model(config, params, index);
    Eigen::VectorXd eta(m);
    for (int j = 0; j < m; ++j) eta[j] = rng.normal() * 0.8;
    const JointDensity jd =
        joint_logdensity_h(design, outcomes, link, params, prior, eta);
    const double step = 1e-5;
    Eigen::VectorXd ep = eta;
    Eigen::VectorXd fd_g(m);
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
    worst_grad = std::max(worst_grad, (jd.gradient - fd_g).norm() /
                                          std::max(1.0, jd.gradient.norm()));
    const Eigen::MatrixXd an_h(jd.hessian);
    worst_hess = std::max(worst_hess,
                          (an_h - fd_h).norm() / std::max(1.0, an_h.norm()));
  }
  std::snprintf(line, sizeof(line),
                "gradient vs central differences: worst rel err %.2e "
                "(tol 1e-6) %s",
                worst_grad, worst_grad < 1e-6 ? "PASS" : "FAIL");
  std::cout << line << "\n";
  ok = ok && worst_grad < 1e-6;
  std::snprintf(line, sizeof(line),
                "hessian vs central differences: worst rel err %.2e "
                "(tol 1e-6) %s",
                worst_hess, worst_hess < 1e-6 ? "PASS" : "FAIL");
  std::cout << line << "\n";
  ok = ok && worst_hess < 1e-6;

  std::cout << (ok ? "verification PASSED" : "verification FAILED") << "\n";
  return ok ? 0 : kExitVerification;
}

int run_simulate(int fbs_teams, int fcs_teams, int rounds, int cross,
                 double sigma2, double sigma2_fcs, double beta,
                 const std::string& link_str, std::uint64_t seed,
                 const std::string& out_games, const std::string& out_roster,
                 const std::string& out_truth) {
  const Link link = parse_link(link_str);
  const auto schedule =
      round_robin_fragment(fbs_teams, fcs_teams, rounds, cross, seed);
  std::vector<Division> divisions;
  for (int j = 0; j < fbs_teams + fcs_teams; ++j)
    divisions.push_back(j < fbs_teams ? Division::FBS : Division::FCS);
  ParameterVector truth;
  truth.variances = sigma2_fcs > 0.0
                        ? std::vector<double>{sigma2, sigma2_fcs}
                        : std::vector<double>{sigma2};
  truth.has_beta = cross > 0;
  truth.beta = beta;
  const SyntheticSeason season =
      simulate_season(schedule, truth, divisions, link, seed);

  auto team_name = [&](int j) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03d",
                  j < fbs_teams ? "FBS Team " : "FCS Team ", j);
    return std::string(buf);
  };

  // Round index recovers a date; division rounds first, cross games appended.
  std::vector<GameRecord> records;
  const int per_round =
      std::max(1, fbs_teams / 2 + (fcs_teams >= 2 ? fcs_teams / 2 : 0));
  int cross_seen = 0;
  for (size_t i = 0; i < schedule.size(); ++i) {
    GameRecord g;
    const int round = schedule[i].fcs_visit
                          ? rounds + (cross_seen++ % 28)
                          : static_cast<int>(i) / per_round;
    g.date = synthetic_date(round);
    g.home = team_name(schedule[i].home);
    g.away = team_name(schedule[i].away);
    g.home_win = season.outcomes[i];
    g.fcs_visit = schedule[i].fcs_visit;
    records.push_back(g);
  }
  write_file(out_games, write_canonical(records));

  std::string roster = "team,division\n";
  for (int j = 0; j < fbs_teams + fcs_teams; ++j)
    roster += team_name(j) + (j < fbs_teams ? ",FBS\n" : ",FCS\n");
  write_file(out_roster, roster);

  if (!out_truth.empty()) {
    std::string truth_csv = "team,true_effect\n";
    char buf[64];
    for (int j = 0; j < fbs_teams + fcs_teams; ++j) {
      std::snprintf(buf, sizeof(buf), ",%.6f\n", season.true_eta[j]);
      truth_csv += team_name(j) + buf;
    }
    write_file(out_truth, truth_csv);
  }
  std::cout << "simulated " << schedule.size() << " games for "
            << fbs_teams + fcs_teams << " teams (seed " << seed << ")\n";
  return 0;
}

int run_bias_study(int fbs_teams, int rounds, double true_sigma2,
                   const std::string& methods_csv, int reps,
                   std::uint64_t seed, int jobs, const std::string& out_path) {
  std::vector<ModelConfig> methods;
  std::string token;
  std::istringstream ss(methods_csv);
  while (std::getline(ss, token, ',')) {
    ModelConfig config;
    parse_method(token, config);
    config.validate();
    methods.push_back(config);
  }
  if (methods.empty()) throw UsageError("no methods given");

  const auto schedule = round_robin_fragment(fbs_teams, 0, rounds, 0, seed);
  std::vector<Division> divisions(fbs_teams, Division::FBS);
  ParameterVector truth;
  truth.variances = {true_sigma2};
  const BiasStudyResult study = bias_study(
      schedule, divisions, truth, Link::kProbit, methods, reps, seed, jobs);
  const std::string table = study.table();
  std::cout << table;
  if (!out_path.empty()) write_file(out_path, table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paired-comparison ranking via multi-membership mixed models"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest",
                                    "parse, clean, and canonicalize game files");
  std::vector<std::string> in_games;
  std::string in_roster, in_mapping, in_cutoff, in_out, in_manifest;
  ingest->add_option("--games", in_games, "raw game files")->required();
  ingest->add_option("--roster", in_roster, "team,division file")->required();
  ingest->add_option("--mapping", in_mapping, "column mapping (key=value)");
  ingest->add_option("--cutoff", in_cutoff, "drop games after this date")
      ->required();
  ingest->add_option("--out", in_out, "canonical game file")->required();
  ingest->add_option("--manifest", in_manifest, "write a run manifest here");

  // fit
  auto* fit = app.add_subcommand("fit", "fit one model of the grid");
  std::string f_games, f_roster, f_mapping, f_cutoff, f_link = "probit";
  std::string f_method, f_out, f_table, f_format = "markdown";
  int f_mode = 0;
  bool f_allow = false, f_fullcov = false;
  fit->add_option("--games", f_games, "canonical game file")->required();
  fit->add_option("--roster", f_roster, "team,division file")->required();
  fit->add_option("--mapping", f_mapping, "column mapping for raw files");
  fit->add_option("--cutoff", f_cutoff, "drop games after this date");
  fit->add_option("--link", f_link, "probit|logit");
  fit->add_option("--fcs-mode", f_mode,
                  "0 consolidated, 1 pooled variance, 2 separate variances");
  fit->add_option("--method", f_method,
                  "pql-ml|pql-reml|la|fe|mease|fixed:<sigma2>")
      ->required();
  fit->add_option("--out", f_out, "result file (JSON)");
  fit->add_option("--table", f_table, "also write the ranking table here");
  fit->add_option("--format", f_format, "delimited|text|markdown");
  fit->add_flag("--allow-unconverged", f_allow,
                "report results from an unconverged fit");
  fit->add_flag("--full-cov", f_fullcov,
                "keep the full conditional covariance in memory");
  bool f_timing = false;
  fit->add_flag("--emit-timing", f_timing,
                "record wall-clock time in the manifest (breaks "
                "byte-reproducibility of the result file)");

  // compare
  auto* compare = app.add_subcommand("compare", "compare two result files");
  std::string c_a, c_b, c_out, c_plot, c_format = "text";
  int c_top = 0;
  bool c_allow = false;
  compare->add_option("--a", c_a, "first result file")->required();
  compare->add_option("--b", c_b, "second result file")->required();
  compare->add_option("--top", c_top, "restrict to the top K of table a");
  compare->add_option("--out", c_out, "write the comparison here");
  compare->add_option("--plot", c_plot, "write scatter plot data here");
  compare->add_option("--format", c_format, "delimited|text|markdown");
  compare->add_flag("--allow-unconverged", c_allow,
                    "compare unconverged fits");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "oracle checks of the Laplace machinery (exit 5 on failure)");
  int v_dims = 3, v_trials = 50;
  std::uint64_t v_seed = 0;
  bool v_seed_set = false;
  verify->add_option("--dims", v_dims, "teams per instance (max 5)");
  verify->add_option("--trials", v_trials, "random instances per suite");
  verify->add_option("--seed", v_seed, "RNG seed")
      ->each([&v_seed_set](const std::string&) { v_seed_set = true; });

  // simulate
  auto* simulate =
      app.add_subcommand("simulate", "write a synthetic season to disk");
  int s_fbs = 120, s_fcs = 118, s_rounds = 11, s_cross = 85;
  double s_sigma2 = 0.8, s_sigma2_fcs = 0.0, s_beta = 2.0;
  std::string s_link = "probit", s_games, s_roster, s_truth;
  std::uint64_t s_seed = 0;
  bool s_seed_set = false;
  simulate->add_option("--fbs-teams", s_fbs, "FBS team count");
  simulate->add_option("--fcs-teams", s_fcs, "FCS team count");
  simulate->add_option("--rounds", s_rounds, "intra-division rounds");
  simulate->add_option("--cross", s_cross, "FCS visits to FBS hosts");
  simulate->add_option("--sigma2", s_sigma2, "team-effect variance");
  simulate->add_option("--sigma2-fcs", s_sigma2_fcs,
                       "separate FCS variance (0 = pooled)");
  simulate->add_option("--beta", s_beta, "FCS-visit effect");
  simulate->add_option("--link", s_link, "probit|logit");
  simulate->add_option("--seed", s_seed, "RNG seed")
      ->each([&s_seed_set](const std::string&) { s_seed_set = true; });
  simulate->add_option("--out-games", s_games, "games file")->required();
  simulate->add_option("--out-roster", s_roster, "roster file")->required();
  simulate->add_option("--out-truth", s_truth, "true effects file");

  // bias-study
  auto* bias = app.add_subcommand(
      "bias-study", "simulate-and-refit comparison of estimation methods");
  int b_fbs = 40, b_rounds = 10, b_reps = 50, b_jobs = 1;
  double b_sigma2 = 0.8;
  std::string b_methods = "pql-ml,la,fe", b_out;
  std::uint64_t b_seed = 0;
  bool b_seed_set = false;
  bias->add_option("--fbs-teams", b_fbs, "teams in the synthetic league");
  bias->add_option("--rounds", b_rounds, "games per team");
  bias->add_option("--true-sigma2", b_sigma2, "simulation truth");
  bias->add_option("--methods", b_methods, "comma-separated method list");
  bias->add_option("--reps", b_reps, "replications");
  bias->add_option("--seed", b_seed, "RNG seed")
      ->each([&b_seed_set](const std::string&) { b_seed_set = true; });
  bias->add_option("--jobs", b_jobs, "parallel replications");
  bias->add_option("--out", b_out, "write the summary table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest)
      return run_ingest(in_games, in_roster, in_mapping, in_cutoff, in_out,
                        in_manifest);
    if (*fit)
      return run_fit(f_games, f_roster, f_mapping, f_cutoff, f_link, f_mode,
                     f_method, f_out, f_table, f_format, f_allow, f_fullcov,
                     f_timing);
    if (*compare)
      return run_compare(c_a, c_b,
                         c_top > 0 ? std::optional<int>(c_top) : std::nullopt,
                         c_out, c_plot, c_format, c_allow);
    if (*verify)
      return run_verify(v_dims, v_trials,
                        v_seed_set ? v_seed : default_seed());
    if (*simulate)
      return run_simulate(s_fbs, s_fcs, s_rounds, s_cross, s_sigma2,
                          s_sigma2_fcs, s_beta, s_link,
                          s_seed_set ? s_seed : default_seed(), s_games,
                          s_roster, s_truth);
    if (*bias)
      return run_bias_study(b_fbs, b_rounds, b_sigma2, b_methods, b_reps,
                            b_seed_set ? b_seed : default_seed(), b_jobs,
                            b_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataIntegrityError& e) {
    std::cerr << "data integrity error: " << e.what() << "\n";
    return kExitData;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const VerificationError& e) {
    std::cerr << "verification error: " << e.what() << "\n";
    return kExitVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
