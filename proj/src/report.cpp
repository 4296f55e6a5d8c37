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

#include "mmrank/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "mmrank/errors.hpp"
#include "mmrank/normal.hpp"

namespace mmrank {

namespace {

constexpr double kIntervalZ = 1.96;  // 95% normal quantile

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

RankingTable rank_teams(const FitResult& fit, const TeamIndex& index,
                        std::optional<Division> division_filter,
                        bool allow_unconverged) {
  if (!fit.converged && !allow_unconverged)
    throw ConvergenceError(
        "refusing to rank an unconverged fit (override to proceed)");
  RankingTable table;
  table.model_label = fit.config.label();
  table.variance_estimates = fit.params.variances;
  if (!fit.converged)
    table.warnings.push_back("ranking built from an unconverged fit");

  for (int j = 0; j < index.size(); ++j) {
    if (division_filter && index.division[j] != *division_filter) continue;
    RankingRow row;
    row.team = index.names[j];
    row.rating = fit.eta_hat[j];
    row.std_error = std::sqrt(fit.cond_var_diag[j]);
    row.interval_low = row.rating - kIntervalZ * row.std_error;
    row.interval_high = row.rating + kIntervalZ * row.std_error;
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const RankingRow& a, const RankingRow& b) {
              if (a.rating != b.rating) return a.rating > b.rating;
              return a.team < b.team;
            });
  for (size_t i = 0; i < table.rows.size(); ++i)
    table.rows[i].rank = static_cast<int>(i) + 1;
  return table;
}

RankComparison compare_rankings(const RankingTable& a, const RankingTable& b,
                                std::optional<int> top_k) {
  RankComparison cmp;
  cmp.label_a = a.model_label;
  cmp.label_b = b.model_label;

  std::map<std::string, const RankingRow*> b_rows;
  for (const auto& row : b.rows) b_rows[row.team] = &row;

  size_t missing = 0;
  for (const auto& row : a.rows) {
    if (top_k && row.rank > *top_k) continue;
    auto it = b_rows.find(row.team);
    if (it == b_rows.end()) {
      ++missing;
      continue;
    }
    RankDelta d;
    d.team = row.team;
    d.rank_a = row.rank;
    d.rank_b = it->second->rank;
    d.rating_a = row.rating;
    d.rating_b = it->second->rating;
    cmp.pairs.push_back(d);
  }
  if (missing > 0 || b_rows.size() != a.rows.size())
    cmp.warnings.push_back("team universes differ; compared the intersection");
  cmp.common_teams = static_cast<int>(cmp.pairs.size());

  long concordant = 0, discordant = 0;
  for (size_t i = 0; i < cmp.pairs.size(); ++i) {
    for (size_t j = i + 1; j < cmp.pairs.size(); ++j) {
      const int da = cmp.pairs[i].rank_a - cmp.pairs[j].rank_a;
      const int db = cmp.pairs[i].rank_b - cmp.pairs[j].rank_b;
      const long prod = static_cast<long>(da) * db;
      if (prod > 0) ++concordant;
      else if (prod < 0) ++discordant;
    }
  }
  const long denom =
      static_cast<long>(cmp.pairs.size()) * (cmp.pairs.size() - 1) / 2;
  cmp.kendall_tau =
      denom > 0 ? static_cast<double>(concordant - discordant) / denom : 1.0;

  for (const auto& d : cmp.pairs) {
    if (d.rank_a != d.rank_b) cmp.displaced.push_back(d);
    cmp.max_displacement =
        std::max(cmp.max_displacement, std::abs(d.rank_a - d.rank_b));
  }
  return cmp;
}

MonotonicityReport monotonicity_report(const RankingTable& pql,
                                       const RankingTable& la,
                                       const RankingTable& fe) {
  std::map<std::string, int> la_rank, fe_rank;
  for (const auto& r : la.rows) la_rank[r.team] = r.rank;
  for (const auto& r : fe.rows) fe_rank[r.team] = r.rank;

  MonotonicityReport rep;
  for (const auto& r : pql.rows) {
    auto li = la_rank.find(r.team);
    auto fi = fe_rank.find(r.team);
    if (li == la_rank.end() || fi == fe_rank.end()) continue;
    MonotonicityReport::Row row;
    row.team = r.team;
    row.rank_pql = r.rank;
    row.rank_la = li->second;
    row.rank_fe = fi->second;
    const int lo = std::min(row.rank_pql, row.rank_fe);
    const int hi = std::max(row.rank_pql, row.rank_fe);
    row.violation = row.rank_la < lo || row.rank_la > hi;
    if (row.violation) ++rep.violations;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::string MonotonicityReport::table() const {
  std::string out = "team,rank_pql,rank_la,rank_fe,violation\n";
  for (const auto& r : rows) {
    out += r.team + "," + std::to_string(r.rank_pql) + "," +
           std::to_string(r.rank_la) + "," + std::to_string(r.rank_fe) + "," +
           (r.violation ? "1" : "0") + "\n";
  }
  out += "# violations: " + std::to_string(violations) + "\n";
  return out;
}

std::string emit_table(const RankingTable& table, TableFormat format) {
  std::string out;
  for (const auto& w : table.warnings) out += "# warning: " + w + "\n";
  const std::string var_line = [&] {
    std::string s;
    if (table.variance_estimates.size() == 1) {
      s = "sigma2_t = " + fmt("%.2f", table.variance_estimates[0]);
    } else if (table.variance_estimates.size() == 2) {
      s = "sigma2_fbs = " + fmt("%.2f", table.variance_estimates[0]) +
          ", sigma2_fcs = " + fmt("%.2f", table.variance_estimates[1]);
    }
    return s;
  }();

  if (format == TableFormat::kDelimited) {
    out += "rank,team,rating,std_error,interval_low,interval_high\n";
    for (const auto& r : table.rows) {
      out += std::to_string(r.rank) + "," + r.team + "," +
             fmt("%.3f", r.rating) + "," + fmt("%.3f", r.std_error) + "," +
             fmt("%.3f", r.interval_low) + "," + fmt("%.3f", r.interval_high) +
             "\n";
    }
    out += "# model: " + table.model_label;
    if (!var_line.empty()) out += "; " + var_line;
    out += "\n";
  } else if (format == TableFormat::kStructuredText) {
    out += "model: " + table.model_label + "\n";
    if (!var_line.empty()) out += var_line + "\n";
    for (const auto& r : table.rows) {
      out += "- rank: " + std::to_string(r.rank) + "\n";
      out += "  team: " + r.team + "\n";
      out += "  rating: " + fmt("%.3f", r.rating) + "\n";
      out += "  std_error: " + fmt("%.3f", r.std_error) + "\n";
      out += "  interval: [" + fmt("%.3f", r.interval_low) + ", " +
             fmt("%.3f", r.interval_high) + "]\n";
    }
  } else {
    size_t team_w = 4;
    for (const auto& r : table.rows) team_w = std::max(team_w, r.team.size());
    out += "| rank | " + pad("team", team_w) +
           " | rating | std_err | 95% interval     |\n";
    out += "|-----:|-" + std::string(team_w, '-') +
           "-|-------:|--------:|------------------|\n";
    for (const auto& r : table.rows) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "| %4d | %s | %6.3f | %7.3f | [%6.3f, %6.3f] |\n", r.rank,
                    pad(r.team, team_w).c_str(), r.rating, r.std_error,
                    r.interval_low, r.interval_high);
      out += buf;
    }
    out += "\nmodel: " + table.model_label;
    if (!var_line.empty()) out += " (" + var_line + ")";
    out += "\n";
  }
  return out;
}

std::string emit_table(const RankComparison& cmp, TableFormat format) {
  std::string out;
  for (const auto& w : cmp.warnings) out += "# warning: " + w + "\n";
  char stats[160];
  std::snprintf(stats, sizeof(stats),
                "kendall_tau = %.4f, common teams = %d, displaced = %d, "
                "max displacement = %d",
                cmp.kendall_tau, cmp.common_teams,
                static_cast<int>(cmp.displaced.size()), cmp.max_displacement);

  if (format == TableFormat::kDelimited) {
    out += "team,rank_" + cmp.label_a + ",rank_" + cmp.label_b + ",rating_" +
           cmp.label_a + ",rating_" + cmp.label_b + ",moved\n";
    for (const auto& d : cmp.pairs) {
      out += d.team + "," + std::to_string(d.rank_a) + "," +
             std::to_string(d.rank_b) + "," + fmt("%.3f", d.rating_a) + "," +
             fmt("%.3f", d.rating_b) + "," +
             (d.rank_a != d.rank_b ? "1" : "0") + "\n";
    }
    out += std::string("# ") + stats + "\n";
  } else if (format == TableFormat::kStructuredText) {
    out += "comparison: " + cmp.label_a + " vs " + cmp.label_b + "\n";
    out += std::string(stats) + "\n";
    for (const auto& d : cmp.displaced) {
      out += "- " + d.team + ": " + std::to_string(d.rank_a) + " -> " +
             std::to_string(d.rank_b) + " (rating " + fmt("%.3f", d.rating_a) +
             " -> " + fmt("%.3f", d.rating_b) + ")\n";
    }
  } else {
    size_t team_w = 4;
    for (const auto& d : cmp.pairs) team_w = std::max(team_w, d.team.size());
    out += "| " + pad("team", team_w) + " | " + pad(cmp.label_a, 10) + " | " +
           pad(cmp.label_b, 10) + " |\n";
    out += "|-" + std::string(team_w, '-') + "-|-----------:|-----------:|\n";
    for (const auto& d : cmp.pairs) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "| %s | %10d | %10d |\n",
                    pad(d.team, team_w).c_str(), d.rank_a, d.rank_b);
      out += buf;
    }
    out += std::string("\n") + stats + "\n";
  }
  return out;
}

std::string emit_plot_data(const std::vector<RankingTable>& tables,
                           const PlotRequest& request) {
  std::string out;
  if (request.kind == PlotKind::kCaterpillar) {
    if (tables.size() != 1)
      throw UsageError("caterpillar plots take exactly one table");
    out += "team,rating,low,high\n";
    for (const auto& r : tables[0].rows)
      out += r.team + "," + fmt("%.3f", r.rating) + "," +
             fmt("%.3f", r.interval_low) + "," + fmt("%.3f", r.interval_high) +
             "\n";
    return out;
  }

  if (request.kind == PlotKind::kScatter) {
    if (tables.size() != 2)
      throw UsageError("scatter plots take exactly two tables");
    std::map<std::string, double> b_rating;
    for (const auto& r : tables[1].rows) b_rating[r.team] = r.rating;
    bool mismatch = tables[0].rows.size() != tables[1].rows.size();
    std::string body;
    for (const auto& r : tables[0].rows) {
      auto it = b_rating.find(r.team);
      if (it == b_rating.end()) {
        mismatch = true;
        continue;
      }
      body += r.team + "," + fmt("%.3f", r.rating) + "," +
              fmt("%.3f", it->second) + "\n";
    }
    if (mismatch)
      out += "# warning: team universes differ; plotted the intersection\n";
    out += "team,rating_" + tables[0].model_label + ",rating_" +
           tables[1].model_label + "\n";
    out += body;
    return out;
  }

  // Density curves on a fixed grid.
  const double x_min = -4.0, x_max = 4.0, step = 0.02;
  out += "x";
  for (const auto& t : tables) {
    if (t.variance_estimates.size() == 1) {
      out += ",normal_" + t.model_label;
    } else {
      out += ",normal_fbs_" + t.model_label + ",normal_fcs_" + t.model_label;
    }
  }
  if (request.include_penalty_reference)
    out += ",mease_penalty,normal_0.815";
  out += "\n";
  const int n_steps = static_cast<int>((x_max - x_min) / step + 0.5);
  for (int k = 0; k <= n_steps; ++k) {
    const double x = x_min + k * step;
    out += fmt("%.2f", x);
    for (const auto& t : tables) {
      for (double v : t.variance_estimates) {
        const double sd = std::sqrt(v);
        out += "," + fmt("%.6f", norm_pdf(x / sd) / sd);
      }
    }
    if (request.include_penalty_reference) {
      const double ref_sd = std::sqrt(0.815);
      out += "," + fmt("%.6f", mease_penalty_density(x));
      out += "," + fmt("%.6f", norm_pdf(x / ref_sd) / ref_sd);
    }
    out += "\n";
  }
  return out;
}

}  // namespace mmrank
