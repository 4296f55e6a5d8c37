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
// Ranking tables, cross-model rank comparisons, and byte-deterministic text
// emitters (tables and plot-ready columnar data).

#ifndef MMRANK_REPORT_HPP
#define MMRANK_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "mmrank/model.hpp"

namespace mmrank {

struct RankingRow {
  int rank = 0;  // 1-based
  std::string team;
  double rating = 0.0;
  double std_error = 0.0;
  double interval_low = 0.0;
  double interval_high = 0.0;
};

struct RankingTable {
  std::vector<RankingRow> rows;  // sorted by rating descending
  std::string model_label;
  std::vector<double> variance_estimates;
  std::vector<std::string> warnings;
};

// Rows sorted by rating descending, bit-identical ties broken by team name;
// intervals are rating +- 1.96 * std_error. FBS-only by default, matching
// the published table convention. Unconverged fits are rejected unless
// allow_unconverged is set (a warning is recorded on the table).
RankingTable rank_teams(const FitResult& fit, const TeamIndex& index,
                        std::optional<Division> division_filter = Division::FBS,
                        bool allow_unconverged = false);

struct RankDelta {
  std::string team;
  int rank_a = 0;
  int rank_b = 0;
  double rating_a = 0.0;
  double rating_b = 0.0;
};

struct RankComparison {
  std::string label_a;
  std::string label_b;
  std::vector<RankDelta> pairs;      // every team in the compared universe
  std::vector<RankDelta> displaced;  // teams whose ranks differ
  double kendall_tau = 1.0;
  int max_displacement = 0;
  int common_teams = 0;
  std::vector<std::string> warnings;
};

// Compares over the intersection of the two team universes (recorded in the
// output); when top_k is given the comparison is restricted to the top k
// rows of table a. Kendall tau counts concordant minus discordant pairs.
RankComparison compare_rankings(const RankingTable& a, const RankingTable& b,
                                std::optional<int> top_k = std::nullopt);

struct MonotonicityReport {
  struct Row {
    std::string team;
    int rank_pql = 0;
    int rank_la = 0;
    int rank_fe = 0;
    bool violation = false;  // rank_la outside [min,max](rank_pql, rank_fe)
  };
  std::vector<Row> rows;
  int violations = 0;
  std::string table() const;
};

// Empirical check that the first-order Laplace rank lies between the PQL and
// fully exponential ranks for every team (an observation, not an invariant).
MonotonicityReport monotonicity_report(const RankingTable& pql,
                                       const RankingTable& la,
                                       const RankingTable& fe);

enum class TableFormat { kDelimited, kStructuredText, kAlignedMarkdown };

// Ratings print to 3 decimals, variance estimates to 2; identical inputs
// produce identical bytes.
std::string emit_table(const RankingTable& table, TableFormat format);
std::string emit_table(const RankComparison& comparison, TableFormat format);

enum class PlotKind { kCaterpillar, kScatter, kDensity };

struct PlotRequest {
  PlotKind kind = PlotKind::kCaterpillar;
  // kDensity: overlay the normalized Mease penalty curve and its matching
  // N(0, 0.815) reference on the shared grid.
  bool include_penalty_reference = false;
};

// Caterpillar: team,rating,low,high sorted by rating. Scatter (two tables):
// team,rating_a,rating_b. Density: x plus one fitted normal column per
// variance estimate. Mismatched universes reduce to the intersection with a
// leading "# warning" comment line.
std::string emit_plot_data(const std::vector<RankingTable>& tables,
                           const PlotRequest& request);

}  // namespace mmrank

#endif  // MMRANK_REPORT_HPP
