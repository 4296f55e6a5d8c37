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
// Game-record ingestion and construction of the multi-membership design:
// one ±1 pair per game row, an optional FCS-visit fixed-effect column, and
// a dense team index split into FBS and FCS blocks.

#ifndef MMRANK_SCHEDULE_HPP
#define MMRANK_SCHEDULE_HPP

#include <Eigen/SparseCore>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mmrank {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;
  auto operator<=>(const Date&) const = default;
  std::string str() const;  // YYYY-MM-DD
};

// Accepts YYYY-MM-DD and M/D/YYYY.
Date parse_date(const std::string& text);

enum class Division { FBS, FCS };

struct GameRecord {
  Date date;
  std::string home;
  std::string away;
  int home_win = 0;        // 1 = home win, 0 = away win
  bool fcs_visit = false;  // FCS team visiting an FBS team
  bool neutral_site = false;
};

// Column mapping for delimiter-separated game files. Either a home_win
// column or a home_score/away_score pair must be named.
struct ColumnMapping {
  char delimiter = ',';
  std::string home = "home";
  std::string away = "away";
  std::string date = "date";
  std::string home_win = "home_win";  // empty -> derive from scores
  std::string home_score;
  std::string away_score;
  std::string fcs;      // optional 0/1 indicator column
  std::string neutral;  // optional 0/1 indicator column
};

// key=value lines, '#' comments. Unknown keys rejected.
ColumnMapping parse_mapping(const std::string& text);

std::vector<GameRecord> parse_games(const std::string& file_contents,
                                    const ColumnMapping& mapping);

// "team,division" lines with division in {FBS, FCS}.
std::map<std::string, Division> parse_roster(const std::string& file_contents);

struct PreprocessOptions {
  std::optional<Date> cutoff;  // drop games dated strictly after this
};

// Drops games involving teams absent from the roster and games past the
// cutoff, recomputes the FCS-visit indicator from the roster, and collapses
// duplicate (unordered pair, date) records. Contradictory duplicates raise
// DataIntegrityError. Idempotent; output preserves input order.
std::vector<GameRecord> preprocess_raw(
    const std::vector<GameRecord>& records,
    const std::map<std::string, Division>& roster,
    const PreprocessOptions& options = {});

// Canonical game file: fixed header, rows sorted by (date, home, away).
std::string write_canonical(const std::vector<GameRecord>& records);
ColumnMapping canonical_mapping();

struct TeamIndex {
  std::vector<std::string> names;     // FBS block then FCS block
  std::vector<Division> division;     // parallel to names
  std::map<std::string, int> index_of;
  int fbs_count = 0;  // p
  int fcs_count = 0;  // q (1 in consolidated mode)

  int size() const { return static_cast<int>(names.size()); }
};

enum class FcsMode {
  kConsolidated = 0,  // all FCS opponents share one pseudo-team column
  kPooled = 1,        // separate FCS population, common variance
  kSeparate = 2,      // separate FCS population, per-division variances
};

// Sparse multi-membership design: row i has +1 in the home column and -1 in
// the away column; x[i] is the FCS-visit indicator (absent in consolidated
// mode, where no fixed effect is estimated).
struct DesignMatrices {
  int n_games = 0;
  int n_teams = 0;
  bool has_fcs_effect = false;
  std::vector<int> home;      // column index per game
  std::vector<int> away;      // column index per game
  std::vector<double> x;      // fcs-visit entries (all 0 when !has_fcs_effect)

  Eigen::SparseMatrix<double> z_matrix() const;
};

struct BuiltDesign {
  DesignMatrices design;
  TeamIndex index;
  std::vector<int> outcomes;  // aligned with design rows
  std::vector<std::string> warnings;
};

// Consolidated mode discards FCS-vs-FCS games and maps every FCS opponent to
// the single pseudo-team column p. Teams left with zero games are excluded
// (with a warning). Column order: FBS sorted by name, then FCS sorted by name.
BuiltDesign build_design(const std::vector<GameRecord>& records,
                         const std::map<std::string, Division>& roster,
                         FcsMode fcs_mode);

inline const char* kConsolidatedFcsName = "FCS";

struct SeparationReport {
  int cross_division_games = 0;
  int fbs_cross_wins = 0;
  bool separated = false;  // FCS effect inestimable
  int undefeated_teams = 0;
  int winless_teams = 0;
  std::string summary() const;
};

// The FCS fixed effect is inestimable when FBS teams won every cross-division
// game (or no such games exist). Undefeated/winless counts are informational:
// random effects tolerate perfect records.
SeparationReport detect_separation(const std::vector<GameRecord>& records);

}  // namespace mmrank

#endif  // MMRANK_SCHEDULE_HPP
