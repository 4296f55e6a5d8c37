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

#include "mmrank/schedule.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mmrank/errors.hpp"

namespace mmrank {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(trim(field));
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::string line;
  std::istringstream ss(text);
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  size_t pos = 0;
  try {
    out = std::stoi(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

int column_of(const std::vector<std::string>& header, const std::string& name,
              bool required) {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  if (required)
    throw ParseError("missing required column '" + name + "' in header");
  return -1;
}

bool valid_date(const Date& d) {
  return d.year >= 1800 && d.year <= 3000 && d.month >= 1 && d.month <= 12 &&
         d.day >= 1 && d.day <= 31;
}

}  // namespace

std::string Date::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

Date parse_date(const std::string& text) {
  Date d;
  int a, b, c;
  if (std::sscanf(text.c_str(), "%d-%d-%d", &a, &b, &c) == 3) {
    d = {a, b, c};
  } else if (std::sscanf(text.c_str(), "%d/%d/%d", &a, &b, &c) == 3) {
    d = {c, a, b};  // M/D/YYYY
  } else {
    throw ParseError("unparseable date '" + text + "'");
  }
  if (!valid_date(d)) throw ParseError("invalid date '" + text + "'");
  return d;
}

ColumnMapping parse_mapping(const std::string& text) {
  ColumnMapping m;
  int lineno = 0;
  for (const auto& raw : split_lines(text)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("mapping line is not key=value", lineno);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "delimiter") {
      if (val == "comma" || val == ",") m.delimiter = ',';
      else if (val == "tab" || val == "\\t") m.delimiter = '\t';
      else if (val == "semicolon" || val == ";") m.delimiter = ';';
      else if (val.size() == 1) m.delimiter = val[0];
      else throw ParseError("unsupported delimiter '" + val + "'", lineno);
    } else if (key == "home") m.home = val;
    else if (key == "away") m.away = val;
    else if (key == "date") m.date = val;
    else if (key == "home_win") m.home_win = val;
    else if (key == "home_score") m.home_score = val;
    else if (key == "away_score") m.away_score = val;
    else if (key == "fcs") m.fcs = val;
    else if (key == "neutral") m.neutral = val;
    else throw ParseError("unknown mapping key '" + key + "'", lineno);
  }
  if (m.home_win.empty() && (m.home_score.empty() || m.away_score.empty()))
    throw ParseError("mapping must name home_win or home_score+away_score");
  return m;
}

std::vector<GameRecord> parse_games(const std::string& file_contents,
                                    const ColumnMapping& mapping) {
  auto lines = split_lines(file_contents);
  if (lines.empty()) throw ParseError("empty game file (no header)");
  auto header = split(lines[0], mapping.delimiter);

  const bool scores_mapped =
      !mapping.home_score.empty() && !mapping.away_score.empty();
  const int c_home = column_of(header, mapping.home, true);
  const int c_away = column_of(header, mapping.away, true);
  const int c_date = column_of(header, mapping.date, true);
  // The outcome column is required only when no score pair is mapped.
  const int c_win = mapping.home_win.empty()
                        ? -1
                        : column_of(header, mapping.home_win, !scores_mapped);
  const int c_hs = scores_mapped
                       ? column_of(header, mapping.home_score, c_win < 0)
                       : -1;
  const int c_as = scores_mapped
                       ? column_of(header, mapping.away_score, c_win < 0)
                       : -1;
  const int c_fcs =
      mapping.fcs.empty() ? -1 : column_of(header, mapping.fcs, false);
  const int c_neu =
      mapping.neutral.empty() ? -1 : column_of(header, mapping.neutral, false);
  if (c_win < 0 && (c_hs < 0 || c_as < 0))
    throw ParseError("game file has neither outcome nor score columns");

  std::vector<GameRecord> out;
  for (size_t li = 1; li < lines.size(); ++li) {
    const int row = static_cast<int>(li);
    if (trim(lines[li]).empty()) continue;
    auto f = split(lines[li], mapping.delimiter);
    const int needed = std::max({c_home, c_away, c_date, c_win, c_hs, c_as,
                                 c_fcs, c_neu});
    if (static_cast<int>(f.size()) <= needed)
      throw ParseError("too few fields", row);

    GameRecord g;
    g.home = f[c_home];
    g.away = f[c_away];
    if (g.home.empty() || g.away.empty())
      throw ParseError("empty team name", row);
    if (g.home == g.away)
      throw ParseError("home and away are the same team '" + g.home + "'",
                       row);
    try {
      g.date = parse_date(f[c_date]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), row);
    }

    if (c_win >= 0 && !f[c_win].empty()) {
      int w;
      if (!parse_int(f[c_win], w) || (w != 0 && w != 1))
        throw ParseError("home_win must be 0 or 1, got '" + f[c_win] + "'",
                         row);
      g.home_win = w;
    } else {
      int hs, as;
      if (c_hs < 0 || c_as < 0 || !parse_int(f[c_hs], hs) ||
          !parse_int(f[c_as], as))
        throw ParseError("unparseable scores", row);
      if (hs == as)
        throw ParseError("tied score " + std::to_string(hs) +
                             "-" + std::to_string(as) +
                             "; ties are impossible in these data",
                         row);
      g.home_win = hs > as ? 1 : 0;
    }

    if (c_fcs >= 0 && !f[c_fcs].empty()) {
      int v;
      if (!parse_int(f[c_fcs], v) || (v != 0 && v != 1))
        throw ParseError("fcs indicator must be 0 or 1", row);
      g.fcs_visit = v == 1;
    }
    if (c_neu >= 0 && !f[c_neu].empty()) {
      int v;
      if (!parse_int(f[c_neu], v) || (v != 0 && v != 1))
        throw ParseError("neutral indicator must be 0 or 1", row);
      g.neutral_site = v == 1;
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::map<std::string, Division> parse_roster(const std::string& file_contents) {
  std::map<std::string, Division> roster;
  int lineno = 0;
  for (const auto& raw : split_lines(file_contents)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto f = split(line, ',');
    if (f.size() != 2) throw ParseError("roster line is not team,division",
                                        lineno);
    if (lineno == 1 && (f[1] == "division" || f[1] == "Division")) continue;
    Division d;
    if (f[1] == "FBS") d = Division::FBS;
    else if (f[1] == "FCS") d = Division::FCS;
    else throw ParseError("unknown division '" + f[1] + "'", lineno);
    auto [it, inserted] = roster.emplace(f[0], d);
    if (!inserted && it->second != d)
      throw DataIntegrityError("team '" + f[0] +
                               "' listed with two divisions in roster");
  }
  return roster;
}

std::vector<GameRecord> preprocess_raw(
    const std::vector<GameRecord>& records,
    const std::map<std::string, Division>& roster,
    const PreprocessOptions& options) {
  struct Key {
    std::string a, b;  // unordered pair, a < b
    Date date;
    bool operator<(const Key& o) const {
      return std::tie(a, b, date) < std::tie(o.a, o.b, o.date);
    }
  };
  std::map<Key, const GameRecord*> seen;
  std::vector<GameRecord> out;
  for (const auto& g : records) {
    auto hi = roster.find(g.home);
    auto ai = roster.find(g.away);
    if (hi == roster.end() || ai == roster.end()) continue;  // lower division
    if (options.cutoff && g.date > *options.cutoff) continue;

    Key k{g.home, g.away, g.date};
    if (k.b < k.a) std::swap(k.a, k.b);
    auto it = seen.find(k);
    if (it != seen.end()) {
      const GameRecord& prev = *it->second;
      // The two mirrors agree iff they name the same winner.
      const std::string& prev_winner = prev.home_win ? prev.home : prev.away;
      const std::string& cur_winner = g.home_win ? g.home : g.away;
      if (prev_winner != cur_winner)
        throw DataIntegrityError("contradictory duplicate records for " +
                                 k.a + " vs " + k.b + " on " + k.date.str());
      continue;
    }
    GameRecord kept = g;
    kept.fcs_visit = hi->second == Division::FBS && ai->second == Division::FCS;
    out.push_back(kept);
    seen.emplace(k, &g);
  }
  return out;
}

std::string write_canonical(const std::vector<GameRecord>& records) {
  std::vector<const GameRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& g : records) sorted.push_back(&g);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const GameRecord* a, const GameRecord* b) {
                     return std::tie(a->date, a->home, a->away) <
                            std::tie(b->date, b->home, b->away);
                   });
  std::string out = "date,home,away,home_win,fcs_visit,neutral_site\n";
  for (const auto* g : sorted) {
    out += g->date.str();
    out += ',';
    out += g->home;
    out += ',';
    out += g->away;
    out += ',';
    out += g->home_win ? '1' : '0';
    out += ',';
    out += g->fcs_visit ? '1' : '0';
    out += ',';
    out += g->neutral_site ? '1' : '0';
    out += '\n';
  }
  return out;
}

ColumnMapping canonical_mapping() {
  ColumnMapping m;
  m.home_win = "home_win";
  m.fcs = "fcs_visit";
  m.neutral = "neutral_site";
  return m;
}

Eigen::SparseMatrix<double> DesignMatrices::z_matrix() const {
  Eigen::SparseMatrix<double> z(n_games, n_teams);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * n_games);
  for (int i = 0; i < n_games; ++i) {
    trips.emplace_back(i, home[i], 1.0);
    trips.emplace_back(i, away[i], -1.0);
  }
  z.setFromTriplets(trips.begin(), trips.end());
  return z;
}

BuiltDesign build_design(const std::vector<GameRecord>& records,
                         const std::map<std::string, Division>& roster,
                         FcsMode fcs_mode) {
  BuiltDesign built;
  const bool consolidated = fcs_mode == FcsMode::kConsolidated;

  auto division_of = [&](const std::string& team) {
    auto it = roster.find(team);
    if (it == roster.end())
      throw DataIntegrityError("team '" + team + "' absent from roster");
    return it->second;
  };

  // Keep rows first so that zero-game teams can be excluded from the index.
  std::vector<const GameRecord*> rows;
  std::set<std::string> active_fbs, active_fcs;
  bool any_fcs_games = false;
  for (const auto& g : records) {
    const Division dh = division_of(g.home);
    const Division da = division_of(g.away);
    if (consolidated && dh == Division::FCS && da == Division::FCS)
      continue;  // no information about the single pseudo-team
    rows.push_back(&g);
    (dh == Division::FBS ? active_fbs : active_fcs).insert(g.home);
    (da == Division::FBS ? active_fbs : active_fcs).insert(g.away);
    if (dh == Division::FCS || da == Division::FCS) any_fcs_games = true;
  }

  // Teams that appeared but lost every row to filtering would be isolated
  // columns; exclude them. FCS teams folded into the pseudo-team are not
  // warned about in consolidated mode -- that folding is the point.
  std::set<std::string> appeared;
  for (const auto& g : records) {
    appeared.insert(g.home);
    appeared.insert(g.away);
  }
  for (const auto& team : appeared) {
    if (active_fbs.count(team) || active_fcs.count(team)) continue;
    if (consolidated && division_of(team) == Division::FCS) continue;
    built.warnings.push_back("team '" + team +
                             "' has no games after filtering; excluded");
  }

  TeamIndex& idx = built.index;
  for (const auto& name : active_fbs) {
    idx.index_of[name] = static_cast<int>(idx.names.size());
    idx.names.push_back(name);
    idx.division.push_back(Division::FBS);
  }
  idx.fbs_count = static_cast<int>(idx.names.size());
  if (idx.fbs_count < 2)
    throw DataIntegrityError("fewer than two FBS teams with games");

  if (consolidated) {
    if (roster.count(kConsolidatedFcsName))
      throw DataIntegrityError(
          "a roster team is named 'FCS'; that name is reserved for the "
          "consolidated pseudo-team");
    if (any_fcs_games) {
      idx.index_of[kConsolidatedFcsName] = idx.fbs_count;
      idx.names.push_back(kConsolidatedFcsName);
      idx.division.push_back(Division::FCS);
      idx.fcs_count = 1;
    }
  } else {
    for (const auto& name : active_fcs) {
      idx.index_of[name] = static_cast<int>(idx.names.size());
      idx.names.push_back(name);
      idx.division.push_back(Division::FCS);
    }
    idx.fcs_count = static_cast<int>(active_fcs.size());
  }

  DesignMatrices& d = built.design;
  d.n_games = static_cast<int>(rows.size());
  d.n_teams = idx.size();
  d.has_fcs_effect = !consolidated;
  d.home.reserve(rows.size());
  d.away.reserve(rows.size());
  d.x.assign(rows.size(), 0.0);
  built.outcomes.reserve(rows.size());

  for (size_t i = 0; i < rows.size(); ++i) {
    const GameRecord& g = *rows[i];
    auto col = [&](const std::string& team) {
      if (consolidated && division_of(team) == Division::FCS)
        return idx.index_of.at(kConsolidatedFcsName);
      return idx.index_of.at(team);
    };
    d.home.push_back(col(g.home));
    d.away.push_back(col(g.away));
    if (d.has_fcs_effect && g.fcs_visit) d.x[i] = 1.0;
    built.outcomes.push_back(g.home_win);
  }
  return built;
}

std::string SeparationReport::summary() const {
  std::string s = "cross-division games: " +
                  std::to_string(cross_division_games) + ", FBS wins: " +
                  std::to_string(fbs_cross_wins);
  s += separated ? "; SEPARATED: the FCS effect is inestimable, drop it and "
                   "the FCS teams (use consolidated mode or remove the games)"
                 : "; not separated";
  s += "; undefeated teams: " + std::to_string(undefeated_teams) +
       ", winless teams: " + std::to_string(winless_teams);
  return s;
}

SeparationReport detect_separation(const std::vector<GameRecord>& records) {
  SeparationReport r;
  std::map<std::string, std::pair<int, int>> wl;  // team -> (wins, losses)
  for (const auto& g : records) {
    if (g.fcs_visit) {
      ++r.cross_division_games;
      if (g.home_win) ++r.fbs_cross_wins;
    }
    auto& h = wl[g.home];
    auto& a = wl[g.away];
    if (g.home_win) { ++h.first; ++a.second; }
    else { ++h.second; ++a.first; }
  }
  r.separated = r.fbs_cross_wins == r.cross_division_games;  // vacuous counts
  for (const auto& [team, rec] : wl) {
    if (rec.second == 0) ++r.undefeated_teams;
    if (rec.first == 0) ++r.winless_teams;
  }
  return r;
}

}  // namespace mmrank
