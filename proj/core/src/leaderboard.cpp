#include "genforge/analysis.hpp"
#include "genforge/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace genforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool accepted_metric(const Leaderboard& board, const std::string& name) {
  return is_known_metric(name) ||
         std::find(board.external_metrics.begin(), board.external_metrics.end(), name) !=
             board.external_metrics.end();
}

json entry_json(const LeaderboardEntry& e) {
  json j = {{"model", e.model}, {"dataset", e.dataset}, {"scores", e.scores},
            {"source", e.source}};
  j["generated_path"] = e.generated_path ? json(*e.generated_path) : json(nullptr);
  return j;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

fs::path leaderboard_path(const fs::path& dir, const std::string& dataset) {
  if (dataset.empty() || dataset.find('/') != std::string::npos || dataset == "." ||
      dataset == "..")
    throw ArgumentError("invalid dataset name '" + dataset + "'");
  return dir / (dataset + ".json");
}

Leaderboard leaderboard_load(const fs::path& file, const std::string& dataset) {
  Leaderboard board;
  board.dataset = dataset;
  if (!fs::exists(file)) return board;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
    if (j.at("dataset").get<std::string>() != dataset)
      throw ValidationError(file.string() + " holds dataset '" +
                            j.at("dataset").get<std::string>() + "'");
    board.external_metrics = j.value("external_metrics", std::vector<std::string>{});
    for (const auto& e : j.at("entries")) {
      LeaderboardEntry entry;
      entry.model = e.at("model").get<std::string>();
      entry.dataset = e.at("dataset").get<std::string>();
      entry.scores = e.at("scores").get<std::map<std::string, double>>();
      entry.source = e.value("source", "");
      if (e.contains("generated_path") && !e["generated_path"].is_null())
        entry.generated_path = e["generated_path"].get<std::string>();
      board.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw ParseError(file.string() + ": " + e.what(), 1);
  }
  return board;
}

void leaderboard_save(const Leaderboard& board, const fs::path& file) {
  json entries = json::array();
  for (const auto& e : board.entries) entries.push_back(entry_json(e));
  const json j = {{"dataset", board.dataset},
                  {"external_metrics", board.external_metrics},
                  {"entries", entries}};
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, file);
}

void leaderboard_update(Leaderboard& board, const LeaderboardEntry& entry) {
  if (entry.model.empty()) throw ValidationError("leaderboard entry has no model name");
  if (entry.dataset != board.dataset)
    throw ValidationError("entry for dataset '" + entry.dataset + "' on the '" +
                          board.dataset + "' leaderboard");
  for (const auto& [name, value] : entry.scores)
    if (!accepted_metric(board, name))
      throw ValidationError("unknown score '" + name +
                            "' (not a registered metric; declare it external)");
  const auto it = std::find_if(board.entries.begin(), board.entries.end(),
                               [&](const LeaderboardEntry& e) {
                                 return e.model == entry.model && e.dataset == entry.dataset;
                               });
  if (it != board.entries.end())
    *it = entry;
  else
    board.entries.push_back(entry);
}

std::vector<LeaderboardRow> leaderboard_rank(const Leaderboard& board,
                                             const std::string& primary) {
  if (!accepted_metric(board, primary))
    throw ConfigError("unknown primary metric '" + primary + "'");
  std::vector<const LeaderboardEntry*> order;
  for (const auto& e : board.entries) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [&](const LeaderboardEntry* a, const LeaderboardEntry* b) {
                     const auto sa = a->scores.find(primary);
                     const auto sb = b->scores.find(primary);
                     const bool ha = sa != a->scores.end(), hb = sb != b->scores.end();
                     if (ha != hb) return ha;
                     if (ha && sa->second != sb->second) return sa->second > sb->second;
                     return a->model < b->model;
                   });
  std::vector<LeaderboardRow> rows;
  for (std::size_t i = 0; i < order.size(); ++i) rows.push_back({i + 1, order[i]});
  return rows;
}

TableFormat parse_table_format(std::string_view name) {
  if (name == "markdown" || name == "md") return TableFormat::markdown;
  if (name == "json") return TableFormat::json;
  throw ConfigError("unknown table format '" + std::string(name) + "' (markdown, json)");
}

std::string leaderboard_render(const Leaderboard& board, const std::string& primary,
                               TableFormat format) {
  const auto rows = leaderboard_rank(board, primary);

  // Columns: the primary metric first, then every other score name sorted.
  std::vector<std::string> columns = {primary};
  std::set<std::string> others;
  for (const auto& e : board.entries)
    for (const auto& [name, value] : e.scores)
      if (name != primary) others.insert(name);
  columns.insert(columns.end(), others.begin(), others.end());

  if (format == TableFormat::json) {
    json out_rows = json::array();
    for (const auto& row : rows) {
      json r = entry_json(*row.entry);
      r["rank"] = row.rank;
      out_rows.push_back(std::move(r));
    }
    const json j = {{"dataset", board.dataset}, {"primary", primary},
                    {"columns", columns}, {"rows", out_rows}};
    return j.dump(2) + "\n";
  }

  std::ostringstream out;
  out << "| rank | model |";
  for (const auto& c : columns) out << ' ' << c << " |";
  out << " source |\n|---:|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out << "---:|";
  out << "---|\n";
  for (const auto& row : rows) {
    out << "| " << row.rank << " | " << row.entry->model << " |";
    for (const auto& c : columns) {
      const auto it = row.entry->scores.find(c);
      out << ' ' << (it == row.entry->scores.end() ? "-" : fixed2(it->second)) << " |";
    }
    out << ' ' << row.entry->source << " |\n";
  }
  return out.str();
}

}  // namespace genforge
