#pragma once

// File formats.
//
// Respondent CSV (one row per interview, alter block width fixed by the
// header):
//   respondent_id,group,design_weight,degree,n_alters,
//     alter1_hidden,alter1_frame,alter1_group,alter1_aware, ... up to
//     alter{K}_aware
// Cells beyond n_alters stay empty.  Flags are 0/1, weights positive reals
// serialized with 17 significant digits so values round-trip exactly.
//
// Margins CSV: `group,count` with unique groups and positive counts.
//
// Population files: a plain-text edge list (`u v` per line, u < v, sorted)
// plus a node attribute CSV `node_id,in_frame,in_hidden,group` sorted by id.
//
// Every loader attaches 1-based line numbers to its errors.  Run metadata is
// emitted as JSON next to every result artifact; set SOURCE_DATE_EPOCH to
// pin its timestamp for byte-identical reruns.

#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "netreport/digest.hpp"
#include "netreport/estimators.hpp"
#include "netreport/population.hpp"
#include "netreport/survey.hpp"
#include "netreport/uncertainty.hpp"
#include "netreport/version.hpp"

namespace netreport {

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// 17 significant digits: enough for any double to round-trip exactly.
inline std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

inline DataError row_error(const std::string& path, std::size_t line,
                           const std::string& what) {
  return DataError(path + ":" + std::to_string(line) + ": " + what);
}

inline long long parse_count(const std::string& cell, const std::string& path,
                             std::size_t line, const std::string& field) {
  long long value = 0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw row_error(path, line, "malformed " + field + ": '" + cell + "'");
  }
  return value;
}

inline double parse_real(const std::string& cell, const std::string& path,
                         std::size_t line, const std::string& field) {
  if (cell.empty()) throw row_error(path, line, "empty " + field);
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(cell.c_str(), &end);
  if (errno != 0 || end != cell.c_str() + cell.size()) {
    throw row_error(path, line, "malformed " + field + ": '" + cell + "'");
  }
  return value;
}

inline bool parse_flag(const std::string& cell, const std::string& path,
                       std::size_t line, const std::string& field) {
  if (cell == "0") return false;
  if (cell == "1") return true;
  throw row_error(path, line,
                  "flag " + field + " must be 0 or 1, got '" + cell + "'");
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

}  // namespace detail

inline std::string respondent_header(int max_alters) {
  std::string h = "respondent_id,group,design_weight,degree,n_alters";
  for (int k = 1; k <= max_alters; ++k) {
    const std::string tag = "alter" + std::to_string(k);
    h += "," + tag + "_hidden," + tag + "_frame," + tag + "_group," + tag +
         "_aware";
  }
  return h;
}

inline void save_respondents(std::span<const RespondentRecord> records,
                             const std::string& path, int max_alters = 3) {
  for (const auto& rec : records) {
    if (rec.alter_count() > max_alters) {
      throw DataError("record " + rec.respondent_id + " has " +
                      std::to_string(rec.alter_count()) +
                      " alters, file is declared with " +
                      std::to_string(max_alters));
    }
  }
  auto out = detail::open_output(path);
  out << respondent_header(max_alters) << "\n";
  for (const auto& rec : records) {
    out << rec.respondent_id << ',' << rec.group << ','
        << format_double(rec.design_weight) << ',' << rec.degree << ','
        << rec.alter_count();
    for (int k = 0; k < max_alters; ++k) {
      if (k < rec.alter_count()) {
        const auto& a = rec.alters[k];
        out << ',' << (a.reported_hidden ? 1 : 0) << ','
            << (a.reported_frame ? 1 : 0) << ',' << a.group << ','
            << (a.reported_aware ? 1 : 0);
      } else {
        out << ",,,,";
      }
    }
    out << "\n";
  }
}

// Loads and validates a respondent file.  When `known_groups` is provided,
// respondent group labels outside the set are rejected.
inline std::vector<RespondentRecord> load_respondents(
    const std::string& path,
    const std::set<std::string>* known_groups = nullptr) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const auto header = detail::split_csv(line);
  if (header.size() < 9 || (header.size() - 5) % 4 != 0) {
    throw DataError(path + ": malformed respondent header");
  }
  const int max_alters = static_cast<int>((header.size() - 5) / 4);
  if (detail::split_csv(respondent_header(max_alters)) != header) {
    throw DataError(path + ": header does not match the respondent schema");
  }

  std::vector<RespondentRecord> records;
  std::set<std::string> seen_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size()) {
      throw detail::row_error(path, line_no,
                              "expected " + std::to_string(header.size()) +
                                  " cells, got " + std::to_string(cells.size()));
    }
    RespondentRecord rec;
    rec.respondent_id = cells[0];
    rec.group = cells[1];
    if (rec.respondent_id.empty()) {
      throw detail::row_error(path, line_no, "empty respondent_id");
    }
    if (!seen_ids.insert(rec.respondent_id).second) {
      throw detail::row_error(path, line_no,
                              "duplicate respondent_id " + rec.respondent_id);
    }
    if (rec.group.empty()) {
      throw detail::row_error(path, line_no, "empty group label");
    }
    if (known_groups && !known_groups->count(rec.group)) {
      throw detail::row_error(path, line_no,
                              "unknown group label " + rec.group);
    }
    rec.design_weight =
        detail::parse_real(cells[2], path, line_no, "design_weight");
    if (rec.design_weight <= 0.0) {
      throw detail::row_error(path, line_no, "design_weight must be positive");
    }
    const long long degree =
        detail::parse_count(cells[3], path, line_no, "degree");
    if (degree < 0) throw detail::row_error(path, line_no, "negative degree");
    rec.degree = static_cast<int>(degree);
    const long long n_alters =
        detail::parse_count(cells[4], path, line_no, "n_alters");
    if (n_alters < 0 || n_alters > max_alters) {
      throw detail::row_error(path, line_no,
                              "n_alters outside [0, " +
                                  std::to_string(max_alters) + "]");
    }
    if (n_alters > degree) {
      throw detail::row_error(path, line_no, "n_alters exceeds degree");
    }
    for (int k = 0; k < max_alters; ++k) {
      const std::string tag = "alter" + std::to_string(k + 1);
      const std::string& hidden = cells[5 + 4 * k];
      const std::string& frame = cells[6 + 4 * k];
      const std::string& group = cells[7 + 4 * k];
      const std::string& aware = cells[8 + 4 * k];
      if (k < n_alters) {
        AlterReport a;
        a.reported_hidden =
            detail::parse_flag(hidden, path, line_no, tag + "_hidden");
        a.reported_frame =
            detail::parse_flag(frame, path, line_no, tag + "_frame");
        if (group.empty()) {
          throw detail::row_error(path, line_no, "empty " + tag + "_group");
        }
        a.group = group;
        a.reported_aware =
            detail::parse_flag(aware, path, line_no, tag + "_aware");
        rec.alters.push_back(std::move(a));
      } else if (!hidden.empty() || !frame.empty() || !group.empty() ||
                 !aware.empty()) {
        throw detail::row_error(path, line_no,
                                tag + " cells must be empty beyond n_alters");
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline void save_margins(const FrameMargins& margins, const std::string& path) {
  auto out = detail::open_output(path);
  out << "group,count\n";
  for (const auto& [group, count] : margins.by_group) {
    out << group << ',' << count << "\n";
  }
}

inline FrameMargins load_margins(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (detail::split_csv(line) != std::vector<std::string>{"group", "count"}) {
    throw DataError(path + ": header must be 'group,count'");
  }
  FrameMargins margins;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 2) {
      throw detail::row_error(path, line_no, "expected 2 cells");
    }
    if (cells[0].empty()) {
      throw detail::row_error(path, line_no, "empty group label");
    }
    const long long count =
        detail::parse_count(cells[1], path, line_no, "count");
    if (count <= 0) {
      throw detail::row_error(path, line_no,
                              "count must be positive for group " + cells[0]);
    }
    if (!margins.by_group.emplace(cells[0], count).second) {
      throw detail::row_error(path, line_no, "duplicate group " + cells[0]);
    }
  }
  margins.validate();
  return margins;
}

inline void save_population(const Population& pop,
                            const std::string& edges_path,
                            const std::string& nodes_path) {
  auto edges = detail::open_output(edges_path);
  for (const auto& [u, v] : pop.network().sorted_edges()) {
    edges << u << ' ' << v << "\n";
  }
  auto nodes = detail::open_output(nodes_path);
  nodes << "node_id,in_frame,in_hidden,group\n";
  for (NodeId i = 0; i < static_cast<NodeId>(pop.node_count()); ++i) {
    nodes << i << ',' << (pop.in_frame(i) ? 1 : 0) << ','
          << (pop.in_hidden(i) ? 1 : 0) << ',' << pop.group(i) << "\n";
  }
}

inline Population load_population(const std::string& edges_path,
                                  const std::string& nodes_path) {
  auto nodes = detail::open_input(nodes_path);
  std::string line;
  if (!std::getline(nodes, line)) throw DataError(nodes_path + ": empty file");
  if (detail::split_csv(line) !=
      std::vector<std::string>{"node_id", "in_frame", "in_hidden", "group"}) {
    throw DataError(nodes_path + ": malformed node header");
  }
  std::vector<bool> in_frame, in_hidden;
  std::vector<std::string> groups;
  std::size_t line_no = 1;
  while (std::getline(nodes, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 4) {
      throw detail::row_error(nodes_path, line_no, "expected 4 cells");
    }
    const long long id =
        detail::parse_count(cells[0], nodes_path, line_no, "node_id");
    if (id != static_cast<long long>(in_frame.size())) {
      throw detail::row_error(nodes_path, line_no,
                              "node ids must be dense and ascending");
    }
    in_frame.push_back(
        detail::parse_flag(cells[1], nodes_path, line_no, "in_frame"));
    in_hidden.push_back(
        detail::parse_flag(cells[2], nodes_path, line_no, "in_hidden"));
    if (cells[3].empty()) {
      throw detail::row_error(nodes_path, line_no, "empty group");
    }
    groups.push_back(cells[3]);
  }

  UndirectedNetwork net(in_frame.size());
  auto edges = detail::open_input(edges_path);
  line_no = 0;
  while (std::getline(edges, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    long long u = -1, v = -1;
    if (!(row >> u >> v)) {
      throw detail::row_error(edges_path, line_no, "malformed edge");
    }
    if (u < 0 || v < 0 || u >= static_cast<long long>(in_frame.size()) ||
        v >= static_cast<long long>(in_frame.size())) {
      throw detail::row_error(edges_path, line_no, "edge endpoint out of range");
    }
    try {
      net.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
    } catch (const std::invalid_argument& e) {
      throw detail::row_error(edges_path, line_no, e.what());
    }
  }
  try {
    net.finalize();
  } catch (const std::invalid_argument& e) {
    throw DataError(edges_path + ": " + e.what());
  }
  return Population(std::move(in_frame), std::move(in_hidden),
                    std::move(groups), std::move(net));
}

inline std::string file_digest(const std::string& path) {
  auto in = detail::open_input(path);
  std::uint64_t h = kFnvOffset;
  char buffer[4096];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    h = fnv1a64(std::string_view(buffer, static_cast<std::size_t>(in.gcount())),
                h);
  }
  return "fnv1a64:" + to_hex(h);
}

struct RunMetadata {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> parameters;
  std::map<std::string, std::string> input_digests;
  int excluded_records = 0;
  int degenerate_replicates = 0;
  std::string schema_version = "1";

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["toolkit_version"] = kVersion;
    j["rng_algorithm"] = kRngAlgorithm;
    j["command"] = command;
    j["seed"] = seed;
    j["parameters"] = parameters;
    j["input_digests"] = input_digests;
    j["excluded_records"] = excluded_records;
    j["degenerate_replicates"] = degenerate_replicates;
    j["schema_version"] = schema_version;
    j["timestamp_utc"] = timestamp();
    return j;
  }

  // SOURCE_DATE_EPOCH pins the clock for reproducible artifacts.
  static std::string timestamp() {
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
      t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
      t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
  }
};

inline void write_metadata(const RunMetadata& meta, const std::string& path) {
  auto out = detail::open_output(path);
  out << meta.to_json().dump(2) << "\n";
}

// Tabular results, emitted as CSV or JSON with identical values.
struct ResultRow {
  std::string quantity;
  double point = 0.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> ci_level;
  std::optional<long long> replicates;
};

inline void write_results_csv(std::span<const ResultRow> rows,
                              const std::string& path) {
  auto out = detail::open_output(path);
  out << "quantity,point,ci_low,ci_high,ci_level,replicates\n";
  for (const auto& r : rows) {
    out << r.quantity << ',' << format_double(r.point) << ','
        << (r.ci_low ? format_double(*r.ci_low) : "") << ','
        << (r.ci_high ? format_double(*r.ci_high) : "") << ','
        << (r.ci_level ? format_double(*r.ci_level) : "") << ','
        << (r.replicates ? std::to_string(*r.replicates) : "") << "\n";
  }
}

inline void write_results_json(std::span<const ResultRow> rows,
                               const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["quantity"] = r.quantity;
    row["point"] = r.point;
    if (r.ci_low) row["ci_low"] = *r.ci_low;
    if (r.ci_high) row["ci_high"] = *r.ci_high;
    if (r.ci_level) row["ci_level"] = *r.ci_level;
    if (r.replicates) row["replicates"] = *r.replicates;
    j.push_back(row);
  }
  auto out = detail::open_output(path);
  out << j.dump(2) << "\n";
}

// Flat key=value run configuration; `allowed_keys` rejects typos early.
inline std::map<std::string, std::string> load_run_config(
    const std::string& path, const std::set<std::string>& allowed_keys) {
  auto in = detail::open_input(path);
  std::map<std::string, std::string> config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) +
                       ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    if (key != "schema_version" && !allowed_keys.count(key)) {
      throw UsageError(path + ":" + std::to_string(line_no) +
                       ": unknown key '" + key + "'");
    }
    if (!config.emplace(key, line.substr(eq + 1)).second) {
      throw UsageError(path + ":" + std::to_string(line_no) +
                       ": duplicate key '" + key + "'");
    }
  }
  return config;
}

// Replicate weight export: respondent_id column plus one zero-padded column
// per replicate.
inline void write_replicate_weights(
    std::span<const RespondentRecord> records,
    std::span<const ReplicateWeightSet> replicates, const std::string& path) {
  auto out = detail::open_output(path);
  const int width =
      static_cast<int>(std::to_string(replicates.size()).size());
  out << "respondent_id";
  for (std::size_t r = 1; r <= replicates.size(); ++r) {
    char tag[32];
    std::snprintf(tag, sizeof(tag), ",rep_%0*zu", width, r);
    out << tag;
  }
  out << "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << records[i].respondent_id;
    for (const auto& rep : replicates) {
      out << ',' << format_double(rep.weights[i]);
    }
    out << "\n";
  }
}

}  // namespace netreport
