#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kernels.hpp"
#include "roughlift.hpp"
#include "symtensor.hpp"

namespace chaosrough {

using Json = nlohmann::json;

// Shortest decimal that parses back to the same double would also work, but a
// fixed %.17g keeps the CSV schema column widths predictable and round-trips.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV assembly. Cells are plain tokens; anything that would need quoting is
// rejected rather than escaped, since every schema here is numeric plus short
// labels.

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  explicit Csv(std::vector<std::string> cols) : columns(std::move(cols)) {
    if (columns.empty()) throw std::invalid_argument("Csv: need at least one column");
    for (const auto& c : columns) check_cell(c);
  }

  static void check_cell(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("Csv: empty cell");
    if (s.find_first_of(",\"\n\r") != std::string::npos)
      throw std::invalid_argument("Csv: cell would need quoting: " + s);
  }

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw std::invalid_argument("Csv: row width mismatch");
    for (const auto& c : row) check_cell(c);
    rows.push_back(std::move(row));
  }

  std::string text() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    return out.str();
  }
};

// Node table of a lift: node index, time, level-1 components, then the
// cumulative level-2 blocks X2_{0,t} flattened row-major.
inline Csv lift_to_csv(const Level2Path& x) {
  x.validate();
  const int w = x.width();
  std::vector<std::string> cols{"node", "t"};
  for (int k = 0; k < w; ++k) cols.push_back("x" + std::to_string(k));
  for (int r = 0; r < w; ++r)
    for (int c = 0; c < w; ++c) cols.push_back("a" + std::to_string(r) + "_" + std::to_string(c));
  Csv csv(std::move(cols));
  for (int i = 0; i < x.nodes(); ++i) {
    std::vector<std::string> row{std::to_string(i), format_double(x.grid[i])};
    for (int k = 0; k < w; ++k) row.push_back(format_double(x.level1[i][static_cast<std::size_t>(k)]));
    for (int r = 0; r < w; ++r)
      for (int c = 0; c < w; ++c) row.push_back(format_double(x.cumulative2[i].at(r, c)));
    csv.add_row(std::move(row));
  }
  return csv;
}

// ---------------------------------------------------------------------------
// JSON tensor fixtures: {order, dim, entries: [{idx: [...], c: v}]}. Entries
// are emitted in the tensor's sorted-key order, so serialization is stable.

inline Json tensor_to_json(const SymTensor& t) {
  Json entries = Json::array();
  for (const auto& [idx, c] : t.coeffs()) entries.push_back(Json{{"idx", idx}, {"c", c}});
  return Json{{"order", t.order()}, {"dim", t.dim()}, {"entries", std::move(entries)}};
}

inline SymTensor tensor_from_json(const Json& j) {
  SymTensor t(j.at("order").get<int>(), j.at("dim").get<int>());
  for (const auto& e : j.at("entries"))
    t.add(e.at("idx").get<MultiIndex>(), e.at("c").get<double>());
  return t;
}

inline Json kernel_to_json(const KernelPath& p) {
  Json j{{"order", p.order},
         {"grid", p.grid},
         {"label", p.label},
         {"nodes_materialized", p.nodes_materialized}};
  Json kernels = Json::array();
  for (const auto& k : p.kernels) kernels.push_back(tensor_to_json(k));
  j["kernels"] = std::move(kernels);
  Json factors = Json::array();
  for (const auto& f : p.factors) factors.push_back(kernel_to_json(f));
  j["factors"] = std::move(factors);
  return j;
}

inline KernelPath kernel_from_json(const Json& j) {
  KernelPath p;
  p.order = j.at("order").get<int>();
  p.grid = j.at("grid").get<std::vector<double>>();
  p.label = j.at("label").get<std::string>();
  p.nodes_materialized = j.at("nodes_materialized").get<bool>();
  for (const auto& k : j.at("kernels")) p.kernels.push_back(tensor_from_json(k));
  for (const auto& f : j.at("factors")) p.factors.push_back(kernel_from_json(f));
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// File helpers. Binary mode keeps byte-for-byte reproducibility contracts
// honest across platforms.

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write_text_file: write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_text_file: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Json read_json_file(const std::string& path) {
  return Json::parse(read_text_file(path));
}

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace chaosrough
