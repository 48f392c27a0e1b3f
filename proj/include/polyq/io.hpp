#pragma once

// ============================================================================
// File formats. Everything on disk is JSON except trajectories, which are
// CSV. Schemas are small and strict: unknown shapes fail loudly with
// FormatError rather than guessing. Doubles round-trip bit-exactly (the JSON
// writer emits shortest-round-trip literals; the CSV writer emits 17
// significant digits).
// ============================================================================

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyq/errors.hpp"
#include "polyq/matrix.hpp"
#include "polyq/system.hpp"

namespace polyq {

using json = nlohmann::json;

namespace ioimpl {

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("JSON parse failure in " + path + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("write failure: " + path);
}

inline Matrix json_to_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw FormatError(what + ": expected a non-empty 2-D array");
  std::size_t cols = 0;
  std::vector<std::vector<double>> rows;
  for (const auto& row : j) {
    if (!row.is_array() || row.empty()) {
      throw FormatError(what + ": expected rows to be non-empty arrays");
    }
    if (cols == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw FormatError(what + ": ragged rows");
    }
    std::vector<double> r;
    for (const auto& x : row) {
      if (!x.is_number()) throw FormatError(what + ": non-numeric entry");
      r.push_back(x.get<double>());
    }
    rows.push_back(std::move(r));
  }
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j2 = 0; j2 < cols; ++j2) m(i, j2) = rows[i][j2];
  }
  return m;
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<Matrix> json_to_matrix_list(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw FormatError(what + ": expected a non-empty array");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(json_to_matrix(j[i], what + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline json matrix_list_to_json(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const Matrix& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

}  // namespace ioimpl

// --- systems ----------------------------------------------------------------

inline PolytopicSystem system_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("system: expected a JSON object");
  for (const char* key : {"strictly_polytopic", "A", "B", "C"}) {
    if (!j.contains(key)) throw FormatError(std::string("system: missing key \"") + key + "\"");
  }
  if (!j["strictly_polytopic"].is_boolean()) {
    throw FormatError("system: \"strictly_polytopic\" must be a boolean");
  }
  PolytopicSystem sys;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw FormatError("system: \"name\" must be a string");
    sys.name = j["name"].get<std::string>();
  }
  sys.strictly_polytopic = j["strictly_polytopic"].get<bool>();
  sys.A = ioimpl::json_to_matrix_list(j["A"], "system.A");
  sys.B = ioimpl::json_to_matrix(j["B"], "system.B");
  sys.C = ioimpl::json_to_matrix(j["C"], "system.C");
  require_valid(sys);
  return sys;
}

inline json system_to_json(const PolytopicSystem& sys) {
  json j;
  if (!sys.name.empty()) j["name"] = sys.name;
  j["strictly_polytopic"] = sys.strictly_polytopic;
  j["A"] = ioimpl::matrix_list_to_json(sys.A);
  j["B"] = ioimpl::matrix_to_json(sys.B);
  j["C"] = ioimpl::matrix_to_json(sys.C);
  return j;
}

inline PolytopicSystem load_system(const std::string& path) {
  return system_from_json(ioimpl::load_json_file(path));
}

inline void save_system(const std::string& path, const PolytopicSystem& sys) {
  ioimpl::save_json_file(path, system_to_json(sys));
}

// --- schedules ----------------------------------------------------------------

inline Schedule schedule_from_json(const json& j) {
  if (!j.is_object() || !j.contains("xi")) throw FormatError("schedule: missing key \"xi\"");
  const json& xi = j["xi"];
  if (!xi.is_array() || xi.empty()) throw FormatError("schedule: \"xi\" must be a non-empty array");
  Schedule out;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const json& row = xi[k];
    if (!row.is_array() || row.empty()) {
      throw FormatError("schedule: xi[" + std::to_string(k) + "] must be a non-empty array");
    }
    Vec w;
    for (const auto& x : row) {
      if (!x.is_number()) throw FormatError("schedule: non-numeric weight");
      w.push_back(x.get<double>());
    }
    try {
      out.push_back(SimplexPoint(std::move(w)));
    } catch (const InvalidInputError& e) {
      throw FormatError("schedule: xi[" + std::to_string(k) + "]: " + e.what());
    }
  }
  return out;
}

inline json schedule_to_json(const Schedule& sched) {
  json xi = json::array();
  for (const SimplexPoint& p : sched) {
    json row = json::array();
    for (double w : p.weights()) row.push_back(w);
    xi.push_back(std::move(row));
  }
  json j;
  j["xi"] = xi;
  return j;
}

inline Schedule load_schedule(const std::string& path) {
  return schedule_from_json(ioimpl::load_json_file(path));
}

inline void save_schedule(const std::string& path, const Schedule& sched) {
  ioimpl::save_json_file(path, schedule_to_json(sched));
}

// --- trajectories -------------------------------------------------------------

/// CSV with header k,xi_1..xi_N,x_1..x_n,V and 17 significant digits per
/// value: enough to reconstruct every double bit-exactly.
inline std::string trajectory_to_csv(const Schedule& sched, const std::vector<Vec>& states,
                                     const Vec& lyapunov) {
  if (states.empty() || states.size() > sched.size() || lyapunov.size() != states.size()) {
    throw InvalidInputError("trajectory_to_csv: inconsistent lengths");
  }
  const std::size_t N = sched.front().size();
  const std::size_t n = states.front().size();
  std::ostringstream out;
  out << "k";
  for (std::size_t i = 1; i <= N; ++i) out << ",xi_" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",x_" << i;
  out << ",V\n";
  char buf[64];
  const auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ',' << buf;
  };
  for (std::size_t k = 0; k < states.size(); ++k) {
    out << k;
    for (std::size_t i = 0; i < N; ++i) emit(sched[k][i]);
    for (std::size_t i = 0; i < n; ++i) emit(states[k][i]);
    emit(lyapunov[k]);
    out << '\n';
  }
  return out.str();
}

inline void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw FormatError("write failure: " + path);
}

}  // namespace polyq
