#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "fdsm/grid/grid_model.hpp"

namespace fdsm::test {

inline std::string case_path(const std::string& name) { return std::string(FDSM_DATA_DIR) + "/cases/" + name; }

inline std::string bus_record(int id, int type, double load) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%4d %-12s  1  1 %2d 1.000    0.00 %8.1f       0.0     0.0     0.0", id,
                ("Bus " + std::to_string(id)).c_str(), type, load);
  return buf;
}

inline std::string branch_record(int from, int to, double x, double rating) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%4d %4d  1  1 1 0  0.0  %.6f  0.0  %g 0 0 0 0 0.0 0.0", from, to, x, rating);
  return buf;
}

inline std::string make_case(const std::vector<std::string>& buses, const std::vector<std::string>& branches,
                      bool bus_sentinel = true) {
  std::ostringstream out;
  out << " TEST CASE\n";
  out << "BUS DATA FOLLOWS  " << buses.size() << " ITEMS\n";
  for (const auto& b : buses) out << b << '\n';
  if (bus_sentinel) out << "-999\n";
  out << "BRANCH DATA FOLLOWS  " << branches.size() << " ITEMS\n";
  for (const auto& b : branches) out << b << '\n';
  out << "-999\nEND OF DATA\n";
  return out.str();
}

}  // namespace fdsm::test
