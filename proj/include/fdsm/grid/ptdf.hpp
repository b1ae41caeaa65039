#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdsm/grid/grid_model.hpp"

namespace fdsm {

// Line flow (MW) per MW injected at each bus, withdrawn at the slack bus.
struct PtdfMatrix {
  Eigen::MatrixXd entries;  // L x B, columns in GridModel::buses order
  int slack_bus = 0;
  std::vector<int> bus_ids;

  double at(std::size_t line, int bus_id) const;
  Eigen::VectorXd flows(const Eigen::VectorXd& injections) const { return entries * injections; }
};

PtdfMatrix build_ptdf(const GridModel& model, int slack_bus);

// Bus ids not reachable from the first bus through the branch list.
std::vector<int> unreachable_buses(const GridModel& model);

}  // namespace fdsm
