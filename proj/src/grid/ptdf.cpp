#include "fdsm/grid/ptdf.hpp"

#include <deque>
#include <sstream>

#include "fdsm/errors.hpp"

namespace fdsm {

double PtdfMatrix::at(std::size_t line, int bus_id) const {
  for (std::size_t b = 0; b < bus_ids.size(); ++b) {
    if (bus_ids[b] == bus_id) return entries(static_cast<Eigen::Index>(line), static_cast<Eigen::Index>(b));
  }
  throw ValidationError("unknown bus id " + std::to_string(bus_id));
}

std::vector<int> unreachable_buses(const GridModel& model) {
  const std::size_t n = model.bus_count();
  if (n == 0) return {};
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (const auto& line : model.lines) {
    const std::size_t a = model.bus_index(line.from_bus);
    const std::size_t b = model.bus_index(line.to_bus);
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : adjacency[u]) {
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  std::vector<int> out;
  for (std::size_t b = 0; b < n; ++b) {
    if (!seen[b]) out.push_back(model.buses[b].id);
  }
  return out;
}

PtdfMatrix build_ptdf(const GridModel& model, int slack_bus) {
  const auto missing = unreachable_buses(model);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "network is disconnected; unreachable buses:";
    for (int id : missing) msg << ' ' << id;
    throw ValidationError(msg.str());
  }
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  const auto l = static_cast<Eigen::Index>(model.line_count());
  const auto slack = static_cast<Eigen::Index>(model.bus_index(slack_bus));

  // Incidence (L x B) and branch susceptances.
  Eigen::MatrixXd incidence = Eigen::MatrixXd::Zero(l, n);
  Eigen::VectorXd susceptance(l);
  for (Eigen::Index k = 0; k < l; ++k) {
    const Line& line = model.lines[static_cast<std::size_t>(k)];
    if (line.reactance <= 0.0) throw ValidationError("non-positive reactance on a branch");
    incidence(k, static_cast<Eigen::Index>(model.bus_index(line.from_bus))) += 1.0;
    incidence(k, static_cast<Eigen::Index>(model.bus_index(line.to_bus))) -= 1.0;
    susceptance(k) = 1.0 / line.reactance;
  }

  PtdfMatrix out;
  out.slack_bus = slack_bus;
  for (const auto& bus : model.buses) out.bus_ids.push_back(bus.id);
  out.entries = Eigen::MatrixXd::Zero(l, n);
  if (n == 1) return out;

  // Reduced incidence with the slack column removed.
  Eigen::MatrixXd reduced(l, n - 1);
  for (Eigen::Index b = 0, c = 0; b < n; ++b) {
    if (b == slack) continue;
    reduced.col(c++) = incidence.col(b);
  }
  const Eigen::MatrixXd weighted = susceptance.asDiagonal() * reduced;
  const Eigen::MatrixXd b_reduced = reduced.transpose() * weighted;
  Eigen::LDLT<Eigen::MatrixXd> factor(b_reduced);
  if (factor.info() != Eigen::Success || !factor.isPositive() ||
      factor.vectorD().minCoeff() <= 1e-12 * factor.vectorD().maxCoeff()) {
    throw NumericalError("reduced susceptance matrix is singular");
  }
  const Eigen::MatrixXd reduced_ptdf = weighted * factor.solve(Eigen::MatrixXd::Identity(n - 1, n - 1));
  for (Eigen::Index b = 0, c = 0; b < n; ++b) {
    if (b == slack) continue;
    out.entries.col(b) = reduced_ptdf.col(c++);
  }
  return out;
}

}  // namespace fdsm
