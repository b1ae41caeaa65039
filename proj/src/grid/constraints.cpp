#include "fdsm/grid/constraints.hpp"

#include "fdsm/errors.hpp"

namespace fdsm {

Eigen::VectorXd ConstraintSet::offset(const std::vector<double>& capacities) const {
  if (capacities.size() != line_count) {
    throw DomainError("capacity vector has " + std::to_string(capacities.size()) +
                      " entries, expected " + std::to_string(line_count));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows()));
  const auto l = static_cast<Eigen::Index>(line_count);
  for (Eigen::Index k = 0; k < l; ++k) {
    out(k) = -capacities[static_cast<std::size_t>(k)];
    out(l + k) = -capacities[static_cast<std::size_t>(k)];
  }
  return out;
}

Eigen::VectorXd ConstraintSet::evaluate(const Eigen::VectorXd& generation,
                                        const Eigen::VectorXd& purchases,
                                        const std::vector<double>& capacities) const {
  if (generation.size() != coeff_iso.cols() || purchases.size() != coeff_agg.cols()) {
    throw DomainError("action vector sizes do not match the constraint set");
  }
  return coeff_iso * generation + coeff_agg * purchases + offset(capacities);
}

Eigen::VectorXd ConstraintSet::iso_block(const Eigen::VectorXd& generation,
                                         const std::vector<double>& capacities) const {
  return coeff_iso * generation + offset(capacities);
}

Eigen::VectorXd ConstraintSet::aggregator_block(std::size_t aggregator, double purchase) const {
  return coeff_agg.col(static_cast<Eigen::Index>(aggregator)) * purchase;
}

ConstraintSet assemble_constraints(const GridModel& model, const PtdfMatrix& ptdf) {
  const auto l = static_cast<Eigen::Index>(model.line_count());
  if (ptdf.entries.rows() != l || ptdf.entries.cols() != static_cast<Eigen::Index>(model.bus_count())) {
    throw ValidationError("PTDF shape does not match the grid model");
  }
  ConstraintSet out;
  out.line_count = model.line_count();
  const auto n = static_cast<Eigen::Index>(out.rows());
  const auto g_count = static_cast<Eigen::Index>(model.generator_count());
  const auto i_count = static_cast<Eigen::Index>(model.aggregator_count());
  out.coeff_iso = Eigen::MatrixXd::Zero(n, g_count);
  out.coeff_agg = Eigen::MatrixXd::Zero(n, i_count);
  const Eigen::Index supply = n - 1;

  for (Eigen::Index g = 0; g < g_count; ++g) {
    const int bus = model.generator_buses()[static_cast<std::size_t>(g)];
    if (!model.has_bus(bus)) throw ValidationError("generator mapped to unknown bus " + std::to_string(bus));
    const auto column = ptdf.entries.col(static_cast<Eigen::Index>(model.bus_index(bus)));
    out.coeff_iso.block(0, g, l, 1) = column;
    out.coeff_iso.block(l, g, l, 1) = -column;
    out.coeff_iso(supply, g) = -1.0;
  }
  for (Eigen::Index i = 0; i < i_count; ++i) {
    const int bus = model.aggregator_buses()[static_cast<std::size_t>(i)];
    if (!model.has_bus(bus)) throw ValidationError("aggregator mapped to unknown bus " + std::to_string(bus));
    const auto column = ptdf.entries.col(static_cast<Eigen::Index>(model.bus_index(bus)));
    // Withdrawals enter the injection vector with a negative sign.
    out.coeff_agg.block(0, i, l, 1) = -column;
    out.coeff_agg.block(l, i, l, 1) = column;
    out.coeff_agg(supply, i) = 1.0;
  }
  return out;
}

}  // namespace fdsm
