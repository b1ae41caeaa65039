#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdsm/grid/grid_model.hpp"
#include "fdsm/grid/ptdf.hpp"

namespace fdsm {

// f(s0, a0, a) = coeff_iso * a0 + coeff_agg * a + offset(s0) <= 0 with
// rows [0, L) upper flow limits, [L, 2L) lower flow limits, 2L supply adequacy.
struct ConstraintSet {
  std::size_t line_count = 0;
  Eigen::MatrixXd coeff_iso;  // N x G
  Eigen::MatrixXd coeff_agg;  // N x I

  std::size_t rows() const { return 2 * line_count + 1; }
  std::size_t supply_row() const { return 2 * line_count; }
  std::size_t generator_count() const { return static_cast<std::size_t>(coeff_iso.cols()); }
  std::size_t aggregator_count() const { return static_cast<std::size_t>(coeff_agg.cols()); }

  Eigen::VectorXd offset(const std::vector<double>& capacities) const;
  Eigen::VectorXd offset(const GridModel& model) const { return offset(model.current_capacities()); }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& generation, const Eigen::VectorXd& purchases,
                           const std::vector<double>& capacities) const;

  // Decomposed blocks: the ISO block carries the capacity offset.
  Eigen::VectorXd iso_block(const Eigen::VectorXd& generation, const std::vector<double>& capacities) const;
  Eigen::VectorXd aggregator_block(std::size_t aggregator, double purchase) const;
};

ConstraintSet assemble_constraints(const GridModel& model, const PtdfMatrix& ptdf);

}  // namespace fdsm
