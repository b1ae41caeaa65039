#include "fdsm/sim/dispatch.hpp"

#include <algorithm>
#include <cmath>

#include "fdsm/errors.hpp"
#include "fdsm/sim/qp.hpp"

namespace fdsm {

bool DispatchResult::shed_any(double tol) const {
  return std::any_of(shed.begin(), shed.end(), [tol](double s) { return s > tol; });
}

DispatchResult economic_dispatch(const DispatchNetwork& network, const DispatchRequest& request) {
  const ConstraintSet& cs = network.constraints;
  const auto g = static_cast<Eigen::Index>(cs.generator_count());
  const auto agg = static_cast<Eigen::Index>(cs.aggregator_count());
  const auto lines = static_cast<Eigen::Index>(cs.line_count);
  if (network.costs.size() != static_cast<std::size_t>(g) || request.previous.size() != static_cast<std::size_t>(g) ||
      request.max_output.size() != static_cast<std::size_t>(g) ||
      request.purchases.size() != static_cast<std::size_t>(agg)) {
    throw ModelError("dispatch request does not match the network");
  }
  Eigen::VectorXd purchases(agg);
  for (Eigen::Index i = 0; i < agg; ++i) purchases(i) = request.purchases[static_cast<std::size_t>(i)];

  // Variables with a zero upper bound are fixed at zero and left out of the QP.
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < g + agg; ++k) {
    const double upper = k < g ? request.max_output[static_cast<std::size_t>(k)] : purchases(k - g);
    if (upper > 1e-12) active.push_back(k);
  }
  const auto n = static_cast<Eigen::Index>(active.size());

  QpProblem qp;
  qp.hessian = Eigen::MatrixXd::Zero(n, n);
  qp.linear = Eigen::VectorXd::Zero(n);
  const Eigen::Index flow_rows = 2 * lines;
  const Eigen::Index m = flow_rows + 2 * n;
  qp.inequality = Eigen::MatrixXd::Zero(m, n);
  qp.inequality_rhs = Eigen::VectorXd::Zero(m);
  // Flow rows in terms of (generation, shed): delivered = purchases - shed.
  const Eigen::VectorXd offset = cs.offset(request.capacities);
  if (flow_rows > 0) {
    qp.inequality_rhs.head(flow_rows) = -offset.head(flow_rows) - cs.coeff_agg.topRows(flow_rows) * purchases;
  }
  for (Eigen::Index v = 0; v < n; ++v) {
    const Eigen::Index k = active[static_cast<std::size_t>(v)];
    double upper = 0.0;
    if (k < g) {
      const GeneratorCost& c = network.costs[static_cast<std::size_t>(k)];
      const double prev = request.previous[static_cast<std::size_t>(k)];
      qp.hessian(v, v) = 2.0 * (c.quadratic + c.ramp);
      qp.linear(v) = c.linear - 2.0 * c.ramp * prev;
      if (flow_rows > 0) qp.inequality.col(v).head(flow_rows) = cs.coeff_iso.col(k).head(flow_rows);
      upper = request.max_output[static_cast<std::size_t>(k)];
    } else {
      qp.linear(v) = network.shed_cost;
      if (flow_rows > 0) qp.inequality.col(v).head(flow_rows) = -cs.coeff_agg.col(k - g).head(flow_rows);
      upper = purchases(k - g);
    }
    qp.inequality(flow_rows + 2 * v, v) = 1.0;
    qp.inequality_rhs(flow_rows + 2 * v) = upper;
    qp.inequality(flow_rows + 2 * v + 1, v) = -1.0;
  }
  qp.equality = Eigen::MatrixXd::Ones(1, n);
  qp.equality_rhs = Eigen::VectorXd::Constant(1, purchases.sum());

  QpOptions options;
  options.tolerance = 1e-9;
  QpResult sol;
  sol.converged = true;
  if (n > 0) {
    sol = solve_qp(qp, options);
    if (!sol.x.allFinite()) throw NumericalError("dispatch QP diverged");
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(g + agg);
  for (Eigen::Index v = 0; v < n; ++v) full(active[static_cast<std::size_t>(v)]) = sol.x(v);

  DispatchResult out;
  out.converged = sol.converged;
  out.generation.resize(static_cast<std::size_t>(g));
  out.shed.resize(static_cast<std::size_t>(agg));
  for (Eigen::Index k = 0; k < g; ++k) {
    const double x = std::clamp(full(k), 0.0, request.max_output[static_cast<std::size_t>(k)]);
    out.generation[static_cast<std::size_t>(k)] = x;
    out.generation_cost += network.costs[static_cast<std::size_t>(k)](request.previous[static_cast<std::size_t>(k)], x);
  }
  for (Eigen::Index i = 0; i < agg; ++i) {
    double s = std::clamp(full(g + i), 0.0, purchases(i));
    if (s < 1e-7) s = 0.0;
    out.shed[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

std::optional<std::vector<double>> locational_prices(const DispatchNetwork& network, const DispatchRequest& request,
                                                     double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  const DispatchResult base = economic_dispatch(network, request);
  if (base.shed_any()) return std::nullopt;
  std::vector<double> prices(request.purchases.size());
  DispatchRequest bumped = request;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    bumped.purchases[i] = request.purchases[i] + step;
    const DispatchResult up = economic_dispatch(network, bumped);
    bumped.purchases[i] = request.purchases[i];
    if (up.shed_any()) return std::nullopt;
    prices[i] = (up.generation_cost - base.generation_cost) / step;
  }
  return prices;
}

}  // namespace fdsm
