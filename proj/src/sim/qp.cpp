#include "fdsm/sim/qp.hpp"

#include <algorithm>
#include <cmath>

#include "fdsm/errors.hpp"

namespace fdsm {

namespace {

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (dv(k) < 0.0) alpha = std::min(alpha, -v(k) / dv(k));
  }
  return alpha;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

QpResult solve_qp(const QpProblem& qp, const QpOptions& options) {
  const Eigen::Index n = qp.linear.size();
  const Eigen::Index m = qp.inequality_rhs.size();
  const Eigen::Index p = qp.equality_rhs.size();
  if (qp.hessian.rows() != n || qp.hessian.cols() != n || qp.inequality.rows() != m ||
      (m > 0 && qp.inequality.cols() != n) || qp.equality.rows() != p || (p > 0 && qp.equality.cols() != n)) {
    throw ModelError("QP data has inconsistent dimensions");
  }
  const Eigen::MatrixXd& h = qp.hessian;
  const Eigen::MatrixXd& a = qp.inequality;
  const Eigen::MatrixXd& e = qp.equality;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = m > 0 ? Eigen::VectorXd((qp.inequality_rhs - a * x).cwiseMax(1.0)) : Eigen::VectorXd();
  Eigen::VectorXd z = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(p);

  const double scale_c = 1.0 + inf_norm(qp.linear);
  const double scale_b = 1.0 + inf_norm(qp.inequality_rhs);
  const double scale_e = 1.0 + inf_norm(qp.equality_rhs);

  QpResult result;
  Eigen::MatrixXd kkt(n + p, n + p);
  Eigen::VectorXd rhs(n + p);
  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it;
    Eigen::VectorXd r_d = h * x + qp.linear;
    if (m > 0) r_d += a.transpose() * z;
    if (p > 0) r_d += e.transpose() * y;
    const Eigen::VectorXd r_p = p > 0 ? Eigen::VectorXd(e * x - qp.equality_rhs) : Eigen::VectorXd();
    const Eigen::VectorXd r_i = m > 0 ? Eigen::VectorXd(a * x + s - qp.inequality_rhs) : Eigen::VectorXd();
    const double mu = m > 0 ? s.dot(z) / static_cast<double>(m) : 0.0;
    if (inf_norm(r_d) <= options.tolerance * scale_c && inf_norm(r_p) <= options.tolerance * scale_e &&
        inf_norm(r_i) <= options.tolerance * scale_b && mu <= options.tolerance) {
      result.converged = true;
      break;
    }

    const Eigen::VectorXd d = m > 0 ? Eigen::VectorXd(z.cwiseQuotient(s)) : Eigen::VectorXd();
    kkt.setZero();
    kkt.topLeftCorner(n, n) = h;
    if (m > 0) kkt.topLeftCorner(n, n).noalias() += a.transpose() * d.asDiagonal() * a;
    if (p > 0) {
      kkt.topRightCorner(n, p) = e.transpose();
      kkt.bottomLeftCorner(p, n) = e;
    }
    kkt.topLeftCorner(n, n).diagonal().array() += 1e-12;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);

    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& ds,
                         Eigen::VectorXd& dz) {
      rhs.head(n) = -r_d;
      if (m > 0) rhs.head(n) -= a.transpose() * (rc + z.cwiseProduct(r_i)).cwiseQuotient(s);
      if (p > 0) rhs.tail(p) = -r_p;
      const Eigen::VectorXd sol = lu.solve(rhs);
      dx = sol.head(n);
      dy = sol.tail(p);
      if (m > 0) {
        ds = -r_i - a * dx;
        dz = (rc - z.cwiseProduct(ds)).cwiseQuotient(s);
      }
    };

    Eigen::VectorXd dx, dy, ds, dz;
    if (m > 0) {
      const Eigen::VectorXd rc_aff = -s.cwiseProduct(z);
      direction(rc_aff, dx, dy, ds, dz);
      const double alpha_aff = std::min(max_step(s, ds), max_step(z, dz));
      const double mu_aff = (s + alpha_aff * ds).dot(z + alpha_aff * dz) / static_cast<double>(m);
      const double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
      const Eigen::VectorXd rc = rc_aff.array() + sigma * mu - ds.cwiseProduct(dz).array();
      direction(rc, dx, dy, ds, dz);
      const double alpha = std::min(1.0, 0.995 * std::min(max_step(s, ds), max_step(z, dz)));
      x += alpha * dx;
      y += alpha * dy;
      s += alpha * ds;
      z += alpha * dz;
    } else {
      direction(Eigen::VectorXd(), dx, dy, ds, dz);
      x += dx;
      y += dy;
    }
    if (!x.allFinite()) break;
  }
  result.x = x;
  result.inequality_duals = z;
  result.equality_duals = y;
  result.objective = 0.5 * x.dot(h * x) + qp.linear.dot(x);
  return result;
}

}  // namespace fdsm
