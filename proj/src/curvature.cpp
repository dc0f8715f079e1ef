#include "mlgeom/curvature.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mlgeom {

GramMatrix::GramMatrix(const MatrixXd& entries) : entries_(0.5 * (entries + entries.transpose())) {
  if (entries.rows() != entries.cols())
    throw DimensionError("Gram matrix must be square");
  const Index m = entries_.rows();
  if (m == 0)
    return;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(entries_, Eigen::EigenvaluesOnly);
  min_eigenvalue_ = eig.eigenvalues().minCoeff();
  const double threshold = 1e-12 * entries_.trace() / static_cast<double>(m);
  if (!(min_eigenvalue_ > threshold))
    throw DegenerateChartError("degenerate chart: Gram minimum eigenvalue " + std::to_string(min_eigenvalue_) +
                               " <= " + std::to_string(threshold));
  llt_.compute(entries_);
  if (llt_.info() != Eigen::Success)
    throw DegenerateChartError("degenerate chart: Cholesky factorization failed");
}

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

double step_for(double ui, double power_root) { return std::pow(eps, power_root) * std::max(1.0, std::abs(ui)); }

void check_point(const Chart& chart, const VectorXd& u) {
  if (u.size() != chart.param_dim)
    throw DimensionError("chart parameter vector has length " + std::to_string(u.size()) + ", expected " +
                         std::to_string(chart.param_dim));
}

} // namespace

FiniteDifferenceDerivatives finite_difference_derivatives(const Chart& chart, const VectorXd& u,
                                                          std::optional<double> step) {
  check_point(chart, u);
  if (step && !(*step > 0))
    throw std::invalid_argument("finite difference step must be positive");
  const Index m = chart.param_dim;
  const Index n = chart.ambient_dim;
  FiniteDifferenceDerivatives out{MatrixXd(n, m), SecondDerivatives(m, n)};

  for (Index i = 0; i < m; ++i) {
    const double h = step ? *step : step_for(u[i], 1.0 / 3.0);
    VectorXd up = u, dn = u;
    up[i] += h;
    dn[i] -= h;
    out.first.col(i) = (chart.value(up) - chart.value(dn)) / (2 * h);
  }

  VectorXd h2(m);
  for (Index i = 0; i < m; ++i)
    h2[i] = step ? *step : step_for(u[i], 0.25);
  const VectorXd f0 = chart.value(u);
  for (Index i = 0; i < m; ++i) {
    VectorXd up = u, dn = u;
    up[i] += h2[i];
    dn[i] -= h2[i];
    out.second(i, i) = (chart.value(up) - 2 * f0 + chart.value(dn)) / (h2[i] * h2[i]);
    for (Index j = i + 1; j < m; ++j) {
      auto shifted = [&](double si, double sj) {
        VectorXd w = u;
        w[i] += si * h2[i];
        w[j] += sj * h2[j];
        return chart.value(w);
      };
      const VectorXd d = (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4 * h2[i] * h2[j]);
      out.second.set_symmetric(i, j, d);
    }
  }
  return out;
}

MatrixXd first_derivatives(const Chart& chart, const VectorXd& u, DerivativeBackend backend) {
  check_point(chart, u);
  if (backend == DerivativeBackend::Auto && chart.has_analytic_first())
    return chart.first_derivs(u);
  return finite_difference_derivatives(chart, u).first;
}

SecondDerivatives second_derivatives(const Chart& chart, const VectorXd& u, DerivativeBackend backend) {
  check_point(chart, u);
  if (backend == DerivativeBackend::Auto && chart.has_analytic_second())
    return chart.second_derivs(u);
  return finite_difference_derivatives(chart, u).second;
}

TangentFrame make_frame(MatrixXd basis) {
  GramMatrix gram(basis.transpose() * basis);
  return TangentFrame{std::move(basis), std::move(gram)};
}

TangentFrame tangent_frame(const Chart& chart, const VectorXd& u, DerivativeBackend backend) {
  return make_frame(first_derivatives(chart, u, backend));
}

VectorXd normal_project(const VectorXd& v, const TangentFrame& frame) {
  if (v.size() != frame.basis.rows())
    throw DimensionError("normal_project: vector length does not match ambient dimension");
  if (frame.param_dim() == 0)
    return v;
  const VectorXd c = frame.gram.solve(frame.basis.transpose() * v);
  return v - frame.basis * c;
}

LocalGeometry local_geometry(const Chart& chart, const VectorXd& u, DerivativeBackend backend) {
  TangentFrame frame = tangent_frame(chart, u, backend);
  SecondDerivatives second = second_derivatives(chart, u, backend);
  const Index m = chart.param_dim;
  SecondDerivatives normal(m, chart.ambient_dim);
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j)
      normal.set_symmetric(i, j, normal_project(second(i, j), frame));
  return LocalGeometry{std::move(frame), std::move(second), std::move(normal)};
}

VectorXd second_fundamental_form(const LocalGeometry& geometry, const VectorXd& x, const VectorXd& y) {
  const Index m = geometry.frame.param_dim();
  if (x.size() != m || y.size() != m)
    throw DimensionError("second_fundamental_form: tangent coordinates have wrong length");
  VectorXd b = VectorXd::Zero(geometry.normal_second.ambient_dim());
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      b += x[i] * y[j] * geometry.normal_second(i, j);
  return b;
}

VectorXd second_fundamental_form(const Chart& chart, const VectorXd& u, const VectorXd& x, const VectorXd& y,
                                 DerivativeBackend backend) {
  return second_fundamental_form(local_geometry(chart, u, backend), x, y);
}

MeanCurvature mean_curvature(const LocalGeometry& geometry) {
  const Index m = geometry.frame.param_dim();
  const MatrixXd ginv = geometry.frame.gram.inverse();
  MeanCurvature h;
  h.vector = VectorXd::Zero(geometry.normal_second.ambient_dim());
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      h.vector += ginv(i, j) * geometry.normal_second(i, j);
  h.norm = h.vector.norm();
  h.curvature_scale = geometry.second.max_norm();
  return h;
}

MeanCurvature mean_curvature(const Chart& chart, const VectorXd& u, DerivativeBackend backend) {
  return mean_curvature(local_geometry(chart, u, backend));
}

Chart compose_affine(const Chart& chart, const MatrixXd& a, const VectorXd& b) {
  if (a.rows() != chart.param_dim || b.size() != chart.param_dim)
    throw DimensionError("compose_affine: affine map does not land in the chart's parameter space");
  Chart out;
  out.param_dim = a.cols();
  out.ambient_dim = chart.ambient_dim;
  out.value = [chart, a, b](const VectorXd& w) { return chart.value(a * w + b); };
  if (chart.has_analytic_first())
    out.first_derivs = [chart, a, b](const VectorXd& w) -> MatrixXd { return chart.first_derivs(a * w + b) * a; };
  if (chart.has_analytic_second())
    out.second_derivs = [chart, a, b](const VectorXd& w) {
      const SecondDerivatives d2 = chart.second_derivs(a * w + b);
      const Index m = chart.param_dim;
      const Index k = a.cols();
      SecondDerivatives res(k, chart.ambient_dim);
      for (Index p = 0; p < k; ++p)
        for (Index q = p; q < k; ++q) {
          VectorXd acc = VectorXd::Zero(chart.ambient_dim);
          for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j)
              acc += a(i, p) * a(j, q) * d2(i, j);
          res.set_symmetric(p, q, acc);
        }
      return res;
    };
  return out;
}

} // namespace mlgeom
