#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "mlgeom/errors.hpp"
#include "mlgeom/tensor.hpp"

namespace mlgeom {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Symmetric array of ambient vectors d^2 r / du_i du_j, stored column (i * m + j).
class SecondDerivatives {
public:
  SecondDerivatives(Index param_dim, Index ambient_dim)
      : m_(param_dim), columns_(MatrixXd::Zero(ambient_dim, param_dim * param_dim)) {}

  Index param_dim() const { return m_; }
  Index ambient_dim() const { return columns_.rows(); }

  auto operator()(Index i, Index j) { return columns_.col(i * m_ + j); }
  auto operator()(Index i, Index j) const { return columns_.col(i * m_ + j); }

  /// Writes v into both (i, j) and (j, i).
  template <typename Derived>
  void set_symmetric(Index i, Index j, const Eigen::MatrixBase<Derived>& v) {
    columns_.col(i * m_ + j) = v;
    columns_.col(j * m_ + i) = v;
  }

  const MatrixXd& columns() const { return columns_; }

  /// max_{i,j} |d^2 r_ij|.
  double max_norm() const { return m_ ? columns_.colwise().norm().maxCoeff() : 0.0; }

private:
  Index m_;
  MatrixXd columns_;
};

/// A local parametrization r: U in R^m -> R^N. Derivative maps are optional; when
/// absent the engine falls back to central finite differences of `value`.
struct Chart {
  Index param_dim = 0;
  Index ambient_dim = 0;
  std::function<VectorXd(const VectorXd&)> value;
  std::function<MatrixXd(const VectorXd&)> first_derivs; ///< N x m
  std::function<SecondDerivatives(const VectorXd&)> second_derivs;

  bool has_analytic_first() const { return static_cast<bool>(first_derivs); }
  bool has_analytic_second() const { return static_cast<bool>(second_derivs); }
};

enum class DerivativeBackend {
  Auto,            ///< analytic when the chart supplies it, else finite differences
  FiniteDifference ///< always finite differences
};

/// Symmetric positive-definite metric matrix of a tangent basis.
class GramMatrix {
public:
  /// Throws DegenerateChartError if lambda_min <= 1e-12 * trace / m.
  explicit GramMatrix(const MatrixXd& entries);

  const MatrixXd& entries() const { return entries_; }
  Index size() const { return entries_.rows(); }
  double min_eigenvalue() const { return min_eigenvalue_; }
  double trace() const { return entries_.trace(); }

  /// Solves G x = rhs.
  MatrixXd solve(const MatrixXd& rhs) const { return llt_.solve(rhs); }
  MatrixXd inverse() const { return solve(MatrixXd::Identity(size(), size())); }

private:
  MatrixXd entries_;
  Eigen::LLT<MatrixXd> llt_;
  double min_eigenvalue_ = 0.0;
};

struct TangentFrame {
  MatrixXd basis; ///< N x m, column i = d r / du_i
  GramMatrix gram;

  Index param_dim() const { return basis.cols(); }
};

struct MeanCurvature {
  VectorXd vector;
  double norm = 0.0;
  /// max_{i,j} |d^2 r_ij| at the evaluation point.
  double curvature_scale = 0.0;

  /// |H| / curvature_scale; 0 for charts with vanishing second derivatives.
  double ratio() const { return curvature_scale > 0 ? norm / curvature_scale : 0.0; }
};

struct FiniteDifferenceDerivatives {
  MatrixXd first;
  SecondDerivatives second;
};

/// Everything the engine knows at one chart point.
struct LocalGeometry {
  TangentFrame frame;
  SecondDerivatives second;
  SecondDerivatives normal_second; ///< (d^2 r_ij)^perp
};

/// Central differences. With `step` unset: h_i = eps^(1/3) max(1, |u_i|) for first
/// derivatives and eps^(1/4) max(1, |u_i|) for second derivatives.
FiniteDifferenceDerivatives finite_difference_derivatives(const Chart& chart, const VectorXd& u,
                                                          std::optional<double> step = std::nullopt);

MatrixXd first_derivatives(const Chart& chart, const VectorXd& u,
                           DerivativeBackend backend = DerivativeBackend::Auto);
SecondDerivatives second_derivatives(const Chart& chart, const VectorXd& u,
                                     DerivativeBackend backend = DerivativeBackend::Auto);

TangentFrame make_frame(MatrixXd basis);
TangentFrame tangent_frame(const Chart& chart, const VectorXd& u,
                           DerivativeBackend backend = DerivativeBackend::Auto);

/// v minus its orthogonal projection onto span(frame.basis).
VectorXd normal_project(const VectorXd& v, const TangentFrame& frame);

LocalGeometry local_geometry(const Chart& chart, const VectorXd& u,
                             DerivativeBackend backend = DerivativeBackend::Auto);

/// b(x, y) = sum_ij x^i y^j (d^2 r_ij)^perp, x and y in chart coordinates.
VectorXd second_fundamental_form(const Chart& chart, const VectorXd& u, const VectorXd& x,
                                 const VectorXd& y, DerivativeBackend backend = DerivativeBackend::Auto);
VectorXd second_fundamental_form(const LocalGeometry& geometry, const VectorXd& x, const VectorXd& y);

/// H = sum_ij (G^-1)_ij (d^2 r_ij)^perp.
MeanCurvature mean_curvature(const Chart& chart, const VectorXd& u,
                             DerivativeBackend backend = DerivativeBackend::Auto);
MeanCurvature mean_curvature(const LocalGeometry& geometry);

/// w -> chart(A w + b). Analytic derivatives are carried over when present.
Chart compose_affine(const Chart& chart, const MatrixXd& a, const VectorXd& b);

} // namespace mlgeom
