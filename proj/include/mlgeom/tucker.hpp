#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlgeom/curvature.hpp"
#include "mlgeom/tensor.hpp"

namespace mlgeom {

/// L_{alpha beta} = E_{beta alpha} - E_{alpha beta} on R^size, 0-based alpha < beta.
struct SkewGenerator {
  Index size = 0;
  Index alpha = 0;
  Index beta = 0;

  MatrixXd matrix() const;
};

/// e^{u L}: the plane rotation by angle u taking e_alpha towards e_beta.
MatrixXd rotation_exp(const SkewGenerator& generator, double u);

/// dim T_{d,r} = sum_j r_j (n_j - r_j) + prod_j r_j.
Index tucker_dimension(const Shape& shape, const MultilinearRank& rank);

/// Number of rotation angles for one mode: r (n - r).
inline Index grassmann_param_count(Index n, Index r) { return r * (n - r); }

/// (lambda, mu) of the p-th angle, ordered (0,r),(1,r),...,(r-1,r),(0,r+1),... (all 0-based).
std::pair<Index, Index> grassmann_pair(Index n, Index r, Index p);

/// g(u) = product of e^{u_p L_p} in grassmann_pair order.
MatrixXd grassmann_factor(Index n, Index r, const VectorXd& angles);

struct GrassmannDerivatives {
  MatrixXd value;
  std::vector<MatrixXd> first;  ///< dg/du_p
  std::vector<MatrixXd> second; ///< d^2 g/du_p du_q at p * P + q

  const MatrixXd& second_at(Index p, Index q) const {
    return second.at(static_cast<std::size_t>(p * static_cast<Index>(first.size()) + q));
  }
};

/// Exact derivatives of g by the product rule, valid at any angles.
GrassmannDerivatives grassmann_factor_derivatives(Index n, Index r, const VectorXd& angles);

/// d^2 g / du_p du_q at 0 for p <= q, (lambda, mu) = pair(p), (lambda', mu') = pair(q):
/// -delta_{mu mu'} E_{lambda lambda'} - delta_{lambda lambda'} E_{mu mu'}. Symmetric in (p, q).
MatrixXd grassmann_second_derivative_at_origin(Index n, Index r, Index p, Index q);

/// A rank-r tensor rotated so that its support is the leading r_1 x ... x r_d block.
struct CanonicalPoint {
  Shape shape;
  MultilinearRank rank;
  DenseTensor core;           ///< shape (r_1, ..., r_d)
  OrthogonalTuple<double> aligning; ///< group_action(aligning, original) ~ embedded()

  DenseTensor embedded() const { return embed(core, shape); }
};

/// Canonical point for a core already in position; the aligning tuple is the identity.
CanonicalPoint canonical_point_from_core(const Shape& shape, const DenseTensor& core);

/// Mode-wise SVD (HOSVD) alignment. Singular vectors are sign-normalized so that their first
/// entry of largest magnitude is positive. Throws AmbiguousRankError when some kept singular
/// value sits within 1e3 of the rank threshold or the rotated tensor leaks outside the block.
CanonicalPoint canonicalize(const DenseTensor& t, std::optional<double> rel_tol = std::nullopt);

/// Offsets of the chart coordinates (u^1, ..., u^d, S).
class TuckerLayout {
public:
  TuckerLayout(const Shape& shape, const MultilinearRank& rank);

  Index order() const { return static_cast<Index>(u_offsets_.size()); }
  Index u_offset(Index mode) const { return u_offsets_.at(static_cast<std::size_t>(mode)); }
  Index u_size(Index mode) const { return u_sizes_.at(static_cast<std::size_t>(mode)); }
  Index s_offset() const { return s_offset_; }
  Index s_size() const { return s_size_; }
  Index size() const { return s_offset_ + s_size_; }

  /// (mode, p) for a u coordinate, or (-1, s index) for an S coordinate.
  std::pair<Index, Index> locate(Index coordinate) const;

private:
  std::vector<Index> u_offsets_;
  std::vector<Index> u_sizes_;
  Index s_offset_ = 0;
  Index s_size_ = 0;
};

struct TuckerChartParams {
  std::vector<VectorXd> u; ///< block j has r_j (n_j - r_j) angles
  DenseTensor s;           ///< perturbation of the core

  VectorXd pack() const;
  static TuckerChartParams unpack(const Shape& shape, const MultilinearRank& rank, const VectorXd& packed);
};

/// T(u^1, ..., u^d, S) = (g(u^1), ..., g(u^d)) * embed(core + S) around a canonical point.
class TuckerChart {
public:
  explicit TuckerChart(CanonicalPoint point);

  const CanonicalPoint& point() const { return point_; }
  const TuckerLayout& layout() const { return layout_; }
  Index param_dim() const { return layout_.size(); }
  Index ambient_dim() const { return point_.shape.numel(); }

  DenseTensor value_tensor(const VectorXd& params) const;
  VectorXd value(const VectorXd& params) const { return value_tensor(params).data(); }
  MatrixXd first_derivs(const VectorXd& params) const;
  SecondDerivatives second_derivs(const VectorXd& params) const;

  /// Engine view with analytic first and second derivatives.
  Chart chart() const;

private:
  CanonicalPoint point_;
  TuckerLayout layout_;
};

/// Tangent vectors at the origin written out entrywise: dT/ds_I = e_I and
/// dT/du^j_{lambda mu} = sum t_{..lambda..} e_{..mu..}. Columns follow TuckerLayout.
MatrixXd origin_tangent_vectors(const CanonicalPoint& point);

/// d^2 T / du^j_{lambda mu} du^j_{lambda' mu} at the origin:
/// -sum t_{..lambda'..} e_{..lambda..} over the core block (independent of mu).
DenseTensor same_fiber_second_derivative(const CanonicalPoint& point, Index mode, Index lambda, Index lambda_prime);

struct GramBlockReport {
  MatrixXd gram;
  std::vector<MatrixXd> row_grams; ///< A_j: Gram of the first r_j rows of the j-th flattening
  double gram_max = 0.0;           ///< max |G_ab|
  double off_structure_max = 0.0;  ///< max |G_ab| over structurally zero entries
  double s_block_deviation = 0.0;  ///< max |G_ss - I|
  double a_block_deviation = 0.0;  ///< max |diagonal copy - A_j|
  double min_eigenvalue = 0.0;
  double trace = 0.0;
};

/// Gram matrix of the chart at the origin and its deviation from the block structure
/// diag(I_{n_1 - r_1} (x) A_1, ..., I_{n_d - r_d} (x) A_d, I).
GramBlockReport gram_block_report(const CanonicalPoint& point);

struct MinimalityConfig {
  Shape shape;
  MultilinearRank rank;
  Index samples = 20;
  std::uint64_t seed = 0;
  double tol = 1e-8;
};

struct SampleReport {
  Index index = 0;
  bool evaluated = false;
  std::string failure; ///< set when rank detection failed
  Index param_count = 0;
  double gram_min_eig = 0.0;
  double curvature_ratio = 0.0;
  double off_structure_max = 0.0;
};

struct MinimalityReport {
  MinimalityConfig config;
  std::vector<SampleReport> samples;
  Index rank_failures = 0;
  double max_ratio = 0.0;
  bool pass = false;
};

/// Draws `samples` random rank-r tensors (sample k from stream_seed(seed, k)), canonicalizes
/// each, and evaluates |H| / max|d^2 r| at the origin with analytic derivatives.
/// Passes iff at least one sample was evaluated and every evaluated ratio is <= tol.
MinimalityReport verify_minimality(const MinimalityConfig& config);

SampleReport evaluate_minimality_sample(const MinimalityConfig& config, Index index);

} // namespace mlgeom
