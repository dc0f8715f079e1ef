#pragma once

#include <string>
#include <vector>

#include "mlgeom/curvature.hpp"
#include "mlgeom/tensor.hpp"

namespace mlgeom {

/// scale * v_1 (x) ... (x) v_d with unit factors.
struct SegrePoint {
  std::vector<VectorXd> factors;
  double scale = 1.0;

  /// Validates unit factors (to 1e-12) and a nonzero scale.
  static SegrePoint make(std::vector<VectorXd> factors, double scale = 1.0);
  /// e_0 (x) ... (x) e_0.
  static SegrePoint canonical(const Shape& shape);

  Shape shape() const;
  DenseTensor tensor() const;
};

/// Basic tensors of the levels N_0, ..., N_d at e_0 (x) ... (x) e_0: level k holds the
/// multi-indices with exactly k nonzero entries.
struct NormalFrame {
  Shape shape;
  SegrePoint base;
  std::vector<std::vector<std::vector<Index>>> levels;

  Index level_count() const { return static_cast<Index>(levels.size()); }
  Index level_size(Index k) const { return static_cast<Index>(levels.at(static_cast<std::size_t>(k)).size()); }
  DenseTensor basic(Index k, Index i) const;
};

NormalFrame normal_frame(const Shape& shape);

/// Number of nonzero entries of a multi-index, i.e. the level of its basic tensor.
Index level_of(std::span<const Index> index);

struct LinearFunctional {
  DenseTensor ell;

  double operator()(const DenseTensor& t) const { return frobenius_inner(ell, t); }
};

struct FunctionalDecomposition {
  std::vector<DenseTensor> components; ///< projection onto N_k, k = 0..d
  std::vector<double> level_norms;
  Index k_star = 0;                    ///< smallest k >= 2 with a nonzero component
  std::vector<Index> witness;          ///< basic tensor of N_{k*} with the largest |coefficient|
  double coefficient = 0.0;
};

/// Throws NotNormalError when |N_0 + N_1 component| > tol |ell| and NoWitnessError when
/// every level k >= 2 is below tol |ell|.
FunctionalDecomposition decompose_functional(const LinearFunctional& ell, const NormalFrame& frame,
                                             double tol = 1e-10);

/// u -> (x)_j e^{s_j u L_{0, alpha_j}} e_0 on the probed modes, e_0 elsewhere.
struct ProbeCurve {
  Shape shape;
  std::vector<Index> modes;   ///< strictly increasing
  std::vector<Index> targets; ///< alpha_j >= 1
  std::vector<int> signs;     ///< +1 or -1

  /// Unit factor of `mode` at parameter u.
  VectorXd factor(Index mode, double u) const;
  DenseTensor operator()(double u) const;
};

ProbeCurve probe_curve(const NormalFrame& frame, std::vector<Index> modes, std::vector<Index> targets,
                       std::vector<int> signs);

/// <gamma^(j)(0), ell> for j = 0..max_order, exact from the trigonometric form of the pairing.
std::vector<double> curve_pairings(const ProbeCurve& curve, const LinearFunctional& ell, int max_order);

struct WitnessPair {
  Index k_star = 0;
  std::vector<Index> witness;
  double coefficient = 0.0;
  ProbeCurve curve_plus;
  ProbeCurve curve_minus;
  double u_plus = 0.0;
  double u_minus = 0.0;
  DenseTensor point_plus;
  DenseTensor point_minus;
  double pairing_plus = 0.0;  ///< <point_plus - T, ell> > 0
  double pairing_minus = 0.0; ///< <point_minus - T, ell> < 0
};

/// Rank-one points on both sides of the hyperplane {T + V : <ell, V> = 0} at the base point,
/// found on gamma and tilde-gamma by halving u from epsilon down to 1e-12.
WitnessPair extremum_witness(const LinearFunctional& ell, const NormalFrame& frame, double epsilon = 0.1,
                             double tol = 1e-10);

/// g with group_action(g, point.tensor()) == point.scale * e_0 (x) ... (x) e_0 (Householder reflections).
OrthogonalTuple<double> aligning_rotation(const SegrePoint& point);

/// extremum_witness at an arbitrary Segre point; returned points are in the original coordinates.
WitnessPair extremum_witness_at(const LinearFunctional& ell, const SegrePoint& point, double epsilon = 0.1,
                                double tol = 1e-10);

struct SliceReduction {
  LinearFunctional reduced; ///< v = ell + mu a, orthogonal to T
  double mu = 0.0;
  double offset = 0.0; ///< mu * c: <v, X> = <ell, X> + offset on the slice <a, X> = c
};

SliceReduction slice_reduce(const LinearFunctional& ell, const DenseTensor& a, double c, const SegrePoint& point);

/// Independence model of d discrete variables: parameters are the first n_j - 1 probabilities
/// of each variable, the last is 1 - sum. Value is the joint distribution (x)_j p^j.
Chart independence_model_chart(const std::vector<Index>& dims);

struct FieldSample {
  VectorXd params;
  VectorXd point;
  VectorXd mean_curvature;
  double norm = 0.0;
  double normality_ratio = 0.0; ///< max_i |<H, b_i>| / (|H| |b_i|)
};

struct SliceField {
  std::vector<Index> dims;
  Index grid = 0;
  std::vector<FieldSample> samples; ///< lexicographic in grid indices, last fastest
};

/// Interior grid point x_i = (i + 1) / (grid + 1) per parameter, mapped to each simplex by
/// stick breaking (p_1 = x_1, p_2 = x_2 (1 - p_1), ...). grid^m samples in total.
SliceField slice_curvature_field(const std::vector<Index>& dims, Index grid);

/// Header param_*, tensor_*, H_*, H_norm; one row per sample.
std::string slice_field_csv(const SliceField& field);

/// <b(x_i, x_j), ell> over the rank-one chart's tangent basis at the base point.
MatrixXd sff_degeneracy_check(const NormalFrame& frame, const LinearFunctional& ell);

} // namespace mlgeom
