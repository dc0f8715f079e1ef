#include "mlgeom/segre.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mlgeom/format.hpp"
#include "mlgeom/tucker.hpp"

namespace mlgeom {

SegrePoint SegrePoint::make(std::vector<VectorXd> factors, double scale) {
  if (factors.empty())
    throw DimensionError("Segre point needs at least one factor");
  if (!(scale != 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("Segre point scale must be finite and nonzero");
  for (const auto& v : factors)
    if (v.size() < 1 || !(std::abs(v.norm() - 1.0) <= 1e-12))
      throw std::invalid_argument("Segre point factors must be unit vectors");
  return SegrePoint{std::move(factors), scale};
}

SegrePoint SegrePoint::canonical(const Shape& shape) {
  std::vector<VectorXd> factors;
  for (Index n : shape.dims())
    factors.push_back(VectorXd::Unit(n, 0));
  return SegrePoint{std::move(factors), 1.0};
}

Shape SegrePoint::shape() const {
  std::vector<Index> dims;
  for (const auto& v : factors)
    dims.push_back(v.size());
  return Shape(std::move(dims));
}

DenseTensor SegrePoint::tensor() const { return scale * outer_product(factors); }

Index level_of(std::span<const Index> index) {
  return static_cast<Index>(std::count_if(index.begin(), index.end(), [](Index i) { return i != 0; }));
}

DenseTensor NormalFrame::basic(Index k, Index i) const {
  return basic_tensor(shape, levels.at(static_cast<std::size_t>(k)).at(static_cast<std::size_t>(i)));
}

NormalFrame normal_frame(const Shape& shape) {
  NormalFrame frame{shape, SegrePoint::canonical(shape), {}};
  frame.levels.resize(static_cast<std::size_t>(shape.order() + 1));
  for (Index lin = 0; lin < shape.numel(); ++lin) {
    auto idx = shape.multi_index(lin);
    frame.levels[static_cast<std::size_t>(level_of(idx))].push_back(std::move(idx));
  }
  return frame;
}

FunctionalDecomposition decompose_functional(const LinearFunctional& ell, const NormalFrame& frame, double tol) {
  const DenseTensor& l = ell.ell;
  if (!(l.shape() == frame.shape))
    throw DimensionError("functional shape " + l.shape().to_string() + " does not match frame " +
                         frame.shape.to_string());
  FunctionalDecomposition dec;
  for (Index k = 0; k < frame.level_count(); ++k) {
    DenseTensor part(frame.shape);
    for (const auto& idx : frame.levels[static_cast<std::size_t>(k)])
      part(idx) = l(idx);
    dec.level_norms.push_back(part.norm());
    dec.components.push_back(std::move(part));
  }
  const double scale = l.norm();
  const double tangent = std::hypot(dec.level_norms[0], frame.level_count() > 1 ? dec.level_norms[1] : 0.0);
  if (tangent > tol * scale)
    throw NotNormalError("functional is not normal at the base point: tangent component norm " +
                             format_double(tangent),
                         tangent);
  for (Index k = 2; k < frame.level_count(); ++k) {
    if (!(dec.level_norms[static_cast<std::size_t>(k)] > tol * scale))
      continue;
    dec.k_star = k;
    for (const auto& idx : frame.levels[static_cast<std::size_t>(k)])
      if (std::abs(l(idx)) > std::abs(dec.coefficient)) {
        dec.coefficient = l(idx);
        dec.witness = idx;
      }
    return dec;
  }
  throw NoWitnessError("functional vanishes on every level k >= 2");
}

VectorXd ProbeCurve::factor(Index mode, double u) const {
  VectorXd v = VectorXd::Unit(shape.dim(mode), 0);
  for (std::size_t j = 0; j < modes.size(); ++j)
    if (modes[j] == mode) {
      v[0] = std::cos(u);
      v[targets[j]] = signs[j] * std::sin(u);
    }
  return v;
}

DenseTensor ProbeCurve::operator()(double u) const {
  std::vector<VectorXd> factors;
  for (Index k = 0; k < shape.order(); ++k)
    factors.push_back(factor(k, u));
  return outer_product(factors);
}

ProbeCurve probe_curve(const NormalFrame& frame, std::vector<Index> modes, std::vector<Index> targets,
                       std::vector<int> signs) {
  if (modes.empty() || modes.size() != targets.size() || modes.size() != signs.size())
    throw DimensionError("probe_curve: modes, targets and signs must be nonempty and of equal length");
  for (std::size_t j = 0; j < modes.size(); ++j) {
    if (modes[j] < 0 || modes[j] >= frame.shape.order() || (j > 0 && modes[j] <= modes[j - 1]))
      throw DimensionError("probe_curve: modes must be strictly increasing and in range");
    if (targets[j] < 1 || targets[j] >= frame.shape.dim(modes[j]))
      throw DimensionError("probe_curve: targets must satisfy 1 <= alpha < n");
    if (signs[j] != 1 && signs[j] != -1)
      throw DimensionError("probe_curve: signs must be +1 or -1");
  }
  return ProbeCurve{frame.shape, std::move(modes), std::move(targets), std::move(signs)};
}

namespace {

using Series = std::vector<double>; // Taylor coefficients at 0, truncated

Series multiply(const Series& a, const Series& b) {
  Series c(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < c.size(); ++j)
      c[i + j] += a[i] * b[j];
  return c;
}

Series trig_series(bool sine, int max_order) {
  Series s(static_cast<std::size_t>(max_order + 1), 0.0);
  double fact = 1.0;
  for (int n = 0; n <= max_order; ++n) {
    if (n > 0)
      fact *= n;
    const bool odd = n % 2 == 1;
    if (odd == sine)
      s[static_cast<std::size_t>(n)] = ((n / 2) % 2 == 0 ? 1.0 : -1.0) / fact;
  }
  return s;
}

} // namespace

std::vector<double> curve_pairings(const ProbeCurve& curve, const LinearFunctional& ell, int max_order) {
  if (max_order < 0 || max_order > 8)
    throw std::invalid_argument("curve_pairings: order must lie in [0, 8]");
  if (!(ell.ell.shape() == curve.shape))
    throw DimensionError("curve_pairings: functional shape does not match the curve");
  const auto k = curve.modes.size();
  const Series sin_s = trig_series(true, max_order);
  const Series cos_s = trig_series(false, max_order);
  Series total(static_cast<std::size_t>(max_order + 1), 0.0);
  // <gamma(u), ell> = sum over subsets S of probed modes of
  //   ell_{I(S)} prod_{j in S} s_j sin u prod_{j not in S} cos u
  std::vector<Index> idx(static_cast<std::size_t>(curve.shape.order()), 0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    double coeff = 1.0;
    Series term(total.size(), 0.0);
    term[0] = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      const bool in = (mask >> j) & 1U;
      idx[static_cast<std::size_t>(curve.modes[j])] = in ? curve.targets[j] : 0;
      if (in)
        coeff *= curve.signs[j];
      term = multiply(term, in ? sin_s : cos_s);
    }
    coeff *= ell.ell(idx);
    if (coeff == 0.0)
      continue;
    for (std::size_t n = 0; n < total.size(); ++n)
      total[n] += coeff * term[n];
  }
  double fact = 1.0;
  for (std::size_t n = 0; n < total.size(); ++n) {
    if (n > 0)
      fact *= static_cast<double>(n);
    total[n] *= fact;
  }
  return total;
}

WitnessPair extremum_witness(const LinearFunctional& ell, const NormalFrame& frame, double epsilon, double tol) {
  if (!(epsilon > 0))
    throw std::invalid_argument("extremum_witness: epsilon must be positive");
  const FunctionalDecomposition dec = decompose_functional(ell, frame, tol);
  std::vector<Index> modes, targets;
  for (Index j = 0; j < frame.shape.order(); ++j)
    if (dec.witness[static_cast<std::size_t>(j)] != 0) {
      modes.push_back(j);
      targets.push_back(dec.witness[static_cast<std::size_t>(j)]);
    }
  std::vector<int> plus_signs(modes.size(), 1);
  std::vector<int> flipped = plus_signs;
  flipped[0] = -1;
  ProbeCurve gamma = probe_curve(frame, modes, targets, plus_signs);
  ProbeCurve gamma_tilde = probe_curve(frame, modes, targets, flipped);
  if (dec.coefficient < 0)
    std::swap(gamma, gamma_tilde);

  const DenseTensor base = frame.base.tensor();
  constexpr double floor = 1e-12;
  auto search = [&](const ProbeCurve& curve, double sign) {
    for (double u = epsilon; u >= floor; u *= 0.5) {
      DenseTensor p = curve(u);
      const double pairing = ell(p - base);
      if (sign * pairing > 0)
        return std::make_tuple(u, std::move(p), pairing);
    }
    throw NumericalFailure("extremum_witness: no sign change found down to u = 1e-12");
  };
  auto [u_plus, p_plus, v_plus] = search(gamma, 1.0);
  auto [u_minus, p_minus, v_minus] = search(gamma_tilde, -1.0);
  return WitnessPair{dec.k_star,
                     dec.witness,
                     dec.coefficient,
                     std::move(gamma),
                     std::move(gamma_tilde),
                     u_plus,
                     u_minus,
                     std::move(p_plus),
                     std::move(p_minus),
                     v_plus,
                     v_minus};
}

OrthogonalTuple<double> aligning_rotation(const SegrePoint& point) {
  std::vector<MatrixXd> factors;
  for (const auto& v : point.factors) {
    const Index n = v.size();
    VectorXd w = v - VectorXd::Unit(n, 0);
    const double ww = w.squaredNorm();
    if (ww <= 1e-30)
      factors.push_back(MatrixXd::Identity(n, n));
    else
      factors.push_back(MatrixXd::Identity(n, n) - (2.0 / ww) * w * w.transpose());
  }
  return OrthogonalTuple<double>(std::move(factors));
}

WitnessPair extremum_witness_at(const LinearFunctional& ell, const SegrePoint& point, double epsilon, double tol) {
  const Shape shape = point.shape();
  if (!(ell.ell.shape() == shape))
    throw DimensionError("functional shape does not match the Segre point");
  const auto g = aligning_rotation(point);
  const auto g_inv = g.inverse();
  // <scale (gamma - base), g*ell> = <gamma - base, scale g*ell>
  const LinearFunctional moved{point.scale * group_action(g, ell.ell)};
  WitnessPair w = extremum_witness(moved, normal_frame(shape), epsilon, tol);
  const DenseTensor t = point.tensor();
  w.point_plus = group_action(g_inv, point.scale * w.point_plus);
  w.point_minus = group_action(g_inv, point.scale * w.point_minus);
  w.pairing_plus = ell(w.point_plus - t);
  w.pairing_minus = ell(w.point_minus - t);
  return w;
}

SliceReduction slice_reduce(const LinearFunctional& ell, const DenseTensor& a, double c, const SegrePoint& point) {
  const DenseTensor t = point.tensor();
  const double at = frobenius_inner(a, t);
  if (!(std::abs(at) > 1e-14 * a.norm() * t.norm()))
    throw SliceTangencyError("slice normal is orthogonal to the point");
  const double aa = a.data().squaredNorm();
  const DenseTensor residual = ell.ell - (frobenius_inner(ell.ell, a) / aa) * a;
  if (residual.norm() <= 1e-12 * ell.ell.norm())
    throw ConstantFunctionalError("functional is proportional to the slice normal");
  const double mu = -frobenius_inner(ell.ell, t) / at;
  return SliceReduction{LinearFunctional{ell.ell + mu * a}, mu, mu * c};
}

namespace {

std::vector<VectorXd> probability_vectors(const std::vector<Index>& dims, const VectorXd& theta) {
  std::vector<VectorXd> ps;
  Index pos = 0;
  for (Index n : dims) {
    VectorXd p(n);
    p.head(n - 1) = theta.segment(pos, n - 1);
    p[n - 1] = 1.0 - p.head(n - 1).sum();
    pos += n - 1;
    if (!(p.minCoeff() > 0.0))
      throw DomainError("independence model parameters outside the open simplex");
    ps.push_back(std::move(p));
  }
  return ps;
}

} // namespace

Chart independence_model_chart(const std::vector<Index>& dims) {
  if (dims.empty())
    throw DimensionError("independence model needs at least one variable");
  Index m = 0;
  for (Index n : dims) {
    if (n < 2)
      throw DimensionError("independence model variables need at least two states");
    m += n - 1;
  }
  // (mode, local index) of each parameter
  std::vector<std::pair<Index, Index>> owner;
  for (Index j = 0; j < static_cast<Index>(dims.size()); ++j)
    for (Index a = 0; a + 1 < dims[static_cast<std::size_t>(j)]; ++a)
      owner.emplace_back(j, a);
  auto direction = [dims](Index mode, Index a) {
    const Index n = dims[static_cast<std::size_t>(mode)];
    VectorXd d = VectorXd::Zero(n);
    d[a] = 1.0;
    d[n - 1] = -1.0;
    return d;
  };
  const Shape shape(dims);

  Chart chart;
  chart.param_dim = m;
  chart.ambient_dim = shape.numel();
  chart.value = [dims, m](const VectorXd& theta) -> VectorXd {
    if (theta.size() != m)
      throw DimensionError("independence model: wrong parameter count");
    return outer_product(probability_vectors(dims, theta)).data();
  };
  chart.first_derivs = [dims, m, owner, direction, n = shape.numel()](const VectorXd& theta) {
    if (theta.size() != m)
      throw DimensionError("independence model: wrong parameter count");
    const auto ps = probability_vectors(dims, theta);
    MatrixXd out(n, m);
    for (Index i = 0; i < m; ++i) {
      auto f = ps;
      const auto [mode, a] = owner[static_cast<std::size_t>(i)];
      f[static_cast<std::size_t>(mode)] = direction(mode, a);
      out.col(i) = outer_product(f).data();
    }
    return out;
  };
  chart.second_derivs = [dims, m, owner, direction, n = shape.numel()](const VectorXd& theta) {
    if (theta.size() != m)
      throw DimensionError("independence model: wrong parameter count");
    const auto ps = probability_vectors(dims, theta);
    SecondDerivatives out(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = i + 1; j < m; ++j) {
        const auto [mi, ai] = owner[static_cast<std::size_t>(i)];
        const auto [mj, aj] = owner[static_cast<std::size_t>(j)];
        if (mi == mj)
          continue; // affine in each variable's own parameters
        auto f = ps;
        f[static_cast<std::size_t>(mi)] = direction(mi, ai);
        f[static_cast<std::size_t>(mj)] = direction(mj, aj);
        out.set_symmetric(i, j, outer_product(f).data());
      }
    return out;
  };
  return chart;
}

SliceField slice_curvature_field(const std::vector<Index>& dims, Index grid) {
  if (grid < 1)
    throw std::invalid_argument("slice_curvature_field: grid must be positive");
  const Chart chart = independence_model_chart(dims);
  const Index m = chart.param_dim;
  SliceField field{dims, grid, {}};
  Index total = 1;
  for (Index i = 0; i < m; ++i)
    total *= grid;
  std::vector<Index> cell(static_cast<std::size_t>(m), 0);
  for (Index lin = 0; lin < total; ++lin) {
    Index rest = lin;
    for (Index i = m - 1; i >= 0; --i) {
      cell[static_cast<std::size_t>(i)] = rest % grid;
      rest /= grid;
    }
    VectorXd theta(m);
    Index pos = 0;
    for (Index n : dims) {
      double remaining = 1.0;
      for (Index a = 0; a + 1 < n; ++a, ++pos) {
        const double x = double(cell[static_cast<std::size_t>(pos)] + 1) / double(grid + 1);
        theta[pos] = x * remaining;
        remaining -= theta[pos];
      }
    }
    const LocalGeometry geo = local_geometry(chart, theta);
    const MeanCurvature h = mean_curvature(geo);
    double normality = 0.0;
    if (h.norm > 0)
      for (Index i = 0; i < m; ++i) {
        const auto b = geo.frame.basis.col(i);
        normality = std::max(normality, std::abs(h.vector.dot(b)) / (h.norm * b.norm()));
      }
    field.samples.push_back(FieldSample{theta, chart.value(theta), h.vector, h.norm, normality});
  }
  return field;
}

std::string slice_field_csv(const SliceField& field) {
  std::ostringstream out;
  if (field.samples.empty())
    return {};
  const Index m = field.samples.front().params.size();
  const Index n = field.samples.front().point.size();
  for (Index i = 0; i < m; ++i)
    out << "param_" << i << ',';
  for (Index i = 0; i < n; ++i)
    out << "tensor_" << i << ',';
  for (Index i = 0; i < n; ++i)
    out << "H_" << i << ',';
  out << "H_norm\n";
  for (const auto& s : field.samples) {
    for (Index i = 0; i < m; ++i)
      out << format_double(s.params[i]) << ',';
    for (Index i = 0; i < n; ++i)
      out << format_double(s.point[i]) << ',';
    for (Index i = 0; i < n; ++i)
      out << format_double(s.mean_curvature[i]) << ',';
    out << format_double(s.norm) << '\n';
  }
  return out.str();
}

MatrixXd sff_degeneracy_check(const NormalFrame& frame, const LinearFunctional& ell) {
  if (!(ell.ell.shape() == frame.shape))
    throw DimensionError("sff_degeneracy_check: functional shape does not match frame");
  std::vector<Index> ones(static_cast<std::size_t>(frame.shape.order()), 1);
  const DenseTensor core(Shape(ones), VectorXd::Ones(1));
  const TuckerChart chart(canonical_point_from_core(frame.shape, core));
  const LocalGeometry geo = local_geometry(chart.chart(), VectorXd::Zero(chart.param_dim()));
  const Index m = chart.param_dim();
  MatrixXd pairing(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      pairing(i, j) = geo.normal_second(i, j).dot(ell.ell.data());
  return pairing;
}

} // namespace mlgeom
