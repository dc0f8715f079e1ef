#include "mlgeom/tucker.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace mlgeom {

MatrixXd SkewGenerator::matrix() const {
  if (!(0 <= alpha && alpha < beta && beta < size))
    throw DimensionError("skew generator needs 0 <= alpha < beta < size");
  MatrixXd l = MatrixXd::Zero(size, size);
  l(beta, alpha) = 1.0;
  l(alpha, beta) = -1.0;
  return l;
}

MatrixXd rotation_exp(const SkewGenerator& generator, double u) {
  const auto& [n, a, b] = generator;
  if (!(0 <= a && a < b && b < n))
    throw DimensionError("skew generator needs 0 <= alpha < beta < size");
  MatrixXd r = MatrixXd::Identity(n, n);
  const double c = std::cos(u);
  const double s = std::sin(u);
  r(a, a) = c;
  r(b, b) = c;
  r(b, a) = s;
  r(a, b) = -s;
  return r;
}

Index tucker_dimension(const Shape& shape, const MultilinearRank& rank) {
  rank.validate_for(shape);
  if (rank.is_zero())
    return 0;
  Index dim = rank.core_size();
  for (Index j = 0; j < shape.order(); ++j)
    dim += grassmann_param_count(shape.dim(j), rank[j]);
  return dim;
}

std::pair<Index, Index> grassmann_pair(Index n, Index r, Index p) {
  if (p < 0 || p >= grassmann_param_count(n, r))
    throw DimensionError("grassmann_pair: angle index out of range");
  return {p % r, r + p / r};
}

namespace {

std::vector<MatrixXd> rotations(Index n, Index r, const VectorXd& angles) {
  const Index count = grassmann_param_count(n, r);
  if (angles.size() != count)
    throw DimensionError("grassmann factor expects " + std::to_string(count) + " angles");
  std::vector<MatrixXd> out;
  for (Index p = 0; p < count; ++p) {
    const auto [lambda, mu] = grassmann_pair(n, r, p);
    out.push_back(rotation_exp({n, lambda, mu}, angles[p]));
  }
  return out;
}

} // namespace

MatrixXd grassmann_factor(Index n, Index r, const VectorXd& angles) {
  MatrixXd g = MatrixXd::Identity(n, n);
  for (const auto& rot : rotations(n, r, angles))
    g = g * rot;
  return g;
}

GrassmannDerivatives grassmann_factor_derivatives(Index n, Index r, const VectorXd& angles) {
  const auto rots = rotations(n, r, angles);
  const Index count = static_cast<Index>(rots.size());
  std::vector<MatrixXd> gens;
  for (Index p = 0; p < count; ++p) {
    const auto [lambda, mu] = grassmann_pair(n, r, p);
    gens.push_back(SkewGenerator{n, lambda, mu}.matrix());
  }
  // d/du e^{uL} = L e^{uL}; the k-th factor is replaced by L^m e^{uL} for m derivatives.
  auto product = [&](Index p, Index q) {
    MatrixXd g = MatrixXd::Identity(n, n);
    for (Index k = 0; k < count; ++k) {
      const auto& rot = rots[static_cast<std::size_t>(k)];
      const auto& gen = gens[static_cast<std::size_t>(k)];
      const int order = int(k == p) + int(k == q);
      if (order == 0)
        g = g * rot;
      else if (order == 1)
        g = g * (gen * rot);
      else
        g = g * (gen * gen * rot);
    }
    return g;
  };
  GrassmannDerivatives out;
  out.value = product(-1, -1);
  for (Index p = 0; p < count; ++p)
    out.first.push_back(product(p, -1));
  out.second.resize(static_cast<std::size_t>(count * count));
  for (Index p = 0; p < count; ++p)
    for (Index q = p; q < count; ++q) {
      MatrixXd d = product(p, q);
      out.second[static_cast<std::size_t>(q * count + p)] = d;
      out.second[static_cast<std::size_t>(p * count + q)] = std::move(d);
    }
  return out;
}

MatrixXd grassmann_second_derivative_at_origin(Index n, Index r, Index p, Index q) {
  if (p > q)
    std::swap(p, q);
  const auto [lambda, mu] = grassmann_pair(n, r, p);
  const auto [lambda2, mu2] = grassmann_pair(n, r, q);
  MatrixXd d = MatrixXd::Zero(n, n);
  if (mu == mu2)
    d(lambda, lambda2) -= 1.0;
  if (lambda == lambda2)
    d(mu, mu2) -= 1.0;
  return d;
}

CanonicalPoint canonical_point_from_core(const Shape& shape, const DenseTensor& core) {
  MultilinearRank rank;
  for (Index j = 0; j < core.order(); ++j)
    rank.ranks.push_back(core.shape().dim(j));
  rank.validate_for(shape);
  if (!(multilinear_rank(core) == rank))
    throw InadmissibleRankError("core does not have full multilinear rank");
  return CanonicalPoint{shape, rank, core, OrthogonalTuple<double>::identity(shape)};
}

CanonicalPoint canonicalize(const DenseTensor& t, std::optional<double> rel_tol) {
  if (rel_tol && !(*rel_tol > 0))
    throw std::invalid_argument("canonicalize: tolerance must be positive");
  const double norm = t.norm();
  if (!(norm > 0))
    throw std::invalid_argument("canonicalize: tensor must be nonzero");
  const Shape& shape = t.shape();
  MultilinearRank rank;
  std::vector<MatrixXd> aligning;
  double worst_tol = 0.0;
  for (Index j = 0; j < shape.order(); ++j) {
    const MatrixXd f = flatten(t, j);
    Eigen::JacobiSVD<MatrixXd> svd(f, Eigen::ComputeFullU);
    const VectorXd& s = svd.singularValues();
    const double tol = rel_tol ? *rel_tol : default_rank_tolerance(shape, j);
    worst_tol = std::max(worst_tol, tol);
    const double threshold = tol * s[0];
    Index r = 0;
    while (r < s.size() && s[r] > threshold)
      ++r;
    if (s[r - 1] <= 1e3 * threshold)
      throw AmbiguousRankError("mode " + std::to_string(j + 1) + ": singular value " + std::to_string(s[r - 1]) +
                               " too close to the rank threshold " + std::to_string(threshold));
    rank.ranks.push_back(r);

    MatrixXd u = svd.matrixU();
    for (Index c = 0; c < u.cols(); ++c) {
      Index imax = 0;
      for (Index i = 1; i < u.rows(); ++i)
        if (std::abs(u(i, c)) > std::abs(u(imax, c)))
          imax = i;
      if (u(imax, c) < 0)
        u.col(c) = -u.col(c);
    }
    aligning.push_back(u.transpose());
  }
  rank.validate_for(shape);

  OrthogonalTuple<double> g(std::move(aligning));
  const DenseTensor rotated = group_action(g, t);
  const Shape core_shape = rank.core_shape();
  double leak = 0.0;
  for (Index lin = 0; lin < rotated.size(); ++lin) {
    const auto idx = shape.multi_index(lin);
    bool inside = true;
    for (Index k = 0; k < shape.order(); ++k)
      inside = inside && idx[static_cast<std::size_t>(k)] < rank[k];
    if (!inside)
      leak = std::max(leak, std::abs(rotated.data()[lin]));
  }
  if (leak > worst_tol * norm)
    throw AmbiguousRankError("rotated tensor leaks " + std::to_string(leak) + " outside the core block");
  DenseTensor core = leading_block(rotated, core_shape);
  if (!(multilinear_rank(core) == rank))
    throw AmbiguousRankError("core block lost multilinear rank");
  return CanonicalPoint{shape, rank, std::move(core), std::move(g)};
}

TuckerLayout::TuckerLayout(const Shape& shape, const MultilinearRank& rank) {
  rank.validate_for(shape);
  if (rank.is_zero())
    throw InadmissibleRankError("the zero-rank manifold is a point and has no chart coordinates");
  Index offset = 0;
  for (Index j = 0; j < shape.order(); ++j) {
    const Index size = grassmann_param_count(shape.dim(j), rank[j]);
    u_offsets_.push_back(offset);
    u_sizes_.push_back(size);
    offset += size;
  }
  s_offset_ = offset;
  s_size_ = rank.core_size();
}

std::pair<Index, Index> TuckerLayout::locate(Index coordinate) const {
  if (coordinate < 0 || coordinate >= size())
    throw DimensionError("chart coordinate out of range");
  if (coordinate >= s_offset_)
    return {-1, coordinate - s_offset_};
  for (Index j = order() - 1; j >= 0; --j)
    if (coordinate >= u_offset(j) && u_size(j) > 0)
      return {j, coordinate - u_offset(j)};
  throw DimensionError("chart coordinate out of range");
}

VectorXd TuckerChartParams::pack() const {
  Index total = s.size();
  for (const auto& b : u)
    total += b.size();
  VectorXd out(total);
  Index pos = 0;
  for (const auto& b : u) {
    out.segment(pos, b.size()) = b;
    pos += b.size();
  }
  out.tail(s.size()) = s.data();
  return out;
}

TuckerChartParams TuckerChartParams::unpack(const Shape& shape, const MultilinearRank& rank, const VectorXd& packed) {
  const TuckerLayout layout(shape, rank);
  if (packed.size() != layout.size())
    throw DimensionError("Tucker chart expects " + std::to_string(layout.size()) + " parameters, got " +
                         std::to_string(packed.size()));
  TuckerChartParams out{{}, DenseTensor(rank.core_shape(), packed.tail(layout.s_size()))};
  for (Index j = 0; j < layout.order(); ++j)
    out.u.push_back(packed.segment(layout.u_offset(j), layout.u_size(j)));
  return out;
}

TuckerChart::TuckerChart(CanonicalPoint point) : point_(std::move(point)), layout_(point_.shape, point_.rank) {}

namespace {

// Applies factors[k] along mode k for every k.
DenseTensor apply_all(const std::vector<const MatrixXd*>& factors, DenseTensor t) {
  for (Index k = 0; k < t.order(); ++k)
    t = mode_product(t, *factors[static_cast<std::size_t>(k)], k);
  return t;
}

struct ChartState {
  DenseTensor base; // embed(core + S)
  std::vector<GrassmannDerivatives> g;
};

ChartState chart_state(const CanonicalPoint& point, const VectorXd& params) {
  const auto p = TuckerChartParams::unpack(point.shape, point.rank, params);
  ChartState st{embed(point.core + p.s, point.shape), {}};
  for (Index j = 0; j < point.shape.order(); ++j)
    st.g.push_back(grassmann_factor_derivatives(point.shape.dim(j), point.rank[j], p.u[static_cast<std::size_t>(j)]));
  return st;
}

std::vector<const MatrixXd*> values_of(const ChartState& st) {
  std::vector<const MatrixXd*> f;
  for (const auto& gd : st.g)
    f.push_back(&gd.value);
  return f;
}

} // namespace

DenseTensor TuckerChart::value_tensor(const VectorXd& params) const {
  const ChartState st = chart_state(point_, params);
  return apply_all(values_of(st), st.base);
}

MatrixXd TuckerChart::first_derivs(const VectorXd& params) const {
  const ChartState st = chart_state(point_, params);
  const auto values = values_of(st);
  MatrixXd out(ambient_dim(), param_dim());
  for (Index c = 0; c < param_dim(); ++c) {
    const auto [mode, p] = layout_.locate(c);
    auto f = values;
    if (mode >= 0) {
      f[static_cast<std::size_t>(mode)] = &st.g[static_cast<std::size_t>(mode)].first[static_cast<std::size_t>(p)];
      out.col(c) = apply_all(f, st.base).data();
    } else {
      const auto idx = point_.rank.core_shape().multi_index(p);
      out.col(c) = apply_all(f, basic_tensor(point_.shape, idx)).data();
    }
  }
  return out;
}

SecondDerivatives TuckerChart::second_derivs(const VectorXd& params) const {
  const ChartState st = chart_state(point_, params);
  const auto values = values_of(st);
  const Index m = param_dim();
  SecondDerivatives out(m, ambient_dim());
  const Shape core_shape = point_.rank.core_shape();
  for (Index a = 0; a < m; ++a) {
    const auto [ma, pa] = layout_.locate(a);
    for (Index b = a; b < m; ++b) {
      const auto [mb, pb] = layout_.locate(b);
      if (ma < 0 && mb < 0)
        continue; // T is affine in S
      auto f = values;
      const auto& ga = st.g[static_cast<std::size_t>(ma)];
      if (mb < 0) {
        f[static_cast<std::size_t>(ma)] = &ga.first[static_cast<std::size_t>(pa)];
        out.set_symmetric(a, b, apply_all(f, basic_tensor(point_.shape, core_shape.multi_index(pb))).data());
      } else if (ma == mb) {
        f[static_cast<std::size_t>(ma)] = &ga.second_at(pa, pb);
        out.set_symmetric(a, b, apply_all(f, st.base).data());
      } else {
        f[static_cast<std::size_t>(ma)] = &ga.first[static_cast<std::size_t>(pa)];
        f[static_cast<std::size_t>(mb)] = &st.g[static_cast<std::size_t>(mb)].first[static_cast<std::size_t>(pb)];
        out.set_symmetric(a, b, apply_all(f, st.base).data());
      }
    }
  }
  return out;
}

Chart TuckerChart::chart() const {
  auto self = std::make_shared<const TuckerChart>(*this);
  Chart c;
  c.param_dim = param_dim();
  c.ambient_dim = ambient_dim();
  c.value = [self](const VectorXd& u) { return self->value(u); };
  c.first_derivs = [self](const VectorXd& u) { return self->first_derivs(u); };
  c.second_derivs = [self](const VectorXd& u) { return self->second_derivs(u); };
  return c;
}

namespace {

// Calls fn(idx) for every core-block multi-index with idx[mode] == 0, i.e. once per mode fiber.
template <typename Fn>
void for_core_fibers(const CanonicalPoint& point, Index mode, Fn&& fn) {
  const Shape core_shape = point.rank.core_shape();
  for (Index lin = 0; lin < core_shape.numel(); ++lin) {
    const auto idx = core_shape.multi_index(lin);
    if (idx[static_cast<std::size_t>(mode)] != 0)
      continue;
    fn(idx);
  }
}

} // namespace

MatrixXd origin_tangent_vectors(const CanonicalPoint& point) {
  const TuckerLayout layout(point.shape, point.rank);
  const Shape& shape = point.shape;
  const Shape core_shape = point.rank.core_shape();
  MatrixXd out = MatrixXd::Zero(shape.numel(), layout.size());
  for (Index c = 0; c < layout.size(); ++c) {
    const auto [mode, p] = layout.locate(c);
    if (mode < 0) {
      out(shape.linear_index(core_shape.multi_index(p)), c) = 1.0;
      continue;
    }
    const auto [lambda, mu] = grassmann_pair(shape.dim(mode), point.rank[mode], p);
    // entry at (i_1..mu..i_d) is t_{i_1..lambda..i_d}, other indices in the core block
    for_core_fibers(point, mode, [&](std::vector<Index> idx) {
      idx[static_cast<std::size_t>(mode)] = lambda;
      const double t = point.core(idx);
      idx[static_cast<std::size_t>(mode)] = mu;
      out(shape.linear_index(idx), c) = t;
    });
  }
  return out;
}

DenseTensor same_fiber_second_derivative(const CanonicalPoint& point, Index mode, Index lambda, Index lambda_prime) {
  if (mode < 0 || mode >= point.shape.order() || lambda < 0 || lambda >= point.rank[mode] || lambda_prime < 0 ||
      lambda_prime >= point.rank[mode])
    throw DimensionError("same_fiber_second_derivative: index out of range");
  DenseTensor out(point.shape);
  for_core_fibers(point, mode, [&](std::vector<Index> idx) {
    idx[static_cast<std::size_t>(mode)] = lambda_prime;
    const double t = point.core(idx);
    idx[static_cast<std::size_t>(mode)] = lambda;
    out(idx) = -t;
  });
  return out;
}

GramBlockReport gram_block_report(const CanonicalPoint& point) {
  const TuckerChart chart(point);
  const TuckerLayout& layout = chart.layout();
  const Index m = layout.size();
  const MatrixXd basis = chart.first_derivs(VectorXd::Zero(m));
  GramBlockReport rep;
  rep.gram = basis.transpose() * basis;
  rep.gram_max = m ? rep.gram.cwiseAbs().maxCoeff() : 0.0;
  rep.trace = rep.gram.trace();

  const DenseTensor t = point.embedded();
  for (Index j = 0; j < point.shape.order(); ++j) {
    const MatrixXd f = flatten(t, j);
    const Index r = point.rank[j];
    rep.row_grams.push_back((f.topRows(r) * f.topRows(r).transpose()).eval());
  }

  for (Index a = 0; a < m; ++a) {
    const auto [ma, pa] = layout.locate(a);
    for (Index b = 0; b < m; ++b) {
      const auto [mb, pb] = layout.locate(b);
      const double g = rep.gram(a, b);
      if (ma < 0 && mb < 0) {
        rep.s_block_deviation = std::max(rep.s_block_deviation, std::abs(g - (pa == pb ? 1.0 : 0.0)));
        continue;
      }
      if (ma >= 0 && ma == mb) {
        const Index n = point.shape.dim(ma);
        const Index r = point.rank[ma];
        const auto [la, mua] = grassmann_pair(n, r, pa);
        const auto [lb, mub] = grassmann_pair(n, r, pb);
        if (mua == mub) {
          const double expected = rep.row_grams[static_cast<std::size_t>(ma)](la, lb);
          rep.a_block_deviation = std::max(rep.a_block_deviation, std::abs(g - expected));
          continue;
        }
      }
      rep.off_structure_max = std::max(rep.off_structure_max, std::abs(g));
    }
  }
  if (m > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (rep.gram + rep.gram.transpose()), Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = eig.eigenvalues().minCoeff();
  }
  return rep;
}

SampleReport evaluate_minimality_sample(const MinimalityConfig& config, Index index) {
  SampleReport rep;
  rep.index = index;
  try {
    const DenseTensor t =
        random_rank_r_tensor(config.shape, config.rank, stream_seed(config.seed, std::uint64_t(index)));
    const CanonicalPoint point = canonicalize(t);
    if (!(point.rank == config.rank))
      throw AmbiguousRankError("detected rank differs from the requested rank");
    const TuckerChart chart(point);
    rep.param_count = chart.param_dim();
    const MeanCurvature h = mean_curvature(chart.chart(), VectorXd::Zero(chart.param_dim()));
    const GramBlockReport gram = gram_block_report(point);
    rep.curvature_ratio = h.ratio();
    rep.gram_min_eig = gram.min_eigenvalue;
    rep.off_structure_max = gram.off_structure_max;
    rep.evaluated = true;
  } catch (const AmbiguousRankError& e) {
    rep.failure = e.what();
  } catch (const DegenerateChartError& e) {
    rep.failure = e.what();
  }
  return rep;
}

MinimalityReport verify_minimality(const MinimalityConfig& config) {
  config.rank.validate_for(config.shape);
  if (config.rank.is_zero())
    throw InadmissibleRankError("the zero-rank manifold is a single point; nothing to verify");
  if (config.samples < 1)
    throw std::invalid_argument("verify_minimality: samples must be positive");
  if (!(config.tol > 0))
    throw std::invalid_argument("verify_minimality: tolerance must be positive");
  MinimalityReport report{config, {}, 0, 0.0, true};
  Index evaluated = 0;
  for (Index k = 0; k < config.samples; ++k) {
    SampleReport s = evaluate_minimality_sample(config, k);
    if (s.evaluated) {
      ++evaluated;
      report.max_ratio = std::max(report.max_ratio, s.curvature_ratio);
      if (!(s.curvature_ratio <= config.tol))
        report.pass = false;
    } else {
      ++report.rank_failures;
    }
    report.samples.push_back(std::move(s));
  }
  if (evaluated == 0)
    report.pass = false;
  return report;
}

} // namespace mlgeom
