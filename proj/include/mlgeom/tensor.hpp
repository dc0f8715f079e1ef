#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mlgeom/errors.hpp"
#include "mlgeom/random.hpp"

namespace mlgeom {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Mode sizes (n_1, ..., n_d) of a tensor space. All modes are 0-based in the API.
class Shape {
public:
  Shape(std::initializer_list<Index> dims) : Shape(std::vector<Index>(dims)) {}

  explicit Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
    if (dims_.empty())
      throw DimensionError("shape must have at least one mode");
    for (Index n : dims_)
      if (n < 1)
        throw DimensionError("shape dimensions must be positive");
  }

  Index order() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  const std::vector<Index>& dims() const { return dims_; }

  Index numel() const {
    return std::accumulate(dims_.begin(), dims_.end(), Index{1}, std::multiplies<>());
  }

  /// Product of the sizes of the modes after `mode` (row-major, last index fastest).
  Index stride(Index mode) const {
    Index s = 1;
    for (Index k = mode + 1; k < order(); ++k)
      s *= dim(k);
    return s;
  }

  Index linear_index(std::span<const Index> index) const {
    if (static_cast<Index>(index.size()) != order())
      throw DimensionError("multi-index length does not match tensor order");
    Index lin = 0;
    for (Index k = 0; k < order(); ++k) {
      const Index i = index[static_cast<std::size_t>(k)];
      if (i < 0 || i >= dim(k))
        throw DimensionError("multi-index out of range");
      lin = lin * dim(k) + i;
    }
    return lin;
  }

  std::vector<Index> multi_index(Index linear) const {
    std::vector<Index> index(dims_.size());
    for (Index k = order() - 1; k >= 0; --k) {
      index[static_cast<std::size_t>(k)] = linear % dim(k);
      linear /= dim(k);
    }
    return index;
  }

  Shape with_dim(Index mode, Index n) const {
    auto dims = dims_;
    dims.at(static_cast<std::size_t>(mode)) = n;
    return Shape(std::move(dims));
  }

  bool operator==(const Shape&) const = default;

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t k = 0; k < dims_.size(); ++k)
      s += (k ? "," : "") + std::to_string(dims_[k]);
    return s + ")";
  }

private:
  std::vector<Index> dims_;
};

/// Dense real tensor stored row-major with the last index varying fastest.
template <typename Scalar>
class Tensor {
public:
  using Vector = VectorX<Scalar>;

  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(Vector::Zero(shape_.numel())) {}

  Tensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.numel())
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_.to_string());
  }

  const Shape& shape() const { return shape_; }
  Index order() const { return shape_.order(); }
  Index size() const { return data_.size(); }
  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  Scalar& operator()(std::span<const Index> index) { return data_[shape_.linear_index(index)]; }
  Scalar operator()(std::span<const Index> index) const { return data_[shape_.linear_index(index)]; }
  Scalar& operator()(std::initializer_list<Index> index) {
    return (*this)(std::span<const Index>(index.begin(), index.size()));
  }
  Scalar operator()(std::initializer_list<Index> index) const {
    return (*this)(std::span<const Index>(index.begin(), index.size()));
  }

  Scalar norm() const { return data_.norm(); }
  bool all_finite() const { return data_.allFinite(); }

  Tensor& operator+=(const Tensor& other) {
    check_same_shape(other);
    data_ += other.data_;
    return *this;
  }
  Tensor& operator-=(const Tensor& other) {
    check_same_shape(other);
    data_ -= other.data_;
    return *this;
  }
  Tensor& operator*=(Scalar a) {
    data_ *= a;
    return *this;
  }

  friend Tensor operator+(Tensor lhs, const Tensor& rhs) { return lhs += rhs; }
  friend Tensor operator-(Tensor lhs, const Tensor& rhs) { return lhs -= rhs; }
  friend Tensor operator*(Scalar a, Tensor t) { return t *= a; }
  friend Tensor operator*(Tensor t, Scalar a) { return t *= a; }

private:
  void check_same_shape(const Tensor& other) const {
    if (!(shape_ == other.shape_))
      throw DimensionError("shape mismatch: " + shape_.to_string() + " vs " + other.shape_.to_string());
  }

  Shape shape_;
  Vector data_;
};

using DenseTensor = Tensor<double>;

/// Multilinear rank (r_1, ..., r_d).
struct MultilinearRank {
  std::vector<Index> ranks;

  Index order() const { return static_cast<Index>(ranks.size()); }
  Index operator[](Index mode) const { return ranks.at(static_cast<std::size_t>(mode)); }
  bool is_zero() const {
    return std::all_of(ranks.begin(), ranks.end(), [](Index r) { return r == 0; });
  }
  Index core_size() const {
    return std::accumulate(ranks.begin(), ranks.end(), Index{1}, std::multiplies<>());
  }
  bool operator==(const MultilinearRank&) const = default;

  /// Empty string when the tuple is the multilinear rank of some tensor of `shape`,
  /// otherwise a description of the violated condition.
  std::string admissibility_error(const Shape& shape) const {
    if (order() != shape.order())
      return "rank tuple length does not match tensor order";
    const bool any_zero = std::any_of(ranks.begin(), ranks.end(), [](Index r) { return r == 0; });
    if (any_zero && !is_zero())
      return "if one r_j is zero all must be zero";
    for (Index j = 0; j < order(); ++j) {
      const Index r = (*this)[j];
      if (r < 0 || r > shape.dim(j))
        return "r_" + std::to_string(j + 1) + " must lie in [0, n_" + std::to_string(j + 1) + "]";
      Index others = 1;
      for (Index k = 0; k < order(); ++k)
        if (k != j)
          others *= (*this)[k];
      if (r > others)
        return "r_" + std::to_string(j + 1) + " exceeds the product of the other ranks";
    }
    return {};
  }

  void validate_for(const Shape& shape) const {
    if (auto err = admissibility_error(shape); !err.empty())
      throw InadmissibleRankError("inadmissible multilinear rank for shape " + shape.to_string() + ": " + err);
  }

  Shape core_shape() const {
    if (is_zero())
      throw InadmissibleRankError("zero rank has no core shape");
    return Shape(ranks);
  }
};

/// g = (g^1, ..., g^d) with each g^j orthogonal of size n_j.
template <typename Scalar>
class OrthogonalTuple {
public:
  using Matrix = MatrixX<Scalar>;

  explicit OrthogonalTuple(std::vector<Matrix> factors, Scalar tolerance = Scalar(1e-12))
      : factors_(std::move(factors)) {
    if (factors_.empty())
      throw DimensionError("orthogonal tuple needs at least one factor");
    for (const auto& g : factors_) {
      if (g.rows() != g.cols())
        throw DimensionError("orthogonal factor must be square");
      const Scalar defect = (g * g.transpose() - Matrix::Identity(g.rows(), g.rows())).cwiseAbs().maxCoeff();
      if (!(defect <= tolerance))
        throw DimensionError("factor is not orthogonal (defect " + std::to_string(double(defect)) + ")");
    }
  }

  static OrthogonalTuple identity(const Shape& shape) {
    std::vector<Matrix> factors;
    for (Index n : shape.dims())
      factors.push_back(Matrix::Identity(n, n));
    return OrthogonalTuple(std::move(factors));
  }

  Index order() const { return static_cast<Index>(factors_.size()); }
  const Matrix& operator[](Index mode) const { return factors_.at(static_cast<std::size_t>(mode)); }
  const std::vector<Matrix>& factors() const { return factors_; }

  OrthogonalTuple inverse() const {
    std::vector<Matrix> t;
    for (const auto& g : factors_)
      t.push_back(g.transpose());
    return OrthogonalTuple(std::move(t));
  }

private:
  std::vector<Matrix> factors_;
};

template <typename Scalar>
Scalar frobenius_inner(const Tensor<Scalar>& t, const Tensor<Scalar>& s) {
  if (!(t.shape() == s.shape()))
    throw DimensionError("frobenius_inner: shape mismatch " + t.shape().to_string() + " vs " +
                         s.shape().to_string());
  return t.data().dot(s.data());
}

/// Mode-`mode` flattening: n_j x prod_{k != j} n_k, columns ordered by the remaining
/// indices in increasing mode order with the last varying fastest.
template <typename Scalar>
MatrixX<Scalar> flatten(const Tensor<Scalar>& t, Index mode) {
  const Shape& shape = t.shape();
  if (mode < 0 || mode >= shape.order())
    throw DimensionError("flatten: mode out of range");
  const Index n = shape.dim(mode);
  const Index inner = shape.stride(mode);
  const Index outer = shape.numel() / (n * inner);
  MatrixX<Scalar> m(n, outer * inner);
  for (Index a = 0; a < outer; ++a)
    for (Index i = 0; i < n; ++i)
      for (Index b = 0; b < inner; ++b)
        m(i, a * inner + b) = t.data()[(a * n + i) * inner + b];
  return m;
}

/// Inverse of flatten for a target shape.
template <typename Derived>
Tensor<typename Derived::Scalar> fold(const Eigen::MatrixBase<Derived>& m, const Shape& shape, Index mode) {
  using Scalar = typename Derived::Scalar;
  if (mode < 0 || mode >= shape.order())
    throw DimensionError("fold: mode out of range");
  const Index n = shape.dim(mode);
  const Index inner = shape.stride(mode);
  const Index outer = shape.numel() / (n * inner);
  if (m.rows() != n || m.cols() != outer * inner)
    throw DimensionError("fold: matrix size does not match shape");
  Tensor<Scalar> t(shape);
  for (Index a = 0; a < outer; ++a)
    for (Index i = 0; i < n; ++i)
      for (Index b = 0; b < inner; ++b)
        t.data()[(a * n + i) * inner + b] = m(i, a * inner + b);
  return t;
}

/// Mode-j product: replaces mode j by M * (mode-j fibers). M is p x n_j.
template <typename Scalar, typename Derived>
Tensor<Scalar> mode_product(const Tensor<Scalar>& t, const Eigen::MatrixBase<Derived>& m, Index mode) {
  if (mode < 0 || mode >= t.order())
    throw DimensionError("mode_product: mode out of range");
  if (m.cols() != t.shape().dim(mode))
    throw DimensionError("mode_product: matrix columns do not match mode size");
  const Shape out_shape = t.shape().with_dim(mode, m.rows());
  const MatrixX<Scalar> product = m * flatten(t, mode);
  return fold(product, out_shape, mode);
}

/// g*T: apply g^j along every mode j.
template <typename Scalar>
Tensor<Scalar> group_action(const OrthogonalTuple<Scalar>& g, const Tensor<Scalar>& t) {
  if (g.order() != t.order())
    throw DimensionError("group_action: tuple length does not match tensor order");
  Tensor<Scalar> out = t;
  for (Index j = 0; j < t.order(); ++j) {
    if (g[j].rows() != t.shape().dim(j))
      throw DimensionError("group_action: factor size does not match shape");
    out = mode_product(out, g[j], j);
  }
  return out;
}

/// Copies `t` into the leading block of a zero tensor of shape `target`.
template <typename Scalar>
Tensor<Scalar> embed(const Tensor<Scalar>& t, const Shape& target) {
  if (t.order() != target.order())
    throw DimensionError("embed: order mismatch");
  for (Index k = 0; k < t.order(); ++k)
    if (t.shape().dim(k) > target.dim(k))
      throw DimensionError("embed: block larger than target");
  Tensor<Scalar> out(target);
  for (Index lin = 0; lin < t.size(); ++lin) {
    const auto idx = t.shape().multi_index(lin);
    out(idx) = t.data()[lin];
  }
  return out;
}

/// Leading block of shape `block` of `t`.
template <typename Scalar>
Tensor<Scalar> leading_block(const Tensor<Scalar>& t, const Shape& block) {
  if (t.order() != block.order())
    throw DimensionError("leading_block: order mismatch");
  Tensor<Scalar> out(block);
  for (Index lin = 0; lin < out.size(); ++lin) {
    const auto idx = block.multi_index(lin);
    out.data()[lin] = t(idx);
  }
  return out;
}

/// v_1 (x) ... (x) v_d.
template <typename Scalar>
Tensor<Scalar> outer_product(const std::vector<VectorX<Scalar>>& factors) {
  std::vector<Index> dims;
  for (const auto& v : factors)
    dims.push_back(v.size());
  Shape shape(dims);
  Tensor<Scalar> out(shape);
  for (Index lin = 0; lin < out.size(); ++lin) {
    const auto idx = shape.multi_index(lin);
    Scalar p(1);
    for (std::size_t k = 0; k < factors.size(); ++k)
      p *= factors[k][idx[k]];
    out.data()[lin] = p;
  }
  return out;
}

/// e_{i_1} (x) ... (x) e_{i_d}.
inline DenseTensor basic_tensor(const Shape& shape, std::span<const Index> index) {
  DenseTensor t(shape);
  t(index) = 1.0;
  return t;
}

/// Singular values of every flattening, each in decreasing order.
template <typename Scalar>
std::vector<VectorX<Scalar>> flattening_singular_values(const Tensor<Scalar>& t) {
  std::vector<VectorX<Scalar>> out;
  for (Index j = 0; j < t.order(); ++j) {
    const MatrixX<Scalar> f = flatten(t, j);
    out.push_back(Eigen::JacobiSVD<MatrixX<Scalar>>(f).singularValues());
  }
  return out;
}

/// Default relative rank threshold for the mode-j flattening: 1e-10 * max(rows, cols).
inline double default_rank_tolerance(const Shape& shape, Index mode) {
  const Index rows = shape.dim(mode);
  return 1e-10 * static_cast<double>(std::max(rows, shape.numel() / rows));
}

/// r_j = #{sigma > tol * sigma_max} for the mode-j flattening; zero tensor gives (0, ..., 0).
/// Without `rel_tol` the per-mode default_rank_tolerance is used.
template <typename Scalar>
MultilinearRank multilinear_rank(const Tensor<Scalar>& t, std::optional<double> rel_tol = std::nullopt) {
  if (rel_tol && !(*rel_tol > 0))
    throw std::invalid_argument("multilinear_rank: tolerance must be positive");
  MultilinearRank rank;
  const auto sv = flattening_singular_values(t);
  for (Index j = 0; j < t.order(); ++j) {
    const auto& s = sv[static_cast<std::size_t>(j)];
    const double smax = s.size() ? double(s[0]) : 0.0;
    const double tol = rel_tol ? *rel_tol : default_rank_tolerance(t.shape(), j);
    Index r = 0;
    if (smax > 0)
      for (Index i = 0; i < s.size(); ++i)
        if (double(s[i]) > tol * smax)
          ++r;
    rank.ranks.push_back(r);
  }
  return rank;
}

template <typename Scalar = double>
MatrixX<Scalar> random_orthogonal(Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  MatrixX<Scalar> a(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      a(i, j) = Scalar(normal(rng));
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(a);
  MatrixX<Scalar> q = qr.householderQ();
  // Haar measure: fix column signs by sign(diag(R)).
  const MatrixX<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < Scalar(0))
      q.col(j) = -q.col(j);
  return q;
}

template <typename Scalar = double>
OrthogonalTuple<Scalar> random_orthogonal_tuple(const Shape& shape, Rng& rng) {
  std::vector<MatrixX<Scalar>> factors;
  for (Index n : shape.dims())
    factors.push_back(random_orthogonal<Scalar>(n, rng));
  return OrthogonalTuple<Scalar>(std::move(factors));
}

template <typename Scalar = double>
Tensor<Scalar> random_tensor(const Shape& shape, Rng& rng) {
  std::normal_distribution<double> normal;
  Tensor<Scalar> t(shape);
  for (Index i = 0; i < t.size(); ++i)
    t.data()[i] = Scalar(normal(rng));
  return t;
}

/// A tensor of multilinear rank exactly `rank`: random full-rank core in the leading block,
/// rotated by a random orthogonal tuple. Cores are redrawn until the rank check passes.
/// For rank (1, ..., 1) the result is an outer product of unit vectors.
template <typename Scalar = double>
Tensor<Scalar> random_rank_r_tensor(const Shape& shape, const MultilinearRank& rank, std::uint64_t seed) {
  rank.validate_for(shape);
  if (rank.is_zero())
    return Tensor<Scalar>(shape);
  Rng rng(seed);
  const Shape core_shape = rank.core_shape();
  const bool rank_one = rank.core_size() == 1;
  constexpr int max_attempts = 64;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Tensor<Scalar> core = rank_one ? Tensor<Scalar>(core_shape, VectorX<Scalar>::Ones(1))
                                   : random_tensor<Scalar>(core_shape, rng);
    if (!(multilinear_rank(core) == rank))
      continue;
    const auto g = random_orthogonal_tuple<Scalar>(shape, rng);
    Tensor<Scalar> t = group_action(g, embed(core, shape));
    if (multilinear_rank(t) == rank)
      return t;
  }
  throw AmbiguousRankError("random_rank_r_tensor: failed to draw a tensor of the requested rank");
}

} // namespace mlgeom
