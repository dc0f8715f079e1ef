#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mlgeom/segre.hpp"
#include "mlgeom/tucker.hpp"

using namespace mlgeom;

namespace {

// Random functional with the level-0 and level-1 entries removed.
DenseTensor random_normal_functional(const Shape& shape, Rng& rng) {
  DenseTensor t = random_tensor(shape, rng);
  for (Index lin = 0; lin < t.size(); ++lin)
    if (level_of(shape.multi_index(lin)) < 2)
      t.data()[lin] = 0.0;
  return t;
}

double pairing_by_sum(const DenseTensor& a, const DenseTensor& b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i)
    s += a.data()[i] * b.data()[i];
  return s;
}

// Central differences of u -> <gamma(u), ell> at 0, orders 0..3.
std::vector<double> fd_pairings(const ProbeCurve& gamma, const DenseTensor& ell) {
  auto f = [&](double u) { return pairing_by_sum(gamma(u), ell); };
  const double h1 = 1e-5, h2 = 1e-3, h3 = 1e-3;
  return {f(0.0), (f(h1) - f(-h1)) / (2 * h1), (f(h2) - 2 * f(0.0) + f(-h2)) / (h2 * h2),
          (f(2 * h3) - 2 * f(h3) + 2 * f(-h3) - f(-2 * h3)) / (2 * h3 * h3 * h3)};
}

} // namespace

TEST(NormalFrame, LevelSizesAndMembership) {
  const NormalFrame frame = normal_frame(Shape({2, 2, 2}));
  ASSERT_EQ(frame.level_count(), 4);
  EXPECT_EQ(frame.level_size(0), 1);
  EXPECT_EQ(frame.level_size(1), 3);
  EXPECT_EQ(frame.level_size(2), 3);
  EXPECT_EQ(frame.level_size(3), 1);
  EXPECT_EQ(frame.levels[3][0], (std::vector<Index>{1, 1, 1}));

  const NormalFrame big = normal_frame(Shape({3, 4, 2}));
  // level k has sum over k-subsets of prod (n_j - 1)
  EXPECT_EQ(big.level_size(0), 1);
  EXPECT_EQ(big.level_size(1), 2 + 3 + 1);
  EXPECT_EQ(big.level_size(2), 2 * 3 + 2 * 1 + 3 * 1);
  EXPECT_EQ(big.level_size(3), 2 * 3 * 1);
}

TEST(NormalFrame, LevelsAreMutuallyOrthogonal) {
  const NormalFrame frame = normal_frame(Shape({2, 3, 2}));
  for (Index k = 0; k < frame.level_count(); ++k)
    for (Index i = 0; i < frame.level_size(k); ++i)
      for (Index k2 = 0; k2 < frame.level_count(); ++k2)
        for (Index i2 = 0; i2 < frame.level_size(k2); ++i2) {
          const double ip = frobenius_inner(frame.basic(k, i), frame.basic(k2, i2));
          EXPECT_EQ(ip, (k == k2 && i == i2) ? 1.0 : 0.0);
        }
}

TEST(NormalFrame, LowLevelsSpanTheTangentSpace) {
  const Shape shape({3, 2, 4});
  const NormalFrame frame = normal_frame(shape);
  const DenseTensor core(Shape({1, 1, 1}), VectorXd::Ones(1));
  const TuckerChart chart(canonical_point_from_core(shape, core));
  const TangentFrame tangent = tangent_frame(chart.chart(), VectorXd::Zero(chart.param_dim()));
  ASSERT_EQ(chart.param_dim(), frame.level_size(0) + frame.level_size(1));
  for (Index k = 0; k < frame.level_count(); ++k)
    for (Index i = 0; i < frame.level_size(k); ++i) {
      const VectorXd e = frame.basic(k, i).data();
      const double normal = normal_project(e, tangent).norm();
      EXPECT_NEAR(normal, k < 2 ? 0.0 : 1.0, 1e-14);
    }
}

TEST(Decomposition, PicksLowestLevelAndLargestEntry) {
  const Shape shape({2, 3, 2});
  DenseTensor l(shape);
  l({1, 2, 0}) = 0.5;
  l({0, 1, 1}) = -2.0;
  l({1, 1, 1}) = 7.0;
  const auto dec = decompose_functional({l}, normal_frame(shape));
  EXPECT_EQ(dec.k_star, 2);
  EXPECT_EQ(dec.witness, (std::vector<Index>{0, 1, 1}));
  EXPECT_EQ(dec.coefficient, -2.0);
  EXPECT_NEAR(dec.level_norms[2], std::hypot(0.5, 2.0), 1e-15);
  EXPECT_EQ(dec.level_norms[3], 7.0);
  DenseTensor sum(shape);
  for (const auto& c : dec.components)
    sum += c;
  EXPECT_EQ(sum.data(), l.data());
}

TEST(Decomposition, TopLevelOnly) {
  const Shape shape({2, 2, 2});
  DenseTensor l(shape);
  l({1, 1, 1}) = 1.0;
  const auto dec = decompose_functional({l}, normal_frame(shape));
  EXPECT_EQ(dec.k_star, 3);
  EXPECT_EQ(dec.coefficient, 1.0);
}

TEST(Decomposition, RejectsTangentAndEmptyFunctionals) {
  const Shape shape({2, 2, 2});
  DenseTensor l(shape);
  l({1, 1, 0}) = 1.0;
  l({0, 1, 0}) = 0.25;
  try {
    decompose_functional({l}, normal_frame(shape));
    FAIL() << "expected NotNormalError";
  } catch (const NotNormalError& e) {
    EXPECT_EQ(e.tangent_norm(), 0.25);
  }
  EXPECT_THROW(decompose_functional({DenseTensor(shape)}, normal_frame(shape)), NoWitnessError);
  EXPECT_THROW(decompose_functional({DenseTensor(Shape({2, 2}))}, normal_frame(shape)), DimensionError);
}

TEST(ProbeCurves, StayOnTheSegreVariety) {
  const NormalFrame frame = normal_frame(Shape({3, 2, 3}));
  const ProbeCurve gamma = probe_curve(frame, {0, 2}, {2, 1}, {1, -1});
  for (double u : {0.0, 0.1, 0.7}) {
    const DenseTensor t = gamma(u);
    EXPECT_NEAR(t.norm(), 1.0, 1e-15);
    EXPECT_EQ(multilinear_rank(t).ranks, (std::vector<Index>{1, 1, 1}));
  }
  EXPECT_EQ(gamma(0.0).data(), frame.base.tensor().data());
  EXPECT_THROW(probe_curve(frame, {2, 0}, {1, 1}, {1, 1}), DimensionError);
  EXPECT_THROW(probe_curve(frame, {1}, {2}, {1}), DimensionError);
  EXPECT_THROW(probe_curve(frame, {1}, {1}, {0}), DimensionError);
}

TEST(Pairings, TwoByTwoExample) {
  const Shape shape({2, 2});
  const NormalFrame frame = normal_frame(shape);
  DenseTensor l(shape);
  l({1, 1}) = 1.0;
  const auto plus = curve_pairings(probe_curve(frame, {0, 1}, {1, 1}, {1, 1}), {l}, 2);
  EXPECT_EQ(plus, (std::vector<double>{0.0, 0.0, 2.0}));
  const auto minus = curve_pairings(probe_curve(frame, {0, 1}, {1, 1}, {-1, 1}), {l}, 2);
  EXPECT_EQ(minus[2], -2.0);
}

TEST(Pairings, FactorialTimesCoefficient) {
  Rng rng(2024);
  std::uniform_real_distribution<double> mag(0.1, 2.0);
  for (Index d = 2; d <= 4; ++d)
    for (Index k = 2; k <= d; ++k)
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<Index> dims(static_cast<std::size_t>(d), 3);
        const Shape shape(dims);
        const NormalFrame frame = normal_frame(shape);
        std::vector<Index> idx(static_cast<std::size_t>(d), 0), modes, targets;
        for (Index j = d - k; j < d; ++j) {
          idx[static_cast<std::size_t>(j)] = 1 + static_cast<Index>(rng() % 2);
          modes.push_back(j);
          targets.push_back(idx[static_cast<std::size_t>(j)]);
        }
        const double c = (rng() % 2 ? 1.0 : -1.0) * mag(rng);
        DenseTensor l = c * basic_tensor(shape, idx);
        const auto plus = curve_pairings(probe_curve(frame, modes, targets, std::vector<int>(modes.size(), 1)), {l},
                                         static_cast<int>(k));
        std::vector<int> flip(modes.size(), 1);
        flip[0] = -1;
        const auto minus = curve_pairings(probe_curve(frame, modes, targets, flip), {l}, static_cast<int>(k));
        double kfact = 1.0;
        for (Index i = 2; i <= k; ++i)
          kfact *= static_cast<double>(i);
        for (Index o = 0; o < k; ++o) {
          EXPECT_LE(std::abs(plus[static_cast<std::size_t>(o)]), 1e-10 * l.norm());
          EXPECT_LE(std::abs(minus[static_cast<std::size_t>(o)]), 1e-10 * l.norm());
        }
        EXPECT_NEAR(plus[static_cast<std::size_t>(k)], kfact * c, 1e-9 * kfact * std::abs(c));
        EXPECT_EQ(minus[static_cast<std::size_t>(k)], -plus[static_cast<std::size_t>(k)]);
      }
}

TEST(Pairings, HigherLevelsDoNotDisturbLowerOrders) {
  Rng rng(5);
  const Shape shape({3, 3, 3, 3});
  const NormalFrame frame = normal_frame(shape);
  DenseTensor l = random_normal_functional(shape, rng);
  // clear level 2 and keep one level-3 witness on modes 0, 1, 3
  for (Index lin = 0; lin < l.size(); ++lin)
    if (level_of(shape.multi_index(lin)) == 2)
      l.data()[lin] = 0.0;
  const double c = l({2, 1, 0, 2});
  const auto p = curve_pairings(probe_curve(frame, {0, 1, 3}, {2, 1, 2}, {1, 1, 1}), {l}, 3);
  EXPECT_LE(std::abs(p[0]) + std::abs(p[1]) + std::abs(p[2]), 1e-10 * l.norm());
  EXPECT_NEAR(p[3], 6.0 * c, 1e-9 * 6.0 * std::abs(c));
}

TEST(Pairings, AgreeWithFiniteDifferences) {
  Rng rng(77);
  const Shape shape({3, 2, 3});
  const NormalFrame frame = normal_frame(shape);
  const DenseTensor l = random_tensor(shape, rng);
  const ProbeCurve gamma = probe_curve(frame, {0, 1, 2}, {2, 1, 1}, {1, -1, 1});
  const auto exact = curve_pairings(gamma, {l}, 3);
  const auto fd = fd_pairings(gamma, l);
  EXPECT_NEAR(exact[0], fd[0], 1e-14);
  EXPECT_NEAR(exact[1], fd[1], 1e-5);
  EXPECT_NEAR(exact[2], fd[2], 1e-5);
  EXPECT_NEAR(exact[3], fd[3], 1e-3);
  EXPECT_THROW(curve_pairings(gamma, {l}, 9), std::invalid_argument);
}

TEST(Witness, StrictSidesForRandomNormalFunctionals) {
  Rng rng(8);
  const std::vector<std::vector<Index>> shapes = {{2, 2}, {3, 3}, {2, 2, 2}, {3, 2, 4}, {4, 4, 4}, {2, 3, 2, 2}};
  for (const auto& dims : shapes)
    for (int trial = 0; trial < 5; ++trial) {
      const Shape shape(dims);
      const NormalFrame frame = normal_frame(shape);
      const LinearFunctional ell{random_normal_functional(shape, rng)};
      const WitnessPair w = extremum_witness(ell, frame);
      const DenseTensor base = frame.base.tensor();
      EXPECT_GT(ell(w.point_plus - base), 0.0);
      EXPECT_LT(ell(w.point_minus - base), 0.0);
      EXPECT_EQ(w.pairing_plus, ell(w.point_plus - base));
      EXPECT_GT(w.u_plus, 0.0);
      EXPECT_LE(w.u_plus, 0.1);
      EXPECT_GT(w.u_minus, 0.0);
      EXPECT_LE(w.u_minus, 0.1);
      EXPECT_EQ(multilinear_rank(w.point_plus).ranks, std::vector<Index>(dims.size(), 1));
      EXPECT_LE((w.curve_plus(w.u_plus) - w.point_plus).norm(), 0.0);
    }
}

TEST(Witness, NegatedFunctionalSwapsCurves) {
  const Shape shape({2, 2, 2});
  DenseTensor l(shape);
  l({1, 1, 0}) = 1.5;
  l({1, 1, 1}) = -0.3;
  const NormalFrame frame = normal_frame(shape);
  const WitnessPair w = extremum_witness({l}, frame);
  const WitnessPair n = extremum_witness({-1.0 * l}, frame);
  EXPECT_EQ(w.curve_plus.signs, n.curve_minus.signs);
  EXPECT_EQ(w.curve_minus.signs, n.curve_plus.signs);
  EXPECT_EQ(w.curve_plus.signs, (std::vector<int>{1, 1}));
  EXPECT_EQ(n.curve_plus.signs, (std::vector<int>{-1, 1}));
  EXPECT_EQ(w.coefficient, -n.coefficient);
}

TEST(Witness, RejectsTangentFunctional) {
  const Shape shape({2, 3});
  DenseTensor l(shape);
  l({0, 2}) = 1.0;
  EXPECT_THROW(extremum_witness({l}, normal_frame(shape)), NotNormalError);
  EXPECT_THROW(extremum_witness({DenseTensor(shape)}, normal_frame(shape)), NoWitnessError);
}

TEST(Witness, AtGeneralSegrePoint) {
  Rng rng(12);
  const Shape shape({3, 2, 3});
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<VectorXd> factors;
    for (Index n : shape.dims())
      factors.push_back(random_orthogonal(n, rng).col(0));
    const SegrePoint point = SegrePoint::make(factors, trial % 2 ? 2.5 : -0.7);
    const auto g = aligning_rotation(point);
    const DenseTensor aligned = group_action(g, point.tensor());
    EXPECT_LE((aligned - point.scale * SegrePoint::canonical(shape).tensor()).norm(), 1e-14);

    // a normal functional at the point: pull back one from the base
    const DenseTensor at_base = random_normal_functional(shape, rng);
    const LinearFunctional ell{group_action(g.inverse(), at_base)};
    const WitnessPair w = extremum_witness_at(ell, point);
    const DenseTensor t = point.tensor();
    EXPECT_GT(ell(w.point_plus - t), 0.0);
    EXPECT_LT(ell(w.point_minus - t), 0.0);
    EXPECT_EQ(multilinear_rank(w.point_minus).ranks, (std::vector<Index>{1, 1, 1}));
  }
}

TEST(SliceReduce, WorkedExample) {
  const Shape shape({2, 2});
  const SegrePoint point = SegrePoint::canonical(shape);
  DenseTensor a(shape);
  a.data().setOnes();
  DenseTensor l(shape);
  l({0, 0}) = 3.0;
  l({1, 1}) = 1.0;
  const auto red = slice_reduce({l}, a, 2.0, point);
  EXPECT_EQ(red.mu, -3.0);
  EXPECT_EQ(red.offset, -6.0);
  EXPECT_EQ(red.reduced(point.tensor()), 0.0);
  EXPECT_EQ(red.reduced.ell.data(), (VectorXd(4) << 0, -3, -3, -2).finished());
}

TEST(SliceReduce, ReducedFunctionalIsOrthogonalToThePoint) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Shape shape({3, 2, 3});
    std::vector<VectorXd> factors;
    for (Index n : shape.dims())
      factors.push_back(random_orthogonal(n, rng).col(0));
    const SegrePoint point = SegrePoint::make(factors, 1.3);
    const DenseTensor a = random_tensor(shape, rng);
    const LinearFunctional ell{random_tensor(shape, rng)};
    const double c = frobenius_inner(a, point.tensor());
    const auto red = slice_reduce(ell, a, c, point);
    const DenseTensor t = point.tensor();
    EXPECT_LE(std::abs(red.reduced(t)), 1e-13 * red.reduced.ell.norm() * t.norm());
    // on the slice, v differs from ell by the constant offset
    DenseTensor y = random_tensor(shape, rng);
    y -= (frobenius_inner(a, y) / frobenius_inner(a, a)) * a;
    const DenseTensor x = t + y;
    EXPECT_NEAR(red.reduced(x), ell(x) + red.offset, 1e-12 * (std::abs(ell(x)) + std::abs(red.offset)));
  }
}

TEST(SliceReduce, ErrorPaths) {
  const Shape shape({2, 2});
  const SegrePoint point = SegrePoint::canonical(shape);
  DenseTensor a(shape);
  a({1, 1}) = 1.0;
  DenseTensor l(shape);
  l({0, 1}) = 1.0;
  EXPECT_THROW(slice_reduce({l}, a, 0.0, point), SliceTangencyError);
  DenseTensor a2(shape);
  a2({0, 0}) = 1.0;
  EXPECT_THROW(slice_reduce({2.0 * a2}, a2, 1.0, point), ConstantFunctionalError);
}

TEST(IndependenceModel, ChartValueAndDomain) {
  const Chart chart = independence_model_chart({2, 3});
  EXPECT_EQ(chart.param_dim, 3);
  EXPECT_EQ(chart.ambient_dim, 6);
  const VectorXd theta = (VectorXd(3) << 0.3, 0.2, 0.5).finished();
  const VectorXd p = chart.value(theta);
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
  EXPECT_NEAR(p[0], 0.3 * 0.2, 1e-15);
  EXPECT_NEAR(p[5], 0.7 * 0.3, 1e-15);
  EXPECT_THROW(chart.value((VectorXd(3) << 1.2, 0.2, 0.5).finished()), DomainError);
  EXPECT_THROW(chart.value((VectorXd(3) << 0.3, 0.6, 0.5).finished()), DomainError);
  EXPECT_THROW(independence_model_chart({2, 1}), DimensionError);
}

TEST(IndependenceModel, AnalyticDerivativesMatchFiniteDifferences) {
  const Chart chart = independence_model_chart({3, 2, 2});
  Chart value_only;
  value_only.param_dim = chart.param_dim;
  value_only.ambient_dim = chart.ambient_dim;
  value_only.value = chart.value;
  const VectorXd theta = (VectorXd(4) << 0.2, 0.3, 0.6, 0.45).finished();
  const auto fd = finite_difference_derivatives(value_only, theta);
  EXPECT_LE((chart.first_derivs(theta) - fd.first).norm(), 1e-9);
  EXPECT_LE((chart.second_derivs(theta).columns() - fd.second.columns()).norm(), 1e-6);
}

TEST(SliceField, TwoByTwoGrid) {
  const SliceField field = slice_curvature_field({2, 2}, 9);
  ASSERT_EQ(field.samples.size(), 81u);
  EXPECT_EQ(field.samples[1].params, (VectorXd(2) << 0.1, 0.2).finished());
  // G_xy = (2x - 1)(2y - 1) and r_xx = r_yy = 0, so H vanishes exactly on x = 1/2 or y = 1/2
  for (const auto& s : field.samples) {
    const bool on_zero_line = s.params[0] == 0.5 || s.params[1] == 0.5;
    if (on_zero_line)
      EXPECT_LE(s.norm, 1e-12);
    else
      EXPECT_GT(s.norm, 1e-6);
    EXPECT_LE(s.normality_ratio, 1e-6);
  }
  // reference value from an independent finite-difference evaluation
  EXPECT_NEAR(field.samples[2 * 9 + 2].norm, 0.42200643640205, 1e-6);
  // swapping the variables transposes the joint table
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 9; ++j) {
      const auto& a = field.samples[static_cast<std::size_t>(i * 9 + j)];
      const auto& b = field.samples[static_cast<std::size_t>(j * 9 + i)];
      const Eigen::Map<const Eigen::Matrix2d> ha(a.mean_curvature.data());
      const Eigen::Map<const Eigen::Matrix2d> hb(b.mean_curvature.data());
      EXPECT_LE((ha - hb.transpose()).norm(), 1e-8);
    }
}

TEST(SliceField, ThreeVariablesAndCsv) {
  const SliceField field = slice_curvature_field({2, 2, 2}, 5);
  EXPECT_EQ(field.samples.size(), 125u);
  const std::string csv = slice_field_csv(field);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 126);
  EXPECT_EQ(csv.substr(0, csv.find('\n')).substr(0, 16), "param_0,param_1,");
  EXPECT_EQ(csv, slice_field_csv(slice_curvature_field({2, 2, 2}, 5)));
}

TEST(SliceField, StickBreakingStaysInsideSimplex) {
  const SliceField field = slice_curvature_field({3, 2}, 3);
  EXPECT_EQ(field.samples.size(), 27u);
  for (const auto& s : field.samples) {
    EXPECT_GT(s.point.minCoeff(), 0.0);
    EXPECT_NEAR(s.point.sum(), 1.0, 1e-14);
  }
}

TEST(SffDegeneracy, HigherLevelsAreInvisible) {
  const Shape shape({2, 3, 2});
  const NormalFrame frame = normal_frame(shape);
  for (Index k = 3; k < frame.level_count(); ++k)
    for (Index i = 0; i < frame.level_size(k); ++i) {
      const DenseTensor l = frame.basic(k, i);
      EXPECT_LE(sff_degeneracy_check(frame, {l}).cwiseAbs().maxCoeff(), 1e-10 * l.norm());
    }
  Rng rng(4);
  DenseTensor mixed = random_normal_functional(shape, rng);
  for (Index lin = 0; lin < mixed.size(); ++lin)
    if (level_of(shape.multi_index(lin)) == 2)
      mixed.data()[lin] = 0.0;
  EXPECT_LE(sff_degeneracy_check(frame, {mixed}).cwiseAbs().maxCoeff(), 1e-10 * mixed.norm());
}

TEST(SffDegeneracy, SecondLevelIsSeen) {
  const Shape shape({2, 3, 2});
  const NormalFrame frame = normal_frame(shape);
  for (Index i = 0; i < frame.level_size(2); ++i) {
    const DenseTensor l = frame.basic(2, i);
    const MatrixXd m = sff_degeneracy_check(frame, {l});
    EXPECT_GT(m.cwiseAbs().maxCoeff(), 1e-3 * l.norm());
    EXPECT_LE((m - m.transpose()).norm(), 1e-14);
  }
}
