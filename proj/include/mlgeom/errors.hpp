#pragma once

#include <stdexcept>
#include <string>

namespace mlgeom {

/// Shapes, sizes or indices that do not fit together.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A rank tuple that no tensor of the given shape can have.
class InadmissibleRankError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Singular values too close to the rank threshold to decide the rank.
class AmbiguousRankError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Tangent vectors of a chart are (numerically) linearly dependent.
class DegenerateChartError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Chart parameters outside the chart's domain.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A functional that has a tangential component at the base point.
class NotNormalError : public std::invalid_argument {
public:
  NotNormalError(const std::string& what, double tangent_norm)
      : std::invalid_argument(what), tangent_norm_(tangent_norm) {}
  double tangent_norm() const noexcept { return tangent_norm_; }

private:
  double tangent_norm_;
};

/// A normal functional that vanishes on every level k >= 2.
class NoWitnessError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The halving search for witness points hit its floor.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Slice normal orthogonal to the point: the hyperplane does not cut the cone transversally there.
class SliceTangencyError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Functional proportional to the slice normal, hence constant on the slice.
class ConstantFunctionalError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace mlgeom
