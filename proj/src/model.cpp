#include "crossdiff/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crossdiff/error.hpp"

namespace crossdiff {

EdgeDetector EdgeDetector::exponential(double lambda) { return {DetectorKind::Exponential, lambda, 1.0}; }
EdgeDetector EdgeDetector::rational(double lambda) { return {DetectorKind::Rational, lambda, 1.0}; }
EdgeDetector EdgeDetector::constant(double value) { return {DetectorKind::Constant, 1.0, value}; }

double EdgeDetector::operator()(double s) const {
  switch (kind) {
    case DetectorKind::Exponential: {
      const double r = s / lambda;
      return std::max(std::exp(-r * r), std::numeric_limits<double>::min());
    }
    case DetectorKind::Rational: {
      const double r = s / lambda;
      return std::max(1.0 / (1.0 + r * r), std::numeric_limits<double>::min());
    }
    case DetectorKind::Constant:
      return const_value;
  }
  return const_value;
}

double EdgeDetector::derivative(double s) const {
  const double r = s / lambda;
  switch (kind) {
    case DetectorKind::Exponential: {
      const double e = std::exp(-r * r);
      return e < std::numeric_limits<double>::min() ? 0.0 : -2.0 * r / lambda * e;
    }
    case DetectorKind::Rational: {
      const double d = 1.0 + r * r;
      return -2.0 * r / lambda / (d * d);
    }
    case DetectorKind::Constant:
      return 0.0;
  }
  return 0.0;
}

double EdgeDetector::supremum() const { return kind == DetectorKind::Constant ? const_value : 1.0; }

void EdgeDetector::validate() const {
  if (kind == DetectorKind::Constant) {
    if (!(const_value > 0.0) || !std::isfinite(const_value)) {
      throw Error(ErrorCode::InvalidArgument, "constant detector value must be positive");
    }
  } else if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "detector scale lambda must be positive");
  }
}

DiffusionMatrix DiffusionMatrix::rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c, -s, s, c};
}

double check_hypothesis(const DiffusionMatrix& a) {
  for (double v : {a.a11, a.a12, a.a21, a.a22}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::HypothesisViolated, "matrix entries must be finite");
  }
  // Symmetric part [[a11, m], [m, a22]] with m = (a12 + a21)/2.
  const double m = 0.5 * (a.a12 + a.a21);
  const double half_trace = 0.5 * (a.a11 + a.a22);
  const double radius = std::hypot(0.5 * (a.a11 - a.a22), m);
  const double a0 = half_trace - radius;
  if (!(a0 > 0.0)) {
    throw Error(ErrorCode::HypothesisViolated,
                "symmetric part is not positive definite (min eigenvalue " + std::to_string(a0) + ")");
  }
  if (!(a.a11 > std::abs(a.a21))) {
    throw Error(ErrorCode::HypothesisViolated, "dominance a11 > |a21| fails");
  }
  if (!(a.a22 > std::abs(a.a12))) {
    throw Error(ErrorCode::HypothesisViolated, "dominance a22 > |a12| fails");
  }
  return a0;
}

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Exponential: return "exponential";
    case DetectorKind::Rational: return "rational";
    case DetectorKind::Constant: return "constant";
  }
  return "exponential";
}

DetectorKind detector_kind_from_string(const std::string& name) {
  if (name == "exponential" || name == "exp") return DetectorKind::Exponential;
  if (name == "rational") return DetectorKind::Rational;
  if (name == "constant") return DetectorKind::Constant;
  throw Error(ErrorCode::InvalidArgument, "unknown detector kind '" + name + "'");
}

}  // namespace crossdiff
