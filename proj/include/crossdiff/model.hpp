#pragma once

#include <string>

namespace crossdiff {

enum class DetectorKind { Exponential, Rational, Constant };

/// Edge detector g(s): exp(-s^2/lambda^2), 1/(1+(s/lambda)^2), or a positive
/// constant. Evaluation never returns a value <= 0 for finite input; the
/// exponential is floored at the smallest normal double instead of
/// underflowing to zero.
struct EdgeDetector {
  DetectorKind kind = DetectorKind::Exponential;
  double lambda = 1.0;
  double const_value = 1.0;

  static EdgeDetector exponential(double lambda);
  static EdgeDetector rational(double lambda);
  static EdgeDetector constant(double value = 1.0);

  double operator()(double s) const;
  /// g'(s); zero where the exponential sits on its floor.
  double derivative(double s) const;
  /// sup over s of g(s).
  double supremum() const;
  /// Throws InvalidArgument for a non-positive scale or constant.
  void validate() const;
};

/// Constant 2x2 diffusion matrix coupling the fluxes of (u1, u2).
struct DiffusionMatrix {
  double a11 = 1.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 1.0;

  /// [[cos t, -sin t], [sin t, cos t]].
  static DiffusionMatrix rotation(double theta);
  static DiffusionMatrix identity() { return {}; }

  double operator()(int i, int j) const {
    return i == 0 ? (j == 0 ? a11 : a12) : (j == 0 ? a21 : a22);
  }
  /// alpha_ij = a_ij / a_jj.
  double alpha(int i, int j) const { return (*this)(i, j) / (*this)(j, j); }
};

/// Returns a0 = smallest eigenvalue of (A + A^T)/2 when it is positive and
/// a_ii > |a_ji| for i != j. Otherwise throws HypothesisViolated naming the
/// clause that failed.
double check_hypothesis(const DiffusionMatrix& a);

std::string to_string(DetectorKind kind);
DetectorKind detector_kind_from_string(const std::string& name);

}  // namespace crossdiff
