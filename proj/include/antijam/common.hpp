#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace antijam {

using cxd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Eigen::VectorXi;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr cxd kJ{0.0, 1.0};

inline double db10(double x) { return 10.0 * std::log10(x); }
inline double from_db10(double x_db) { return std::pow(10.0, x_db / 10.0); }
inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

/// Invalid static configuration (dimensions, CP budget, delay ranges).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown inside an otherwise valid computation
/// (rank-deficient triangular factor, degenerate denominator, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A blind-estimation stage could not complete on the given data.  The
/// harness counts these per run instead of aborting a sweep.
class EstimationError : public std::runtime_error {
 public:
  enum class Kind {
    InsufficientData,
    NoPeaks,
    InconsistentPeakCount,
    NoQualifyingPermutation,
    ClassificationFailed,
  };

  EstimationError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Compensated accumulator; keeps Monte Carlo reductions independent of
// summation batch sizes.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline double rel_frobenius_error(const MatrixXcd& a, const MatrixXcd& b) {
  const double scale = b.norm();
  if (scale == 0.0) return a.norm();
  return (a - b).norm() / scale;
}

}  // namespace antijam
