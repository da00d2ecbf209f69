#pragma once

#include <random>

#include "antijam/common.hpp"
#include "antijam/pulse.hpp"
#include "antijam/rng.hpp"

namespace antijam {

/// Static OFDM system parameters.  Immutable after construction; shared
/// freely across Monte Carlo workers.
struct OfdmConfig {
  int m = 16;            // subcarriers
  int l_cp = 4;          // cyclic prefix length
  double t_c = 1.6e-6;   // sampling period [s]
  double f0 = 27e9;      // carrier [Hz]
  double sigma_w2 = 0.0; // noise variance [W]
  PulseSpec pulse;

  int p() const { return m + l_cp; }
  double t_block() const { return p() * t_c; }

  void validate() const {
    if (m < 2) throw ConfigError("OfdmConfig: M must be >= 2");
    if (l_cp < 1) throw ConfigError("OfdmConfig: L_cp must be >= 1");
    if (t_c <= 0.0) throw ConfigError("OfdmConfig: T_c must be positive");
    if (sigma_w2 < 0.0) throw ConfigError("OfdmConfig: noise variance must be >= 0");
    if (!pulse.sample || !pulse.transform) throw ConfigError("OfdmConfig: pulse not set");
  }

  /// CP budget against a channel of maximum delay spread `delta_max`.
  /// The exact sampled-tap condition is delta_filter + delta_max <=
  /// (L_cp + 1) T_c: every tap index then lands inside the CP span and
  /// CP removal is interference-free.
  void validate_cp_budget(double delta_max) const {
    if (delta_max < 0.0) throw ConfigError("delta_max must be >= 0");
    const double budget = (l_cp + 1) * t_c;
    if (pulse.delta_filter + delta_max > budget * (1.0 + 1e-12)) {
      throw ConfigError("CP too short: delta_filter + delta_max exceeds (L_cp + 1) T_c");
    }
  }
};

/// Dense OFDM structural matrices (desk scale keeps P small, so no FFT
/// fast path is needed).
struct OfdmMatrices {
  MatrixXcd w_m;    // M x M unitary IDFT
  MatrixXcd w_p;    // P x P unitary IDFT
  MatrixXd i_cp;    // P x M CP insertion
  MatrixXd r_cp;    // M x P CP removal
  MatrixXcd omega;  // P x M, I_cp * W_M
};

inline MatrixXcd unitary_idft(int n) {
  MatrixXcd w(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      w(p, q) = s * std::exp(kJ * (2.0 * kPi * p * q / n));
  return w;
}

inline OfdmMatrices build_matrices(const OfdmConfig& cfg) {
  cfg.validate();
  const int m = cfg.m, p = cfg.p(), l = cfg.l_cp;
  OfdmMatrices mats;
  mats.w_m = unitary_idft(m);
  mats.w_p = unitary_idft(p);
  mats.i_cp = MatrixXd::Zero(p, m);
  mats.i_cp.topRows(l) = MatrixXd::Identity(m, m).bottomRows(l);
  mats.i_cp.bottomRows(m) = MatrixXd::Identity(m, m);
  mats.r_cp = MatrixXd::Zero(m, p);
  mats.r_cp.rightCols(m) = MatrixXd::Identity(m, m);
  mats.omega = mats.i_cp * mats.w_m;
  return mats;
}

/// IDFT + CP insertion of one symbol block.
inline VectorXcd modulate_block(const VectorXd& s, const OfdmMatrices& mats) {
  if (s.size() != mats.w_m.rows())
    throw ConfigError("modulate_block: symbol block length mismatch");
  return mats.omega * s;
}

/// Deterministic i.i.d. BPSK stream; distinct seeds give independent
/// streams for the two transmitters.
class BpskSource {
 public:
  explicit BpskSource(std::mt19937_64 rng) : rng_(std::move(rng)) {}

  VectorXd next_block(int m) {
    VectorXd s(m);
    for (int i = 0; i < m; ++i) s(i) = bit_(rng_) ? 1.0 : -1.0;
    return s;
  }

 private:
  std::mt19937_64 rng_;
  std::bernoulli_distribution bit_{0.5};
};

}  // namespace antijam
