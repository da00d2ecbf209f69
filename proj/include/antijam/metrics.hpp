#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "antijam/channel.hpp"
#include "antijam/common.hpp"
#include "antijam/delay_gain.hpp"
#include "antijam/ofdm.hpp"

namespace antijam {

/// Throughput of the CP-redundant payload given the fraction of errored
/// blocks: rate (1/T_c)(M/P) scaled by the error-free fraction.
inline double throughput_from_aber(double block_error_rate, const OfdmConfig& cfg) {
  const double rate = (1.0 / cfg.t_c) * static_cast<double>(cfg.m) / cfg.p();
  return rate * (1.0 - block_error_rate);
}

/// Linear (not dB) normalized parameter MSEs for one link.
struct LinkMse {
  double gain = std::numeric_limits<double>::quiet_NaN();
  double doppler = std::numeric_limits<double>::quiet_NaN();
  double delay = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::vector<int> best_assignment(const std::vector<PathEstimate>& est,
                                        const std::vector<PathParams>& truth) {
  const int k = static_cast<int>(truth.size());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int i = 0; i < k; ++i) {
      const double d = est[perm[i]].nu - truth[i].nu;
      cost += d * d;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace detail

/// Compare a recovered path set against the ground truth of one link.
/// Paths are paired by nearest Doppler; Doppler errors are normalized by
/// D_TX^2, delays by Delta_TX^2, gains by sigma_TX^2.  The per-link BPSK
/// polarity (unidentifiable blind) is scored out by taking the better of
/// the two global signs.
inline LinkMse link_mse(const std::vector<PathEstimate>& est,
                        const LinkParams& truth, double doppler_hz,
                        double delta_max, double sigma2, double t_block) {
  LinkMse out;
  if (est.size() != truth.paths.size() || est.empty()) return out;
  const std::vector<int> perm = detail::best_assignment(est, truth.paths);
  const int k = static_cast<int>(est.size());

  double mse_nu = 0.0, mse_tau = 0.0;
  double gain_plus = 0.0, gain_minus = 0.0;
  for (int i = 0; i < k; ++i) {
    const PathEstimate& e = est[perm[i]];
    const PathParams& t = truth.paths[i];
    const double df = (e.nu - t.nu) / t_block;
    mse_nu += df * df;
    mse_tau += (e.tau - t.tau) * (e.tau - t.tau);
    gain_plus += std::norm(e.g - t.g);
    gain_minus += std::norm(-e.g - t.g);
  }
  out.doppler = mse_nu / k / (doppler_hz * doppler_hz);
  out.delay = mse_tau / k / (delta_max * delta_max);
  out.gain = std::min(gain_plus, gain_minus) / k / sigma2;
  return out;
}

/// Error counts of one detection pass.
struct ErrorCounts {
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  std::uint64_t block_errors = 0;
  std::uint64_t blocks = 0;

  double aber() const { return bits ? static_cast<double>(bit_errors) / bits : 0.0; }
  double bler() const {
    return blocks ? static_cast<double>(block_errors) / blocks : 0.0;
  }
};

inline void count_block_errors(const VectorXd& detected, const VectorXd& truth,
                               double polarity, ErrorCounts& counts) {
  std::uint64_t errs = 0;
  for (int i = 0; i < truth.size(); ++i)
    if (polarity * detected(i) != truth(i)) ++errs;
  counts.bit_errors += errs;
  counts.bits += truth.size();
  counts.block_errors += errs > 0 ? 1 : 0;
  counts.blocks += 1;
}

/// Pick the per-link polarity that minimizes errors over a short
/// calibration window of detected blocks (the blind pipeline cannot
/// identify it for uncoded BPSK).
inline double calibrate_polarity(const std::vector<VectorXd>& detected,
                                 const MatrixXd& truth, int n_calib) {
  const int n = std::min<int>(n_calib, static_cast<int>(detected.size()));
  std::uint64_t err_plus = 0, err_minus = 0;
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i < truth.rows(); ++i) {
      if (detected[b](i) != truth(i, b)) ++err_plus;
      if (-detected[b](i) != truth(i, b)) ++err_minus;
    }
  }
  return err_minus < err_plus ? -1.0 : 1.0;
}

}  // namespace antijam
