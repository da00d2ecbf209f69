#pragma once

#include <random>
#include <vector>

#include "antijam/common.hpp"
#include "antijam/ofdm.hpp"
#include "antijam/psi.hpp"
#include "antijam/rng.hpp"

namespace antijam {

/// One propagation path: complex gain, delay (integer + fractional parts
/// folded into tau) and normalized Doppler shift nu = f T.
struct PathParams {
  cxd g{1.0, 0.0};
  double tau = 0.0;
  double nu = 0.0;
};

enum class LinkId { Uav, Jammer };

struct LinkParams {
  std::vector<PathParams> paths;
  LinkId label = LinkId::Uav;
};

/// How per-path tap vectors are constructed.
///
/// Sampled:  taps are literal samples psi(l T_c - tau) on the CP window
///           l in {0, ..., L_cp}; CP removal is exactly IBI-free.
/// Spectral: taps realize the zero-excess-bandwidth circulant response
///           exactly (v_p = Psi[p] e^{-j 2 pi tau p / T}); this is the
///           model the blind delay/gain estimator inverts, at the price
///           of tap leakage beyond the CP window.
enum class TapModel { Sampled, Spectral };

inline VectorXcd doppler_progression(double nu, int p_len) {
  VectorXcd d(p_len);
  for (int p = 0; p < p_len; ++p)
    d(p) = std::exp(kJ * (2.0 * kPi * nu * p / p_len));
  return d;
}

namespace detail {

// First column of the per-path circulant C = T0 + T1.
inline VectorXcd path_tap_column(const PathParams& path, const OfdmConfig& cfg,
                                 const OfdmMatrices& mats, TapModel model) {
  const int p_len = cfg.p();
  VectorXcd c = VectorXcd::Zero(p_len);
  if (model == TapModel::Sampled) {
    for (int l = 0; l <= cfg.l_cp; ++l)
      c(l) = cfg.pulse.sample(l * cfg.t_c - path.tau);
  } else {
    // C = W_P diag(v) W_P^H has first column W_P diag(v) W_P^H e_0.
    const VectorXcd v = delay_response(cfg.pulse, path.tau, cfg);
    c = mats.w_p * (v.asDiagonal() * mats.w_p.adjoint().col(0));
  }
  return c;
}

}  // namespace detail

/// Toeplitz factor T_{k,b} of the per-path response: b = 0 is the
/// current-block (lower) part, b = 1 the previous-block wrap carrying IBI.
/// Their sum is circulant with the path tap vector as first column.
inline MatrixXcd build_toeplitz(const PathParams& path, int b,
                                const OfdmConfig& cfg, const OfdmMatrices& mats,
                                TapModel model = TapModel::Sampled) {
  if (b != 0 && b != 1) throw ConfigError("build_toeplitz: b must be 0 or 1");
  const int p_len = cfg.p();
  const VectorXcd c = detail::path_tap_column(path, cfg, mats, model);
  MatrixXcd t = MatrixXcd::Zero(p_len, p_len);
  for (int p = 0; p < p_len; ++p) {
    for (int q = 0; q < p_len; ++q) {
      if (b == 0 && p >= q) t(p, q) = c(p - q);
      if (b == 1 && q > p) t(p, q) = c(p_len + p - q);
    }
  }
  return t;
}

/// Per-link precomputation: with B_{k,b} = D_k T_{k,b} Omega cached, the
/// block-n channel matrices are scalar-weighted sums over paths.
struct LinkChannel {
  LinkParams params;
  std::vector<MatrixXcd> b0;  // P x M per path
  std::vector<MatrixXcd> b1;  // P x M per path

  MatrixXcd hbar(int n, int b) const {
    const int p_len = static_cast<int>(b0.front().rows());
    const int m = static_cast<int>(b0.front().cols());
    MatrixXcd h = MatrixXcd::Zero(p_len, m);
    for (std::size_t k = 0; k < params.paths.size(); ++k) {
      const cxd rot = params.paths[k].g *
                      std::exp(kJ * (2.0 * kPi * params.paths[k].nu * n));
      h.noalias() += rot * (b == 0 ? b0[k] : b1[k]);
    }
    return h;
  }
};

inline LinkChannel make_link_channel(const LinkParams& link, const OfdmConfig& cfg,
                                     const OfdmMatrices& mats,
                                     TapModel model = TapModel::Sampled) {
  LinkChannel ch;
  ch.params = link;
  for (const PathParams& path : link.paths) {
    const VectorXcd d = doppler_progression(path.nu, cfg.p());
    const MatrixXcd t0 = build_toeplitz(path, 0, cfg, mats, model);
    const MatrixXcd t1 = build_toeplitz(path, 1, cfg, mats, model);
    ch.b0.push_back(d.asDiagonal() * t0 * mats.omega);
    ch.b1.push_back(d.asDiagonal() * t1 * mats.omega);
  }
  return ch;
}

struct ChannelSlice {
  MatrixXcd hbar0;  // P x M
  MatrixXcd hbar1;  // P x M
  MatrixXcd h;      // M x M, after CP removal
};

inline ChannelSlice build_channel(const LinkParams& link, int n,
                                  const OfdmConfig& cfg, const OfdmMatrices& mats,
                                  TapModel model = TapModel::Sampled) {
  const LinkChannel ch = make_link_channel(link, cfg, mats, model);
  ChannelSlice s;
  s.hbar0 = ch.hbar(n, 0);
  s.hbar1 = ch.hbar(n, 1);
  s.h = mats.r_cp * s.hbar0;
  return s;
}

/// Received data stream: ybar keeps the whole OFDM block (CP included, with
/// IBI) for the estimators; y is the CP-removed vector the detector sees.
/// Columns index the block number n.
struct BlockSequence {
  int m = 0;
  int l_cp = 0;
  MatrixXcd ybar;  // P x N
  MatrixXcd y;     // M x N

  int blocks() const { return static_cast<int>(ybar.cols()); }
};

struct GeneratedData {
  BlockSequence blocks;
  MatrixXd s_u;  // M x N ground-truth UAV symbols
  MatrixXd s_j;  // M x N ground-truth jammer symbols
};

struct GenerationSeeds {
  std::uint64_t seed = 1;
  std::uint64_t run = 0;
};

/// Simulate Eq.-level reception: ybar[n] = Hbar_{U,0}[n] s_U[n] +
/// Hbar_{U,1}[n] s_U[n-1] + (same for jammer) + noise, with s[-1] = 0.
inline GeneratedData generate_received(const LinkParams& uav, const LinkParams& jam,
                                       const OfdmConfig& cfg, const OfdmMatrices& mats,
                                       int n_blocks, const GenerationSeeds& seeds,
                                       TapModel model = TapModel::Sampled) {
  if (n_blocks < 1) throw ConfigError("generate_received: need at least one block");
  const int m = cfg.m, p_len = cfg.p();

  const LinkChannel ch_u = make_link_channel(uav, cfg, mats, model);
  const LinkChannel ch_j = make_link_channel(jam, cfg, mats, model);

  BpskSource src_u(make_stream(seeds.seed, seeds.run, StreamTag::UavSymbols));
  BpskSource src_j(make_stream(seeds.seed, seeds.run, StreamTag::JammerSymbols));
  auto noise_rng = make_stream(seeds.seed, seeds.run, StreamTag::Noise);

  GeneratedData out;
  out.blocks.m = m;
  out.blocks.l_cp = cfg.l_cp;
  out.blocks.ybar.resize(p_len, n_blocks);
  out.blocks.y.resize(m, n_blocks);
  out.s_u.resize(m, n_blocks);
  out.s_j.resize(m, n_blocks);

  VectorXd su_prev = VectorXd::Zero(m), sj_prev = VectorXd::Zero(m);
  for (int n = 0; n < n_blocks; ++n) {
    const VectorXd su = src_u.next_block(m);
    const VectorXd sj = src_j.next_block(m);
    out.s_u.col(n) = su;
    out.s_j.col(n) = sj;

    VectorXcd yb = VectorXcd::Zero(p_len);
    if (!ch_u.params.paths.empty()) {
      yb.noalias() += ch_u.hbar(n, 0) * su;
      if (n > 0) yb.noalias() += ch_u.hbar(n, 1) * su_prev;
    }
    if (!ch_j.params.paths.empty()) {
      yb.noalias() += ch_j.hbar(n, 0) * sj;
      if (n > 0) yb.noalias() += ch_j.hbar(n, 1) * sj_prev;
    }
    if (cfg.sigma_w2 > 0.0) {
      for (int i = 0; i < p_len; ++i)
        yb(i) += circular_gaussian(noise_rng, cfg.sigma_w2);
    }
    out.blocks.ybar.col(n) = yb;
    out.blocks.y.col(n) = yb.tail(m);
    su_prev = su;
    sj_prev = sj;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random scenario draws (one-sided exponential delay profile, Rayleigh gains,
// cosine-projected Doppler shifts).

struct LinkProfile {
  int k_paths = 2;
  double sigma2 = 1.0;      // E|g|^2 per path [W]
  double delta_max = 0.0;   // max delay spread [s]
  double tau_slope = 0.0;   // exponential profile slope [s]
  double doppler_hz = 0.0;  // D_TX [Hz]
};

inline PathParams draw_path(std::mt19937_64& rng, const LinkProfile& prof,
                            const OfdmConfig& cfg) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  PathParams path;
  path.g = circular_gaussian(rng, prof.sigma2);
  if (prof.tau_slope > 0.0) {
    const double u = uni(rng);
    path.tau = -prof.tau_slope *
               std::log(1.0 - u * (1.0 - std::exp(-prof.delta_max / prof.tau_slope)));
  } else {
    path.tau = uni(rng) * prof.delta_max;
  }
  const double theta = 2.0 * kPi * uni(rng);
  path.nu = prof.doppler_hz * std::cos(theta) * cfg.t_block();
  return path;
}

/// All Doppler shifts pairwise distinct and all unordered pair sums
/// distinct, checked at relative tolerance `rel_tol`.
inline bool satisfies_a7(const LinkParams& uav, const LinkParams& jam,
                         double rel_tol = 1e-6) {
  std::vector<double> nu;
  for (const auto& p : uav.paths) nu.push_back(p.nu);
  for (const auto& p : jam.paths) nu.push_back(p.nu);
  const std::size_t k = nu.size();
  double scale = 0.0;
  for (double v : nu) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (std::abs(nu[i] - nu[j]) < rel_tol * scale) return false;
  std::vector<double> sums;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      // Pair sums must stay clear of the mod-1 wrap for the linear
      // Doppler-recovery system to apply.
      if (std::abs(nu[i]) + std::abs(nu[j]) >= 0.5) return false;
      sums.push_back(nu[i] + nu[j]);
    }
  for (std::size_t i = 0; i < sums.size(); ++i)
    for (std::size_t j = i + 1; j < sums.size(); ++j)
      if (std::abs(sums[i] - sums[j]) < rel_tol * scale) return false;
  return true;
}

struct ChannelDraw {
  LinkParams uav;
  LinkParams jam;
};

inline ChannelDraw draw_channels(std::mt19937_64& rng, const LinkProfile& prof_u,
                                 const LinkProfile& prof_j, const OfdmConfig& cfg,
                                 double a7_rel_tol = 1e-6, int max_attempts = 1000) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    ChannelDraw draw;
    draw.uav.label = LinkId::Uav;
    draw.jam.label = LinkId::Jammer;
    for (int k = 0; k < prof_u.k_paths; ++k)
      draw.uav.paths.push_back(draw_path(rng, prof_u, cfg));
    for (int k = 0; k < prof_j.k_paths; ++k)
      draw.jam.paths.push_back(draw_path(rng, prof_j, cfg));
    if (satisfies_a7(draw.uav, draw.jam, a7_rel_tol)) return draw;
  }
  throw NumericalError("draw_channels: could not satisfy A7 after resampling");
}

}  // namespace antijam
