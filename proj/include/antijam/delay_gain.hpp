#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "antijam/channel.hpp"
#include "antijam/common.hpp"
#include "antijam/cyclo.hpp"
#include "antijam/detector.hpp"
#include "antijam/ofdm.hpp"
#include "antijam/psi.hpp"

namespace antijam {

/// Doppler-compensated per-path matrices Phi[r] and their sum, which for a
/// true path collapses to g^2 C Omega Omega^T C^T with C circulant.
struct PhiSet {
  std::array<MatrixXcd, 3> phi;
  MatrixXcd sum;

  const MatrixXcd& lag(int r) const { return phi[r + 1]; }
};

inline PhiSet build_phi(const CccmSet& cccm, double nu_hat, const OfdmConfig& cfg) {
  const int p_len = cfg.p();
  const VectorXcd d_conj = doppler_progression(nu_hat, p_len).conjugate();
  const MatrixXcd mask = d_conj * d_conj.transpose();
  const cxd rot = std::exp(kJ * (2.0 * kPi * nu_hat));

  PhiSet out;
  out.phi[0] = (1.0 / rot) * mask.cwiseProduct(cccm.lag(-1));
  out.phi[1] = mask.cwiseProduct(cccm.lag(0));
  out.phi[2] = rot * mask.cwiseProduct(cccm.lag(1));
  out.sum = out.phi[0] + out.phi[1] + out.phi[2];
  return out;
}

/// Upsilon = W_P^H Omega Omega^T W_P^* (fixed system matrix of the delay
/// cost).
inline MatrixXcd upsilon_matrix(const OfdmMatrices& mats) {
  const MatrixXcd a = mats.w_p.adjoint() * mats.omega;
  return a * a.transpose();
}

struct DelaySearch {
  double coarse_step_frac = 1.0 / 20.0;  // of T_c
  double golden_tol_frac = 1.0 / 2000.0; // of T_c
  int newton_max_iter = 24;
};

struct DelayEstimate {
  double tau = 0.0;
  double peak = 0.0;
};

namespace detail {

// I(beta) = | sum_{p < P/2} t_p e^{j 4 pi beta p / T} | from the
// chi-independent half of the spectrum.
class DelayObjective {
 public:
  DelayObjective(const MatrixXcd& phi_sum, const PsiCoefficients& psi0,
                 const OfdmConfig& cfg, const OfdmMatrices& mats,
                 const MatrixXcd& upsilon)
      : t_block_(cfg.t_block()) {
    const int p_len = cfg.p();
    const MatrixXcd spec = mats.w_p.adjoint() * phi_sum * mats.w_p.conjugate();
    for (int p = 0; p < p_len / 2; ++p) {
      if (std::abs(upsilon(p, p)) < 1e-12) continue;  // excluded bins
      const cxd term = spec(p, p) * std::conj(psi0.psi(p) * psi0.psi(p)) *
                       std::conj(upsilon(p, p));
      terms_.push_back(term);
      bins_.push_back(p);
    }
  }

  cxd sum_at(double beta) const {
    cxd s(0.0, 0.0);
    for (std::size_t i = 0; i < terms_.size(); ++i)
      s += terms_[i] * std::exp(kJ * (4.0 * kPi * beta * bins_[i] / t_block_));
    return s;
  }

  double operator()(double beta) const { return std::abs(sum_at(beta)); }

  // d/dbeta and d^2/dbeta^2 of |S|^2 for the Newton polish.
  std::pair<double, double> derivatives(double beta) const {
    cxd s(0.0, 0.0), s1(0.0, 0.0), s2(0.0, 0.0);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const cxd w = kJ * (4.0 * kPi * bins_[i] / t_block_);
      const cxd e = terms_[i] * std::exp(w * beta);
      s += e;
      s1 += w * e;
      s2 += w * w * e;
    }
    const double d1 = 2.0 * std::real(std::conj(s) * s1);
    const double d2 = 2.0 * std::real(std::conj(s) * s2) + 2.0 * std::norm(s1);
    return {d1, d2};
  }

 private:
  double t_block_;
  std::vector<cxd> terms_;
  std::vector<int> bins_;
};

}  // namespace detail

/// Delay acquisition: grid search of I(beta) over [0, delta_max] with
/// golden-section refinement and a Newton polish on |S|^2.  The search
/// interval must sit inside [0, T/2) so the T/2-periodic alias is excluded.
inline DelayEstimate estimate_delay(const PhiSet& phi, const PsiCoefficients& psi0,
                                    double delta_max, const OfdmConfig& cfg,
                                    const OfdmMatrices& mats, const MatrixXcd& upsilon,
                                    const DelaySearch& opts = {}) {
  if (delta_max >= cfg.t_block() / 2.0)
    throw ConfigError("estimate_delay: delta_max must be below T/2");
  const detail::DelayObjective obj(phi.sum, psi0, cfg, mats, upsilon);

  const double step = opts.coarse_step_frac * cfg.t_c;
  double best = 0.0, best_val = obj(0.0);
  for (double beta = step; beta <= delta_max + 0.5 * step; beta += step) {
    const double b = std::min(beta, delta_max);
    const double v = obj(b);
    if (v > best_val) {
      best_val = v;
      best = b;
    }
  }

  const double lo = std::max(0.0, best - step);
  const double hi = std::min(delta_max, best + step);
  double tau = detail::golden_max(obj, lo, hi, opts.golden_tol_frac * cfg.t_c);

  for (int it = 0; it < opts.newton_max_iter; ++it) {
    const auto [d1, d2] = obj.derivatives(tau);
    if (d2 >= 0.0) break;  // not at a local max curvature; keep golden result
    const double delta = -d1 / d2;
    const double next = std::clamp(tau + delta, lo, hi);
    if (std::abs(next - tau) < 1e-16 * cfg.t_block()) {
      tau = next;
      break;
    }
    tau = next;
  }
  return {tau, obj(tau)};
}

/// Sampled (beta, I(beta)) curve for diagnostics plotting.
inline std::vector<std::pair<double, double>> delay_cost_curve(
    const PhiSet& phi, const PsiCoefficients& psi0, double delta_max,
    const OfdmConfig& cfg, const OfdmMatrices& mats, const MatrixXcd& upsilon,
    int points = 400) {
  const detail::DelayObjective obj(phi.sum, psi0, cfg, mats, upsilon);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(points + 1);
  for (int i = 0; i <= points; ++i) {
    const double beta = delta_max * i / points;
    curve.emplace_back(beta, obj(beta));
  }
  return curve;
}

/// Least-squares fit of the squared gain against the reconstructed
/// circulant response; the square root carries the inherent sign
/// ambiguity.
inline cxd estimate_gain(const PhiSet& phi, double tau_hat, const OfdmConfig& cfg,
                         const OfdmMatrices& mats) {
  const VectorXcd v = delay_response(cfg.pulse, tau_hat, cfg);
  const MatrixXcd c = mats.w_p * (v.asDiagonal() * mats.w_p.adjoint());
  const MatrixXcd l = c * mats.omega;
  const MatrixXcd q = l * l.transpose();
  const double den = q.squaredNorm();
  if (den < 1e-14)
    throw NumericalError("estimate_gain: degenerate pulse response");
  const cxd num = (phi.sum.array() * q.conjugate().array()).sum();
  return num / den;
}

/// Per-path parameter triple recovered by the blind pipeline.
struct PathEstimate {
  double nu = 0.0;
  double tau = 0.0;
  cxd g{0.0, 0.0};
};

struct ChannelEstimate {
  std::vector<PathEstimate> uav;
  std::vector<PathEstimate> jam;
  bool signs_resolved = false;

  LinkParams uav_link() const {
    LinkParams l;
    l.label = LinkId::Uav;
    for (const auto& p : uav) l.paths.push_back({p.g, p.tau, p.nu});
    return l;
  }
  LinkParams jam_link() const {
    LinkParams l;
    l.label = LinkId::Jammer;
    for (const auto& p : jam) l.paths.push_back({p.g, p.tau, p.nu});
    return l;
  }
};

/// Rebuild the detector-facing channel matrices from estimated parameters
/// (receiver-side model, i.e. spectral taps).
struct ReconstructedChannel {
  LinkChannel uav;
  LinkChannel jam;
  const MatrixXd* r_cp = nullptr;

  std::pair<MatrixXcd, MatrixXcd> at(int n) const {
    return {(*r_cp) * uav.hbar(n, 0), (*r_cp) * jam.hbar(n, 0)};
  }
};

inline ReconstructedChannel reconstruct_channel(const ChannelEstimate& est,
                                                const OfdmConfig& cfg,
                                                const OfdmMatrices& mats) {
  ReconstructedChannel rc;
  rc.uav = make_link_channel(est.uav_link(), cfg, mats, TapModel::Spectral);
  rc.jam = make_link_channel(est.jam_link(), cfg, mats, TapModel::Spectral);
  rc.r_cp = &mats.r_cp;
  return rc;
}

/// Exhaustive +-1 sign search over all paths of both links: the candidate
/// whose rebuilt channel minimizes the step-0 quantization residual on a
/// probe window wins.  Ties resolve to the lowest candidate index.
inline ChannelEstimate resolve_signs(ChannelEstimate est, const BlockSequence& blocks,
                                     const OfdmConfig& cfg, const OfdmMatrices& mats,
                                     int n_probe = 64) {
  const int k_u = static_cast<int>(est.uav.size());
  const int k_total = k_u + static_cast<int>(est.jam.size());
  const int probe = std::min(n_probe, blocks.blocks());
  const MatrixXcd y_probe = blocks.y.leftCols(probe);

  // Per-path CP-removed components; candidates only flip their signs.
  std::vector<std::vector<MatrixXcd>> comp(k_total);
  for (int k = 0; k < k_total; ++k) {
    const PathEstimate& pe = k < k_u ? est.uav[k] : est.jam[k - k_u];
    LinkParams single;
    single.paths.push_back({pe.g, pe.tau, pe.nu});
    const LinkChannel lc = make_link_channel(single, cfg, mats, TapModel::Spectral);
    comp[k].reserve(probe);
    for (int n = 0; n < probe; ++n) comp[k].push_back(mats.r_cp * lc.hbar(n, 0));
  }

  double best_metric = 0.0;
  int best_cand = -1;
  for (int cand = 0; cand < (1 << k_total); ++cand) {
    std::vector<MatrixXcd> h_u(probe), h_j(probe);
    for (int n = 0; n < probe; ++n) {
      MatrixXcd hu = MatrixXcd::Zero(cfg.m, cfg.m);
      MatrixXcd hj = MatrixXcd::Zero(cfg.m, cfg.m);
      for (int k = 0; k < k_total; ++k) {
        const double sign = (cand >> k) & 1 ? -1.0 : 1.0;
        if (k < k_u)
          hu += sign * comp[k][n];
        else
          hj += sign * comp[k][n];
      }
      h_u[n] = std::move(hu);
      h_j[n] = std::move(hj);
    }
    const double metric =
        step0_quantization_residual(y_probe, h_u, h_j, cfg.sigma_w2);
    if (best_cand < 0 || metric < best_metric) {
      best_metric = metric;
      best_cand = cand;
    }
  }

  for (int k = 0; k < k_total; ++k) {
    const double sign = (best_cand >> k) & 1 ? -1.0 : 1.0;
    if (k < k_u)
      est.uav[k].g *= sign;
    else
      est.jam[k - k_u].g *= sign;
  }
  est.signs_resolved = true;
  return est;
}

}  // namespace antijam
