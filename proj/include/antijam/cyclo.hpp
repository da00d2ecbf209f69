#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "antijam/channel.hpp"
#include "antijam/common.hpp"
#include "antijam/fft.hpp"
#include "antijam/ofdm.hpp"

namespace antijam {

/// Conjugate cyclic correlation matrices at one cycle frequency,
/// lags r in {-1, 0, 1} stored at index r + 1.
struct CccmSet {
  double alpha = 0.0;
  std::array<MatrixXcd, 3> r;

  const MatrixXcd& lag(int rr) const { return r[rr + 1]; }
  MatrixXcd& lag(int rr) { return r[rr + 1]; }
};

inline double j_value(const CccmSet& set) {
  double s = 0.0;
  for (const auto& m : set.r) s += m.squaredNorm();
  return s;
}

/// Closed-form CCCM of the two-link model at cycle frequency alpha: the sum
/// of the per-pair terms over every (link, k, h) whose Doppler sum matches
/// alpha.  Off-cycle frequencies give zero matrices.
inline CccmSet analytic_cccm(const LinkParams& uav, const LinkParams& jam,
                             double alpha, const OfdmConfig& cfg,
                             const OfdmMatrices& mats,
                             TapModel model = TapModel::Sampled,
                             double match_tol = 1e-12) {
  const int p_len = cfg.p();
  CccmSet out;
  out.alpha = alpha;
  for (auto& m : out.r) m = MatrixXcd::Zero(p_len, p_len);

  const MatrixXcd omega_sq = mats.omega * mats.omega.transpose();

  for (const LinkParams* link : {&uav, &jam}) {
    const std::size_t k_paths = link->paths.size();
    std::vector<MatrixXcd> t0(k_paths), t1(k_paths);
    std::vector<VectorXcd> d(k_paths);
    for (std::size_t k = 0; k < k_paths; ++k) {
      t0[k] = build_toeplitz(link->paths[k], 0, cfg, mats, model);
      t1[k] = build_toeplitz(link->paths[k], 1, cfg, mats, model);
      d[k] = doppler_progression(link->paths[k].nu, p_len);
    }
    for (std::size_t k = 0; k < k_paths; ++k) {
      for (std::size_t h = 0; h < k_paths; ++h) {
        const double sum = link->paths[k].nu + link->paths[h].nu;
        if (std::abs(sum - alpha) > match_tol) continue;
        const cxd gg = link->paths[k].g * link->paths[h].g;
        const cxd rot = std::exp(kJ * (2.0 * kPi * link->paths[h].nu));
        const auto dk = d[k].asDiagonal();
        const auto dh = d[h].asDiagonal();
        out.lag(-1) += gg * rot * (dk * (t0[k] * omega_sq * t1[h].transpose()) * dh);
        out.lag(0) += gg * (dk *
                            (t0[k] * omega_sq * t0[h].transpose() +
                             t1[k] * omega_sq * t1[h].transpose()) *
                            dh);
        out.lag(1) += gg / rot * (dk * (t1[k] * omega_sq * t0[h].transpose()) * dh);
      }
    }
  }
  return out;
}

/// Consistent finite-sample CCCM estimate; the average runs over the
/// one-sided window n in {1, ..., N-2}, common to all three lags.
inline MatrixXcd estimate_cccm(const BlockSequence& blocks, double alpha, int r) {
  if (r < -1 || r > 1) throw ConfigError("estimate_cccm: lag must be in {-1,0,1}");
  const int n_blocks = blocks.blocks();
  if (n_blocks < 3)
    throw EstimationError(EstimationError::Kind::InsufficientData,
                          "estimate_cccm: need at least 3 blocks");
  const int p_len = static_cast<int>(blocks.ybar.rows());
  MatrixXcd acc = MatrixXcd::Zero(p_len, p_len);
  const cxd step = std::exp(-kJ * (2.0 * kPi * alpha));
  cxd phase = step;  // e^{-j 2 pi alpha n} at n = 1
  for (int n = 1; n <= n_blocks - 2; ++n) {
    acc.noalias() += (phase * blocks.ybar.col(n)) * blocks.ybar.col(n - r).transpose();
    phase *= step;
    if ((n & 1023) == 0)
      phase = std::exp(-kJ * (2.0 * kPi * alpha * (n + 1)));
  }
  return acc / static_cast<double>(n_blocks - 2);
}

struct ScanGrid {
  int grid_log2 = 14;        // coarse grid points over [-1/2, 1/2)
  int refine_top = 24;       // candidates kept for local refinement
  double threshold_sigmas = 6.0;
  int max_peaks = 0;         // 0 = keep everything above threshold
};

struct CyclePeakList {
  std::vector<double> alphas;  // sorted ascending
  std::vector<double> scores;
  double coarse_step = 0.0;
  double resolution = 0.0;  // refinement tolerance
  double threshold = 0.0;
};

namespace detail {

// Exact Jhat(alpha) = sum_r |Rhat^alpha[r]|^2 evaluated by direct
// correlation; used by tests and as the refinement reference.
class CccmScanContext {
 public:
  explicit CccmScanContext(const BlockSequence& blocks)
      : p_(static_cast<int>(blocks.ybar.rows())),
        n_lo_(1),
        n_hi_(blocks.blocks() - 2),
        y_(blocks.ybar) {
    if (blocks.blocks() < 3)
      throw EstimationError(EstimationError::Kind::InsufficientData,
                            "scan_objective: need at least 3 blocks");
    const int len = n_hi_ - n_lo_ + 1;
    lagged_.resize(len, 3 * p_);
    for (int n = n_lo_; n <= n_hi_; ++n) {
      lagged_.row(n - n_lo_).segment(0, p_) = y_.col(n + 1).transpose();
      lagged_.row(n - n_lo_).segment(p_, p_) = y_.col(n).transpose();
      lagged_.row(n - n_lo_).segment(2 * p_, p_) = y_.col(n - 1).transpose();
    }
  }

  int window_len() const { return n_hi_ - n_lo_ + 1; }

  // P x 3P block [S(-1) S(0) S(+1)] of unnormalized lag correlations.
  MatrixXcd correlate(double alpha) const {
    const int len = window_len();
    MatrixXcd u(p_, len);
    for (int n = n_lo_; n <= n_hi_; ++n)
      u.col(n - n_lo_) = y_.col(n) * std::exp(-kJ * (2.0 * kPi * alpha * n));
    return u * lagged_;
  }

  double objective(double alpha) const {
    const double len = window_len();
    return correlate(alpha).squaredNorm() / (len * len);
  }

  const MatrixXcd& lagged() const { return lagged_; }
  const MatrixXcd& ybar() const { return y_; }
  int n_lo() const { return n_lo_; }
  int n_hi() const { return n_hi_; }
  int p() const { return p_; }

 private:
  int p_;
  int n_lo_;
  int n_hi_;
  const MatrixXcd& y_;
  MatrixXcd lagged_;
};

// Local model of Jhat around a grid point: segment moments of the phased
// rank-one stream allow O(segments) evaluation of Jhat(alpha0 + delta) for
// |delta| up to about one coarse grid step.
class LocalObjective {
 public:
  LocalObjective(const CccmScanContext& ctx, double alpha0, int seg_len = 256)
      : alpha0_(alpha0), n_prime_(ctx.window_len()) {
    const int len = ctx.window_len();
    const int p = ctx.p();
    const int n_seg = (len + seg_len - 1) / seg_len;
    centers_.resize(n_seg);
    for (auto& m : moments_) m.assign(n_seg, MatrixXcd::Zero(p, 3 * p));

    VectorXcd weights(len);
    for (int i = 0; i < len; ++i) {
      const int n = ctx.n_lo() + i;
      weights(i) = std::exp(-kJ * (2.0 * kPi * alpha0 * n));
    }
    for (int s = 0; s < n_seg; ++s) {
      const int i0 = s * seg_len;
      const int l = std::min(seg_len, len - i0);
      const double center = ctx.n_lo() + i0 + 0.5 * (l - 1);
      centers_[s] = center;
      MatrixXcd yseg(p, l);
      for (int i = 0; i < l; ++i)
        yseg.col(i) = ctx.ybar().col(ctx.n_lo() + i0 + i);
      const auto vseg = ctx.lagged().middleRows(i0, l);
      for (int m = 0; m <= 3; ++m) {
        VectorXcd w(l);
        for (int i = 0; i < l; ++i) {
          const double t = (ctx.n_lo() + i0 + i) - center;
          w(i) = weights(i0 + i) * std::pow(t, m);
        }
        moments_[m][s].noalias() = (yseg * w.asDiagonal()) * vseg;
      }
    }
  }

  double operator()(double alpha) const {
    const double delta = alpha - alpha0_;
    const cxd a = -kJ * (2.0 * kPi * delta);
    const cxd c1 = a, c2 = a * a / 2.0, c3 = a * a * a / 6.0;
    MatrixXcd s = MatrixXcd::Zero(moments_[0].front().rows(),
                                  moments_[0].front().cols());
    for (std::size_t seg = 0; seg < centers_.size(); ++seg) {
      const cxd phase = std::exp(-kJ * (2.0 * kPi * delta * centers_[seg]));
      s.noalias() += phase * (moments_[0][seg] + c1 * moments_[1][seg] +
                              c2 * moments_[2][seg] + c3 * moments_[3][seg]);
    }
    const double len = n_prime_;
    return s.squaredNorm() / (len * len);
  }

 private:
  double alpha0_;
  double n_prime_;
  std::vector<double> centers_;
  std::array<std::vector<MatrixXcd>, 4> moments_;
};

template <typename F>
double golden_max(const F& f, double lo, double hi, double xtol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  // Parabolic vertex through the three central points sharpens the last
  // bracket without extra structure.
  const double xm = 0.5 * (a + b), h = 0.5 * (b - a);
  if (h > 0.0) {
    const double fa = f(xm - h), fm = f(xm), fb = f(xm + h);
    const double denom = fa - 2.0 * fm + fb;
    if (std::abs(denom) > 1e-300) {
      const double shift = 0.5 * h * (fa - fb) / denom;
      if (std::abs(shift) <= h) {
        const double xv = xm + shift;
        if (f(xv) >= fm) return xv;
      }
    }
    return fm >= std::max(fa, fb) ? xm : (fa > fb ? xm - h : xm + h);
  }
  return xm;
}

}  // namespace detail

namespace detail {

// Coarse pass: for every (r, p, q) the grid values of the lag product
// sequence are one zero-padded (index-folded) FFT; J accumulates the
// squared magnitudes.  alpha_g = -1/2 + g / G absorbs a (-1)^n factor.
inline std::vector<double> jhat_coarse_grid(const CccmScanContext& ctx, int g) {
  const int p = ctx.p();
  const int n_lo = ctx.n_lo(), n_hi = ctx.n_hi();
  const double n_prime = ctx.window_len();
  std::vector<double> j_grid(g, 0.0);
  std::vector<cxd> buf(g);
  const MatrixXcd& y = ctx.ybar();
  for (int r = -1; r <= 1; ++r) {
    for (int row = 0; row < p; ++row) {
      for (int col = 0; col < p; ++col) {
        std::fill(buf.begin(), buf.end(), cxd(0.0, 0.0));
        for (int n = n_lo; n <= n_hi; ++n) {
          const cxd z = y(row, n) * y(col, n - r);
          buf[n & (g - 1)] += (n & 1) ? -z : z;
        }
        fft_pow2(buf);
        for (int i = 0; i < g; ++i) j_grid[i] += std::norm(buf[i]);
      }
    }
  }
  const double inv = 1.0 / (n_prime * n_prime);
  for (double& v : j_grid) v *= inv;
  return j_grid;
}

}  // namespace detail

/// Coarse-grid Jhat values over [-1/2, 1/2) (diagnostic curve).
inline std::vector<double> jhat_grid(const BlockSequence& blocks, int grid_log2) {
  const detail::CccmScanContext ctx(blocks);
  return detail::jhat_coarse_grid(ctx, 1 << grid_log2);
}

/// Grid scan of the cycle-frequency objective Jhat(alpha) with local
/// golden-section refinement of the strongest candidates.  Peaks below the
/// null-calibrated threshold or under a stronger peak's sidelobe envelope
/// are discarded; peaks closer than 1/(2N) merge.  Zero surviving peaks is
/// an estimation failure.
inline CyclePeakList scan_objective(const BlockSequence& blocks,
                                    const ScanGrid& grid = {}) {
  const detail::CccmScanContext ctx(blocks);
  const double n_prime = ctx.window_len();
  // The finite-window mainlobe is ~1/N wide; a coarser grid can sample a
  // peak at its Dirichlet nulls and miss it outright, so the grid widens
  // to at least twice the window length.
  int g = 1 << grid.grid_log2;
  while (g < 2 * ctx.window_len()) g <<= 1;
  const std::vector<double> j_grid = detail::jhat_coarse_grid(ctx, g);

  // Null calibration: peaks occupy a vanishing fraction of the grid, so
  // the mean and spread of the noise floor are taken over the lower 99.5%
  // of bins, mirroring a pure-noise scan.
  std::vector<double> sorted = j_grid;
  std::sort(sorted.begin(), sorted.end());
  const int n_floor = g - std::max(16, g / 200);
  double mean = 0.0;
  for (int i = 0; i < n_floor; ++i) mean += sorted[i];
  mean /= n_floor;
  double var = 0.0;
  for (int i = 0; i < n_floor; ++i) var += (sorted[i] - mean) * (sorted[i] - mean);
  var /= n_floor;
  const double threshold = mean + grid.threshold_sigmas * std::sqrt(var);

  const double step = 1.0 / g;
  struct Cand {
    double alpha;
    double score;
  };
  // Sidelobes of a strong peak form local maxima of their own; they must
  // not crowd genuine peak candidates out of the refinement budget, so
  // dominated maxima are dropped before the top-k cut.
  const auto dominated = [&](const Cand& c, const std::vector<Cand>& kept) {
    for (const Cand& k : kept) {
      const double x = std::abs(k.alpha - c.alpha) * n_prime;
      if (x < 0.5) return true;
      const double envelope =
          x < 1.5 ? 1.0 : std::min(1.0, 10.0 / std::pow(kPi * (x - 0.5), 2.0));
      if (c.score < k.score * envelope) return true;
    }
    return false;
  };

  std::vector<Cand> maxima;
  for (int i = 0; i < g; ++i) {
    const double left = j_grid[(i + g - 1) & (g - 1)];
    const double right = j_grid[(i + 1) & (g - 1)];
    if (j_grid[i] > threshold && j_grid[i] >= left && j_grid[i] > right)
      maxima.push_back({-0.5 + i * step, j_grid[i]});
  }
  std::sort(maxima.begin(), maxima.end(),
            [](const Cand& a, const Cand& b) { return a.score > b.score; });
  std::vector<Cand> cands;
  for (const Cand& c : maxima) {
    if (static_cast<int>(cands.size()) >= grid.refine_top) break;
    if (!dominated(c, cands)) cands.push_back(c);
  }

  const double xtol = std::max(1.0 / (64.0 * n_prime), 1e-10);
  std::vector<Cand> refined;
  for (const Cand& c : cands) {
    const detail::LocalObjective local(ctx, c.alpha);
    const double a = detail::golden_max(local, c.alpha - step, c.alpha + step, xtol);
    refined.push_back({a, local(a)});
  }

  std::sort(refined.begin(), refined.end(),
            [](const Cand& a, const Cand& b) { return a.score > b.score; });
  // Merge refined peaks that coincide within the window resolution 1/(2N)
  // or sit under a stronger peak's sidelobe envelope.
  std::vector<Cand> merged;
  for (const Cand& c : refined) {
    if (!dominated(c, merged) && c.score > threshold) merged.push_back(c);
  }
  if (grid.max_peaks > 0 && static_cast<int>(merged.size()) > grid.max_peaks)
    merged.resize(grid.max_peaks);
  if (merged.empty())
    throw EstimationError(EstimationError::Kind::NoPeaks,
                          "scan_objective: no cycle-frequency peaks above threshold");

  std::sort(merged.begin(), merged.end(),
            [](const Cand& a, const Cand& b) { return a.alpha < b.alpha; });
  CyclePeakList out;
  out.coarse_step = step;
  out.resolution = xtol;
  out.threshold = threshold;
  for (const Cand& c : merged) {
    out.alphas.push_back(c.alpha);
    out.scores.push_back(c.score);
  }
  return out;
}

/// Exact finite-sample objective at one frequency (diagnostics and tests).
inline double jhat_value(const BlockSequence& blocks, double alpha) {
  return detail::CccmScanContext(blocks).objective(alpha);
}

/// Reusable estimator state over one block sequence: amortizes the lagged
/// data layout when CCCMs are needed at several cycle frequencies.
class CccmWorkspace {
 public:
  explicit CccmWorkspace(const BlockSequence& blocks) : ctx_(blocks) {}

  CccmSet at(double alpha) const {
    const int p = ctx_.p();
    const MatrixXcd s = ctx_.correlate(alpha) / static_cast<double>(ctx_.window_len());
    CccmSet out;
    out.alpha = alpha;
    out.lag(-1) = s.middleCols(0, p);
    out.lag(0) = s.middleCols(p, p);
    out.lag(1) = s.middleCols(2 * p, p);
    return out;
  }

  double objective(double alpha) const { return ctx_.objective(alpha); }

 private:
  detail::CccmScanContext ctx_;
};

}  // namespace antijam
