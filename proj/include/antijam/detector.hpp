#pragma once

#include <Eigen/QR>
#include <utility>
#include <vector>

#include "antijam/common.hpp"

namespace antijam {

/// Augmented observation (y; y*) with the conjugate-stacked channel, the
/// form in which noncircular (real) symbols become jointly detectable.
struct AugmentedModel {
  VectorXcd y_tilde;   // 2M
  MatrixXcd h_tilde;   // 2M x (columns)
  double sigma_w2 = 0.0;
};

inline AugmentedModel augment(const VectorXcd& y, const MatrixXcd& h_u,
                              const MatrixXcd& h_j, double sigma_w2) {
  const int m = static_cast<int>(y.size());
  AugmentedModel a;
  a.sigma_w2 = sigma_w2;
  a.y_tilde.resize(2 * m);
  a.y_tilde.head(m) = y;
  a.y_tilde.tail(m) = y.conjugate();
  const int cols = static_cast<int>(h_u.cols() + h_j.cols());
  a.h_tilde.resize(2 * m, cols);
  a.h_tilde.topLeftCorner(m, h_u.cols()) = h_u;
  a.h_tilde.topRightCorner(m, h_j.cols()) = h_j;
  a.h_tilde.bottomLeftCorner(m, h_u.cols()) = h_u.conjugate();
  a.h_tilde.bottomRightCorner(m, h_j.cols()) = h_j.conjugate();
  return a;
}

/// Jamming-unaware augmentation: only the UAV channel is stacked, the
/// jammer is left inside the noise term.
inline AugmentedModel augment_single(const VectorXcd& y, const MatrixXcd& h_u,
                                     double sigma_w2) {
  return augment(y, h_u, MatrixXcd(static_cast<int>(y.size()), 0), sigma_w2);
}

/// WL-MMSE filter F = (H^H H + sigma^2 I)^{-1} H^H; for sigma^2 > 0 this
/// equals H^H (H H^H + sigma^2 I)^{-1}.
inline MatrixXcd wl_mmse_filter(const MatrixXcd& h, double sigma_w2) {
  MatrixXcd gram = h.adjoint() * h;
  gram.diagonal().array() += sigma_w2;
  Eigen::LDLT<MatrixXcd> ldlt(gram);
  const VectorXd d = ldlt.vectorD().cwiseAbs();
  const double d_max = d.size() ? d.maxCoeff() : 0.0;
  if (ldlt.info() != Eigen::Success || d_max == 0.0 ||
      d.minCoeff() < 1e-13 * d_max)
    throw NumericalError("wl_mmse_filter: degenerate channel with zero noise");
  MatrixXcd f = ldlt.solve(h.adjoint());
  if (!f.allFinite())
    throw NumericalError("wl_mmse_filter: degenerate channel with zero noise");
  return f;
}

namespace detail {

// Economy QR of G = (H^T, sigma_w I)^T.  For sigma_w = 0 the zero block is
// dropped; R and the pre-detector output are unchanged.
struct QrParts {
  MatrixXcd r;      // n x n upper triangular
  MatrixXcd r_inv;  // n x n upper triangular
  VectorXcd qh_y;   // Q^H (y; 0), first n entries
};

inline QrParts qr_parts(const VectorXcd& y, const MatrixXcd& h, double sigma_w2) {
  const int m = static_cast<int>(h.rows());
  const int n = static_cast<int>(h.cols());
  MatrixXcd g;
  VectorXcd stacked;
  if (sigma_w2 > 0.0) {
    g.resize(m + n, n);
    g.topRows(m) = h;
    g.bottomRows(n) = std::sqrt(sigma_w2) * MatrixXcd::Identity(n, n);
    stacked = VectorXcd::Zero(m + n);
    stacked.head(m) = y;
  } else {
    g = h;
    stacked = y;
  }
  Eigen::HouseholderQR<MatrixXcd> qr(g);
  QrParts parts;
  parts.r = qr.matrixQR().topRows(n).template triangularView<Eigen::Upper>();
  const double scale = parts.r.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    if (std::abs(parts.r(i, i)) <= 1e-14 * std::max(scale, 1.0))
      throw NumericalError("qr_predetect: numerically rank-deficient system");
  }
  parts.r_inv = parts.r.template triangularView<Eigen::Upper>().solve(
      MatrixXcd::Identity(n, n));
  parts.qh_y = (qr.householderQ().adjoint() * stacked).head(n);
  return parts;
}

}  // namespace detail

/// QR form of the WL-MMSE pre-detector: z = R^{-1} Q^H (y; 0).
inline VectorXcd qr_predetect(const VectorXcd& y, const MatrixXcd& h,
                              double sigma_w2) {
  const auto parts = detail::qr_parts(y, h, sigma_w2);
  return parts.r_inv * parts.qh_y;
}

/// Post-detection SDNR of each remaining symbol from the rows of R^{-1},
/// and the argmax (ties resolved to the lowest index).  With sigma_w2 = 0
/// the reciprocal row energies are returned; the ordering is the same.
inline std::pair<VectorXd, int> sdnr_psa(const MatrixXcd& r_inv, double sigma_w2) {
  const int n = static_cast<int>(r_inv.rows());
  VectorXd gamma(n);
  for (int m = 0; m < n; ++m) {
    double s = 0.0;
    for (int l = m; l < n; ++l) s += std::norm(r_inv(m, l));
    gamma(m) = sigma_w2 > 0.0 ? 1.0 / (sigma_w2 * s) - 1.0 : 1.0 / s;
  }
  int best = 0;
  for (int m = 1; m < n; ++m)
    if (gamma(m) > gamma(best)) best = m;
  return {gamma, best};
}

inline double quantize_bpsk(const cxd& z) { return z.real() >= 0.0 ? 1.0 : -1.0; }

/// Serial-cancellation state: residual observation, remaining columns and
/// the (step, origin, hard symbol) decisions taken so far.  Origins track
/// each column back to its position in the initial model so UAV and jammer
/// symbols stay separable.
struct SicState {
  VectorXcd y;
  MatrixXcd h;
  double sigma_w2 = 0.0;
  std::vector<int> origins;
  struct Decision {
    int step;
    int origin;
    double xi;
  };
  std::vector<Decision> detected;
};

inline SicState make_sic_state(const AugmentedModel& model) {
  SicState s;
  s.y = model.y_tilde;
  s.h = model.h_tilde;
  s.sigma_w2 = model.sigma_w2;
  s.origins.resize(model.h_tilde.cols());
  for (std::size_t i = 0; i < s.origins.size(); ++i) s.origins[i] = static_cast<int>(i);
  return s;
}

/// One pre-detect / sort / quantize / cancel cycle.
inline SicState sic_step(SicState state) {
  const auto parts = detail::qr_parts(state.y, state.h, state.sigma_w2);
  const VectorXcd z = parts.r_inv * parts.qh_y;
  const auto [gamma, lmax] = sdnr_psa(parts.r_inv, state.sigma_w2);
  (void)gamma;
  const double xi = quantize_bpsk(z(lmax));

  state.y -= xi * state.h.col(lmax);
  state.detected.push_back(
      {static_cast<int>(state.detected.size()), state.origins[lmax], xi});

  const int n = static_cast<int>(state.h.cols());
  MatrixXcd h_next(state.h.rows(), n - 1);
  std::vector<int> origins_next;
  origins_next.reserve(n - 1);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (i == lmax) continue;
    h_next.col(col++) = state.h.col(i);
    origins_next.push_back(state.origins[i]);
  }
  state.h = std::move(h_next);
  state.origins = std::move(origins_next);
  return state;
}

enum class DetectorMode { Sic, MmseOnly, SicJu };

struct DetectResult {
  VectorXd s_u;
  VectorXd s_j;   // empty in jamming-unaware mode
  bool has_jammer = false;
};

/// One-shot detection of a block.  Sic runs the full 2M-step loop over the
/// joint model; MmseOnly quantizes the step-0 soft output; SicJu stacks
/// only the UAV channel and runs M steps with the jammer folded into the
/// disturbance covariance (the jamming-unaware receiver is idealized with
/// exact knowledge of the received correlation matrix, so the jammer acts
/// as known colored noise).
inline DetectResult detect_block(const VectorXcd& y, const MatrixXcd& h_u,
                                 const MatrixXcd& h_j, double sigma_w2,
                                 DetectorMode mode) {
  const int m = static_cast<int>(y.size());
  DetectResult out;
  out.s_u = VectorXd::Zero(m);

  if (mode == DetectorMode::SicJu) {
    AugmentedModel model = augment_single(y, h_u, sigma_w2);
    const AugmentedModel jam = augment_single(VectorXcd::Zero(m), h_j, 0.0);
    MatrixXcd r_dist = jam.h_tilde * jam.h_tilde.adjoint();
    r_dist.diagonal().array() += sigma_w2;
    Eigen::LLT<MatrixXcd> llt(r_dist);
    if (llt.info() == Eigen::Success) {
      // Whiten against the jammer-plus-noise covariance; the whitened
      // problem is a unit-noise SIC over the UAV columns alone.
      model.y_tilde = llt.matrixL().solve(model.y_tilde);
      model.h_tilde = llt.matrixL().solve(model.h_tilde);
      model.sigma_w2 = 1.0;
    }
    SicState state = make_sic_state(model);
    for (int i = 0; i < m; ++i) state = sic_step(std::move(state));
    for (const auto& d : state.detected) out.s_u(d.origin) = d.xi;
    return out;
  }

  const AugmentedModel model = augment(y, h_u, h_j, sigma_w2);
  out.s_j = VectorXd::Zero(m);
  out.has_jammer = true;

  if (mode == DetectorMode::MmseOnly) {
    const VectorXcd z = qr_predetect(model.y_tilde, model.h_tilde, sigma_w2);
    for (int i = 0; i < 2 * m; ++i) {
      const double xi = quantize_bpsk(z(i));
      if (i < m)
        out.s_u(i) = xi;
      else
        out.s_j(i - m) = xi;
    }
    return out;
  }

  SicState state = make_sic_state(model);
  for (int i = 0; i < 2 * m; ++i) state = sic_step(std::move(state));
  for (const auto& d : state.detected) {
    if (d.origin < m)
      out.s_u(d.origin) = d.xi;
    else
      out.s_j(d.origin - m) = d.xi;
  }
  return out;
}

/// Mean squared step-0 quantization residual over a probe window; the
/// channel-sign disambiguation picks the candidate minimizing this.
inline double step0_quantization_residual(const MatrixXcd& y_blocks,
                                          const std::vector<MatrixXcd>& h_u,
                                          const std::vector<MatrixXcd>& h_j,
                                          double sigma_w2) {
  double acc = 0.0;
  for (int n = 0; n < y_blocks.cols(); ++n) {
    const AugmentedModel model =
        augment(y_blocks.col(n), h_u[n], h_j[n], sigma_w2);
    const MatrixXcd f = wl_mmse_filter(model.h_tilde, sigma_w2);
    const VectorXcd z = f * model.y_tilde;
    for (int i = 0; i < z.size(); ++i) acc += std::norm(z(i) - quantize_bpsk(z(i)));
  }
  return acc / static_cast<double>(y_blocks.cols());
}

}  // namespace antijam
