#pragma once

#include "antijam/common.hpp"
#include "antijam/ofdm.hpp"
#include "antijam/pulse.hpp"

namespace antijam {

/// DFT-domain pulse coefficients Psi[p] under the zero-excess-bandwidth
/// model.  The first P/2 coefficients do not depend on the fractional
/// delay chi and are therefore known at the receiver; the upper half
/// carries the e^{j 2 pi chi / T_c} image phase.
struct PsiCoefficients {
  VectorXcd psi;
  double chi = 0.0;
};

inline PsiCoefficients psi_coefficients(const PulseSpec& pulse, double chi,
                                        const OfdmConfig& cfg) {
  const int p_len = cfg.p();
  const double t = cfg.t_block();
  PsiCoefficients out;
  out.chi = chi;
  out.psi.resize(p_len);
  const cxd image_phase = std::exp(kJ * (2.0 * kPi * chi / cfg.t_c));
  for (int p = 0; p < p_len; ++p) {
    if (p < p_len / 2) {
      out.psi(p) = pulse.transform(p / t) / cfg.t_c;
    } else {
      out.psi(p) = pulse.transform((p - p_len) / t) / cfg.t_c * image_phase;
    }
  }
  return out;
}

/// Eigenvalue vector v of the circulant per-path response at delay tau:
/// v_p = Psi[p] e^{-j 2 pi tau p / T}.
inline VectorXcd delay_response(const PulseSpec& pulse, double tau,
                                const OfdmConfig& cfg) {
  const int p_len = cfg.p();
  const double t = cfg.t_block();
  const double chi = tau - std::floor(tau / cfg.t_c) * cfg.t_c;
  const PsiCoefficients coeff = psi_coefficients(pulse, chi, cfg);
  VectorXcd v(p_len);
  for (int p = 0; p < p_len; ++p)
    v(p) = coeff.psi(p) * std::exp(-kJ * (2.0 * kPi * tau * p / t));
  return v;
}

}  // namespace antijam
