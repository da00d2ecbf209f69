#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "antijam/common.hpp"

namespace antijam {

inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

/// Combined DAC/ADC filter cascade seen by the sampled channel taps.
///
/// `sample(t)` evaluates the impulse response; `transform(f)` is the
/// continuous-time Fourier transform used to predict the DFT-domain pulse
/// coefficients (the receiver-side knowledge).  `delta_filter` is the
/// nominal duration entering the CP budget check.
struct PulseSpec {
  std::string name;
  double delta_filter = 0.0;
  std::function<double(double)> sample;
  std::function<cxd(double)> transform;
};

/// Ideal sampling pulse: a unit tap at t = 0 and a flat spectrum.  Only
/// meaningful for delays that are integer multiples of the sampling period.
inline PulseSpec delta_pulse(double t_c) {
  PulseSpec p;
  p.name = "delta";
  p.delta_filter = 0.0;
  p.sample = [t_c](double t) { return std::abs(t) < 1e-9 * t_c ? 1.0 : 0.0; };
  p.transform = [t_c](double) { return cxd(t_c, 0.0); };
  return p;
}

/// Linear-interpolation kernel of duration 2 T_c (triangle centred at T_c).
/// A fractional delay produces the usual two-tap split (1 - x, x); the
/// kernel's own one-sample group delay is part of `transform` and is
/// corrected for by the receiver.
inline PulseSpec hat_pulse(double t_c) {
  PulseSpec p;
  p.name = "hat";
  p.delta_filter = 2.0 * t_c;
  p.sample = [t_c](double t) {
    const double u = t / t_c - 1.0;
    const double a = 1.0 - std::abs(u);
    return a > 0.0 ? a : 0.0;
  };
  p.transform = [t_c](double f) {
    const double s = sinc(f * t_c);
    return t_c * s * s * std::exp(-kJ * (2.0 * kPi * f * t_c));
  };
  return p;
}

/// Zero-excess-bandwidth interpolator sinc(t / T_c) with a brick-wall
/// spectrum on (-1/2T_c, 1/2T_c).  Time support is unbounded; the channel
/// construction windows its taps to the CP span, which is the documented
/// approximation of this pulse.
inline PulseSpec bl_sinc_pulse(double t_c) {
  PulseSpec p;
  p.name = "bl_sinc";
  p.delta_filter = t_c;
  p.sample = [t_c](double t) { return sinc(t / t_c); };
  p.transform = [t_c](double f) {
    return std::abs(f) < 0.5 / t_c ? cxd(t_c, 0.0) : cxd(0.0, 0.0);
  };
  return p;
}

inline PulseSpec make_pulse(const std::string& name, double t_c) {
  if (name == "delta") return delta_pulse(t_c);
  if (name == "hat") return hat_pulse(t_c);
  if (name == "bl_sinc") return bl_sinc_pulse(t_c);
  throw ConfigError("unknown pulse: " + name);
}

}  // namespace antijam
