#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "antijam/channel.hpp"
#include "antijam/common.hpp"
#include "antijam/cyclo.hpp"
#include "antijam/delay_gain.hpp"
#include "antijam/doppler.hpp"
#include "antijam/ofdm.hpp"

namespace antijam {

/// Knobs of the end-to-end blind estimator.
struct EstimatorOptions {
  int k_u = 2;            // UAV path count (design input)
  double nu_u1 = 0.0;     // LoS Doppler from the secure control link
  ScanGrid scan;
  DelaySearch delay;
  double eps_classify = 1e-3;   // relative anchor tolerance on data
  double delta_max = 0.0;       // delay search span; 0 derives it from the CP budget
  double perm_tol_min = 1e-9;   // qualification tolerance floor
  double perm_tol_max = 0.1;
  int n_probe = 64;             // sign-resolution window
  bool resolve_sign_ambiguity = true;
};

struct EstimationReport {
  ChannelEstimate estimate;
  CyclePeakList peaks;
  int k_j = 0;
  double perm_tol = 0.0;
};

/// Cycle-frequency scan -> jammer order -> permutation least squares ->
/// LoS-anchored classification -> per-path delay and gain recovery ->
/// sign disambiguation.
inline EstimationReport estimate_channel(const BlockSequence& blocks,
                                         const OfdmConfig& cfg,
                                         const OfdmMatrices& mats,
                                         const EstimatorOptions& opts) {
  EstimationReport rep;
  rep.peaks = scan_objective(blocks, opts.scan);

  // Model-order fallback: a peak count that admits no consistent
  // (K_U, K_J) structure signals a wrong L_a, so the weakest peaks are
  // dropped one at a time (at most two) before giving up.
  std::vector<std::pair<double, double>> ranked;  // (alpha, score)
  for (std::size_t i = 0; i < rep.peaks.alphas.size(); ++i)
    ranked.emplace_back(rep.peaks.alphas[i], rep.peaks.scores[i]);

  DopplerSets sets;
  std::exception_ptr last_error;
  bool solved = false;
  VectorXd alpha;
  for (int drop = 0; drop <= 2 && !solved; ++drop) {
    const int l_a = static_cast<int>(ranked.size()) - drop;
    if (l_a < 2) break;
    std::vector<std::pair<double, double>> use = ranked;
    std::sort(use.begin(), use.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    use.resize(l_a);
    std::sort(use.begin(), use.end());

    alpha.resize(l_a);
    double min_abs = 1e300;
    for (int i = 0; i < l_a; ++i) {
      alpha(i) = use[i].first;
      min_abs = std::min(min_abs, std::abs(alpha(i)));
    }
    min_abs = std::max(min_abs, rep.peaks.resolution);
    rep.perm_tol = std::clamp(10.0 * rep.peaks.resolution / min_abs,
                              opts.perm_tol_min, opts.perm_tol_max);
    try {
      rep.k_j = infer_kj(l_a, opts.k_u);
      const PermLsProblem prob =
          make_perm_ls_problem(alpha, opts.k_u, rep.k_j, rep.perm_tol);
      const std::vector<PermLsSolution> sols = solve_permutation_ls(prob);
      sets = classify_links(sols, opts.nu_u1, alpha, opts.k_u, opts.eps_classify);
      solved = true;
    } catch (const EstimationError&) {
      last_error = std::current_exception();
    }
  }
  if (!solved) {
    if (last_error) std::rethrow_exception(last_error);
    throw EstimationError(EstimationError::Kind::InconsistentPeakCount,
                          "estimate_channel: too few cycle-frequency peaks");
  }

  const CccmWorkspace workspace(blocks);
  const MatrixXcd upsilon = upsilon_matrix(mats);
  const PsiCoefficients psi0 = psi_coefficients(cfg.pulse, 0.0, cfg);
  const double delta_max = opts.delta_max > 0.0
                               ? opts.delta_max
                               : (cfg.l_cp + 1) * cfg.t_c - cfg.pulse.delta_filter;

  auto recover_path = [&](double nu_hat) {
    const CccmSet cccm = workspace.at(2.0 * nu_hat);
    const PhiSet phi = build_phi(cccm, nu_hat, cfg);
    const DelayEstimate de =
        estimate_delay(phi, psi0, delta_max, cfg, mats, upsilon, opts.delay);
    const cxd g2 = estimate_gain(phi, de.tau, cfg, mats);
    PathEstimate pe;
    pe.nu = nu_hat;
    pe.tau = de.tau;
    pe.g = std::sqrt(g2);
    return pe;
  };

  for (double nu : sets.uav) rep.estimate.uav.push_back(recover_path(nu));
  for (double nu : sets.jam) rep.estimate.jam.push_back(recover_path(nu));

  if (opts.resolve_sign_ambiguity)
    rep.estimate = resolve_signs(rep.estimate, blocks, cfg, mats, opts.n_probe);
  return rep;
}

}  // namespace antijam
