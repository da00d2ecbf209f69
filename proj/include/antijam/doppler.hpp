#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "antijam/common.hpp"

namespace antijam {

/// Jammer path count from the peak count: positive integer root of
/// K_J^2 + K_J = 2 L_a - K_U (K_U + 1).
inline int infer_kj(int l_a, int k_u) {
  const double c = 2.0 * l_a - static_cast<double>(k_u) * (k_u + 1);
  if (c <= 0.0)
    throw EstimationError(EstimationError::Kind::InconsistentPeakCount,
                          "infer_kj: peak count too small for K_U");
  const double root = (-1.0 + std::sqrt(1.0 + 4.0 * c)) / 2.0;
  const double rounded = std::round(root);
  if (std::abs(root - rounded) > 1e-9 || rounded < 1.0)
    throw EstimationError(EstimationError::Kind::InconsistentPeakCount,
                          "infer_kj: no integer solution, peak count is off");
  return static_cast<int>(rounded);
}

/// Mixed-integer least-squares system relating observed cycle frequencies
/// to the stacked Doppler vector: P B nu = alpha with B = (2 I_K; Gamma)
/// and Gamma holding one row per within-link pair (k < h).
struct PermLsProblem {
  VectorXd alpha;
  int k_u = 0;
  int k_j = 0;
  MatrixXd b;
  MatrixXd projector;   // B (B^T B)^{-1} B^T
  MatrixXd pinv;        // (B^T B)^{-1} B^T
  double tol_rel = 1e-9;
};

inline MatrixXd pair_sum_matrix(int k_u, int k_j) {
  const int k = k_u + k_j;
  const int l_a = k_u * (k_u + 1) / 2 + k_j * (k_j + 1) / 2;
  MatrixXd b = MatrixXd::Zero(l_a, k);
  b.topRows(k) = 2.0 * MatrixXd::Identity(k, k);
  int row = k;
  for (int i = 0; i < k_u; ++i)
    for (int j = i + 1; j < k_u; ++j) {
      b(row, i) = 1.0;
      b(row, j) = 1.0;
      ++row;
    }
  for (int i = 0; i < k_j; ++i)
    for (int j = i + 1; j < k_j; ++j) {
      b(row, k_u + i) = 1.0;
      b(row, k_u + j) = 1.0;
      ++row;
    }
  return b;
}

inline PermLsProblem make_perm_ls_problem(const VectorXd& alpha, int k_u, int k_j,
                                          double tol_rel = 1e-9) {
  PermLsProblem prob;
  prob.alpha = alpha;
  prob.k_u = k_u;
  prob.k_j = k_j;
  prob.tol_rel = tol_rel;
  prob.b = pair_sum_matrix(k_u, k_j);
  if (prob.b.rows() != alpha.size())
    throw ConfigError("perm-LS: alpha length does not match L_a(K_U, K_J)");
  if (alpha.size() > 12)
    throw ConfigError("perm-LS: exhaustive search limited to L_a <= 12");
  const MatrixXd gram = prob.b.transpose() * prob.b;
  prob.pinv = gram.ldlt().solve(prob.b.transpose());
  prob.projector = prob.b * prob.pinv;
  return prob;
}

struct PermLsSolution {
  std::vector<int> perm;  // slot j of the ordered vector takes alpha[perm[j]]
  VectorXd nu;            // length K_U + K_J
};

namespace detail {

struct PermSearch {
  const PermLsProblem& prob;
  int l_a;
  int k;
  double norm2;
  double tol_abs;
  double prune_abs;
  std::vector<int> slot;
  std::vector<bool> used;
  VectorXd beta;
  std::vector<PermLsSolution>& out;

  void recurse(int j) {
    if (out.size() >= 4096) return;  // safety valve, never hit at desk scale
    if (j == l_a) {
      const double obj = beta.dot(prob.projector * beta);
      if (norm2 - obj <= tol_abs) {
        PermLsSolution sol;
        sol.perm = slot;
        sol.nu = prob.pinv * beta;
        out.push_back(std::move(sol));
      }
      return;
    }
    for (int idx = 0; idx < l_a; ++idx) {
      if (used[idx]) continue;
      const double val = prob.alpha(idx);
      if (j >= k) {
        // Partial-objective bound: off-diagonal slots must match the pair
        // sum implied by the already-placed diagonal entries.
        double expected = 0.0;
        for (int c = 0; c < k; ++c)
          expected += prob.b(j, c) * 0.5 * beta(c);
        const double miss = val - expected;
        if (miss * miss > prune_abs) continue;
      }
      used[idx] = true;
      slot[j] = idx;
      beta(j) = val;
      recurse(j + 1);
      used[idx] = false;
    }
  }
};

}  // namespace detail

/// Enumerate every permutation attaining the least-squares upper bound
/// |alpha|^2 within the problem tolerance; each returns its Doppler vector
/// nu_LS = (B^T B)^{-1} B^T P^T alpha.
inline std::vector<PermLsSolution> solve_permutation_ls(const PermLsProblem& prob) {
  const int l_a = static_cast<int>(prob.alpha.size());
  std::vector<PermLsSolution> out;
  detail::PermSearch search{prob,
                            l_a,
                            prob.k_u + prob.k_j,
                            prob.alpha.squaredNorm(),
                            prob.tol_rel * prob.alpha.squaredNorm(),
                            9.0 * prob.tol_rel * prob.alpha.squaredNorm(),
                            std::vector<int>(l_a, -1),
                            std::vector<bool>(l_a, false),
                            VectorXd::Zero(l_a),
                            out};
  search.recurse(0);
  if (out.empty())
    throw EstimationError(EstimationError::Kind::NoQualifyingPermutation,
                          "perm-LS: no permutation reaches the least-squares bound");
  return out;
}

struct DopplerSets {
  std::vector<double> uav;
  std::vector<double> jam;
};

/// LoS-anchored classification: an entry nu belongs to the UAV set iff
/// nu + nu_{U,1} is itself an observed cycle frequency (within relative
/// error eps).  Solutions are scanned in order; the first that yields K_U
/// UAV entries wins.
inline DopplerSets classify_links(const std::vector<PermLsSolution>& solutions,
                                  double nu_u1, const VectorXd& alpha, int k_u,
                                  double eps) {
  for (const PermLsSolution& sol : solutions) {
    DopplerSets sets;
    for (int i = 0; i < sol.nu.size(); ++i) {
      const double probe = sol.nu(i) + nu_u1;
      bool match = false;
      for (int l = 0; l < alpha.size(); ++l) {
        const double denom = std::max(std::abs(alpha(l)), 1e-300);
        if (std::abs(probe - alpha(l)) / denom <= eps) {
          match = true;
          break;
        }
      }
      if (match && static_cast<int>(sets.uav.size()) < k_u)
        sets.uav.push_back(sol.nu(i));
      else
        sets.jam.push_back(sol.nu(i));
    }
    if (static_cast<int>(sets.uav.size()) == k_u) return sets;
  }
  throw EstimationError(EstimationError::Kind::ClassificationFailed,
                        "classify_links: no solution yields K_U anchored entries");
}

}  // namespace antijam
