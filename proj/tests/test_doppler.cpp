#include <catch2/catch.hpp>
#include <random>
#include <numeric>
#include <set>

#include "antijam/doppler.hpp"

using namespace antijam;

namespace {

// Forward construction: the ordered alpha vector B nu, then a shuffle.
VectorXd make_alpha(const VectorXd& nu, int k_u, int k_j, std::mt19937_64& rng,
                    std::vector<int>* applied_perm = nullptr) {
  const MatrixXd b = pair_sum_matrix(k_u, k_j);
  VectorXd ordered = b * nu;
  std::vector<int> idx(ordered.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  VectorXd shuffled(ordered.size());
  for (int i = 0; i < ordered.size(); ++i) shuffled(i) = ordered(idx[i]);
  if (applied_perm) *applied_perm = idx;
  return shuffled;
}

VectorXd random_nu(int k, std::mt19937_64& rng, double span = 0.06) {
  std::uniform_real_distribution<double> uni(-span, span);
  while (true) {
    VectorXd nu(k);
    for (int i = 0; i < k; ++i) nu(i) = uni(rng);
    // Distinct sums with a healthy margin.
    std::vector<double> sums;
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) sums.push_back(nu(i) + nu(j));
    bool ok = true;
    for (std::size_t i = 0; i < sums.size(); ++i)
      for (std::size_t j = i + 1; j < sums.size(); ++j)
        ok = ok && std::abs(sums[i] - sums[j]) > 1e-4;
    if (ok) return nu;
  }
}

}  // namespace

TEST_CASE("jammer order from the peak count") {
  REQUIRE(infer_kj(6, 2) == 2);
  REQUIRE(infer_kj(2, 1) == 1);
  REQUIRE(infer_kj(9, 2) == 3);
  REQUIRE_THROWS_AS(infer_kj(5, 2), EstimationError);   // no integer root
  REQUIRE_THROWS_AS(infer_kj(10, 2), EstimationError);  // no integer root
  REQUIRE_THROWS_AS(infer_kj(3, 2), EstimationError);   // root would be zero
}

TEST_CASE("pair-sum system structure") {
  const MatrixXd b = pair_sum_matrix(2, 2);
  REQUIRE(b.rows() == 6);
  REQUIRE(b.cols() == 4);
  REQUIRE((b.topRows(4) - 2.0 * MatrixXd::Identity(4, 4)).norm() == 0.0);
  for (int r = 4; r < 6; ++r) {
    REQUIRE(b.row(r).sum() == 2.0);           // exactly two unit entries
    REQUIRE(b.row(r).maxCoeff() == 1.0);
  }
  // Off-diagonal rows only pair within a link.
  REQUIRE(b(4, 0) == 1.0);
  REQUIRE(b(4, 1) == 1.0);
  REQUIRE(b(5, 2) == 1.0);
  REQUIRE(b(5, 3) == 1.0);

  Eigen::FullPivLU<MatrixXd> lu(b);
  REQUIRE(lu.rank() == 4);  // full column rank
}

TEST_CASE("flat-fading case solves by the identity permutation") {
  VectorXd alpha(2);
  alpha << 2 * 0.0288, 2 * (-0.0113);
  const PermLsProblem prob = make_perm_ls_problem(alpha, 1, 1);
  const auto sols = solve_permutation_ls(prob);
  bool identity_found = false;
  for (const auto& s : sols) {
    if (s.perm == std::vector<int>{0, 1}) {
      identity_found = true;
      REQUIRE(s.nu(0) == Approx(0.0288).margin(1e-12));
      REQUIRE(s.nu(1) == Approx(-0.0113).margin(1e-12));
    }
  }
  REQUIRE(identity_found);
}

TEST_CASE("two-path links recover the Doppler multiset exactly") {
  std::mt19937_64 rng(314);
  for (int trial = 0; trial < 25; ++trial) {
    const VectorXd nu = random_nu(4, rng);
    const VectorXd alpha = make_alpha(nu, 2, 2, rng);
    const PermLsProblem prob = make_perm_ls_problem(alpha, 2, 2);
    const auto sols = solve_permutation_ls(prob);
    REQUIRE_FALSE(sols.empty());
    REQUIRE(sols.size() < 24u);  // Q < K!

    bool exact = false;
    for (const auto& s : sols) {
      std::vector<double> got(s.nu.data(), s.nu.data() + 4);
      std::vector<double> want(nu.data(), nu.data() + 4);
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      double err = 0.0;
      for (int i = 0; i < 4; ++i) err = std::max(err, std::abs(got[i] - want[i]));
      exact = exact || err < 1e-12;
    }
    REQUIRE(exact);

    // Every qualifying permutation satisfies the residual bound.
    for (const auto& s : sols) {
      VectorXd beta(alpha.size());
      for (int i = 0; i < alpha.size(); ++i) beta(i) = alpha(s.perm[i]);
      REQUIRE((prob.b * s.nu - beta).norm() < 1e-9 * alpha.norm());
    }
  }
}

TEST_CASE("non-qualifying permutations stay strictly below the bound") {
  std::mt19937_64 rng(2718);
  const VectorXd nu = random_nu(4, rng);
  std::vector<int> applied;
  const VectorXd alpha = make_alpha(nu, 2, 2, rng, &applied);
  const PermLsProblem prob = make_perm_ls_problem(alpha, 2, 2);
  const double bound = alpha.squaredNorm();

  std::vector<int> idx(6);
  std::iota(idx.begin(), idx.end(), 0);
  int qualifying = 0;
  do {
    VectorXd beta(6);
    for (int i = 0; i < 6; ++i) beta(i) = alpha(idx[i]);
    const double obj = beta.dot(prob.projector * beta);
    REQUIRE(obj <= bound * (1.0 + 1e-12));  // Rayleigh-Ritz upper bound
    if (bound - obj <= 1e-9 * bound) ++qualifying;
  } while (std::next_permutation(idx.begin(), idx.end()));

  const auto sols = solve_permutation_ls(prob);
  REQUIRE(static_cast<int>(sols.size()) == qualifying);
  REQUIRE(qualifying < 24);
}

TEST_CASE("LoS anchoring separates the two links") {
  std::mt19937_64 rng(99);

  SECTION("self-anchoring: 2 nu_U1 is always observed") {
    const VectorXd nu = random_nu(4, rng);
    const VectorXd alpha = make_alpha(nu, 2, 2, rng);
    const PermLsProblem prob = make_perm_ls_problem(alpha, 2, 2);
    const auto sols = solve_permutation_ls(prob);
    const DopplerSets sets = classify_links(sols, nu(0), alpha, 2, 1e-9);

    std::set<double> uav_want{nu(0), nu(1)}, jam_want{nu(2), nu(3)};
    REQUIRE(sets.uav.size() == 2);
    REQUIRE(sets.jam.size() == 2);
    for (double v : sets.uav)
      REQUIRE(std::min(std::abs(v - nu(0)), std::abs(v - nu(1))) < 1e-12);
    for (double v : sets.jam)
      REQUIRE(std::min(std::abs(v - nu(2)), std::abs(v - nu(3))) < 1e-12);
  }

  SECTION("an adversarial sum collision defeats the anchor test") {
    // K_U = 1, K_J = 2 with nu_U = 2 nu_J2 - nu_J1: the cross-link sum
    // nu_J1 + nu_U collides with the observed cycle frequency 2 nu_J2.
    // This violates the distinct-pair-sum assumption, and a solution
    // ordering that presents nu_J1 first sends it to the UAV set.
    const double nu_u = 0.01, nu_j1 = 0.05, nu_j2 = 0.03;
    VectorXd alpha(4);
    alpha << 2 * nu_u, 2 * nu_j1, 2 * nu_j2, nu_j1 + nu_j2;

    PermLsSolution adversarial;
    adversarial.perm = {0, 1, 2, 3};
    adversarial.nu = VectorXd(3);
    adversarial.nu << nu_j1, nu_u, nu_j2;  // jammer path scanned first
    const DopplerSets sets = classify_links({adversarial}, nu_u, alpha, 1, 1e-9);
    REQUIRE(sets.uav.size() == 1);
    REQUIRE(sets.uav[0] == Approx(nu_j1));  // misclassified, as constructed
  }
}
