#include <catch2/catch.hpp>

#include "antijam/cyclo.hpp"

using namespace antijam;

namespace {

OfdmConfig config(double sigma_w2 = 0.0) {
  OfdmConfig cfg;
  cfg.m = 16;
  cfg.l_cp = 4;
  cfg.t_c = 1.6e-6;
  cfg.sigma_w2 = sigma_w2;
  cfg.pulse = hat_pulse(cfg.t_c);
  return cfg;
}

LinkParams one_path(cxd g, double tau, double nu, LinkId id = LinkId::Uav) {
  LinkParams l;
  l.label = id;
  l.paths.push_back({g, tau, nu});
  return l;
}

const LinkParams kSilent{{}, LinkId::Jammer};

}  // namespace

TEST_CASE("analytic conjugate cyclic correlations") {
  const OfdmConfig cfg = config();
  const OfdmMatrices mats = build_matrices(cfg);
  const LinkParams uav = one_path(cxd(0.7, -0.4), 1.2 * cfg.t_c, 0.021);

  SECTION("off-cycle frequencies give zero matrices") {
    const CccmSet off = analytic_cccm(uav, kSilent, 0.017, cfg, mats);
    for (int r = -1; r <= 1; ++r) REQUIRE(off.lag(r).norm() == 0.0);
  }

  SECTION("single path at alpha = 2 nu matches the direct product form") {
    const CccmSet set = analytic_cccm(uav, kSilent, 2 * 0.021, cfg, mats);
    const PathParams& path = uav.paths[0];
    const MatrixXcd t0 = build_toeplitz(path, 0, cfg, mats);
    const MatrixXcd t1 = build_toeplitz(path, 1, cfg, mats);
    const VectorXcd dvec = doppler_progression(path.nu, cfg.p());
    const auto d = dvec.asDiagonal();
    const MatrixXcd oo = mats.omega * mats.omega.transpose();
    const cxd g2 = path.g * path.g;

    const MatrixXcd r0 = g2 * (d * (t0 * oo * t0.transpose() +
                                    t1 * oo * t1.transpose()) * d);
    const MatrixXcd rm1 = g2 * std::exp(kJ * (2.0 * kPi * path.nu)) *
                          (d * (t0 * oo * t1.transpose()) * d);
    const MatrixXcd rp1 = g2 * std::exp(-kJ * (2.0 * kPi * path.nu)) *
                          (d * (t1 * oo * t0.transpose()) * d);
    REQUIRE((set.lag(0) - r0).norm() < 1e-12 * r0.norm());
    REQUIRE((set.lag(-1) - rm1).norm() < 1e-12 * rm1.norm());
    REQUIRE((set.lag(1) - rp1).norm() < 1e-12 * rp1.norm());
  }

  SECTION("Frobenius norm is quadratic in the gain") {
    const CccmSet base = analytic_cccm(uav, kSilent, 2 * 0.021, cfg, mats);
    LinkParams scaled = uav;
    scaled.paths[0].g *= 3.0;
    const CccmSet big = analytic_cccm(scaled, kSilent, 2 * 0.021, cfg, mats);
    REQUIRE(big.lag(0).norm() == Approx(9.0 * base.lag(0).norm()).epsilon(1e-10));
  }

  SECTION("analytic lag-0 matrix is complex symmetric") {
    const CccmSet set = analytic_cccm(uav, kSilent, 2 * 0.021, cfg, mats);
    REQUIRE((set.lag(0) - set.lag(0).transpose()).norm() < 1e-12 * set.lag(0).norm());
  }
}

TEST_CASE("sample estimator converges to the analytic matrices") {
  OfdmConfig cfg = config(1e-3);
  const OfdmMatrices mats = build_matrices(cfg);
  const LinkParams uav = one_path(cxd(0.8, 0.2), 0.6 * cfg.t_c, 0.0241);
  const int n_blocks = 1 << 13;
  const GeneratedData gen =
      generate_received(uav, kSilent, cfg, mats, n_blocks, {71, 0});

  const double alpha = 2 * 0.0241;
  const CccmSet truth = analytic_cccm(uav, kSilent, alpha, cfg, mats);

  double err2 = 0.0, ref2 = 0.0;
  for (int r = -1; r <= 1; ++r) {
    const MatrixXcd est = estimate_cccm(gen.blocks, alpha, r);
    err2 += (est - truth.lag(r)).squaredNorm();
    ref2 += truth.lag(r).squaredNorm();
  }
  REQUIRE(std::sqrt(err2 / ref2) < 0.2);  // 2^13 blocks, generous margin

  SECTION("workspace agrees with the direct estimator") {
    const CccmWorkspace ws(gen.blocks);
    const CccmSet fast = ws.at(alpha);
    for (int r = -1; r <= 1; ++r) {
      const MatrixXcd direct = estimate_cccm(gen.blocks, alpha, r);
      REQUIRE((fast.lag(r) - direct).norm() < 1e-10 * (1.0 + direct.norm()));
    }
  }

  SECTION("sample lag-0 matrix is complex symmetric exactly") {
    const MatrixXcd est = estimate_cccm(gen.blocks, alpha, 0);
    REQUIRE((est - est.transpose()).norm() < 1e-12 * est.norm());
  }
}

TEST_CASE("estimator error contracts as the record doubles") {
  OfdmConfig cfg = config(1e-3);
  const OfdmMatrices mats = build_matrices(cfg);
  const LinkParams uav = one_path(cxd(0.8, 0.2), 0.6 * cfg.t_c, 0.0241);
  const double alpha = 2 * 0.0241;
  const CccmSet truth = analytic_cccm(uav, kSilent, alpha, cfg, mats);

  auto batch_median_err = [&](int n_blocks) {
    std::vector<double> errs;
    for (int seed = 0; seed < 5; ++seed) {
      const GeneratedData gen = generate_received(
          uav, kSilent, cfg, mats, n_blocks, {400u + static_cast<unsigned>(seed), 0});
      const CccmWorkspace ws(gen.blocks);
      const CccmSet est = ws.at(alpha);
      double err2 = 0.0, ref2 = 0.0;
      for (int r = -1; r <= 1; ++r) {
        err2 += (est.lag(r) - truth.lag(r)).squaredNorm();
        ref2 += truth.lag(r).squaredNorm();
      }
      errs.push_back(std::sqrt(err2 / ref2));
    }
    std::sort(errs.begin(), errs.end());
    return errs[errs.size() / 2];
  };
  REQUIRE(batch_median_err(1 << 12) < batch_median_err(1 << 11));
}

TEST_CASE("noise-only conjugate statistics vanish") {
  OfdmConfig cfg = config(1.0);
  const OfdmMatrices mats = build_matrices(cfg);
  const GeneratedData gen =
      generate_received(LinkParams{{}, LinkId::Uav}, kSilent, cfg, mats, 10000, {3, 0});

  // Conjugate correlation of circular noise vanishes at any alpha, zero included.
  for (double alpha : {0.0, 0.05}) {
    for (int r = -1; r <= 1; ++r) {
      const MatrixXcd est = estimate_cccm(gen.blocks, alpha, r);
      REQUIRE(est.norm() < 0.05 * cfg.p());  // ~1/sqrt(N) scale
    }
  }
  REQUIRE_THROWS_AS(estimate_cccm(BlockSequence{16, 4, MatrixXcd::Zero(20, 2),
                                                MatrixXcd::Zero(16, 2)},
                                  0.0, 0),
                    EstimationError);
}

TEST_CASE("cycle-frequency scan locates the pairwise sums") {
  OfdmConfig cfg = config(1e-3);
  const OfdmMatrices mats = build_matrices(cfg);
  const double nu_u = 0.0251, nu_j = -0.0427;
  const LinkParams uav = one_path(cxd(0.9, 0.1), 0.4 * cfg.t_c, nu_u);
  const LinkParams jam = one_path(cxd(0.2, -0.8), 1.9 * cfg.t_c, nu_j, LinkId::Jammer);
  const int n_blocks = 1 << 12;
  const GeneratedData gen = generate_received(uav, jam, cfg, mats, n_blocks, {13, 0});

  ScanGrid grid;
  grid.grid_log2 = 12;
  grid.refine_top = 8;
  const CyclePeakList peaks = scan_objective(gen.blocks, grid);

  REQUIRE(peaks.alphas.size() == 2);
  const double expect_lo = std::min(2 * nu_u, 2 * nu_j);
  const double expect_hi = std::max(2 * nu_u, 2 * nu_j);
  REQUIRE(std::abs(peaks.alphas[0] - expect_lo) < 2.0 / n_blocks);
  REQUIRE(std::abs(peaks.alphas[1] - expect_hi) < 2.0 / n_blocks);

  SECTION("local refinement agrees with the exact objective") {
    for (double a : peaks.alphas) {
      const double j_exact = jhat_value(gen.blocks, a);
      const double j_off = jhat_value(gen.blocks, a + 4.0 / n_blocks);
      REQUIRE(j_exact > j_off);
    }
  }

  SECTION("noise-only data yields no peaks") {
    const GeneratedData none = generate_received(LinkParams{{}, LinkId::Uav},
                                                 kSilent, cfg, mats, 4096, {29, 0});
    REQUIRE_THROWS_AS(scan_objective(none.blocks, grid), EstimationError);
  }
}

TEST_CASE("analytic objective has maxima exactly at the cycle set") {
  const OfdmConfig cfg = config();
  const OfdmMatrices mats = build_matrices(cfg);
  const double nu_u = 0.018, nu_j = 0.041;
  const LinkParams uav = one_path(cxd(1.0, 0.0), 0.5 * cfg.t_c, nu_u);
  const LinkParams jam = one_path(cxd(0.7, 0.7), 1.0 * cfg.t_c, nu_j, LinkId::Jammer);

  const double j_u = j_value(analytic_cccm(uav, jam, 2 * nu_u, cfg, mats));
  const double j_j = j_value(analytic_cccm(uav, jam, 2 * nu_j, cfg, mats));
  const double j_off = j_value(analytic_cccm(uav, jam, nu_u + nu_j, cfg, mats));
  REQUIRE(j_u > 0.0);
  REQUIRE(j_j > 0.0);
  REQUIRE(j_off == 0.0);  // cross-link sums are not cycle frequencies
}
