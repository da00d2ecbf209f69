#include <catch2/catch.hpp>
#include <random>

#include "antijam/channel.hpp"
#include "antijam/detector.hpp"

using namespace antijam;

namespace {

MatrixXcd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  MatrixXcd h(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) h(i, j) = cxd(n01(rng), n01(rng)) / std::sqrt(2.0);
  return h;
}

VectorXd random_bpsk(int n, std::mt19937_64& rng) {
  std::bernoulli_distribution bit(0.5);
  VectorXd s(n);
  for (int i = 0; i < n; ++i) s(i) = bit(rng) ? 1.0 : -1.0;
  return s;
}

// Conjugate-structured pair (H_U, H_J) of size m.
std::pair<MatrixXcd, MatrixXcd> random_channel_pair(int m, std::mt19937_64& rng) {
  return {random_matrix(m, m, rng), random_matrix(m, m, rng)};
}

}  // namespace

TEST_CASE("wl-mmse closed forms") {
  std::mt19937_64 rng(2024);

  SECTION("identity channel with zero noise inverts exactly") {
    const MatrixXcd h = MatrixXcd::Identity(8, 8);
    const MatrixXcd f = wl_mmse_filter(h, 0.0);
    REQUIRE((f - MatrixXcd::Identity(8, 8)).norm() < 1e-12);
  }

  SECTION("unitary channel with unit noise halves the matched filter") {
    Eigen::HouseholderQR<MatrixXcd> qr(random_matrix(6, 6, rng));
    const MatrixXcd u = qr.householderQ();
    const MatrixXcd f = wl_mmse_filter(u, 1.0);
    REQUIRE((f - 0.5 * u.adjoint()).norm() < 1e-12);
  }

  SECTION("both algebraic forms agree on rectangular systems") {
    for (int trial = 0; trial < 20; ++trial) {
      const MatrixXcd h = random_matrix(8, 5, rng);
      const double sigma = 0.1;
      const MatrixXcd left =
          h.adjoint() *
          (h * h.adjoint() + sigma * MatrixXcd::Identity(8, 8)).inverse();
      const MatrixXcd right = wl_mmse_filter(h, sigma);
      REQUIRE((left - right).norm() / right.norm() < 1e-10);
    }
  }

  SECTION("singular channel with zero noise is an error") {
    MatrixXcd h = MatrixXcd::Zero(4, 4);
    REQUIRE_THROWS_AS(wl_mmse_filter(h, 0.0), NumericalError);
    REQUIRE_THROWS_AS(qr_predetect(VectorXcd::Zero(4), h, 0.0), NumericalError);
  }
}

TEST_CASE("qr pre-detection equals the direct filter") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXcd h = random_matrix(10, 6, rng);
    const VectorXcd y = random_matrix(10, 1, rng).col(0);
    const double sigma = 0.25;
    const VectorXcd z_qr = qr_predetect(y, h, sigma);
    const VectorXcd z_direct = wl_mmse_filter(h, sigma) * y;
    REQUIRE((z_qr - z_direct).norm() / z_direct.norm() < 1e-10);
  }
}

TEST_CASE("qr pre-detection limits") {
  std::mt19937_64 rng(8);
  const MatrixXcd h = random_matrix(12, 6, rng);

  SECTION("large noise collapses to a scaled matched filter") {
    const double sigma2 = 1e8;
    const VectorXcd y = random_matrix(12, 1, rng).col(0);
    const VectorXcd z = qr_predetect(y, h, sigma2);
    const VectorXcd mf = h.adjoint() * y / sigma2;
    REQUIRE((z - mf).norm() / mf.norm() < 1e-6);
  }

  SECTION("tiny noise on a clean observation recovers the symbols") {
    const VectorXd s = random_bpsk(6, rng);
    const VectorXcd y = h * s;
    const VectorXcd z = qr_predetect(y, h, 1e-12);
    REQUIRE((z - s.cast<cxd>()).norm() < 1e-4);
  }
}

TEST_CASE("sdnr post-sorting") {
  std::mt19937_64 rng(99);

  SECTION("triangular-route SDNR equals the gram-inverse diagonal route") {
    for (int trial = 0; trial < 20; ++trial) {
      const MatrixXcd h = random_matrix(12, 7, rng);
      const double sigma2 = 0.3;
      const auto parts = detail::qr_parts(VectorXcd::Zero(12), h, sigma2);
      const auto [gamma, lmax] = sdnr_psa(parts.r_inv, sigma2);

      const MatrixXcd gram_inv =
          (h.adjoint() * h + sigma2 * MatrixXcd::Identity(7, 7)).inverse();
      for (int m = 0; m < 7; ++m) {
        const double reference = 1.0 / (sigma2 * gram_inv(m, m).real()) - 1.0;
        REQUIRE(gamma(m) == Approx(reference).epsilon(1e-9));
      }
      REQUIRE(lmax >= 0);
      REQUIRE(lmax < 7);
    }
  }

  SECTION("stronger orthogonal column wins the sort") {
    MatrixXcd h = MatrixXcd::Zero(4, 2);
    h(0, 0) = 2.0;  // norm-2 column
    h(1, 1) = 1.0;  // norm-1 column
    const auto parts = detail::qr_parts(VectorXcd::Zero(4), h, 0.5);
    const auto [gamma, lmax] = sdnr_psa(parts.r_inv, 0.5);
    REQUIRE(lmax == 0);
    REQUIRE(gamma(0) > gamma(1));
  }

  SECTION("diagonal channel with unit noise gives |h|^2 exactly") {
    VectorXcd d(3);
    d << cxd(1.5, 0.0), cxd(0.0, 2.0), cxd(-0.5, 0.5);
    MatrixXcd h = MatrixXcd::Zero(3, 3);
    h.diagonal() = d;
    const auto parts = detail::qr_parts(VectorXcd::Zero(3), h, 1.0);
    const auto [gamma, lmax] = sdnr_psa(parts.r_inv, 1.0);
    (void)lmax;
    for (int m = 0; m < 3; ++m)
      REQUIRE(gamma(m) == Approx(std::norm(d(m))).epsilon(1e-10));
  }
}

TEST_CASE("sic cancellation mechanics") {
  std::mt19937_64 rng(31);

  SECTION("one step on a diagonal channel zeroes the detected coordinate pair") {
    const int m = 4;
    MatrixXcd h_u = MatrixXcd::Zero(m, m);
    h_u.diagonal() << 3.0, 1.0, 0.5, 0.25;
    const MatrixXcd h_j = MatrixXcd::Zero(m, m);
    (void)h_j;
    const VectorXd s = random_bpsk(m, rng);
    const VectorXcd y = h_u * s;
    const AugmentedModel model = augment_single(y, h_u, 0.0);
    SicState state = make_sic_state(model);
    state = sic_step(std::move(state));
    REQUIRE(state.detected.size() == 1);
    REQUIRE(state.detected[0].origin == 0);  // strongest diagonal first
    REQUIRE(state.detected[0].xi == s(0));
    REQUIRE(std::abs(state.y(0)) < 1e-12);
    REQUIRE(std::abs(state.y(m)) < 1e-12);  // conjugate image cancelled too
  }

  SECTION("hard decisions stay in the BPSK alphabet") {
    const auto [h_u, h_j] = random_channel_pair(4, rng);
    const VectorXcd y = random_matrix(4, 1, rng).col(0);
    const DetectResult res = detect_block(y, h_u, h_j, 0.05, DetectorMode::Sic);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(std::abs(res.s_u(i)) == 1.0);
      REQUIRE(std::abs(res.s_j(i)) == 1.0);
    }
  }
}

TEST_CASE("perfect cancellation with exact knowledge and no noise") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 6;
    const auto [h_u, h_j] = random_channel_pair(m, rng);
    const VectorXd s_u = random_bpsk(m, rng);
    const VectorXd s_j = random_bpsk(m, rng);
    const VectorXcd y = h_u * s_u + h_j * s_j;

    const DetectResult res = detect_block(y, h_u, h_j, 0.0, DetectorMode::Sic);
    REQUIRE((res.s_u - s_u).norm() == 0.0);
    REQUIRE((res.s_j - s_j).norm() == 0.0);

    // Residual after all cancellations is numerically zero.
    AugmentedModel model = augment(y, h_u, h_j, 0.0);
    SicState state = make_sic_state(model);
    for (int i = 0; i < 2 * m; ++i) state = sic_step(std::move(state));
    REQUIRE(state.y.norm() < 1e-8);
  }
}

TEST_CASE("conjugate-pair coherence: soft outputs are real for real symbols") {
  std::mt19937_64 rng(77);
  const int m = 8;
  const auto [h_u, h_j] = random_channel_pair(m, rng);
  const VectorXd s_u = random_bpsk(m, rng);
  const VectorXd s_j = random_bpsk(m, rng);
  VectorXcd noise = random_matrix(m, 1, rng).col(0) * 0.1;
  const VectorXcd y = h_u * s_u + h_j * s_j + noise;

  const AugmentedModel model = augment(y, h_u, h_j, 0.02);
  const VectorXcd z = qr_predetect(model.y_tilde, model.h_tilde, 0.02);
  REQUIRE(z.imag().cwiseAbs().maxCoeff() < 1e-10 * z.real().cwiseAbs().maxCoeff());
}

TEST_CASE("jamming-unaware equals joint detection when the jammer is silent") {
  std::mt19937_64 rng(1234);
  const int m = 6;
  const MatrixXcd h_u = random_matrix(m, m, rng);
  const MatrixXcd h_j = MatrixXcd::Zero(m, m);
  const VectorXd s_u = random_bpsk(m, rng);
  const VectorXcd y = h_u * s_u;

  const DetectResult ju = detect_block(y, h_u, h_j, 1e-9, DetectorMode::SicJu);
  REQUIRE_FALSE(ju.has_jammer);
  REQUIRE((ju.s_u - s_u).norm() == 0.0);
}

TEST_CASE("detected multiset matches ground truth regardless of ordering") {
  std::mt19937_64 rng(808);
  const int m = 5;
  for (int trial = 0; trial < 20; ++trial) {
    const auto [h_u, h_j] = random_channel_pair(m, rng);
    const VectorXd s_u = random_bpsk(m, rng);
    const VectorXd s_j = random_bpsk(m, rng);
    const VectorXcd y = h_u * s_u + h_j * s_j;

    AugmentedModel model = augment(y, h_u, h_j, 0.0);
    SicState state = make_sic_state(model);
    for (int i = 0; i < 2 * m; ++i) state = sic_step(std::move(state));

    std::vector<std::pair<int, double>> got;
    for (const auto& d : state.detected) got.emplace_back(d.origin, d.xi);
    std::sort(got.begin(), got.end());
    for (int i = 0; i < m; ++i) {
      REQUIRE(got[i] == std::make_pair(i, s_u(i)));
      REQUIRE(got[m + i] == std::make_pair(m + i, s_j(i)));
    }
  }
}
