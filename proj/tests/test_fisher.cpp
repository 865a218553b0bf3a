#include <gtest/gtest.h>

#include <random>

#include "masense/fisher.hpp"

using namespace masense;

namespace {

Scene random_scene(std::mt19937_64& rng, std::size_t L) {
  std::uniform_real_distribution<double> u(0, 1);
  Scene s;
  for (std::size_t l = 0; l < L; ++l)
    s.paths.push_back({{20 + 140 * u(rng), 360 * u(rng) - 180}, 200e-9 * u(rng), std::polar(0.5 + u(rng), 6.28 * u(rng))});
  s.config.set_snr_db(10);
  return s;
}

double rho(const Scene& s, const Orientation& o, const Vec3& p, std::size_t l, double dtheta, double dphi) {
  AnglePair a = s.paths[l].angles0;
  a.theta += rad2deg(dtheta);
  a.phi += rad2deg(dphi);
  return propagation_delta(to_plate_frame(o, unit_direction(a)), p);
}

}  // namespace

TEST(Fisher, GradientAtOriginIsZero) {
  std::mt19937_64 rng(1);
  const Scene s = random_scene(rng, 2);
  EXPECT_EQ(aoa_gradient(s, {10, 20, 30}, Vec3::Zero(), 1).norm(), 0.0);
}

TEST(Fisher, GradientLinearInPosition) {
  std::mt19937_64 rng(2);
  const Scene s = random_scene(rng, 1);
  const Orientation o{-30, 15, 40};
  const double d = s.config.spacing();
  const auto g1 = aoa_gradient(s, o, Vec3(d, 0, 0), 0);
  const auto g7 = aoa_gradient(s, o, Vec3(7 * d, 0, 0), 0);
  EXPECT_NEAR((g7 - 7 * g1).norm(), 0.0, 1e-15);
}

TEST(Fisher, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-90, 90);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const Scene s = random_scene(rng, 1);
    const Orientation o{u(rng), u(rng), u(rng)};
    const Vec3 p(0.03 * (u(rng) + 90) / 180, 0, 0.03 * (u(rng) + 90) / 180);
    const auto g = aoa_gradient(s, o, p, 0);
    const double ft = (rho(s, o, p, 0, h, 0) - rho(s, o, p, 0, -h, 0)) / (2 * h);
    const double fp = (rho(s, o, p, 0, 0, h) - rho(s, o, p, 0, 0, -h)) / (2 * h);
    const Eigen::Vector2d fd(ft, fp);
    EXPECT_LE((g - fd).norm(), 1e-4 * std::max(fd.norm(), 1e-3)) << i;
  }
}

TEST(Fisher, CouplingDiagonal) {
  Scene s;
  s.paths = {{{80, 50}, 40e-9, std::polar(0.8, 0.3)}};
  const auto k = coupling_factor(s, {}, Vec3(0.01, 0, 0.02), 0, 0);
  double expect = 0.0;
  for (std::size_t kk = 1; kk <= 64; ++kk) expect += std::pow(2 * kPi * s.config.frequency(kk) / kSpeedOfLight, 2);
  expect *= 0.64;
  EXPECT_NEAR(k.imag(), 0.0, 1e-9 * expect);
  EXPECT_NEAR(k.real(), expect, 1e-9 * expect);
}

TEST(Fisher, CouplingModulusBound) {
  std::mt19937_64 rng(4);
  const Scene s = random_scene(rng, 3);
  const auto pos = scan_positions(s.config);
  const auto k00 = coupling_factor(s, {}, pos[0], 0, 0).real() / std::norm(s.paths[0].upsilon);
  for (std::size_t m = 0; m < pos.size(); m += 5) {
    const auto k = coupling_factor(s, {5, 5, 5}, pos[m], 0, 2);
    EXPECT_LE(std::abs(k), k00 * std::abs(s.paths[0].upsilon) * std::abs(s.paths[2].upsilon) * (1 + 1e-12));
  }
}

TEST(Fisher, CouplingTermwiseOracle) {
  // Two paths arriving from the same direction with a 1 ns delay gap: Delta = 1 ns.
  Scene s;
  s.paths = {{{90, 90}, 0.0, 1.0}, {{90, 90}, 1e-9, 1.0}};
  const auto k = coupling_factor(s, {}, Vec3::Zero(), 0, 1);
  std::complex<double> acc = 0.0;
  for (std::size_t kk = 1; kk <= 64; ++kk) {
    const double fk = 28e9 + (kk - 32.5) * 50e6 / 64;
    const double w = 2 * kPi * fk / kSpeedOfLight;
    // phase difference between path u and path l at f_k is 2 pi f_k (tau_l - tau_u)
    acc += w * w * std::exp(std::complex<double>(0, 2 * kPi * fk * (0.0 - 1e-9)));
  }
  EXPECT_NEAR(std::abs(k - acc), 0.0, 1e-9 * std::abs(acc));
}

TEST(Fisher, SingleAndMultiPathStructure) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Scene s = random_scene(rng, 1 + i % 4);
    const auto pos = scan_positions(s.config);
    const auto r = fim(s, {10.0 * i, -5, 3}, pos);
    EXPECT_TRUE(r.scale_defined);
    EXPECT_NEAR((r.matrix - r.matrix.transpose()).norm(), 0.0, 1e-9 * r.matrix.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.matrix);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * r.matrix.norm());
  }
}

TEST(Fisher, SingularScaleFlag) {
  std::mt19937_64 rng(6);
  Scene s = random_scene(rng, 2);
  s.config.noise_n0 = 0;
  const auto r = fim(s, {}, scan_positions(s.config));
  EXPECT_FALSE(r.scale_defined);
  EXPECT_EQ(r.scale, 1.0);
}

TEST(Fisher, DelayGapReducesCoupling) {
  Scene a;
  a.paths = {{{100, 80}, 0.0, 1.0}, {{95, 100}, 0.0, 1.0}};
  a.config.set_snr_db(10);
  Scene b = a;
  b.paths[1].tau = 50e-9;
  const auto pos = scan_positions(a.config);
  const auto ra = fim(a, {}, pos), rb = fim(b, {}, pos);
  EXPECT_LT(rb.blocks[0][1].norm(), ra.blocks[0][1].norm());
}

TEST(Fisher, InvariantUnderGlobalPhaseAndRelabel) {
  std::mt19937_64 rng(7);
  Scene s = random_scene(rng, 3);
  const auto pos = scan_positions(s.config);
  const Orientation o{12, -7, 30};
  const auto r = fim(s, o, pos);
  Scene g = s;
  for (auto& p : g.paths) p.upsilon *= std::polar(1.0, 1.234);
  const auto rg = fim(g, o, pos);
  EXPECT_NEAR(rg.matrix.determinant() / r.matrix.determinant(), 1.0, 1e-8);

  Scene swapped = s;
  std::swap(swapped.paths[0], swapped.paths[2]);
  const auto rs = fim(swapped, o, pos);
  Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(6, 6);
  const int map[3] = {2, 1, 0};
  for (int l = 0; l < 3; ++l) perm.block<2, 2>(2 * l, 2 * map[l]) = Eigen::Matrix2d::Identity();
  EXPECT_NEAR((perm * r.matrix * perm.transpose() - rs.matrix).norm(), 0.0, 1e-9 * r.matrix.norm());
}

TEST(Fisher, RepeatedScanDoublesBlocks) {
  std::mt19937_64 rng(8);
  const Scene s = random_scene(rng, 2);
  auto pos = scan_positions(s.config);
  const auto r1 = fim(s, {}, pos);
  auto twice = pos;
  twice.insert(twice.end(), pos.begin(), pos.end());
  const auto r2 = fim(s, {}, twice);
  EXPECT_NEAR((r2.matrix - 2 * r1.matrix).norm(), 0.0, 1e-9 * r1.matrix.norm());
}

TEST(Fisher, Summary) {
  std::mt19937_64 rng(9);
  const Scene s = random_scene(rng, 2);
  const auto r = fim(s, {}, scan_positions(s.config));
  const auto sm = summarize(r);
  EXPECT_EQ(sm.block_norms.rows(), 2);
  EXPECT_NEAR(sm.determinant, r.matrix.determinant(), 1e-9 * std::abs(sm.determinant));
}
