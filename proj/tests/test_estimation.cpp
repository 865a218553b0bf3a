#include <gtest/gtest.h>

#include <random>

#include "masense/estimation.hpp"

using namespace masense;

namespace {

// Plate-frame direction with the given (u, v) on the front side, mapped back to the initial frame.
PathTruth path_with_sfp(double u, double v, double tau = 0.0, cdouble ups = 1.0) {
  return {aoa_from_sfp({u, v}, Orientation::identity()), tau, ups};
}

}  // namespace

TEST(Estimation, SubarrayBounds) {
  MusicConfig c;
  EXPECT_EQ(c.resolved_subarray(32, 4), 21u);
  EXPECT_EQ(c.resolved_subarray(32, 1), 21u);
  c.subarray_size = 4;
  EXPECT_THROW(c.resolved_subarray(32, 4), Error);
  c.subarray_size = 30;
  EXPECT_THROW(c.resolved_subarray(32, 4), Error);
  c.subarray_size = 29;
  EXPECT_EQ(c.resolved_subarray(32, 4), 29u);
  MusicConfig g;
  g.grid_points = 100;
  EXPECT_THROW(g.validate(), Error);
}

TEST(Estimation, SmoothedCovarianceHandExpansion) {
  Eigen::MatrixXcd s(4, 1);
  s << cdouble(1, 0), cdouble(0, 1), cdouble(2, -1), cdouble(-1, 0.5);
  const Eigen::MatrixXcd c = smoothed_covariance(s, 3);
  Eigen::VectorXcd a = s.block(0, 0, 3, 1), b = s.block(1, 0, 3, 1);
  const Eigen::MatrixXcd expect = 0.5 * (a * a.adjoint() + b * b.adjoint());
  EXPECT_NEAR((c - expect).norm(), 0.0, 1e-15);
}

TEST(Estimation, CovarianceHermitianPsd) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd s(32, 8);
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = cdouble(g(rng), g(rng));
  const auto c = smoothed_covariance(s, 21);
  EXPECT_NEAR((c - c.adjoint()).norm(), 0.0, 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

// With a vanishing bandwidth every subcarrier sees the same spatial frequency
// and a single path gives an exactly rank-one covariance.
TEST(Estimation, SinglePathRankOne) {
  Scene sc;
  sc.config.bandwidth_hz = 1.0;
  sc.paths = {path_with_sfp(0.3, -0.2)};
  const auto meas = synthesize_scan(sc, {}, 0);
  const auto c = smoothed_covariance(meas.x_axis(), 21);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
  const auto ev = es.eigenvalues();
  EXPECT_LE(ev[ev.size() - 2] / ev[ev.size() - 1], 1e-6);
}

TEST(Estimation, SteeringVectorZeroIsOnes) {
  const auto d = steering_vector(16, 0.5, 0.0);
  EXPECT_NEAR((d - Eigen::VectorXcd::Ones(16)).norm(), 0.0, 0.0);
}

TEST(Estimation, SpectrumPeakAtTruth) {
  Scene sc;
  sc.config.bandwidth_hz = 1.0;
  sc.paths = {path_with_sfp(0.3, 0.1)};
  const auto meas = synthesize_scan(sc, {}, 0);
  const auto c = smoothed_covariance(meas.x_axis(), 16);
  const auto grid = search_grid(4001);
  const auto spec = music_spectrum(c, 1, grid, 0.5);
  const auto it = std::max_element(spec.begin(), spec.end());
  EXPECT_LE(std::abs(grid[static_cast<std::size_t>(it - spec.begin())] - 0.3), grid[1] - grid[0]);
  for (double v : spec) EXPECT_GT(v, 0.0);
  // noise subspace is orthogonal to the true steering vector
  const auto un = noise_subspace(c, 1);
  const auto d = steering_vector(16, 0.5, 0.3);
  EXPECT_LE((un.adjoint() * d).norm(), 1e-6 * d.norm());
}

TEST(Estimation, SpectrumScaleInvariant) {
  Scene sc;
  sc.paths = {path_with_sfp(-0.4, 0.2), path_with_sfp(0.5, -0.3, 50e-9, std::polar(1.0, 1.0))};
  sc.config.set_snr_db(10);
  const auto meas = synthesize_scan(sc, {}, 3);
  const auto grid = search_grid(401);
  const auto a = music_spectrum(smoothed_covariance(meas.x_axis(), 21), 2, grid, 0.5);
  const Eigen::MatrixXcd scaled = std::polar(3.0, 0.7) * meas.x_axis();
  const auto b = music_spectrum(smoothed_covariance(scaled, 21), 2, grid, 0.5);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(a[i] / b[i], 1.0, 1e-6);
}

TEST(Estimation, SinglePathHighSnr) {
  const double step = 2.0 / 4000;
  Scene sc;
  sc.paths = {path_with_sfp(0.35, -0.45)};
  sc.config.set_snr_db(30);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto meas = synthesize_scan(sc, {}, seed);
    const auto sfp = extract_sfps(meas, 1, {}, sc.config);
    ASSERT_EQ(sfp.u_set.size(), 1u);
    EXPECT_LE(std::abs(sfp.u_set[0] - 0.35), 2 * step);
    EXPECT_LE(std::abs(sfp.v_set[0] + 0.45), 2 * step);
  }
}

TEST(Estimation, TwoPathsNoiseless) {
  Scene sc;
  sc.paths = {path_with_sfp(-0.3, 0.4), path_with_sfp(0.4, -0.1, 80e-9, std::polar(0.9, 2.0))};
  const auto meas = synthesize_scan(sc, {}, 0);
  auto sfp = extract_sfps(meas, 2, {}, sc.config);
  std::sort(sfp.u_set.begin(), sfp.u_set.end());
  std::sort(sfp.v_set.begin(), sfp.v_set.end());
  EXPECT_NEAR(sfp.u_set[0], -0.3, 1e-3);
  EXPECT_NEAR(sfp.u_set[1], 0.4, 1e-3);
  EXPECT_NEAR(sfp.v_set[0], -0.1, 1e-3);
  EXPECT_NEAR(sfp.v_set[1], 0.4, 1e-3);
  for (double x : sfp.u_set) EXPECT_LE(std::abs(x), 1.0);
}

// Wideband squint: averaging over subcarriers spreads a single path slightly,
// so the rank-one property holds only approximately at 50 MHz.
TEST(Estimation, SinglePathWidebandNearRankOne) {
  Scene sc;
  sc.paths = {path_with_sfp(0.3, -0.2)};
  const auto meas = synthesize_scan(sc, {}, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(smoothed_covariance(meas.x_axis(), 21));
  const auto ev = es.eigenvalues();
  EXPECT_LE(ev[ev.size() - 2] / ev[ev.size() - 1], 1e-4);
}

TEST(Estimation, MergedPeak) {
  Scene sc;
  sc.paths = {path_with_sfp(0.2, 0.5), path_with_sfp(0.2, -0.4, 70e-9)};
  const auto meas = synthesize_scan(sc, {}, 0);
  // Default guard: the X set holds the shared u once plus one unrelated peak.
  const auto sfp = extract_sfps(meas, 2, {}, sc.config);
  const double near0 = std::abs(sfp.u_set[0] - 0.2), near1 = std::abs(sfp.u_set[1] - 0.2);
  EXPECT_LE(std::min(near0, near1), 1e-3);
  EXPECT_GE(std::max(near0, near1), 2.0 / 21);
  // A guard wider than half the spatial period admits one peak only.
  MusicConfig wide;
  wide.min_peak_separation = 1.5;
  try {
    extract_sfps(meas, 2, wide, sc.config);
    FAIL() << "expected InsufficientPeaks";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientPeaks);
  }
}

TEST(Estimation, PickPeaksSeparation) {
  const std::vector<double> grid{0, 1, 2, 3, 4, 5, 6};
  const std::vector<double> spec{1, 5, 1, 4, 1, 3, 1};
  const auto p = pick_peaks(spec, grid, 2, 2.5, false);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0], 1);
  EXPECT_EQ(p[1], 5);
  EXPECT_THROW(pick_peaks(spec, grid, 3, 2.5, false), Error);
}
