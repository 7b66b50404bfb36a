#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

namespace {

using namespace msimg;
using namespace msimg::testing;
using C = std::complex<double>;
using V = Vec<double>;
using Dir = Direction<double>;
using I = TimeInterval<double>;

const auto kBand = default_band<double>();
const auto kIv = I::make(1, 3);

TEST(TestVector, FirstEntryExample) {
  const auto phi = test_vector(Dir::polar(0.0), V(0, 2.5), kIv, kBand);
  const double tau = kPi / 6;
  const C expected = C(0, 6 / (2 * kPi)) * (std::exp(C(0, -kPi / 2)) - std::exp(C(0, -tau)));
  EXPECT_LT(std::abs(phi.entries[0] - expected), 1e-15);
  EXPECT_EQ(phi.entries.size(), 18u);
}

TEST(TestVector, ZeroFrequencyLimit) {
  EXPECT_EQ(test_entry(0.0, 0.7, kIv), C(1, 0));
}

TEST(TestVector, MatchesAveragedExponential) {
  // phi_n = (1/T) int exp(-i tau (t + x.y)) dt
  const auto rule = GaussLegendre<double>::make(40);
  const double proj = 0.83;
  for (std::size_t n = 1; n <= 18; ++n) {
    const double tau = kBand.node(n);
    const C integral = composite_gauss_legendre<double, C>(
        [&](double t) { return std::exp(C(0, -tau * (t + proj))); }, 1.0, 3.0, 8, rule);
    EXPECT_LT(std::abs(test_entry(tau, proj, kIv) - integral / 2.0), 1e-13);
  }
}

TEST(TestVector, EntriesBounded) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double a = std::abs(u(gen));
    const auto iv = I::make(a, a + 0.1 + std::abs(u(gen)));
    const double tau = std::abs(u(gen)) + 1e-3;
    EXPECT_LE(std::abs(test_entry(tau, u(gen), iv)), 1.0 + 1e-15);
  }
}

TEST(TestVector, HyperplaneInvariance) {
  const Dir d = Dir::polar(0.0);
  const auto a = test_vector(d, V(0.4, 0.0), kIv, kBand);
  const auto b = test_vector(d, V(0.4, 17.25), kIv, kBand);
  EXPECT_EQ(a.entries, b.entries);
}

class SegmentSpectrum : public ::testing::Test {
 protected:
  const Trajectory<double> traj = vertical_segment<double>();
  const Dir up = Dir::polar(kPi / 2);
  const Spectrum<double> spectrum = spectrum_of(traj, up);
};

TEST_F(SegmentSpectrum, FirstEigenvectorGivesReciprocal) {
  const auto phi = spectrum.eigenvectors.column(0);
  EXPECT_NEAR(picard_sum(spectrum, phi).sum * spectrum.eigenvalues[0], 1.0, 1e-12);
}

TEST_F(SegmentSpectrum, ZeroVectorGivesZero) {
  const std::vector<C> zero(18);
  const auto r = picard_sum(spectrum, zero);
  EXPECT_EQ(r.sum, 0.0);
  EXPECT_EQ(indicator_from_sum(r.sum), std::numeric_limits<double>::infinity());
}

TEST_F(SegmentSpectrum, TermsSumToTotal) {
  const auto r = picard_sum(spectrum, test_vector(up, V(0, 2), kIv, kBand));
  double total = 0;
  for (double t : r.terms) {
    EXPECT_GE(t, 0.0);
    total += t;
  }
  EXPECT_DOUBLE_EQ(total, r.sum);
}

TEST_F(SegmentSpectrum, SizeMismatchThrows) {
  EXPECT_THROW(picard_sum(spectrum, std::vector<C>(3)), DomainError);
}

TEST_F(SegmentSpectrum, ScalingData) {
  auto samples = sample_band(traj, up, kBand);
  for (auto& w : samples.values) w *= 3.0;
  const auto scaled = f_sharp_spectrum(build_operator(samples));
  // well above the eigenvalue floor both sums use the same spectrum up to scale
  PicardOptions<double> opts;
  opts.cutoff_rel = 1e-6;
  const auto phi = test_vector(up, V(0, 2), kIv, kBand);
  const double a = picard_sum(spectrum, phi, opts).sum;
  const double b = picard_sum(scaled, phi, opts).sum;
  EXPECT_NEAR(b / a, 1.0 / 3.0, 1e-10);
}

TEST_F(SegmentSpectrum, InsideBeatsOutside) {
  const double inside = indicator_single(spectrum, up, V(0, 2), kIv, kBand);
  const double outside = indicator_single(spectrum, up, V(0, 0.25), kIv, kBand);
  EXPECT_GE(inside, 10 * outside);
}

TEST_F(SegmentSpectrum, IndicatorHyperplaneInvariance) {
  EXPECT_EQ(indicator_single(spectrum, up, V(-1.5, 2.2), kIv, kBand),
            indicator_single(spectrum, up, V(1.25, 2.2), kIv, kBand));
}

TEST_F(SegmentSpectrum, NonObservableDirectionIsSmall) {
  const Dir d = Dir::polar(5 * kPi / 4);
  const auto s = spectrum_of(traj, d);
  for (const V& y : {V(0, 2), V(0, 0), V(1, 1), V(-2, 4)}) {
    EXPECT_LE(indicator_single(s, d, y, kIv, kBand), 1e-3);
  }
}

TEST_F(SegmentSpectrum, CutoffDropsSmallEigenvalues) {
  PicardOptions<double> opts;
  opts.cutoff_rel = 2.0;
  EXPECT_EQ(picard_sum(spectrum, test_vector(up, V(0, 2), kIv, kBand), opts).sum, 0.0);
}

TEST(Filter, InfiniteThresholdKeepsAll) {
  const std::vector<std::vector<double>> sums{{1e9, 2e9}, {5.0}, {1e20}};
  const auto f = direction_filter(sums, std::numeric_limits<double>::infinity());
  EXPECT_EQ(f.kept, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(f.dropped.empty());
}

TEST(Filter, ThresholdOnMinimum) {
  const std::vector<std::vector<double>> sums{{4000.0, 3499.0}, {3501.0, 1e6}, {3500.0}};
  const auto f = direction_filter(sums);
  EXPECT_EQ(f.kept, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(f.dropped, (std::vector<std::size_t>{1}));
  EXPECT_EQ(f.minima[1], 3501.0);
}

TEST(Filter, EmptyResult) {
  const std::vector<std::vector<double>> sums{{1e5}};
  const auto f = direction_filter(sums);
  EXPECT_TRUE(f.empty());
  EXPECT_THROW(indicator_multi_from_sums(std::vector<double>{1e5}, f), DomainError);
}

TEST(Filter, MixedRunKeepsObservable) {
  const auto traj = vertical_segment<double>();
  const auto grid = segment_grid(41);
  std::vector<std::vector<double>> sums;
  for (double theta : {kPi / 2, 5 * kPi / 4}) {
    const Dir d = Dir::polar(theta);
    sums.push_back(sum_field(spectrum_of(traj, d), traj, d, grid).values);
  }
  const auto f = direction_filter(sums);
  EXPECT_EQ(f.kept, std::vector<std::size_t>{0});
  EXPECT_EQ(f.dropped, std::vector<std::size_t>{1});
}

TEST(Multi, TwoSums) {
  FilterResult f;
  f.kept = {0, 2};
  f.dropped = {1};
  EXPECT_DOUBLE_EQ(indicator_multi_from_sums(std::vector<double>{2.0, 100.0, 6.0}, f), 1.0 / 8.0);
}

class MultiDirection : public ::testing::Test {
 protected:
  const Trajectory<double> traj = vertical_segment<double>();
  std::vector<Dir> dirs{Dir::polar(0.0), Dir::polar(kPi / 2), Dir::polar(kPi / 4)};
  std::vector<Spectrum<double>> spectra{spectrum_of(traj, dirs[0]), spectrum_of(traj, dirs[1]),
                                        spectrum_of(traj, dirs[2])};
};

TEST_F(MultiDirection, SingleDirectionMatchesSingle) {
  FilterResult f;
  f.kept = {1};
  const V y(0.1, 1.7);
  EXPECT_EQ(indicator_multi(spectra, dirs, f, y, kIv, kBand),
            indicator_single(spectra[1], dirs[1], y, kIv, kBand));
}

TEST_F(MultiDirection, ReciprocalOfTotal) {
  FilterResult f;
  f.kept = {0, 1};
  const V y(0.3, 2.2);
  const double s0 = picard_sum(spectra[0], test_vector(dirs[0], y, kIv, kBand)).sum;
  const double s1 = picard_sum(spectra[1], test_vector(dirs[1], y, kIv, kBand)).sum;
  EXPECT_DOUBLE_EQ(indicator_multi(spectra, dirs, f, y, kIv, kBand), 1.0 / (s0 + s1));
}

TEST_F(MultiDirection, AddingDirectionNeverIncreases) {
  std::mt19937 gen(21);
  std::uniform_real_distribution<double> u(-2, 4);
  FilterResult one, two, three;
  one.kept = {0};
  two.kept = {0, 1};
  three.kept = {0, 1, 2};
  for (int i = 0; i < 200; ++i) {
    const V y(u(gen), u(gen));
    const double w1 = indicator_multi(spectra, dirs, one, y, kIv, kBand);
    const double w2 = indicator_multi(spectra, dirs, two, y, kIv, kBand);
    const double w3 = indicator_multi(spectra, dirs, three, y, kIv, kBand);
    EXPECT_LE(w2, w1);
    EXPECT_LE(w3, w2);
  }
}

TEST_F(MultiDirection, ConcentratesOnSegment) {
  const auto grid = segment_grid(81);
  ScalarField total = sum_field(spectra[0], traj, dirs[0], grid);
  total = add(total, sum_field(spectra[1], traj, dirs[1], grid));
  const ScalarField w = reciprocal(total);
  Mask segment(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const V p = grid.point(i);
    segment[i] = std::abs(p[0]) < 1e-9 && p[1] >= 1 - 1e-9 && p[1] <= 3 + 1e-9;
  }
  double in = 0, out = 0;
  std::size_t nin = 0, nout = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (segment[i]) {
      in += w.values[i];
      ++nin;
    } else if (!detail::near_mask(grid, segment, i, 0.25)) {
      out += w.values[i];
      ++nout;
    }
  }
  ASSERT_GT(nin, 0u);
  EXPECT_GE(in / double(nin), 10 * out / double(nout));
}

TEST(Degenerate, PicardSumIgnoresBasisChoiceInClusters) {
  std::mt19937 gen(31);
  std::normal_distribution<double> g;
  const std::size_t n = 6;
  // Q diag(4, 4, 4, 1, 1, 0.25) Q^* with a random unitary Q
  CMatrix<double> a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = C(g(gen), g(gen));
  const auto q = hermitian_eigen(CMatrix<double>(a + a.adjoint())).vectors;
  const std::vector<double> lam{4, 4, 4, 1, 1, 0.25};
  CMatrix<double> d(n, n);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = lam[i];
  const CMatrix<double> h = q * d * q.adjoint();
  const auto s = f_sharp_spectrum(h);

  std::vector<C> phi(n);
  for (auto& p : phi) p = C(g(gen), g(gen));
  const double reference = picard_sum(s, phi).sum;

  for (int trial = 0; trial < 20; ++trial) {
    Spectrum<double> mixed = s;
    for (auto [lo, hi] : {std::pair<std::size_t, std::size_t>{0, 3}, {3, 5}}) {
      const std::size_t m = hi - lo;
      CMatrix<double> r(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) r(i, j) = C(g(gen), g(gen));
      const auto u = hermitian_eigen(CMatrix<double>(r + r.adjoint())).vectors;
      for (std::size_t row = 0; row < n; ++row) {
        for (std::size_t c = 0; c < m; ++c) {
          C v{};
          for (std::size_t k = 0; k < m; ++k) v += s.eigenvectors(row, lo + k) * u(k, c);
          mixed.eigenvectors(row, lo + c) = v;
        }
      }
    }
    EXPECT_NEAR(picard_sum(mixed, phi).sum, reference, 1e-8 * reference);
  }
}

}  // namespace
