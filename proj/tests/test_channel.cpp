#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "antifrag/channel.hpp"

using namespace antifrag;

namespace {

// Literal per-element triple sum, independent of the matrix form.
cd triple_sum(const VectorXcd& h_in, const VectorXcd& h_out, const RealMatrix<double>& root,
              const RealVector<double>& phi) {
  const Eigen::Index m = h_in.size();
  cd acc{};
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index k = 0; k < m; ++k)
      for (Eigen::Index l = 0; l < m; ++l)
        acc += root(a, k) * root(a, l) * h_in[k] * h_out[l] * std::polar(1.0, phi[a]);
  return acc;
}

VectorXcd random_vector(Eigen::Index m, Rng& rng) {
  VectorXcd v(m);
  for (auto& x : v) x = complex_gaussian<double>(rng);
  return v;
}

}  // namespace

TEST_CASE("path loss") {
  CHECK(path_loss(1.0, 2.7) == doctest::Approx(1.0));
  CHECK(path_loss(18.0, 2.7) == doctest::Approx(4.08097783709952e-4).epsilon(1e-12));
  CHECK(path_loss(7.0, 2.7) == doctest::Approx(5.22679289364722e-3).epsilon(1e-12));
  CHECK(path_loss(9.0, 2.7) > path_loss(10.0, 2.7));
  CHECK_THROWS_AS(path_loss(0.0, 2.7), DomainError);
  CHECK_THROWS_AS(path_loss(-3.0, 2.7), DomainError);
  CHECK_THROWS_AS(path_loss(3.0, 0.0), DomainError);
}

TEST_CASE("correlation matrix") {
  RisLinkConfig cfg;
  cfg.element_count = 1;
  auto r1 = build_correlation<double>(cfg);
  CHECK(r1.entries(0, 0) == 1.0);
  CHECK(r1.sqrt_form(0, 0) == doctest::Approx(1.0));

  cfg.element_count = 2;
  auto r2 = build_correlation<double>(cfg);
  CHECK(r2.entries(0, 1) == doctest::Approx(0.951229424500714).epsilon(1e-14));

  cfg.element_count = 6;
  cfg.corr_rate = 0.0;
  auto ones = build_correlation<double>(cfg);
  CHECK((ones.entries.array() == 1.0).all());
  CHECK((ones.sqrt_form * ones.sqrt_form - ones.entries).cwiseAbs().maxCoeff() < 1e-12);

  SUBCASE("invariants across sizes and rates") {
    for (int m : {3, 17, 128, 1024}) {
      for (double rate : {0.0, 0.001, 0.05, 1.0}) {
        cfg.element_count = m;
        cfg.corr_rate = rate;
        auto r = build_correlation<double>(cfg);
        CHECK((r.entries - r.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(r.entries.diagonal().isOnes());
        CHECK(r.entries.minCoeff() >= 0.0);
        CHECK(r.entries.maxCoeff() <= 1.0);
        CHECK((r.sqrt_form * r.sqrt_form - r.entries).cwiseAbs().maxCoeff() <= 1e-9);
        Eigen::SelfAdjointEigenSolver<RealMatrix<double>> eig(r.entries, Eigen::EigenvaluesOnly);
        CHECK(eig.eigenvalues().minCoeff() > -1e-9 * m);
      }
    }
  }

  cfg.element_count = 0;
  CHECK_THROWS_AS(build_correlation<double>(cfg), DomainError);
}

TEST_CASE("rician draws") {
  Rng rng(11);
  RicianParams rayleigh{0.0, 1.0, 1};
  double power = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) power += std::norm(sample_rician<double>(rayleigh, rng));
  CHECK(power / n == doctest::Approx(1.0).epsilon(0.02));

  RicianParams los{std::numeric_limits<double>::infinity(), 1.7, 2};
  for (int i = 0; i < 20; ++i) CHECK(std::abs(sample_rician<double>(los, rng)) == doctest::Approx(1.7));

  // Mixed case: E|h|^2 = k/(k+1) sigma^2 + L/(k+1).
  RicianParams mixed{3.0, 1.0, 2};
  power = 0.0;
  for (int i = 0; i < n; ++i) power += std::norm(sample_rician<double>(mixed, rng));
  CHECK(power / n == doctest::Approx(0.75 + 0.5).epsilon(0.02));
}

TEST_CASE("realization statistics and determinism") {
  RisLinkConfig cfg;
  cfg.element_count = 4;
  RicianParams jp;
  Rng a(5), b(5);
  auto ra = sample_realization<double>(cfg, jp, a);
  auto rb = sample_realization<double>(cfg, jp, b);
  CHECK(ra.h_sr == rb.h_sr);
  CHECK(ra.h_rd == rb.h_rd);
  CHECK(ra.h_rj == rb.h_rj);
  CHECK(ra.h_e1 == rb.h_e1);
  CHECK(ra.h_j2 == rb.h_j2);
  CHECK(ra.h_sr.size() == 4);

  auto mean_power = [&](double d_sr) {
    RisLinkConfig c = cfg;
    c.element_count = 1;
    c.d_sr = d_sr;
    Rng rng(77);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += std::norm(sample_realization<double>(c, jp, rng).h_sr[0]);
    return acc / n;
  };
  const double p18 = mean_power(18.0);
  CHECK(p18 == doctest::Approx(std::pow(18.0, -2.7)).epsilon(0.02));
  CHECK(mean_power(36.0) / p18 == doctest::Approx(std::pow(2.0, -2.7)).epsilon(0.03));
}

TEST_CASE("cascaded coefficient matches the triple sum") {
  RisLinkConfig cfg;
  Rng rng(3);
  RisLinkConfig one;
  one.element_count = 1;
  auto r1 = build_correlation<double>(one);
  VectorXcd unit = VectorXcd::Ones(1);
  PhaseMatrix<double> zero{RealVector<double>::Zero(1)};
  CHECK(std::abs(cascaded_coefficient(unit, unit, r1, zero) - cd(1, 0)) < 1e-15);

  for (int m = 1; m <= 8; ++m) {
    cfg.element_count = m;
    auto R = build_correlation<double>(cfg);
    for (int trial = 0; trial < 20; ++trial) {
      VectorXcd h_in = random_vector(m, rng), h_out = random_vector(m, rng);
      RealVector<double> phi = RealVector<double>::Random(m) * kPi<double> + RealVector<double>::Constant(m, kPi<double>);
      const cd fast = cascaded_coefficient(h_in, h_out, R, PhaseMatrix<double>{phi});
      const cd slow = triple_sum(h_in, h_out, R.sqrt_form, phi);
      CHECK(std::abs(fast - slow) <= 1e-9 * std::abs(slow));
    }
  }

  auto I = CorrelationMatrix<double>::identity(5);
  VectorXcd ones = VectorXcd::Ones(5);
  PhaseMatrix<double> aligned{RealVector<double>::Zero(5)};
  CHECK(std::abs(cascaded_coefficient(ones, ones, I, aligned)) == doctest::Approx(5.0));

  CHECK_THROWS_AS(cascaded_coefficient(VectorXcd(VectorXcd::Ones(3)), ones, I, aligned), DomainError);
}

TEST_CASE("phase optimization") {
  Rng rng(21);
  auto I1 = CorrelationMatrix<double>::identity(1);
  VectorXcd h_sr = random_vector(1, rng), h_rd = random_vector(1, rng);
  auto phi = optimize_phases(h_sr, h_rd, I1);
  CHECK(std::abs(cascaded_coefficient(h_sr, h_rd, I1, phi)) == doctest::Approx(std::abs(h_sr[0]) * std::abs(h_rd[0])));

  SUBCASE("identity correlation against an exhaustive grid") {
    for (int m = 2; m <= 3; ++m) {
      auto I = CorrelationMatrix<double>::identity(m);
      VectorXcd a = random_vector(m, rng), b = random_vector(m, rng);
      auto opt = optimize_phases(a, b, I);
      for (int i = 0; i < m; ++i) CHECK(opt.phases[i] == doctest::Approx(wrap_phase(-std::arg(a[i] * b[i]))));
      const double coherent = (a.cwiseAbs().array() * b.cwiseAbs().array()).sum();
      CHECK(std::abs(cascaded_coefficient(a, b, I, opt)) == doctest::Approx(coherent));
      const int steps = 72;
      double best = 0.0;
      RealVector<double> p(m);
      for (int i0 = 0; i0 < steps; ++i0) {
        p[0] = 2 * kPi<double> * i0 / steps;
        for (int i1 = 0; i1 < steps; ++i1) {
          p[1] = 2 * kPi<double> * i1 / steps;
          for (int i2 = 0; i2 < (m == 3 ? steps : 1); ++i2) {
            if (m == 3) p[2] = 2 * kPi<double> * i2 / steps;
            best = std::max(best, std::abs(cascaded_coefficient(a, b, I, PhaseMatrix<double>{p})));
          }
        }
      }
      CHECK(best <= coherent * (1 + 1e-12));
      CHECK(best >= coherent * 0.99);
    }
  }

  SUBCASE("beats random phases") {
    RisLinkConfig cfg;
    cfg.element_count = 16;
    auto R = build_correlation<double>(cfg);
    RicianParams jp;
    auto real = sample_realization<double>(cfg, jp, rng);
    auto opt = optimize_phases(real.h_sr, real.h_rd, R);
    for (double p : opt.phases) {
      CHECK(p >= 0.0);
      CHECK(p < 2 * kPi<double>);
    }
    const double best = std::abs(cascaded_coefficient(real.h_sr, real.h_rd, R, opt));
    std::uniform_real_distribution<double> u(0, 2 * kPi<double>);
    for (int i = 0; i < 100; ++i) {
      RealVector<double> p(16);
      for (auto& x : p) x = u(rng);
      CHECK(std::abs(cascaded_coefficient(real.h_sr, real.h_rd, R, PhaseMatrix<double>{p})) <= best);
    }
  }
}

TEST_CASE("coherent gain grows with the square of the element count") {
  Rng rng(99);
  std::vector<double> xs, ys;
  for (int m : {4, 16, 64}) {
    auto I = CorrelationMatrix<double>::identity(m);
    double acc = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
      VectorXcd a = random_vector(m, rng), b = random_vector(m, rng);
      acc += std::norm(cascaded_coefficient(a, b, I, optimize_phases(a, b, I)));
    }
    xs.push_back(std::log(double(m)));
    ys.push_back(std::log(acc / n));
  }
  const double slope = (ys[2] - ys[0]) / (xs[2] - xs[0]);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("float instantiation") {
  RisLinkConfig cfg;
  cfg.element_count = 8;
  auto R = build_correlation<float>(cfg);
  Rng rng(1);
  auto real = sample_realization<float>(cfg, RicianParams{}, rng);
  auto phi = optimize_phases(real.h_sr, real.h_rd, R);
  CHECK(std::isfinite(std::abs(cascaded_coefficient(real.h_sr, real.h_rd, R, phi))));
}
