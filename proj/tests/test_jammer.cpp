#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "antifrag/jammer.hpp"

using namespace antifrag;

namespace {

VectorXcd random_qpsk(Eigen::Index n, Rng& rng) {
  std::uniform_int_distribution<int> q(0, 3);
  VectorXcd x(n);
  for (auto& s : x) s = std::polar(1.0, kPi<double> / 2 * q(rng) + kPi<double> / 4);
  return x;
}

}  // namespace

TEST_CASE("names round trip") {
  for (auto m : {JammerModel::DRFM, JammerModel::PS, JammerModel::AS}) CHECK(parse_jammer_model(to_string(m)) == m);
  for (auto t : {PathTopology::SourceAware, PathTopology::RisAware}) CHECK(parse_topology(to_string(t)) == t);
  CHECK_THROWS_AS(parse_jammer_model("noise"), DomainError);
}

TEST_CASE("transforms") {
  Rng rng(1);
  JammerSpec drfm{JammerModel::DRFM, 2.0};
  VectorXcd one(1);
  one << cd(1, 0);
  auto out = jammer_transform(drfm, one, rng);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == cd(2, 0));

  VectorXcd x = random_qpsk(16, rng);
  JammerSpec ps{JammerModel::PS};
  auto neg = jammer_transform(ps, x, RealVector<double>(RealVector<double>::Constant(16, -1.0)));
  CHECK((neg + x).cwiseAbs().maxCoeff() == 0.0);

  JammerSpec as{JammerModel::AS};
  CHECK(jammer_transform(as, x, RealVector<double>(RealVector<double>::Zero(16))).cwiseAbs().maxCoeff() == 0.0);

  JammerSpec delayed{JammerModel::DRFM, 1.0, 3};
  auto d = jammer_transform(delayed, x, rng);
  CHECK(d.size() == 19);
  CHECK(d.head(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d.tail(16) - x).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(jammer_transform(drfm, VectorXcd(0), rng), DomainError);
  JammerSpec bad{JammerModel::DRFM, 0.0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("factor statistics") {
  Rng rng(2);
  const int n = 200000;
  VectorXcd x = random_qpsk(n, rng);
  JammerSpec ps{JammerModel::PS};
  auto yp = jammer_transform(ps, x, rng);
  CHECK(yp.squaredNorm() == doctest::Approx(x.squaredNorm()).epsilon(1e-12));
  auto up = draw_jammer_factors<double>(ps, n, rng);
  CHECK((up.array().abs() == 1.0).all());
  CHECK(up.mean() == doctest::Approx(0.0).epsilon(0.01));

  JammerSpec as{JammerModel::AS};
  auto ya = jammer_transform(as, x, rng);
  CHECK(ya.squaredNorm() / x.squaredNorm() == doctest::Approx(4.0 / 3.0).epsilon(0.02));
  auto v = draw_jammer_factors<double>(as, n, rng);
  CHECK(v.minCoeff() >= 0.0);
  CHECK(v.maxCoeff() <= 2.0);

  JammerSpec held{JammerModel::PS};
  held.samples_per_symbol = 4;
  auto h = draw_jammer_factors<double>(held, 64, rng);
  for (int s = 0; s < 16; ++s)
    for (int k = 1; k < 4; ++k) CHECK(h[4 * s + k] == h[4 * s]);

  JammerSpec cyclic{JammerModel::DRFM};
  cyclic.cycle_period = 10;
  auto c = draw_jammer_factors<double>(cyclic, 40, rng);
  for (int i = 0; i < 40; ++i) CHECK(c[i] == ((i % 10) < 5 ? 1.0 : 0.0));
}

TEST_CASE("source-aware composition") {
  Rng rng(3);
  VectorXcd x = random_qpsk(32, rng);
  JammerSpec silent{JammerModel::DRFM};
  silent.scale = 0.0;
  const cd legit(0.3, -0.7);
  auto y = received_source_aware(legit, cd(1, 0), cd(1, 0), silent, x, 0.0, rng);
  CHECK((y - legit * x).cwiseAbs().maxCoeff() == 0.0);

  JammerSpec relay{JammerModel::DRFM, 1.0, 2};
  auto r = received_source_aware(cd(0, 0), cd(1, 0), cd(1, 0), relay, x, 0.0, rng);
  CHECK(r.size() == 34);
  CHECK(r.head(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.tail(32) - x).cwiseAbs().maxCoeff() == 0.0);

  // Term-by-term rebuild with the same generator state.
  JammerSpec ps{JammerModel::PS, 1.0, 5};
  const cd he(0.2, 0.9), hj(-1.1, 0.4);
  Rng a(9), b(9);
  auto got = received_source_aware(legit, he, hj, ps, x, 0.01, a);
  auto u = draw_jammer_factors<double>(ps, x.size(), b);
  VectorXcd want = VectorXcd::Zero(x.size() + 5);
  for (Eigen::Index n = 0; n < want.size(); ++n) {
    if (n < x.size()) want[n] += legit * x[n];
    if (n >= 5) want[n] += u[n - 5] * he * hj * x[n - 5];
    want[n] += complex_gaussian<double>(b, 0.01);
  }
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ris-aware composition") {
  Rng rng(4);
  const int m = 4;
  RisLinkConfig cfg;
  cfg.element_count = m;
  auto R = build_correlation<double>(cfg);
  auto real = sample_realization<double>(cfg, RicianParams{}, rng);
  auto phi = optimize_phases(real.h_sr, real.h_rd, R);
  VectorXcd x = random_qpsk(8, rng);
  const cd casc = cascaded_coefficient(real.h_sr, real.h_rd, R, phi);

  auto nulled = real;
  nulled.h_rj.setZero();
  JammerSpec drfm{JammerModel::DRFM};
  auto y0 = received_ris_aware(nulled, R, phi, cd(1, 0), drfm, x, 0.0, rng);
  CHECK((y0 - casc * x).cwiseAbs().maxCoeff() < 1e-15);

  auto mirror = real;
  mirror.h_rj = real.h_rd;
  auto y2 = received_ris_aware(mirror, R, phi, cd(1, 0), drfm, x, 0.0, rng);
  CHECK((y2 - 2.0 * casc * x).cwiseAbs().maxCoeff() < 1e-12);

  // Brute-force rebuild of both cascades.
  auto triple = [&](const VectorXcd& hi, const VectorXcd& ho) {
    cd acc{};
    for (int a = 0; a < m; ++a)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
          acc += R.sqrt_form(a, k) * R.sqrt_form(a, l) * hi[k] * ho[l] * std::polar(1.0, phi.phases[a]);
    return acc;
  };
  JammerSpec as{JammerModel::AS, 1.0, 1};
  const cd hj2(0.5, 0.5);
  Rng a(12), b(12);
  auto got = received_ris_aware(real, R, phi, hj2, as, x, 0.0, a);
  auto v = draw_jammer_factors<double>(as, x.size(), b);
  const cd legit = triple(real.h_sr, real.h_rd), eaves = triple(real.h_sr, real.h_rj);
  for (Eigen::Index n = 0; n < got.size(); ++n) {
    cd want = n < x.size() ? legit * x[n] : cd{};
    if (n >= 1) want += eaves * v[n - 1] * hj2 * x[n - 1];
    CHECK(std::abs(got[n] - want) < 1e-12);
  }
}

TEST_CASE("array receive") {
  Rng rng(5);
  ReceiveArray arr{6};
  auto s0 = arr.steering(0.0);
  CHECK((s0 - VectorXcd::Ones(6)).cwiseAbs().maxCoeff() < 1e-15);
  auto s = ReceiveArray{4}.steering(kPi<double> / 6);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(s[i]) == doctest::Approx(1.0));
    CHECK(std::abs(s[i] - std::polar(1.0, -kPi<double> * i * 0.5)) < 1e-12);
  }
  VectorXcd y = random_qpsk(10, rng);
  auto Y = array_receive(y, ReceiveArray{4}, kPi<double> / 6, 0.0, rng);
  for (int i = 0; i < 4; ++i) CHECK((Y.row(i).transpose() - s[i] * y).cwiseAbs().maxCoeff() < 1e-12);
  auto single = array_receive(y, ReceiveArray{1}, 0.7, 0.0, rng);
  CHECK(single.rows() == 1);
  CHECK((single.row(0).transpose() - y).cwiseAbs().maxCoeff() == 0.0);
}
