#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "antifrag/adaptation.hpp"

using namespace antifrag;

TEST_CASE("jamming snr") {
  CHECK(snr_jamming(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(snr_jamming(3, 2) == doctest::Approx(1.0));
  CHECK(snr_jamming(1e12, 7.0) == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(snr_jamming(std::numeric_limits<double>::infinity(), 7.0) == 7.0);
  LinkSnrs s;
  s.gamma_e = 3;
  s.gamma_j = 2;
  CHECK(snr_jamming(s) == doctest::Approx(1.0));
  s.noise_l = 0;
  CHECK_THROWS_AS(snr_jamming(s), DomainError);
  CHECK_THROWS_AS(snr_jamming(-1, 2), DomainError);

  for (int a = 0; a <= 40; ++a)
    for (int b = 0; b <= 40; ++b) {
      const double ge = db_to_linear(a), gj = db_to_linear(b);
      CHECK(snr_jamming(ge, gj) <= std::min(ge, gj));
    }
}

TEST_CASE("remapping") {
  const ModScheme q16{ModFamily::QAM, 16}, qpsk{ModFamily::PSK, 4};
  CHECK(remap_modulation(JammerClass::AS, q16).family == ModFamily::PSK);
  CHECK(remap_modulation(JammerClass::DRFM, qpsk) == qpsk);
  const auto ask = remap_modulation(JammerClass::PS, qpsk);
  CHECK(ask.family == ModFamily::ASK);
  for (auto p : constellation(ask)) CHECK(p.real() > 0.0);
  CHECK(remap_modulation(JammerClass::Unknown, q16) == q16);
}

TEST_CASE("residual error and code choice") {
  CHECK(residual_error({255, 239}, 0.05) == doctest::Approx(0.0186).epsilon(0.005));
  CHECK(std::abs(residual_error({255, 239}, 0.05) - 0.0186) < 1e-4);
  CHECK(residual_error({255, 239}, 0.0) == doctest::Approx(-8.0 / 255));

  const auto table = default_code_table();
  const ModScheme bpsk{ModFamily::PSK, 2};
  auto clean = select_code_for_ber(0.0, bpsk, -0.005, table);
  CHECK(clean.code == table.front());
  CHECK(clean.compliant);

  const RsCode only[] = {{255, 239}};
  auto rejected = select_code_for_ber(0.05, bpsk, -0.001, only);
  CHECK_FALSE(rejected.compliant);

  auto hopeless = select_code_for_ber(0.4, bpsk, -0.005, table);
  CHECK_FALSE(hopeless.compliant);
  CHECK(hopeless.code == table.back());

  CHECK_THROWS_AS(select_code_for_ber(0.0, bpsk, 0.01, table), DomainError);
  CHECK_THROWS_AS(select_code_for_ber(0.0, bpsk, -0.01, std::span<const RsCode>{}), DomainError);
}

TEST_CASE("residual monotonicity") {
  for (double ser : {0.0, 0.01, 0.05, 0.2}) {
    double prev = 1e9;
    for (int k = 250; k >= 150; k -= 2) {
      const double r = residual_error({255, k}, ser);
      CHECK(r < prev);
      prev = r;
    }
  }
  for (const auto& c : default_code_table()) CHECK(residual_error(c, 0.02) < residual_error(c, 0.03));
}

TEST_CASE("selected rate never drops as snr grows") {
  const auto table = default_code_table();
  for (auto f : {ModFamily::PSK, ModFamily::ASK, ModFamily::QAM})
    for (int order : kSupportedOrders) {
      double prev = 0.0;
      for (int db = 0; db <= 30; ++db) {
        const auto d = select_code(db_to_linear(db), {f, order}, -0.005, table);
        CHECK(d.code.rate() >= prev);
        prev = d.code.rate();
      }
    }
  // The order search never steps down.
  int prev_order = 0;
  for (int db = -5; db <= 40; ++db) {
    const auto d = select_scheme(ModFamily::PSK, db_to_linear(db), -0.005, table);
    CHECK(d.scheme.order >= prev_order);
    prev_order = d.scheme.order;
  }
}

TEST_CASE("scheme search") {
  const auto table = default_code_table();
  const auto low = select_scheme(ModFamily::PSK, db_to_linear(-10), -0.005, table);
  CHECK(low.scheme.order == 2);
  CHECK_FALSE(low.compliant);
  const auto high = select_scheme(ModFamily::PSK, db_to_linear(45), -0.005, table);
  CHECK(high.scheme.order == 64);
  CHECK(high.code == table.front());
  const auto mid = select_scheme(ModFamily::PSK, db_to_linear(12), -0.005, table);
  CHECK(mid.compliant);
  // One order up must fail every code at this SNR.
  const ModScheme up{ModFamily::PSK, mid.scheme.order * 2};
  if (up.order <= 64) CHECK_FALSE(select_code(db_to_linear(12), up, -0.005, table).compliant);
}

TEST_CASE("amplitude jitter quadrature") {
  const ModScheme sc{ModFamily::PSK, 8};
  // Brute-force midpoint rule over V.
  auto oracle = [&](double sl, double sj) {
    const int n = 200000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = 2.0 * (i + 0.5) / n;
      acc += ber_awgn(sc, sl + v * v * sj * 0.75);
    }
    return acc / n;
  };
  for (auto [sl, sj] : {std::pair{5.0, 0.0}, std::pair{5.0, 10.0}, std::pair{3.0, 100.0}, std::pair{1.0, 1000.0}}) {
    const double got = ber_with_amplitude_jitter(sc, sl, sj);
    CHECK(got == doctest::Approx(oracle(sl, sj)).epsilon(1e-3));
  }
  CHECK(ber_with_amplitude_jitter(sc, 5.0, 0.0) == doctest::Approx(ber_awgn(sc, 5.0)));
}

TEST_CASE("throughput and power bookkeeping") {
  CHECK(throughput(1.0, {255, 240}, {ModFamily::PSK, 64}, 1.0) == doctest::Approx(5.647).epsilon(1e-3));
  CHECK(std::abs(throughput(1.0, code_for_rate(0.94), {ModFamily::PSK, 64}, 1.0) - 5.64) < 0.01);
  const double full = throughput(2e6, {255, 208}, {ModFamily::QAM, 16}, 1.0);
  CHECK(throughput(2e6, {255, 208}, {ModFamily::QAM, 16}, 0.5) == doctest::Approx(full / 2));
  CHECK(throughput(1.0, {255, 178}, {ModFamily::PSK, 2}, 1.0) == doctest::Approx(0.698).epsilon(1e-3));
  CHECK_THROWS_AS(throughput(1.0, {255, 240}, {ModFamily::PSK, 2}, 0.0), DomainError);

  CHECK(jsr_db(1.0, 1.0) == 0.0);
  CHECK(jsr_db(10.0, 1.0) == doctest::Approx(10.0));
  CHECK(jsr_db(0.01, 1.0) == doctest::Approx(-20.0));
  CHECK_THROWS_AS(jsr_db(0.0, 1.0), DomainError);
  for (double x : {0.1, 2.0, 37.0}) CHECK(jsr_db(3.0 * x, 0.7) - jsr_db(3.0, 0.7) == doctest::Approx(10 * std::log10(x)));

  CHECK(antifragile_gain(2.0, 2.0) == 1.0);
  CHECK(antifragile_gain(5.0, 1.0) == 5.0);
  CHECK_FALSE(is_antifragile(antifragile_gain(0.5, 1.0)));
  CHECK_FALSE(is_antifragile(1.0000000002));
  CHECK(is_antifragile(1.01));
  CHECK_THROWS_AS(antifragile_gain(1.0, 0.0), DomainError);

  CHECK(dbm_to_watts(20.0) == doctest::Approx(0.1));
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3));
  CHECK(watts_to_dbm(10.0) == doctest::Approx(40.0));
}
