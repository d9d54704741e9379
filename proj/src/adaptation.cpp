#include "antifrag/adaptation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace antifrag {
namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
constexpr std::array<double, 8> kGlNodes = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                            0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                            0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGlWeights = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                              0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                              0.0622535239386479, 0.0271524594117541};

}  // namespace

void LinkSnrs::validate() const {
  if (gamma_e < 0 || gamma_j < 0 || gamma_l < 0 || p_t < 0 || p_j < 0)
    throw DomainError("LinkSnrs: SNRs and powers must be non-negative");
  if (!(noise_e > 0 && noise_j > 0 && noise_l > 0)) throw DomainError("LinkSnrs: noise variances must be positive");
}

double snr_jamming(double gamma_e, double gamma_j) {
  if (gamma_e < 0 || gamma_j < 0) throw DomainError("snr_jamming: SNRs must be non-negative");
  if (std::isinf(gamma_e) && std::isinf(gamma_j)) return gamma_e;
  if (std::isinf(gamma_e)) return gamma_j;
  if (std::isinf(gamma_j)) return gamma_e;
  return gamma_e * gamma_j / (gamma_e + gamma_j + 1.0);
}

double snr_jamming(const LinkSnrs& s) {
  s.validate();
  return snr_jamming(s.gamma_e, s.gamma_j);
}

ModScheme remap_modulation(JammerClass cls, const ModScheme& current) {
  switch (cls) {
    case JammerClass::AS: return {ModFamily::PSK, current.order};
    case JammerClass::PS: return {ModFamily::ASK, current.order};
    case JammerClass::DRFM:
    case JammerClass::Unknown: return current;
  }
  return current;
}

double residual_error(const RsCode& code, double ser) {
  code.validate();
  return (code.n * ser - code.t()) / double(code.n);
}

AdaptationDecision select_code_for_ber(double ber, const ModScheme& scheme, double delta,
                                       std::span<const RsCode> table) {
  if (table.empty()) throw DomainError("select_code: empty code table");
  if (!(delta < 0.0)) throw DomainError("select_code: delta must be negative");
  const double ser = ser_from_ber(std::clamp(ber, 0.0, 1.0), scheme.order);
  for (const auto& code : table) {
    const double res = residual_error(code, ser);
    if (res <= delta) return {scheme, code, res, delta, true};
  }
  const RsCode& last = table.back();
  return {scheme, last, residual_error(last, ser), delta, false};
}

AdaptationDecision select_code(double snr, const ModScheme& scheme, double delta, std::span<const RsCode> table) {
  return select_code_for_ber(ber_awgn(scheme, snr), scheme, delta, table);
}

AdaptationDecision select_scheme(ModFamily family, const BerModel& ber, double delta, std::span<const RsCode> table) {
  for (auto it = std::rbegin(kSupportedOrders); it != std::rend(kSupportedOrders); ++it) {
    const ModScheme sc{family, *it};
    auto d = select_code_for_ber(ber(sc), sc, delta, table);
    if (d.compliant) return d;
  }
  const ModScheme lowest{family, kSupportedOrders[0]};
  return select_code_for_ber(ber(lowest), lowest, delta, table);
}

AdaptationDecision select_scheme(ModFamily family, double snr, double delta, std::span<const RsCode> table) {
  return select_scheme(family, [snr](const ModScheme& sc) { return ber_awgn(sc, snr); }, delta, table);
}

double ber_with_amplitude_jitter(const ModScheme& scheme, double snr_l, double snr_j) {
  // V uniform on [0, 2]: E[f(V)] = 1/2 * integral_0^2 f, composite Gauss-Legendre over 8 panels.
  constexpr int panels = 8;
  constexpr double half_width = 1.0 / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (2 * p + 1) * half_width;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double v = mid + sign * kGlNodes[i] * half_width;
        acc += kGlWeights[i] * half_width * ber_awgn(scheme, snr_l + v * v * snr_j * 0.75);
      }
    }
  }
  return acc / 2.0;
}

double throughput(double bandwidth_hz, const RsCode& code, const ModScheme& scheme, double payload_fraction) {
  if (!(bandwidth_hz > 0.0)) throw DomainError("throughput: bandwidth must be positive");
  if (!(payload_fraction > 0.0 && payload_fraction <= 1.0))
    throw DomainError("throughput: payload_fraction must lie in (0, 1]");
  return bandwidth_hz * code.rate() * scheme.bits_per_symbol() * payload_fraction;
}

double jsr_db(double p_j, double p_l) {
  if (!(p_j > 0.0) || !(p_l > 0.0)) throw DomainError("jsr_db: powers must be positive");
  return 10.0 * std::log10(p_j) - 10.0 * std::log10(p_l);
}

double antifragile_gain(double t_jammed, double t_baseline) {
  if (!(t_baseline > 0.0)) throw DomainError("antifragile_gain: baseline throughput must be positive");
  return t_jammed / t_baseline;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }

double watts_to_dbm(double watts) {
  if (!(watts > 0.0)) throw DomainError("watts_to_dbm: power must be positive");
  return 10.0 * std::log10(watts * 1000.0);
}

}  // namespace antifrag
