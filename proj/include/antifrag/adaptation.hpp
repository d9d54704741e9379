#pragma once

// Link SNR bookkeeping, modulation remapping, residual-error code selection and
// the throughput / JSR / gain metrics.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "antifrag/jammer.hpp"
#include "antifrag/waveform.hpp"

namespace antifrag {

struct LinkSnrs {
  double gamma_e = 0.0;  ///< eavesdrop link, P_t |h_E|^2 / sigma_E^2
  double gamma_j = 0.0;  ///< jammer to destination, P_j |h_J|^2 / sigma_J^2
  double gamma_l = 0.0;  ///< legitimate cascade, P_t |h_L|^2 / sigma_L^2
  double p_t = 0.1;      ///< W
  double p_j = 0.1;      ///< W
  double noise_e = 1.0;
  double noise_j = 1.0;
  double noise_l = 1.0;

  void validate() const;
};

/// Amplify-and-forward end-to-end SNR of the eavesdrop-then-jam relay path.
double snr_jamming(double gamma_e, double gamma_j);
double snr_jamming(const LinkSnrs& s);

ModScheme remap_modulation(JammerClass cls, const ModScheme& current);

/// (n * SER - t) / n.
double residual_error(const RsCode& code, double ser);

struct AdaptationDecision {
  ModScheme scheme;
  RsCode code;
  double residual = 0.0;
  double delta = -0.005;
  bool compliant = false;
};

/// Highest-rate code with residual <= delta at the given BER; lowest-rate code, flagged, otherwise.
AdaptationDecision select_code_for_ber(double ber, const ModScheme& scheme, double delta, std::span<const RsCode> table);

/// select_code_for_ber with the scheme's analytic AWGN BER at linear SNR `snr`.
AdaptationDecision select_code(double snr, const ModScheme& scheme, double delta, std::span<const RsCode> table);

using BerModel = std::function<double(const ModScheme&)>;

/// Walks orders 64 down to 2 within `family` and keeps the first one that admits a compliant code.
AdaptationDecision select_scheme(ModFamily family, const BerModel& ber, double delta, std::span<const RsCode> table);

/// Order/code choice for a plain AWGN link at linear SNR `snr`.
AdaptationDecision select_scheme(ModFamily family, double snr, double delta, std::span<const RsCode> table);

/// BER when a PSK waveform is combined with an amplitude-shifted replica:
/// E_V[BER(snr_l + V^2 snr_j / E[V^2])], V ~ U[0, 2].
double ber_with_amplitude_jitter(const ModScheme& scheme, double snr_l, double snr_j);

/// B * R_c * log2(M) * payload_fraction.
double throughput(double bandwidth_hz, const RsCode& code, const ModScheme& scheme, double payload_fraction);

double jsr_db(double p_j, double p_l);
double antifragile_gain(double t_jammed, double t_baseline);
inline constexpr double kGainTolerance = 1e-6;
inline bool is_antifragile(double gain) { return gain > 1.0 + kGainTolerance; }

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace antifrag
