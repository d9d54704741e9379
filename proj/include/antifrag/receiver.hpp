#pragma once

// Receiver chain: decode-failure detection, sliding cross-correlation and delay
// estimation, cycle tracking, AoA estimation and beamforming, temporal
// partitioning, and jammer classification.

#include <optional>
#include <span>
#include <vector>

#include "antifrag/jammer.hpp"
#include "antifrag/waveform.hpp"

namespace antifrag {

struct CorrelationResult {
  std::vector<int> lags;  ///< -search_bound .. search_bound
  VectorXcd values;
  int search_bound = 0;

  cd at(int lag) const { return values[lag + search_bound]; }
};

inline bool detect_jamming(bool decode_failure) { return decode_failure; }

/// R(tau) = sum_{n < f_max} y[n] * conj(y_ref[n + tau]); indices outside y_ref contribute zero.
/// Literal double loop, O(f_max * gamma_max).
CorrelationResult cross_correlate(const VectorXcd& y, const VectorXcd& y_ref, int f_max, int gamma_max);

/// Same profile through zero-padded FFTs.
CorrelationResult cross_correlate_fft(const VectorXcd& y, const VectorXcd& y_ref, int f_max, int gamma_max);

/// Lag of the largest |R|; ties go to the smallest |lag|, positive first.
int estimate_delay(const CorrelationResult& corr);
/// Restricted to min_lag <= lag <= max_lag.
int estimate_delay(const CorrelationResult& corr, int min_lag, int max_lag);

struct DelayEstimate {
  int tau = 0;
  double significance = 0.0;  ///< |R(tau)|^2 over the noise-only variance of R
  bool second_order = false;  ///< found on squared sequences
};

/// Locates a delayed replica of `reference` inside `residual` among positive lags. Runs the
/// correlation on the raw sequences and on their squares (insensitive to per-symbol sign
/// flips) and keeps whichever peak stands out more from its noise floor.
DelayEstimate locate_replica(const VectorXcd& reference, const VectorXcd& residual, int gamma_max);

struct CycleTracker {
  std::optional<long> first_attack_time;
  std::optional<long> last_attack_time;
  std::optional<long> cycle_estimate;
};

CycleTracker update_cycle(CycleTracker tracker, long attack_time);

struct AoaOptions {
  bool smoothing = true;  ///< forward-backward averaging plus spatial smoothing
  double grid_step_deg = 0.1;
};

/// MUSIC over a half-wavelength ULA; angles in radians, sorted ascending.
std::vector<double> estimate_aoa(const MatrixXcd& streams, int source_count, const AoaOptions& opts = {});

struct SpatialSeparation {
  VectorXcd legit;
  VectorXcd jam;
  VectorXcd w_legit;
  VectorXcd w_jam;
};

/// Two-constraint LCMV: unit response toward one angle, null toward the other.
SpatialSeparation separate_spatial(const MatrixXcd& streams, double aoa_legit, double aoa_jam,
                                   double max_overlap = 0.9);

struct BurstSchedule {
  int start = 0;
  int length = 0;
  double payload_fraction = 1.0;
};

BurstSchedule partition_temporal(int frame_len, int tau_hat, const CycleTracker& cycle);

struct SimilarityMetrics {
  double sc_max = 0.0;
  double cc_max = 0.0;
  double sim = 0.0;
};

/// SC = max|R_ll| / F, CC = max|R_jl| / F over lags within +-f_max/2, Sim = CC / SC.
SimilarityMetrics similarity_ratio(const VectorXcd& jam_est, const VectorXcd& legit_est, int f_max);

struct ClassifierThresholds {
  double sim_threshold = 0.93;
  double inversion_threshold = 0.25;

  void validate() const;
};

struct PilotInversions {
  double phase = 0.0;      ///< fraction of flipped sign bits
  double amplitude = 0.0;  ///< fraction of flipped magnitude bits
};

/// Least-squares gain of `observed` against known symbols.
cd estimate_gain(const VectorXcd& observed, const VectorXcd& known);

/// Equalizes the observed pilot by its LS gain and slices both bit planes against the pattern.
PilotInversions count_pilot_inversions(const VectorXcd& observed, std::span<const PilotSymbol> pattern);

/// Phase flips point to PS, envelope flips to AS.
JammerClass classify_jammer(const SimilarityMetrics& metrics, const PilotInversions& inversions,
                            const ClassifierThresholds& thresholds);

/// Single-fraction rule keyed on the active scheme; QAM carries both dimensions and yields Unknown.
JammerClass classify_jammer(const SimilarityMetrics& metrics, double inversion_fraction, const ModScheme& active,
                            const ClassifierThresholds& thresholds);

/// Rotates by the LS phase against the pilot and scales to unit signal power after
/// removing `noise_var`; the form the classifier expects.
VectorXcd normalize_jam_stream(const VectorXcd& jam, const VectorXcd& pilot, double noise_var);

}  // namespace antifrag
