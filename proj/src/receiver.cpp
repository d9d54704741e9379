#include "antifrag/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <unsupported/Eigen/FFT>

namespace antifrag {
namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

void check_correlation_args(const VectorXcd& y, const VectorXcd& y_ref, int f_max, int gamma_max) {
  if (f_max < 1) throw DomainError("cross_correlate: f_max must be positive");
  if (gamma_max < 0 || gamma_max >= f_max) throw DomainError("cross_correlate: need 0 <= gamma_max < f_max");
  if (y.size() < f_max || y_ref.size() < f_max) throw DomainError("cross_correlate: sequences shorter than f_max");
}

CorrelationResult empty_result(int gamma_max) {
  CorrelationResult r;
  r.search_bound = gamma_max;
  r.lags.resize(2 * gamma_max + 1);
  std::iota(r.lags.begin(), r.lags.end(), -gamma_max);
  r.values = VectorXcd::Zero(2 * gamma_max + 1);
  return r;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

VectorXcd steering_prefix(double aoa, Eigen::Index len) {
  VectorXcd a(len);
  const double s = std::sin(aoa);
  for (Eigen::Index i = 0; i < len; ++i) a[i] = std::polar(1.0, -kPi<double> * double(i) * s);
  return a;
}

double music_denominator(const MatrixXcd& noise_sub, double aoa) {
  return (noise_sub.adjoint() * steering_prefix(aoa, noise_sub.rows())).squaredNorm();
}

double refine_minimum(const MatrixXcd& noise_sub, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = music_denominator(noise_sub, c), fd = music_denominator(noise_sub, d);
  for (int it = 0; it < 40; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = music_denominator(noise_sub, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = music_denominator(noise_sub, d);
    }
  }
  return (a + b) / 2;
}

double peak_significance(const CorrelationResult& corr, int tau, double noise_scale) {
  if (!(noise_scale > 0.0)) return 0.0;
  return std::norm(corr.at(tau)) / noise_scale;
}

}  // namespace

CorrelationResult cross_correlate(const VectorXcd& y, const VectorXcd& y_ref, int f_max, int gamma_max) {
  check_correlation_args(y, y_ref, f_max, gamma_max);
  CorrelationResult r = empty_result(gamma_max);
  const long ref_len = y_ref.size();
  for (int tau = -gamma_max; tau <= gamma_max; ++tau) {
    cd acc{};
    for (long n = 0; n < f_max; ++n) {
      const long m = n + tau;
      if (m >= 0 && m < ref_len) acc += y[n] * std::conj(y_ref[m]);
    }
    r.values[tau + gamma_max] = acc;
  }
  return r;
}

CorrelationResult cross_correlate_fft(const VectorXcd& y, const VectorXcd& y_ref, int f_max, int gamma_max) {
  check_correlation_args(y, y_ref, f_max, gamma_max);
  CorrelationResult r = empty_result(gamma_max);
  const std::size_t ref_len = static_cast<std::size_t>(y_ref.size());
  const std::size_t n = next_pow2(static_cast<std::size_t>(f_max) + ref_len);

  std::vector<cd> a(n, cd{}), b(n, cd{}), fa, fb, c;
  std::copy(y.data(), y.data() + f_max, a.begin());
  std::copy(y_ref.data(), y_ref.data() + ref_len, b.begin());
  Eigen::FFT<double> fft;
  fft.fwd(fa, a);
  fft.fwd(fb, b);
  for (std::size_t k = 0; k < n; ++k) fa[k] = fb[k] * std::conj(fa[k]);
  fft.inv(c, fa);
  // c[tau] = sum_n y_ref[n + tau] conj(y[n]) = conj(R(tau)).
  for (int tau = -gamma_max; tau <= gamma_max; ++tau) {
    const std::size_t idx = tau >= 0 ? std::size_t(tau) : n - std::size_t(-tau);
    r.values[tau + gamma_max] = std::conj(c[idx]);
  }
  return r;
}

int estimate_delay(const CorrelationResult& corr) {
  return estimate_delay(corr, -corr.search_bound, corr.search_bound);
}

int estimate_delay(const CorrelationResult& corr, int min_lag, int max_lag) {
  min_lag = std::max(min_lag, -corr.search_bound);
  max_lag = std::min(max_lag, corr.search_bound);
  if (min_lag > max_lag) throw DomainError("estimate_delay: empty lag range");
  int best = 0;
  double best_mag = -1.0;
  // Visit 0, +1, -1, +2, -2, ... so that a strict comparison keeps the smallest |lag| on ties.
  for (int k = 0; k <= corr.search_bound; ++k) {
    for (int lag : {k, -k}) {
      if (k == 0 && lag < 0) continue;
      if (lag < min_lag || lag > max_lag) continue;
      const double mag = std::abs(corr.at(lag));
      if (mag > best_mag) {
        best_mag = mag;
        best = lag;
      }
    }
  }
  if (!(best_mag > 0.0)) throw NoPeakError("estimate_delay: correlation profile is identically zero");
  return best;
}

DelayEstimate locate_replica(const VectorXcd& reference, const VectorXcd& residual, int gamma_max) {
  const int f = static_cast<int>(reference.size());
  const VectorXcd ref2 = reference.array().square();
  const VectorXcd res2 = residual.array().square();

  const auto first = cross_correlate_fft(reference, residual, f, gamma_max);
  const auto second = cross_correlate_fft(ref2, res2, f, gamma_max);

  // Noise-only variance of each lag: sum |ref|^2 times the mean residual power (and the squared analogue).
  const double scale1 = reference.squaredNorm() * residual.squaredNorm() / double(residual.size());
  const double scale2 = ref2.squaredNorm() * res2.squaredNorm() / double(res2.size());

  DelayEstimate best;
  try {
    best.tau = estimate_delay(first, 1, gamma_max);
    best.significance = peak_significance(first, best.tau, scale1);
  } catch (const NoPeakError&) {
  }
  try {
    const int tau2 = estimate_delay(second, 1, gamma_max);
    const double sig2 = peak_significance(second, tau2, scale2);
    if (sig2 > best.significance) best = {tau2, sig2, true};
  } catch (const NoPeakError&) {
  }
  if (!(best.significance > 0.0)) throw NoPeakError("locate_replica: no correlation peak");
  return best;
}

CycleTracker update_cycle(CycleTracker tracker, long attack_time) {
  if (!tracker.first_attack_time) {
    tracker.first_attack_time = attack_time;
  } else if (!tracker.cycle_estimate) {
    tracker.cycle_estimate = attack_time - *tracker.last_attack_time;
  }
  tracker.last_attack_time = attack_time;
  return tracker;
}

std::vector<double> estimate_aoa(const MatrixXcd& streams, int source_count, const AoaOptions& opts) {
  const Eigen::Index m = streams.rows();
  if (source_count < 1) throw DomainError("estimate_aoa: source_count must be >= 1");
  if (m <= source_count) throw CapabilityError("estimate_aoa: array must have more antennas than sources");
  if (streams.cols() < 1) throw DomainError("estimate_aoa: no snapshots");
  if (!(opts.grid_step_deg > 0.0)) throw DomainError("estimate_aoa: grid step must be positive");

  MatrixXcd R = streams * streams.adjoint() / double(streams.cols());
  Eigen::Index sub = m;
  if (opts.smoothing) {
    const MatrixXcd J = MatrixXcd::Identity(m, m).rowwise().reverse();
    R = ((R + J * R.conjugate() * J) / 2.0).eval();
    if (m - 1 > source_count) sub = m - 1;
    const Eigen::Index count = m - sub + 1;
    MatrixXcd smoothed = MatrixXcd::Zero(sub, sub);
    for (Eigen::Index k = 0; k < count; ++k) smoothed += R.block(k, k, sub, sub);
    R = smoothed / double(count);
  }

  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(R);
  if (eig.info() != Eigen::Success) throw InternalError("estimate_aoa: eigendecomposition failed");
  const MatrixXcd noise_sub = eig.eigenvectors().leftCols(sub - source_count);

  const int points = static_cast<int>(std::lround(180.0 / opts.grid_step_deg)) + 1;
  std::vector<double> grid(points), den(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = (-90.0 + i * opts.grid_step_deg) * kDeg;
    den[i] = music_denominator(noise_sub, grid[i]);
  }

  std::vector<int> minima;
  for (int i = 0; i < points; ++i) {
    const bool left = i == 0 || den[i] < den[i - 1];
    const bool right = i == points - 1 || den[i] <= den[i + 1];
    if (left && right) minima.push_back(i);
  }
  if (static_cast<int>(minima.size()) < source_count)
    throw CapabilityError("estimate_aoa: pseudo-spectrum has too few peaks");
  std::stable_sort(minima.begin(), minima.end(), [&](int a, int b) { return den[a] < den[b]; });

  std::vector<double> out;
  const double step = opts.grid_step_deg * kDeg;
  for (int k = 0; k < source_count; ++k) {
    const double c = grid[minima[k]];
    out.push_back(refine_minimum(noise_sub, std::max(c - step, -kPi<double> / 2), std::min(c + step, kPi<double> / 2)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

SpatialSeparation separate_spatial(const MatrixXcd& streams, double aoa_legit, double aoa_jam, double max_overlap) {
  const Eigen::Index m = streams.rows();
  if (m < 2) throw CapabilityError("separate_spatial: need at least two antennas");
  ReceiveArray arr{static_cast<int>(m)};
  MatrixXcd C(m, 2);
  C.col(0) = arr.steering(aoa_legit);
  C.col(1) = arr.steering(aoa_jam);
  const double overlap = std::abs(C.col(0).dot(C.col(1))) / double(m);
  if (overlap > max_overlap) throw SeparationError("separate_spatial: sources are not angularly separable");

  MatrixXcd R = streams * streams.adjoint() / double(std::max<Eigen::Index>(streams.cols(), 1));
  const double load = 1e-6 * R.trace().real() / double(m) + 1e-12;
  R += load * MatrixXcd::Identity(m, m);
  const MatrixXcd RiC = R.llt().solve(C);
  const MatrixXcd G = C.adjoint() * RiC;
  const MatrixXcd W = RiC * G.inverse();

  SpatialSeparation out;
  out.w_legit = W.col(0);
  out.w_jam = W.col(1);
  out.legit = (out.w_legit.adjoint() * streams).transpose();
  out.jam = (out.w_jam.adjoint() * streams).transpose();
  return out;
}

BurstSchedule partition_temporal(int frame_len, int tau_hat, const CycleTracker& cycle) {
  if (frame_len < 1) throw DomainError("partition_temporal: frame_len must be positive");
  if (tau_hat <= 0) throw DomainError("partition_temporal: no temporal separation without a positive delay");
  long len = std::min<long>(tau_hat, frame_len);
  if (cycle.cycle_estimate && *cycle.cycle_estimate > 0) len = std::min(len, *cycle.cycle_estimate);
  BurstSchedule s;
  s.start = 0;
  s.length = static_cast<int>(len);
  s.payload_fraction = double(len) / frame_len;
  return s;
}

SimilarityMetrics similarity_ratio(const VectorXcd& jam_est, const VectorXcd& legit_est, int f_max) {
  if (legit_est.head(std::min<Eigen::Index>(f_max, legit_est.size())).squaredNorm() == 0.0)
    throw DomainError("similarity_ratio: legitimate estimate has zero energy");
  const int gamma = f_max / 2;
  const auto self = cross_correlate_fft(legit_est, legit_est, f_max, gamma);
  const auto cross = cross_correlate_fft(jam_est, legit_est, f_max, gamma);
  SimilarityMetrics s;
  s.sc_max = self.values.cwiseAbs().maxCoeff() / f_max;
  s.cc_max = cross.values.cwiseAbs().maxCoeff() / f_max;
  s.sim = s.cc_max / s.sc_max;
  return s;
}

void ClassifierThresholds::validate() const {
  if (!(sim_threshold > 0.0 && sim_threshold < 1.0)) throw DomainError("sim_threshold must lie in (0, 1)");
  if (!(inversion_threshold > 0.0 && inversion_threshold < 1.0))
    throw DomainError("inversion_threshold must lie in (0, 1)");
}

cd estimate_gain(const VectorXcd& observed, const VectorXcd& known) {
  const Eigen::Index n = std::min(observed.size(), known.size());
  const double energy = known.head(n).squaredNorm();
  if (energy == 0.0) throw DomainError("estimate_gain: known sequence has zero energy");
  return known.head(n).dot(observed.head(n)) / energy;
}

PilotInversions count_pilot_inversions(const VectorXcd& observed, std::span<const PilotSymbol> pattern) {
  const Eigen::Index p = static_cast<Eigen::Index>(pattern.size());
  if (p == 0) throw DomainError("count_pilot_inversions: empty pilot");
  if (observed.size() < p) throw DomainError("count_pilot_inversions: observation shorter than pilot");
  const VectorXcd known = pilot_symbols(pattern);
  const cd g = estimate_gain(observed.head(p), known);
  const VectorXcd eq = std::abs(g) > 0.0 ? VectorXcd(observed.head(p) / g) : VectorXcd(observed.head(p));
  const auto sliced = slice_pilot(eq);
  PilotInversions inv;
  for (Eigen::Index i = 0; i < p; ++i) {
    inv.phase += sliced[i].phase_bit != pattern[i].phase_bit;
    inv.amplitude += sliced[i].amplitude_bit != pattern[i].amplitude_bit;
  }
  inv.phase /= double(p);
  inv.amplitude /= double(p);
  return inv;
}

JammerClass classify_jammer(const SimilarityMetrics& metrics, const PilotInversions& inversions,
                            const ClassifierThresholds& thresholds) {
  thresholds.validate();
  if (metrics.sim >= thresholds.sim_threshold) return JammerClass::DRFM;
  if (inversions.phase >= thresholds.inversion_threshold) return JammerClass::PS;
  if (inversions.amplitude >= thresholds.inversion_threshold) return JammerClass::AS;
  return JammerClass::Unknown;
}

JammerClass classify_jammer(const SimilarityMetrics& metrics, double inversion_fraction, const ModScheme& active,
                            const ClassifierThresholds& thresholds) {
  thresholds.validate();
  if (metrics.sim >= thresholds.sim_threshold) return JammerClass::DRFM;
  if (inversion_fraction < thresholds.inversion_threshold) return JammerClass::Unknown;
  if (active.phase_bearing()) return JammerClass::PS;
  if (active.amplitude_bearing()) return JammerClass::AS;
  return JammerClass::Unknown;
}

VectorXcd normalize_jam_stream(const VectorXcd& jam, const VectorXcd& pilot, double noise_var) {
  if (jam.size() == 0) throw DomainError("normalize_jam_stream: empty stream");
  const cd g = estimate_gain(jam, pilot);
  const cd rot = std::abs(g) > 0.0 ? std::conj(g) / std::abs(g) : cd(1, 0);
  const double total = jam.squaredNorm() / double(jam.size());
  const double power = std::max(total - noise_var, 0.01 * total);
  if (!(power > 0.0)) return jam;
  return jam * (rot / std::sqrt(power));
}

}  // namespace antifrag
