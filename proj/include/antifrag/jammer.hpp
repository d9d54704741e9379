#pragma once

// Reactive jammer transforms (DRFM replay, phase shifting, amplitude shifting) and
// received-signal composition for the source-aware and RIS-aware jamming paths.

#include <optional>
#include <string_view>

#include "antifrag/channel.hpp"

namespace antifrag {

enum class JammerModel { DRFM, PS, AS };

std::string_view to_string(JammerModel model);
JammerModel parse_jammer_model(std::string_view name);

/// Receiver-side verdict; Unknown when neither similarity nor pilot inversions are conclusive.
enum class JammerClass { DRFM, PS, AS, Unknown };

std::string_view to_string(JammerClass cls);
bool matches(JammerClass cls, JammerModel model);

enum class PathTopology { SourceAware, RisAware };

std::string_view to_string(PathTopology topology);
PathTopology parse_topology(std::string_view name);

struct JammerSpec {
  JammerModel model = JammerModel::DRFM;
  double amp_gain = 1.0;    ///< beta_a, DRFM only
  int delay_samples = 0;
  double power_dbm = 20.0;  ///< transmit power budget, bookkeeping only
  /// Linear amplitude applied on top of the model factor; the harness uses it to set the
  /// received jamming power, 0 silences the jammer.
  double scale = 1.0;
  /// Active for the first half of every period when set.
  std::optional<int> cycle_period;
  int samples_per_symbol = 1;

  void validate() const {
    if (model == JammerModel::DRFM && !(amp_gain > 0.0)) throw DomainError("DRFM amp_gain must be positive");
    if (delay_samples < 0) throw DomainError("delay_samples must be non-negative");
    if (cycle_period && *cycle_period < 2) throw DomainError("cycle_period must be >= 2");
    if (samples_per_symbol < 1) throw DomainError("samples_per_symbol must be >= 1");
  }

  /// E[A^2] of the model factor: beta^2, 1 (|U| = 1) or 4/3 (V ~ U[0, 2]).
  double mean_power_factor() const {
    switch (model) {
      case JammerModel::DRFM: return amp_gain * amp_gain;
      case JammerModel::PS: return 1.0;
      case JammerModel::AS: return 4.0 / 3.0;
    }
    return 1.0;
  }
};

/// Half-wavelength uniform linear array.
struct ReceiveArray {
  int antenna_count = 8;

  template <typename Scalar>
  ComplexVector<Scalar> steering(Scalar aoa) const {
    if (antenna_count < 1) throw DomainError("antenna_count must be >= 1");
    ComplexVector<Scalar> s(antenna_count);
    for (int i = 0; i < antenna_count; ++i) s[i] = std::polar(Scalar(1), -kPi<Scalar> * Scalar(i) * std::sin(aoa));
    return s;
  }
};

/// Per-sample jammer factor A(t): constant beta for DRFM, U in {+1,-1} for PS, V ~ U[0,2] for AS.
/// Random factors are held constant over each symbol; cyclic operation zeroes the off half.
template <typename Scalar>
RealVector<Scalar> draw_jammer_factors(const JammerSpec& spec, Eigen::Index length, Rng& rng) {
  spec.validate();
  RealVector<Scalar> a(length);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<Scalar> amp(Scalar(0), Scalar(2));
  Scalar current = Scalar(spec.amp_gain);
  for (Eigen::Index n = 0; n < length; ++n) {
    if (n % spec.samples_per_symbol == 0) {
      switch (spec.model) {
        case JammerModel::DRFM: current = Scalar(spec.amp_gain); break;
        case JammerModel::PS: current = coin(rng) ? Scalar(1) : Scalar(-1); break;
        case JammerModel::AS: current = amp(rng); break;
      }
    }
    a[n] = current;
  }
  if (spec.cycle_period) {
    const int period = *spec.cycle_period;
    for (Eigen::Index n = 0; n < length; ++n)
      if ((n + spec.delay_samples) % period >= period / 2) a[n] = Scalar(0);
  }
  return a;
}

/// Applies explicit factors: out[n + delay] = scale * factors[n] * x[n], zero-padded head.
template <typename Scalar>
ComplexVector<Scalar> jammer_transform(const JammerSpec& spec, const ComplexVector<Scalar>& x,
                                       const RealVector<Scalar>& factors) {
  spec.validate();
  if (x.size() == 0) throw DomainError("jammer_transform: empty input");
  if (factors.size() != x.size()) throw DomainError("jammer_transform: factor length mismatch");
  ComplexVector<Scalar> out = ComplexVector<Scalar>::Zero(x.size() + spec.delay_samples);
  out.tail(x.size()) = (Scalar(spec.scale) * factors.array()).template cast<Complex<Scalar>>() * x.array();
  return out;
}

template <typename Scalar>
ComplexVector<Scalar> jammer_transform(const JammerSpec& spec, const ComplexVector<Scalar>& x, Rng& rng) {
  return jammer_transform(spec, x, draw_jammer_factors<Scalar>(spec, x.size(), rng));
}

template <typename Scalar>
void add_noise(ComplexVector<Scalar>& y, Scalar noise_var, Rng& rng) {
  if (noise_var <= Scalar(0)) return;
  for (Eigen::Index n = 0; n < y.size(); ++n) y[n] += complex_gaussian<Scalar>(rng, noise_var);
}

/// y[n] = legit * x[n] + A h_e1 h_j1 x[n - tau] + w[n]; length x.size() + tau.
template <typename Scalar>
ComplexVector<Scalar> received_source_aware(Complex<Scalar> legit_coeff, Complex<Scalar> h_e1, Complex<Scalar> h_j1,
                                            const JammerSpec& spec, const ComplexVector<Scalar>& x,
                                            Scalar noise_var, Rng& rng) {
  ComplexVector<Scalar> y = h_e1 * h_j1 * jammer_transform(spec, x, rng);
  y.head(x.size()) += legit_coeff * x;
  add_noise(y, noise_var, rng);
  return y;
}

/// Legitimate cascade plus the jammer re-radiating what it hears through the RIS.
template <typename Scalar>
ComplexVector<Scalar> received_ris_aware(const ChannelRealization<Scalar>& realization,
                                         const CorrelationMatrix<Scalar>& R, const PhaseMatrix<Scalar>& phi,
                                         Complex<Scalar> h_j2, const JammerSpec& spec,
                                         const ComplexVector<Scalar>& x, Scalar noise_var, Rng& rng) {
  const Complex<Scalar> legit = cascaded_coefficient(realization.h_sr, realization.h_rd, R, phi);
  const Complex<Scalar> eaves = cascaded_coefficient(realization.h_sr, realization.h_rj, R, phi);
  ComplexVector<Scalar> y = eaves * h_j2 * jammer_transform(spec, x, rng);
  y.head(x.size()) += legit * x;
  add_noise(y, noise_var, rng);
  return y;
}

/// Rows are antennas: Y(i, n) = s_i(aoa) * y[n] + w_i[n].
template <typename Scalar>
ComplexMatrix<Scalar> array_receive(const ComplexVector<Scalar>& y, const ReceiveArray& array, Scalar aoa,
                                    Scalar noise_var, Rng& rng) {
  const ComplexVector<Scalar> s = array.steering(aoa);
  ComplexMatrix<Scalar> Y = s * y.transpose();
  if (noise_var > Scalar(0))
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
      for (Eigen::Index n = 0; n < Y.cols(); ++n) Y(i, n) += complex_gaussian<Scalar>(rng, noise_var);
  return Y;
}

}  // namespace antifrag
