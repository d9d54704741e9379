#pragma once

// RIS cascaded channel: correlated element fading, Rician jammer links,
// path loss and phase configuration.

#include <cmath>
#include <limits>
#include <string>

#include "antifrag/types.hpp"

namespace antifrag {

/// Geometry and propagation parameters of one RIS-assisted hop.
struct RisLinkConfig {
  int element_count = 64;
  double d_sr = 18.0;          ///< source to RIS [m]
  double d_rd = 7.0;           ///< RIS to destination [m]
  double path_loss_exp = 2.7;
  double corr_rate = 0.05;     ///< decay rate of the exponential element correlation
  double carrier_hz = 28e9;
  double d_rj = 7.0;           ///< RIS to the RIS-aware jammer [m]
  /// Fraction of the RIS->jammer fading shared with RIS->destination, in [0, 1].
  /// 0 makes the two links independent; 1 places the jammer inside the destination beam.
  double rj_alignment = 0.0;

  void validate() const {
    if (element_count < 1) throw DomainError("element_count must be >= 1");
    if (!(d_sr > 0.0) || !(d_rd > 0.0) || !(d_rj > 0.0)) throw DomainError("distances must be positive");
    if (!(path_loss_exp > 0.0)) throw DomainError("path_loss_exp must be positive");
    if (!(corr_rate >= 0.0)) throw DomainError("corr_rate must be non-negative");
    if (!(rj_alignment >= 0.0 && rj_alignment <= 1.0)) throw DomainError("rj_alignment must lie in [0, 1]");
  }
};

template <typename Scalar>
struct CorrelationMatrix {
  RealMatrix<Scalar> entries;    ///< rho_{i,j}
  RealMatrix<Scalar> sqrt_form;  ///< symmetric square root, sqrt_form * sqrt_form == entries

  Eigen::Index size() const { return entries.rows(); }

  static CorrelationMatrix identity(Eigen::Index m) {
    return {RealMatrix<Scalar>::Identity(m, m), RealMatrix<Scalar>::Identity(m, m)};
  }
};

template <typename Scalar>
struct PhaseMatrix {
  RealVector<Scalar> phases;  ///< radians, each in [0, 2*pi)

  ComplexVector<Scalar> reflection() const {
    ComplexVector<Scalar> r(phases.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) r[i] = std::polar(Scalar(1), phases[i]);
    return r;
  }
};

/// Rician link: sqrt(k/(k+1)) * sigma * e^{j theta} + sqrt(1/(k+1)) * sum of L Rayleigh paths.
struct RicianParams {
  double rician_k = 2.0;
  double avg_amp = 1.0;
  int path_count = 1;

  void validate() const {
    if (!(rician_k >= 0.0)) throw DomainError("rician_k must be non-negative");
    if (!(avg_amp > 0.0)) throw DomainError("avg_amp must be positive");
    if (path_count < 1) throw DomainError("path_count must be >= 1");
  }
};

/// One Monte Carlo draw of every link in the two-hop topology.
template <typename Scalar>
struct ChannelRealization {
  ComplexVector<Scalar> h_sr;
  ComplexVector<Scalar> h_rd;
  ComplexVector<Scalar> h_rj;
  Complex<Scalar> h_e1;
  Complex<Scalar> h_j1;
  Complex<Scalar> h_j2;
};

/// Linear power attenuation d^{-delta}.
template <typename Scalar>
Scalar path_loss(Scalar d, Scalar delta) {
  if (!(d > Scalar(0))) throw DomainError("path_loss: distance must be positive");
  if (!(delta > Scalar(0))) throw DomainError("path_loss: exponent must be positive");
  return std::pow(d, -delta);
}

template <typename Scalar>
Scalar wrap_phase(Scalar phase) {
  const Scalar two_pi = Scalar(2) * kPi<Scalar>;
  Scalar w = std::fmod(phase, two_pi);
  if (w < Scalar(0)) w += two_pi;
  if (w >= two_pi) w = Scalar(0);
  return w;
}

/// Exponential element correlation rho_{i,j} = exp(-rate * |i - j|) and its PSD square root.
template <typename Scalar>
CorrelationMatrix<Scalar> build_correlation(const RisLinkConfig& cfg) {
  cfg.validate();
  const Eigen::Index m = cfg.element_count;
  RealMatrix<Scalar> rho(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      rho(i, j) = std::exp(-Scalar(cfg.corr_rate) * Scalar(std::abs(i - j)));

  if (cfg.corr_rate == 0.0 || m == 1) {
    // Rank-one all-ones matrix: J^{1/2} = J / sqrt(m).
    if (cfg.corr_rate == 0.0) return {rho, rho / std::sqrt(Scalar(m))};
    return {rho, rho};
  }

  const RealMatrix<Scalar> sym = (rho + rho.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<RealMatrix<Scalar>> eig(sym);
  if (eig.info() != Eigen::Success) throw InternalError("build_correlation: eigendecomposition failed");
  const RealVector<Scalar> root = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  RealMatrix<Scalar> sqrt_form = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
  sqrt_form = ((sqrt_form + sqrt_form.transpose()) / Scalar(2)).eval();

  const Scalar err = (sqrt_form * sqrt_form - rho).cwiseAbs().maxCoeff();
  const Scalar tol = std::is_same_v<Scalar, float> ? Scalar(1e-4) : Scalar(1e-9);
  if (!(err <= tol)) throw InternalError("build_correlation: correlation matrix is not PSD");
  return {rho, sqrt_form};
}

template <typename Scalar>
Complex<Scalar> sample_rician(const RicianParams& p, Rng& rng) {
  std::uniform_real_distribution<Scalar> phase(Scalar(0), Scalar(2) * kPi<Scalar>);
  const Scalar k = Scalar(p.rician_k);
  const Scalar los_phase = phase(rng);
  Complex<Scalar> diffuse{};
  for (int i = 0; i < p.path_count; ++i) diffuse += complex_gaussian<Scalar>(rng);  // R e^{j theta}, E[R^2] = 1
  if (std::isinf(k)) return std::polar(Scalar(p.avg_amp), los_phase);
  const Scalar los_w = std::sqrt(k / (k + Scalar(1)));
  const Scalar nlos_w = std::sqrt(Scalar(1) / (k + Scalar(1)));
  return los_w * std::polar(Scalar(p.avg_amp), los_phase) + nlos_w * diffuse;
}

/// Rayleigh element fading with unit mean power scaled by sqrt(d^{-delta}).
template <typename Scalar>
ComplexVector<Scalar> sample_rayleigh_vector(Eigen::Index m, Scalar amplitude, Rng& rng) {
  ComplexVector<Scalar> h(m);
  for (Eigen::Index i = 0; i < m; ++i) h[i] = amplitude * complex_gaussian<Scalar>(rng);
  return h;
}

template <typename Scalar>
ChannelRealization<Scalar> sample_realization(const RisLinkConfig& cfg, const RicianParams& jp, Rng& rng) {
  cfg.validate();
  jp.validate();
  const Eigen::Index m = cfg.element_count;
  const Scalar delta = Scalar(cfg.path_loss_exp);
  const Scalar a_sr = std::sqrt(path_loss(Scalar(cfg.d_sr), delta));
  const Scalar a_rd = std::sqrt(path_loss(Scalar(cfg.d_rd), delta));
  const Scalar a_rj = std::sqrt(path_loss(Scalar(cfg.d_rj), delta));

  ChannelRealization<Scalar> r;
  const ComplexVector<Scalar> g_sr = sample_rayleigh_vector<Scalar>(m, Scalar(1), rng);
  const ComplexVector<Scalar> g_rd = sample_rayleigh_vector<Scalar>(m, Scalar(1), rng);
  const ComplexVector<Scalar> g_rj = sample_rayleigh_vector<Scalar>(m, Scalar(1), rng);
  const Scalar xi = Scalar(cfg.rj_alignment);
  r.h_sr = a_sr * g_sr;
  r.h_rd = a_rd * g_rd;
  r.h_rj = a_rj * (xi * g_rd + std::sqrt(Scalar(1) - xi * xi) * g_rj);
  r.h_e1 = sample_rician<Scalar>(jp, rng);
  r.h_j1 = sample_rician<Scalar>(jp, rng);
  r.h_j2 = sample_rician<Scalar>(jp, rng);
  return r;
}

/// h_in^T R^{1/2} diag(e^{j phi}) R^{1/2} h_out, the closed form of the per-element triple sum.
template <typename Scalar>
Complex<Scalar> cascaded_coefficient(const ComplexVector<Scalar>& h_in, const ComplexVector<Scalar>& h_out,
                                     const CorrelationMatrix<Scalar>& R, const PhaseMatrix<Scalar>& phi) {
  const Eigen::Index m = R.size();
  if (h_in.size() != m || h_out.size() != m || phi.phases.size() != m)
    throw DomainError("cascaded_coefficient: all inputs must have length M");
  const ComplexVector<Scalar> a = R.sqrt_form.template cast<Complex<Scalar>>() * h_in;
  const ComplexVector<Scalar> b = R.sqrt_form.template cast<Complex<Scalar>>() * h_out;
  return (a.array() * b.array() * phi.reflection().array()).sum();
}

/// Per-element co-phasing of the correlated effective channels; globally optimal for |coefficient|.
template <typename Scalar>
PhaseMatrix<Scalar> optimize_phases(const ComplexVector<Scalar>& h_sr, const ComplexVector<Scalar>& h_rd,
                                    const CorrelationMatrix<Scalar>& R) {
  const Eigen::Index m = R.size();
  if (h_sr.size() != m || h_rd.size() != m) throw DomainError("optimize_phases: length mismatch");
  const ComplexVector<Scalar> a = R.sqrt_form.template cast<Complex<Scalar>>() * h_sr;
  const ComplexVector<Scalar> b = R.sqrt_form.template cast<Complex<Scalar>>() * h_rd;
  PhaseMatrix<Scalar> phi{RealVector<Scalar>(m)};
  for (Eigen::Index i = 0; i < m; ++i) phi.phases[i] = wrap_phase(-std::arg(a[i] * b[i]));
  return phi;
}

}  // namespace antifrag
