#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace antifrag {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using ComplexVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using cd = Complex<double>;
using VectorXcd = ComplexVector<double>;
using MatrixXcd = ComplexMatrix<double>;

/// Every stochastic operation takes one of these explicitly; there is no global generator.
using Rng = std::mt19937_64;

template <typename Scalar>
inline constexpr Scalar kPi = Scalar(3.141592653589793238462643383279502884L);

// Error taxonomy. Everything derives from std::runtime_error or std::logic_error
// so callers that only care about "something went wrong" can catch the base.

/// A precondition on an argument value was violated (non-positive distance, length mismatch, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical post-condition could not be established.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Correlation profile carries no peak (all-zero input).
class NoPeakError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sources too close in angle for the array to separate; callers fall back to temporal mode.
class SeparationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The receive array cannot resolve the requested number of sources.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer; used to derive independent per-trial seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t master, Rest... parts) {
  std::uint64_t h = mix_seed(master);
  ((h = mix_seed(h ^ static_cast<std::uint64_t>(parts))), ...);
  return h;
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
template <typename Scalar>
Complex<Scalar> complex_gaussian(Rng& rng, Scalar variance = Scalar(1)) {
  std::normal_distribution<Scalar> n(Scalar(0), std::sqrt(variance / Scalar(2)));
  const Scalar re = n(rng);
  const Scalar im = n(rng);
  return {re, im};
}

}  // namespace antifrag
