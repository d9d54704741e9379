#pragma once

// Bit/symbol pipeline: Gray-mapped PSK/ASK/QAM, analytic AWGN error curves,
// BER/SER bookkeeping and the framed, pilot-prefixed transmit block.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "antifrag/reed_solomon.hpp"
#include "antifrag/types.hpp"

namespace antifrag {

using Bits = std::vector<std::uint8_t>;  ///< one bit per element, values 0/1

enum class ModFamily { PSK, ASK, QAM };

std::string_view to_string(ModFamily family);
ModFamily parse_mod_family(std::string_view name);

struct ModScheme {
  ModFamily family = ModFamily::PSK;
  int order = 2;

  int bits_per_symbol() const;
  bool phase_bearing() const { return family == ModFamily::PSK; }
  bool amplitude_bearing() const { return family == ModFamily::ASK; }
  std::string name() const;  ///< e.g. "16PSK"
  void validate() const;

  friend bool operator==(const ModScheme&, const ModScheme&) = default;
};

inline constexpr int kSupportedOrders[] = {2, 4, 8, 16, 32, 64};

/// Unit-average-energy constellation indexed by the Gray-coded bit label.
std::vector<cd> constellation(const ModScheme& scheme);

VectorXcd modulate(std::span<const std::uint8_t> bits, const ModScheme& scheme);
Bits demodulate(const VectorXcd& symbols, const ModScheme& scheme);

/// Q(x) = P[N(0,1) > x].
double q_function(double x);

/// Analytic AWGN bit error rate at linear Es/N0 (Gray mapping, nearest-neighbour approximation).
double ber_awgn(const ModScheme& scheme, double snr);

double measure_ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

/// SER = 1 - (1 - BER)^{log2 M}.
double ser_from_ber(double ber, int order);

Bits bytes_to_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);

// Pilot: real bipolar four-level symbols {-2,-1,+1,+2}/sqrt(2.5). The sign carries a
// phase-bearing bit, the magnitude an amplitude-bearing bit, so phase flips and
// envelope perturbations show up in different bit planes.

struct PilotSymbol {
  std::uint8_t phase_bit;      ///< 1 when negative
  std::uint8_t amplitude_bit;  ///< 1 when |level| == 2
};

std::vector<PilotSymbol> pilot_pattern(int length);
VectorXcd pilot_symbols(std::span<const PilotSymbol> pattern);
/// Slices unit-gain pilot observations back into bits.
std::vector<PilotSymbol> slice_pilot(const VectorXcd& observed);

struct Frame {
  ModScheme scheme;
  RsCode code;
  int frame_len = 0;
  int pilot_len = 0;
  int block_count = 0;
  std::vector<std::vector<std::uint8_t>> data_blocks;  ///< k bytes each
  VectorXcd symbols;                                   ///< pilot + coded payload + filler, length frame_len
};

/// Fills a frame with as many RS blocks as fit after the pilot, then random filler symbols.
Frame build_frame(const ModScheme& scheme, const RsCode& code, int frame_len, int pilot_len, Rng& rng);

struct FrameDecode {
  bool failure = false;   ///< any block failed to decode
  int failed_blocks = 0;
  double ber = 0.0;       ///< raw channel BER over the coded payload
  VectorXcd reference;    ///< pilot + re-encoded decisions, the receiver's replica of the frame
  Eigen::VectorXd verified;  ///< 1 where the reference can be trusted, else 0
};

/// Demodulates and decodes unit-gain observations of frame.symbols. The pilot and decoded
/// blocks are trusted; with a known noise variance so are decisions at least 100x more
/// likely than their runner-up.
FrameDecode decode_frame(const VectorXcd& observed, const Frame& frame, double noise_var = 0.0);

}  // namespace antifrag
