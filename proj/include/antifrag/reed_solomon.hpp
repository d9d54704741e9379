#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace antifrag {

/// Reed-Solomon (n, k) over GF(256), 8 bits per symbol.
struct RsCode {
  int n = 255;
  int k = 239;

  int t() const { return (n - k) / 2; }
  double rate() const { return static_cast<double>(k) / n; }
  void validate() const;

  friend bool operator==(const RsCode&, const RsCode&) = default;
};

/// Code rates 0.94 down to 0.70, sorted by rate descending.
std::vector<RsCode> default_code_table();

/// Closest code to `rate` with n = 255.
RsCode code_for_rate(double rate);

/// Systematic: data followed by n - k parity symbols.
std::vector<std::uint8_t> rs_encode(std::span<const std::uint8_t> data, const RsCode& code);

struct RsDecodeResult {
  std::vector<std::uint8_t> data;
  bool failure = false;
  int corrected = 0;
};

/// Berlekamp-Massey / Chien / Forney; on failure the systematic part is returned unchanged.
RsDecodeResult rs_decode(std::span<const std::uint8_t> block, const RsCode& code);

}  // namespace antifrag
