#include "antifrag/waveform.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace antifrag {
namespace {

int gray_to_binary(int g) {
  int b = 0;
  for (; g; g >>= 1) b ^= g;
  return b;
}

int log2_exact(int order) { return std::countr_zero(static_cast<unsigned>(order)); }

/// Split of a QAM label into in-phase and quadrature bit counts.
std::pair<int, int> qam_bits(int bits) { return {(bits + 1) / 2, bits / 2}; }

double pam_level(int index, int levels) { return 2.0 * index - (levels - 1); }

constexpr double kPilotNorm = 1.5811388300841898;  // sqrt(2.5)
constexpr double kReliableOdds = 100.0;  // best vs runner-up posterior

}  // namespace

std::string_view to_string(ModFamily family) {
  switch (family) {
    case ModFamily::PSK: return "PSK";
    case ModFamily::ASK: return "ASK";
    case ModFamily::QAM: return "QAM";
  }
  return "?";
}

ModFamily parse_mod_family(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "PSK") return ModFamily::PSK;
  if (upper == "ASK") return ModFamily::ASK;
  if (upper == "QAM") return ModFamily::QAM;
  throw DomainError(fmt::format("unknown modulation family '{}'", name));
}

int ModScheme::bits_per_symbol() const { return log2_exact(order); }

std::string ModScheme::name() const { return fmt::format("{}{}", order, to_string(family)); }

void ModScheme::validate() const {
  if (std::find(std::begin(kSupportedOrders), std::end(kSupportedOrders), order) == std::end(kSupportedOrders))
    throw DomainError(fmt::format("unsupported modulation order {}", order));
}

std::vector<cd> constellation(const ModScheme& scheme) {
  scheme.validate();
  const int m = scheme.order;
  const int bits = scheme.bits_per_symbol();
  std::vector<cd> points(m);
  switch (scheme.family) {
    case ModFamily::PSK:
      for (int label = 0; label < m; ++label)
        points[label] = std::polar(1.0, 2.0 * kPi<double> * gray_to_binary(label) / m);
      break;
    case ModFamily::ASK: {
      // Levels 1..M, all on the positive real axis.
      const double norm = std::sqrt((m + 1.0) * (2.0 * m + 1.0) / 6.0);
      for (int label = 0; label < m; ++label) points[label] = cd((gray_to_binary(label) + 1) / norm, 0.0);
      break;
    }
    case ModFamily::QAM: {
      const auto [bi, bq] = qam_bits(bits);
      const int li = 1 << bi;
      const int lq = 1 << bq;
      const double norm = std::sqrt(((li * li - 1) + (lq * lq - 1)) / 3.0);
      for (int label = 0; label < m; ++label) {
        const int gi = label >> bq;
        const int gq = label & (lq - 1);
        points[label] = cd(pam_level(gray_to_binary(gi), li), lq > 1 ? pam_level(gray_to_binary(gq), lq) : 0.0) / norm;
      }
      break;
    }
  }
  return points;
}

VectorXcd modulate(std::span<const std::uint8_t> bits, const ModScheme& scheme) {
  const auto points = constellation(scheme);
  const int k = scheme.bits_per_symbol();
  if (bits.size() % k != 0) throw DomainError("modulate: bit count not divisible by log2(order)");
  VectorXcd out(static_cast<Eigen::Index>(bits.size() / k));
  for (Eigen::Index s = 0; s < out.size(); ++s) {
    int label = 0;
    for (int b = 0; b < k; ++b) label = (label << 1) | (bits[s * k + b] & 1);
    out[s] = points[label];
  }
  return out;
}

Bits demodulate(const VectorXcd& symbols, const ModScheme& scheme) {
  const auto points = constellation(scheme);
  const int k = scheme.bits_per_symbol();
  Bits bits(static_cast<std::size_t>(symbols.size()) * k);
  for (Eigen::Index s = 0; s < symbols.size(); ++s) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int label = 0; label < scheme.order; ++label) {
      const double d = std::norm(symbols[s] - points[label]);
      if (d < best_d) {
        best_d = d;
        best = label;
      }
    }
    for (int b = 0; b < k; ++b) bits[s * k + b] = static_cast<std::uint8_t>((best >> (k - 1 - b)) & 1);
  }
  return bits;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double ber_awgn(const ModScheme& scheme, double snr) {
  scheme.validate();
  snr = std::max(snr, 0.0);
  const int m = scheme.order;
  const double k = scheme.bits_per_symbol();
  double ber = 0.5;
  switch (scheme.family) {
    case ModFamily::PSK:
      if (m == 2) ber = q_function(std::sqrt(2.0 * snr));
      else if (m == 4) ber = q_function(std::sqrt(snr));
      else ber = 2.0 / k * q_function(std::sqrt(2.0 * snr) * std::sin(kPi<double> / m));
      break;
    case ModFamily::ASK:
      ber = 2.0 * (1.0 - 1.0 / m) * q_function(std::sqrt(3.0 * snr / ((m + 1.0) * (2.0 * m + 1.0)))) / k;
      break;
    case ModFamily::QAM: {
      const auto [bi, bq] = qam_bits(static_cast<int>(k));
      const int li = 1 << bi;
      const int lq = 1 << bq;
      const double half_spacing = std::sqrt(3.0 / ((li * li - 1) + (lq * lq - 1)));
      const double arg = std::sqrt(2.0 * snr) * half_spacing;
      const double pi = 2.0 * (1.0 - 1.0 / li) * q_function(arg);
      const double pq = lq > 1 ? 2.0 * (1.0 - 1.0 / lq) * q_function(arg) : 0.0;
      ber = (pi + pq) / k;
      break;
    }
  }
  return std::clamp(ber, 0.0, 0.5);
}

double measure_ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
  if (tx.size() != rx.size()) throw DomainError("measure_ber: length mismatch");
  if (tx.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < tx.size(); ++i) errors += (tx[i] & 1) != (rx[i] & 1);
  return static_cast<double>(errors) / static_cast<double>(tx.size());
}

double ser_from_ber(double ber, int order) {
  if (!(ber >= 0.0 && ber <= 1.0)) throw DomainError("ser_from_ber: ber must lie in [0, 1]");
  if (order < 2) throw DomainError("ser_from_ber: order must be >= 2");
  return 1.0 - std::pow(1.0 - ber, std::log2(static_cast<double>(order)));
}

Bits bytes_to_bits(std::span<const std::uint8_t> bytes) {
  Bits bits;
  bits.reserve(bytes.size() * 8);
  for (std::uint8_t byte : bytes)
    for (int b = 7; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((byte >> b) & 1));
  return bits;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i] & 1) bytes[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
  return bytes;
}

std::vector<PilotSymbol> pilot_pattern(int length) {
  // Fixed sequence shared by both ends of the link.
  Rng rng(0x5eed9170u);
  std::bernoulli_distribution coin(0.5);
  std::vector<PilotSymbol> out(length);
  for (auto& p : out) {
    p.phase_bit = coin(rng);
    p.amplitude_bit = coin(rng);
  }
  return out;
}

VectorXcd pilot_symbols(std::span<const PilotSymbol> pattern) {
  VectorXcd out(static_cast<Eigen::Index>(pattern.size()));
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const double level = pattern[i].amplitude_bit ? 2.0 : 1.0;
    out[static_cast<Eigen::Index>(i)] = cd((pattern[i].phase_bit ? -level : level) / kPilotNorm, 0.0);
  }
  return out;
}

std::vector<PilotSymbol> slice_pilot(const VectorXcd& observed) {
  std::vector<PilotSymbol> out(static_cast<std::size_t>(observed.size()));
  const double threshold = 1.5 / kPilotNorm;
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    const double re = observed[i].real();
    out[i].phase_bit = re < 0.0;
    out[i].amplitude_bit = std::abs(re) > threshold;
  }
  return out;
}

Frame build_frame(const ModScheme& scheme, const RsCode& code, int frame_len, int pilot_len, Rng& rng) {
  scheme.validate();
  code.validate();
  if (pilot_len < 0 || frame_len <= pilot_len) throw DomainError("build_frame: frame must be longer than the pilot");
  const int k = scheme.bits_per_symbol();
  const long payload_bits = static_cast<long>(frame_len - pilot_len) * k;
  const int blocks = static_cast<int>(payload_bits / (8L * code.n));

  Frame f;
  f.scheme = scheme;
  f.code = code;
  f.frame_len = frame_len;
  f.pilot_len = pilot_len;
  f.block_count = blocks;

  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> coded;
  coded.reserve(static_cast<std::size_t>(blocks) * code.n);
  for (int b = 0; b < blocks; ++b) {
    std::vector<std::uint8_t> data(code.k);
    for (auto& d : data) d = static_cast<std::uint8_t>(byte(rng));
    const auto cw = rs_encode(data, code);
    coded.insert(coded.end(), cw.begin(), cw.end());
    f.data_blocks.push_back(std::move(data));
  }
  Bits bits = bytes_to_bits(coded);
  std::bernoulli_distribution coin(0.5);
  while (static_cast<long>(bits.size()) < payload_bits) bits.push_back(coin(rng));

  f.symbols.resize(frame_len);
  f.symbols.head(pilot_len) = pilot_symbols(pilot_pattern(pilot_len));
  f.symbols.tail(frame_len - pilot_len) = modulate(bits, scheme);
  return f;
}

FrameDecode decode_frame(const VectorXcd& observed, const Frame& frame, double noise_var) {
  if (observed.size() < frame.frame_len) throw DomainError("decode_frame: observation shorter than frame");
  const int payload_syms = frame.frame_len - frame.pilot_len;
  const VectorXcd payload = observed.segment(frame.pilot_len, payload_syms);
  Bits rx_bits = demodulate(payload, frame.scheme);
  const Bits tx_bits = demodulate(frame.symbols.segment(frame.pilot_len, payload_syms), frame.scheme);

  FrameDecode out;
  out.ber = measure_ber(tx_bits, rx_bits);

  const std::size_t coded_bits = static_cast<std::size_t>(frame.block_count) * frame.code.n * 8;
  const auto rx_bytes = bits_to_bytes(std::span(rx_bits).first(coded_bits));
  Bits ref_bits = rx_bits;
  const int k = frame.scheme.bits_per_symbol();
  const long block_bits = frame.code.n * 8L;
  out.verified = Eigen::VectorXd::Zero(frame.frame_len);
  out.verified.head(frame.pilot_len).setOnes();
  for (int b = 0; b < frame.block_count; ++b) {
    const auto block = std::span(rx_bytes).subspan(static_cast<std::size_t>(b) * frame.code.n, frame.code.n);
    const auto dec = rs_decode(block, frame.code);
    if (dec.failure) {
      ++out.failed_blocks;
      continue;
    }
    // symbols lying wholly inside the block
    const long first = (b * block_bits + k - 1) / k;
    const long last = ((b + 1) * block_bits) / k;
    out.verified.segment(frame.pilot_len + first, last - first).setOnes();
    const auto re = bytes_to_bits(rs_encode(dec.data, frame.code));
    std::copy(re.begin(), re.end(), ref_bits.begin() + static_cast<std::ptrdiff_t>(b) * frame.code.n * 8);
  }
  out.failure = out.failed_blocks > 0;

  // Outside decoded blocks, trust decisions whose runner-up point is far less likely.
  if (noise_var > 0.0) {
    const auto points = constellation(frame.scheme);
    const double margin = noise_var * std::log(kReliableOdds);
    for (int s = 0; s < payload_syms; ++s) {
      if (out.verified[frame.pilot_len + s] != 0.0) continue;
      double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
      for (const auto& p : points) {
        const double d = std::norm(payload[s] - p);
        if (d < d1) {
          d2 = d1;
          d1 = d;
        } else if (d < d2) {
          d2 = d;
        }
      }
      if (d2 - d1 >= margin) out.verified[frame.pilot_len + s] = 1.0;
    }
  }

  out.reference.resize(frame.frame_len);
  out.reference.head(frame.pilot_len) = frame.symbols.head(frame.pilot_len);
  out.reference.tail(payload_syms) = modulate(ref_bits, frame.scheme);
  return out;
}

}  // namespace antifrag
