#include "antifrag/reed_solomon.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "antifrag/types.hpp"

namespace antifrag {
namespace {

// GF(2^8) with primitive polynomial x^8 + x^4 + x^3 + x^2 + 1, alpha = 2.
struct Gf256 {
  std::array<std::uint8_t, 512> exp{};
  std::array<int, 256> log{};

  constexpr Gf256() {
    int x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = i;
      x <<= 1;
      if (x & 0x100) x ^= 0x11d;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    log[0] = -1;
  }

  constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) const {
    if (a == 0 || b == 0) return 0;
    return exp[log[a] + log[b]];
  }
  constexpr std::uint8_t div(std::uint8_t a, std::uint8_t b) const {
    if (a == 0) return 0;
    return exp[(log[a] - log[b] + 255) % 255];
  }
  constexpr std::uint8_t pow_alpha(int e) const { return exp[((e % 255) + 255) % 255]; }
};

constexpr Gf256 gf{};
constexpr int kFirstRoot = 1;

/// Generator polynomial, highest degree first, monic.
std::vector<std::uint8_t> generator(int nroots) {
  std::vector<std::uint8_t> g{1};
  for (int i = 0; i < nroots; ++i) {
    const std::uint8_t root = gf.pow_alpha(i + kFirstRoot);
    std::vector<std::uint8_t> next(g.size() + 1, 0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      next[j] ^= g[j];
      next[j + 1] ^= gf.mul(g[j], root);
    }
    g = std::move(next);
  }
  return g;
}

std::vector<std::uint8_t> syndromes(std::span<const std::uint8_t> block, int nroots) {
  std::vector<std::uint8_t> s(nroots, 0);
  for (int j = 0; j < nroots; ++j) {
    const std::uint8_t a = gf.pow_alpha(j + kFirstRoot);
    std::uint8_t acc = 0;
    for (std::uint8_t c : block) acc = gf.mul(acc, a) ^ c;
    s[j] = acc;
  }
  return s;
}

/// Evaluates a lowest-degree-first polynomial.
std::uint8_t eval_low_first(const std::vector<std::uint8_t>& p, std::uint8_t x) {
  std::uint8_t acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = gf.mul(acc, x) ^ *it;
  return acc;
}

}  // namespace

void RsCode::validate() const {
  if (!(k > 0 && k < n && n <= 255)) throw DomainError("RsCode requires 0 < k < n <= 255");
}

std::vector<RsCode> default_code_table() {
  return {{255, 240}, {255, 224}, {255, 208}, {255, 192}, {255, 178}};
}

RsCode code_for_rate(double rate) {
  if (!(rate > 0.0 && rate < 1.0)) throw DomainError("code rate must lie in (0, 1)");
  const int k = static_cast<int>(std::lround(rate * 255.0));
  RsCode code{255, std::clamp(k, 1, 254)};
  return code;
}

std::vector<std::uint8_t> rs_encode(std::span<const std::uint8_t> data, const RsCode& code) {
  code.validate();
  if (static_cast<int>(data.size()) != code.k) throw DomainError("rs_encode: data length must equal k");
  const int nroots = code.n - code.k;
  const auto g = generator(nroots);

  std::vector<std::uint8_t> parity(nroots, 0);
  for (std::uint8_t d : data) {
    const std::uint8_t feedback = d ^ parity[0];
    for (int j = 0; j + 1 < nroots; ++j) parity[j] = parity[j + 1] ^ gf.mul(feedback, g[j + 1]);
    parity[nroots - 1] = gf.mul(feedback, g[nroots]);
  }
  std::vector<std::uint8_t> out(data.begin(), data.end());
  out.insert(out.end(), parity.begin(), parity.end());
  return out;
}

RsDecodeResult rs_decode(std::span<const std::uint8_t> block, const RsCode& code) {
  code.validate();
  if (static_cast<int>(block.size()) != code.n) throw DomainError("rs_decode: block length must equal n");
  const int n = code.n;
  const int nroots = n - code.k;

  RsDecodeResult result;
  result.data.assign(block.begin(), block.begin() + code.k);

  const auto s = syndromes(block, nroots);
  bool clean = true;
  for (auto v : s) clean = clean && v == 0;
  if (clean) return result;

  // Berlekamp-Massey, polynomials lowest degree first.
  std::vector<std::uint8_t> lambda{1}, prev{1};
  int L = 0;
  int shift = 1;
  std::uint8_t prev_disc = 1;
  for (int r = 0; r < nroots; ++r) {
    std::uint8_t disc = s[r];
    for (int i = 1; i <= L && i < static_cast<int>(lambda.size()); ++i) disc ^= gf.mul(lambda[i], s[r - i]);
    if (disc == 0) {
      ++shift;
      continue;
    }
    const std::uint8_t coef = gf.div(disc, prev_disc);
    std::vector<std::uint8_t> next = lambda;
    if (next.size() < prev.size() + shift) next.resize(prev.size() + shift, 0);
    for (std::size_t i = 0; i < prev.size(); ++i) next[i + shift] ^= gf.mul(coef, prev[i]);
    if (2 * L <= r) {
      prev = lambda;
      L = r + 1 - L;
      prev_disc = disc;
      shift = 1;
    } else {
      ++shift;
    }
    lambda = std::move(next);
  }
  while (lambda.size() > 1 && lambda.back() == 0) lambda.pop_back();
  const int degree = static_cast<int>(lambda.size()) - 1;
  if (degree != L || L > code.t()) {
    result.failure = true;
    return result;
  }

  // Chien search over the n codeword positions; position power p maps to index n - 1 - p.
  std::vector<int> powers;
  for (int p = 0; p < n; ++p)
    if (eval_low_first(lambda, gf.pow_alpha(-p)) == 0) powers.push_back(p);
  if (static_cast<int>(powers.size()) != L) {
    result.failure = true;
    return result;
  }

  // Omega = S * Lambda mod x^nroots.
  std::vector<std::uint8_t> omega(nroots, 0);
  for (int i = 0; i < nroots; ++i)
    for (int j = 0; j <= degree && j <= i; ++j) omega[i] ^= gf.mul(s[i - j], lambda[j]);

  std::vector<std::uint8_t> fixed(block.begin(), block.end());
  for (int p : powers) {
    const std::uint8_t x_inv = gf.pow_alpha(-p);
    std::uint8_t deriv = 0;
    for (int i = 1; i <= degree; i += 2) deriv ^= gf.mul(lambda[i], gf.pow_alpha(-p * (i - 1)));
    if (deriv == 0) {
      result.failure = true;
      return result;
    }
    // Forney with first consecutive root 1: e = X^{1-fcr} Omega(X^-1) / Lambda'(X^-1).
    std::uint8_t magnitude = gf.div(eval_low_first(omega, x_inv), deriv);
    magnitude = gf.mul(magnitude, gf.pow_alpha(p * (1 - kFirstRoot)));
    fixed[n - 1 - p] ^= magnitude;
  }

  for (auto v : syndromes(fixed, nroots)) {
    if (v != 0) {
      result.failure = true;
      return result;
    }
  }
  result.data.assign(fixed.begin(), fixed.begin() + code.k);
  result.corrected = L;
  return result;
}

}  // namespace antifrag
