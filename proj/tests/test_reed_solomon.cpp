#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "antifrag/reed_solomon.hpp"
#include "antifrag/types.hpp"

using namespace antifrag;

namespace {

std::vector<std::uint8_t> make_data(int k, Rng& rng) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> d(k);
  for (auto& x : d) x = static_cast<std::uint8_t>(byte(rng));
  return d;
}

void corrupt(std::vector<std::uint8_t>& block, int weight, Rng& rng) {
  std::vector<int> pos(block.size());
  std::iota(pos.begin(), pos.end(), 0);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::uniform_int_distribution<int> nz(1, 255);
  for (int i = 0; i < weight; ++i) block[pos[i]] ^= static_cast<std::uint8_t>(nz(rng));
}

// Reference GF(256) arithmetic by shift-and-add, independent of the codec's tables.
std::uint8_t slow_mul(std::uint8_t a, std::uint8_t b) {
  unsigned r = 0, x = a;
  for (int i = 0; i < 8; ++i) {
    if (b & (1 << i)) r ^= x;
    x <<= 1;
    if (x & 0x100) x ^= 0x11d;
  }
  return static_cast<std::uint8_t>(r);
}

std::uint8_t slow_eval(const std::vector<std::uint8_t>& cw, std::uint8_t x) {
  std::uint8_t acc = 0;
  for (auto c : cw) acc = slow_mul(acc, x) ^ c;
  return acc;
}

}  // namespace

TEST_CASE("code table") {
  auto table = default_code_table();
  REQUIRE(table.size() == 5);
  CHECK(table.front() == RsCode{255, 240});
  CHECK(table.back() == RsCode{255, 178});
  for (std::size_t i = 1; i < table.size(); ++i) CHECK(table[i].rate() < table[i - 1].rate());
  for (const auto& c : table) {
    CHECK(c.rate() >= 0.69);
    CHECK(c.rate() <= 0.95);
  }
  CHECK(RsCode{255, 239}.t() == 8);
  CHECK(RsCode{255, 178}.t() == 38);
  CHECK(code_for_rate(0.94) == RsCode{255, 240});
  CHECK_THROWS_AS(RsCode({255, 255}).validate(), DomainError);
}

TEST_CASE("codewords vanish at the generator roots") {
  Rng rng(1);
  for (RsCode code : {RsCode{255, 239}, RsCode{255, 178}, RsCode{31, 21}}) {
    auto cw = rs_encode(make_data(code.k, rng), code);
    CHECK(int(cw.size()) == code.n);
    std::uint8_t alpha = 1;
    for (int j = 1; j <= code.n - code.k; ++j) {
      alpha = slow_mul(alpha, 2);
      CHECK(slow_eval(cw, alpha) == 0);
    }
  }
}

TEST_CASE("clean decode") {
  Rng rng(2);
  RsCode code{255, 239};
  auto data = make_data(code.k, rng);
  auto dec = rs_decode(rs_encode(data, code), code);
  CHECK_FALSE(dec.failure);
  CHECK(dec.corrected == 0);
  CHECK(dec.data == data);
  CHECK_THROWS_AS(rs_encode(std::vector<std::uint8_t>(10), code), DomainError);
  CHECK_THROWS_AS(rs_decode(std::vector<std::uint8_t>(10), code), DomainError);
}

TEST_CASE("exactly t errors on RS(255,239)") {
  Rng rng(3);
  RsCode code{255, 239};
  for (int trial = 0; trial < 50; ++trial) {
    auto data = make_data(code.k, rng);
    auto cw = rs_encode(data, code);
    corrupt(cw, 8, rng);
    auto dec = rs_decode(cw, code);
    CHECK_FALSE(dec.failure);
    CHECK(dec.corrected == 8);
    CHECK(dec.data == data);
  }
}

TEST_CASE("t + 1 errors are flagged") {
  Rng rng(4);
  RsCode code{255, 239};
  int flagged = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    auto data = make_data(code.k, rng);
    auto cw = rs_encode(data, code);
    corrupt(cw, 9, rng);
    auto dec = rs_decode(cw, code);
    flagged += dec.failure || dec.data != data;
    if (!dec.failure) CHECK(dec.data != data);
  }
  CHECK(flagged >= 0.99 * trials);
}

TEST_CASE("every table code corrects up to t") {
  Rng rng(5);
  for (const auto& code : default_code_table()) {
    CAPTURE(code.k);
    std::uniform_int_distribution<int> weight(0, code.t());
    for (int trial = 0; trial < 30; ++trial) {
      auto data = make_data(code.k, rng);
      auto cw = rs_encode(data, code);
      const int w = trial == 0 ? code.t() : weight(rng);
      corrupt(cw, w, rng);
      auto dec = rs_decode(cw, code);
      CHECK_FALSE(dec.failure);
      CHECK(dec.data == data);
      CHECK(dec.corrected == w);
    }
  }
}
