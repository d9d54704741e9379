// acceptance [--jobs N] [--out-dir DIR]
// One PASS/FAIL line per acceptance criterion, followed by the harness invariants.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "antifrag/harness.hpp"
#include "antifrag/reed_solomon.hpp"

using namespace antifrag;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  failures += !ok;
  fmt::print("[{}] criterion {:>2}: {}\n", ok ? "PASS" : "FAIL", id, detail);
  std::cout.flush();
}

void report_invariant(const std::string& name, bool ok, const std::string& detail) {
  fmt::print("[{}] invariant {}: {}\n", ok ? "PASS" : "FAIL", name, detail);
  std::cout.flush();
}

VectorXcd random_vector(Eigen::Index m, Rng& rng) {
  VectorXcd v(m);
  for (auto& x : v) x = complex_gaussian<double>(rng);
  return v;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Sweep {
  std::string name;
  std::vector<SweepRecord> rows;
};

const SweepRecord* find(const std::vector<SweepRecord>& rows, JammerModel m, int ris, double jsr) {
  for (const auto& r : rows)
    if (r.jammer == m && r.ris_size == ris && r.jsr_db == jsr) return &r;
  return nullptr;
}

double pooled_se(const SweepRecord& a, const SweepRecord& b) { return std::hypot(a.stderr_gain, b.stderr_gain); }

void formula_oracles() {
  const double s = snr_jamming(1.0, 1.0);
  const double p = residual_error(RsCode{255, 239}, 0.05);
  const RsCode c94 = code_for_rate(0.94);
  const double t = throughput(1.0, c94, ModScheme{ModFamily::QAM, 64}, 1.0);
  const double j = jsr_db(10.0 * 0.25, 0.25);
  const bool ok = std::abs(s - 1.0 / 3.0) < 1e-12 && std::abs(p - 0.0186) <= 1e-4 && std::abs(t - 5.64) < 0.01 &&
                  std::abs(j - 10.0) < 1e-12;
  report(1, ok, fmt::format("snr_jamming(1,1)={:.6f} P_res(255,239,0.05)={:+.5f} T(1,{:.4f},64)={:.4f} JSR(10P,P)={:g} dB",
                            s, p, c94.rate(), t, j));
}

void cascade_equivalence() {
  Rng rng(101);
  double worst = 0.0;
  for (int m : {1, 2, 4, 8}) {
    RisLinkConfig cfg;
    cfg.element_count = m;
    const auto R = build_correlation<double>(cfg);
    for (int i = 0; i < 100; ++i) {
      const VectorXcd a = random_vector(m, rng), b = random_vector(m, rng);
      std::uniform_real_distribution<double> u(-kPi<double>, kPi<double>);
      RealVector<double> phi(m);
      for (auto& x : phi) x = u(rng);
      const cd fast = cascaded_coefficient(a, b, R, PhaseMatrix<double>{phi});
      cd slow{};
      for (int r = 0; r < m; ++r)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l)
            slow += R.sqrt_form(r, k) * R.sqrt_form(r, l) * a[k] * b[l] * std::polar(1.0, phi[r]);
      worst = std::max(worst, std::abs(fast - slow) / std::abs(slow));
    }
  }
  report(2, worst <= 1e-9, fmt::format("max relative error {:.2e} over 400 instances, M in {{1,2,4,8}}", worst));
}

void scaling_law() {
  Rng rng(202);
  std::vector<double> xs, ys;
  for (int m : {4, 16, 64}) {
    const auto I = CorrelationMatrix<double>::identity(m);
    double acc = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const VectorXcd a = random_vector(m, rng), b = random_vector(m, rng);
      acc += std::norm(cascaded_coefficient(a, b, I, optimize_phases(a, b, I)));
    }
    xs.push_back(std::log(double(m)));
    ys.push_back(std::log(acc / n));
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / 3, my = std::accumulate(ys.begin(), ys.end(), 0.0) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  report(3, std::abs(slope - 2.0) <= 0.1, fmt::format("log-log slope {:.4f} (M = 4, 16, 64; 10^4 draws)", slope));
}

void delay_estimation() {
  Rng rng(303);
  std::uniform_int_distribution<int> q(0, 3), lag(1, 64);
  auto qpsk = [&](int n) {
    VectorXcd x(n);
    for (auto& s : x) s = std::polar(1.0, kPi<double> / 2 * q(rng) + kPi<double> / 4);
    return x;
  };
  auto delayed = [](const VectorXcd& x, int d) {
    VectorXcd out = VectorXcd::Zero(x.size() + d);
    out.tail(x.size()) = x;
    return out;
  };
  const int n = 1024;
  int exact = 0;
  for (int d = 1; d <= 64; ++d) {
    const VectorXcd x = qpsk(n);
    exact += estimate_delay(cross_correlate_fft(x, delayed(x, d), n, 128)) == d;
  }
  int within = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const VectorXcd x = qpsk(n);
    const int d = lag(rng);
    VectorXcd y = delayed(x, d);
    for (auto& v : y) v += complex_gaussian<double>(rng, 1.0);
    within += std::abs(estimate_delay(cross_correlate_fft(x, y, n, 128)) - d) <= 1;
  }
  report(4, exact == 64 && within >= 0.95 * trials,
         fmt::format("noiseless exact {}/64; 0 dB within 1 sample {}/{}", exact, within, trials));
}

void reed_solomon() {
  Rng rng(404);
  std::uniform_int_distribution<int> byte(0, 255), nz(1, 255);
  auto corrupt = [&](std::vector<std::uint8_t>& cw, int weight) {
    std::vector<int> pos(cw.size());
    std::iota(pos.begin(), pos.end(), 0);
    std::shuffle(pos.begin(), pos.end(), rng);
    for (int i = 0; i < weight; ++i) cw[pos[i]] ^= static_cast<std::uint8_t>(nz(rng));
  };
  bool ok = true;
  std::string detail;
  for (const auto& code : default_code_table()) {
    std::uniform_int_distribution<int> w(0, code.t());
    int corrected = 0, flagged = 0;
    for (int i = 0; i < 100; ++i) {
      std::vector<std::uint8_t> data(code.k);
      for (auto& x : data) x = static_cast<std::uint8_t>(byte(rng));
      auto cw = rs_encode(data, code);
      auto bad = cw;
      corrupt(cw, i == 0 ? code.t() : w(rng));
      const auto dec = rs_decode(cw, code);
      corrected += !dec.failure && dec.data == data;
      corrupt(bad, code.t() + 1);
      flagged += rs_decode(bad, code).failure;
    }
    ok = ok && corrected == 100 && flagged >= 99;
    detail += fmt::format(" ({},{}) t={}: {}/100 corrected, {}/100 flagged;", code.n, code.k, code.t(), corrected, flagged);
  }
  detail.pop_back();
  report(5, ok, detail.substr(1));
}

void classification(const ExperimentConfig& base) {
  const Simulator sim(base);
  const std::vector<JammerModel> models{JammerModel::DRFM, JammerModel::PS, JammerModel::AS};
  bool ok = true;
  std::string detail;
  const int trials = 200;
  for (std::size_t ji = 0; ji < base.jsr_grid_db.size(); ++ji) {
    const double jsr = base.jsr_grid_db[ji];
    detail += fmt::format(" JSR {:g} dB:", jsr);
    for (auto m : models) {
      std::map<JammerClass, int> counts;
      for (int t = 0; t < trials; ++t)
        ++counts[sim.classify_once(jsr, m, base.ris_sizes.front(), trial_seed(base.seed, m, 0, ji, t))];
      const double diag = counts[static_cast<JammerClass>(static_cast<int>(m))] / double(trials);
      ok = ok && diag >= 0.9;
      detail += fmt::format(" {} {:.3f} [D{} P{} A{} U{}]", to_string(m), diag, counts[JammerClass::DRFM],
                            counts[JammerClass::PS], counts[JammerClass::AS], counts[JammerClass::Unknown]);
    }
  }
  report(6, ok, "diagonal per class, 200 trials," + detail);
}

void figure2(const Sweep& a, const Sweep& b) {
  const auto d = crossover_jsr(a.rows, JammerModel::DRFM, a.rows.front().ris_size);
  const auto s = crossover_jsr(a.rows, JammerModel::AS, a.rows.front().ris_size);
  const auto c = crossover_jsr(b.rows, JammerModel::DRFM, b.rows.front().ris_size);
  auto show = [](const std::optional<double>& x) { return x ? fmt::format("{:g} dB", *x) : std::string("none"); };
  const bool ok_a = d && std::abs(*d - 3.0) <= 4.0 && s && std::abs(*s - 15.0) <= 4.0;
  const bool ok_b = c && std::abs(*c + 5.0) <= 4.0;
  report(7, ok_a && ok_b,
         fmt::format("(a) no separation: DRFM crossover {} (3 +- 4), AS crossover {} (15 +- 4); "
                     "(b) spatial, 10 dB baseline: DRFM crossover {} (-5 +- 4)",
                     show(d), show(s), show(c)));
}

void figure3(const Sweep& f) {
  std::vector<int> sizes;
  std::vector<double> grid;
  for (const auto& r : f.rows) {
    if (std::find(sizes.begin(), sizes.end(), r.ris_size) == sizes.end()) sizes.push_back(r.ris_size);
    if (std::find(grid.begin(), grid.end(), r.jsr_db) == grid.end()) grid.push_back(r.jsr_db);
  }
  std::sort(sizes.begin(), sizes.end());

  // peak gain over JSR per RIS size, all jammers
  std::vector<const SweepRecord*> peaks;
  for (int m : sizes) {
    const SweepRecord* best = nullptr;
    for (const auto& r : f.rows)
      if (r.ris_size == m && (!best || r.gain > best->gain)) best = &r;
    peaks.push_back(best);
  }
  bool decreasing = peaks.back()->gain < peaks.front()->gain;
  for (std::size_t i = 1; i < peaks.size(); ++i)
    decreasing = decreasing && peaks[i]->gain <= peaks[i - 1]->gain + 2.0 * pooled_se(*peaks[i], *peaks[i - 1]);

  double ps_max = 0.0;
  for (const auto& r : f.rows)
    if (r.jammer == JammerModel::PS && r.ris_size >= 128) ps_max = std::max(ps_max, r.gain);

  int violations = 0;
  std::string worst;
  double worst_z = -1e9;
  for (int m : sizes)
    for (double j : grid) {
      const auto* d = find(f.rows, JammerModel::DRFM, m, j);
      const auto* a = find(f.rows, JammerModel::AS, m, j);
      const auto* p = find(f.rows, JammerModel::PS, m, j);
      for (auto [hi, lo] : {std::pair{d, a}, std::pair{a, p}}) {
        const double se = pooled_se(*hi, *lo);
        const double z = se > 0 ? (lo->gain - hi->gain) / se : (lo->gain > hi->gain ? 1e9 : -1e9);
        if (lo->gain > hi->gain + 2.0 * se) ++violations;
        if (z > worst_z) {
          worst_z = z;
          worst = fmt::format("{} {:.3f} vs {} {:.3f} at M={} JSR={:g}", to_string(hi->jammer), hi->gain,
                              to_string(lo->jammer), lo->gain, m, j);
        }
      }
    }

  std::string peak_text;
  for (std::size_t i = 0; i < sizes.size(); ++i) peak_text += fmt::format(" M={}:{:.3f}", sizes[i], peaks[i]->gain);
  report(8, decreasing && ps_max <= 1.02 && violations == 0,
         fmt::format("peak gain{}; PS max gain for M>=128 {:.3f} (<= 1.02); ordering violations {} "
                     "(closest: {}, {:+.2f} SE)",
                     peak_text, ps_max, violations, worst, worst_z));
}

void figure4(const Sweep& sa, const Sweep& ra) {
  bool ok = true;
  std::string detail;
  for (const auto& r : ra.rows) {
    if (r.jsr_db < 0) continue;
    const auto* s = find(sa.rows, r.jammer, r.ris_size, r.jsr_db);
    ok = ok && s && r.t_jammed > s->t_jammed;
    if (r.jsr_db == 0 || r.jsr_db == 20)
      detail += fmt::format(" {}@{:g}dB {:.2f}/{:.2f} Mb/s;", to_string(r.jammer), r.jsr_db, r.t_jammed / 1e6,
                            s ? s->t_jammed / 1e6 : 0.0);
  }
  detail.pop_back();
  report(9, ok, "RIS-aware vs source-aware jammed throughput, all JSR >= 0:" + detail);
}

void headline(const std::vector<Sweep>& sweeps) {
  const SweepRecord* best = nullptr;
  std::string where;
  for (const auto& s : sweeps)
    for (const auto& r : s.rows)
      if (!best || r.gain > best->gain) {
        best = &r;
        where = s.name;
      }
  report(10, best->gain >= 2.0,
         fmt::format("max gain {:.3f} ({}, {} M={} JSR={:g} dB, {}, stderr {:.3f})", best->gain, where,
                     to_string(best->jammer), best->ris_size, best->jsr_db, best->modulation, best->stderr_gain));
}

void determinism(const fs::path& simulate, const fs::path& config, const fs::path& dir) {
  auto run = [&](const std::string& tag, int jobs) {
    const fs::path out = dir / fmt::format("determinism_{}.csv", tag);
    const std::string cmd = fmt::format("\"{}\" --config \"{}\" --out \"{}\" --trials 5 --seed 7 --jobs {} 2>/dev/null",
                                        simulate.string(), config.string(), out.string(), jobs);
    const int rc = std::system(cmd.c_str());
    return rc == 0 ? read_file(out) : std::string();
  };
  const std::string a = run("serial", 1), b = run("serial_again", 1), c = run("parallel", 4);
  const bool ok = !a.empty() && a == b && a == c;
  report(11, ok,
         fmt::format("{} bytes; repeat {}, --jobs 4 {}", a.size(), a == b ? "identical" : "differs",
                     a == c ? "identical" : "differs"));
}

void invariants(const fs::path& dir, int jobs) {
  bool ok = true;
  std::string detail;
  for (auto topo : {PathTopology::SourceAware, PathTopology::RisAware}) {
    ExperimentConfig cfg;
    cfg.topology = topo;
    cfg.jsr_grid_db = {-30.0};
    const auto rows = run_sweep(cfg, jobs);
    for (const auto& r : rows) {
      ok = ok && std::abs(r.gain - 1.0) <= 0.05;
      detail += fmt::format(" {}/{} {:.3f};", to_string(topo), to_string(r.jammer), r.gain);
    }
  }
  detail.pop_back();
  report_invariant("jammer-free consistency", ok, "|gain - 1| <= 0.05 at JSR -30 dB:" + detail);

  ExperimentConfig cfg;
  cfg.jammer_models = {JammerModel::DRFM};
  cfg.jsr_grid_db.clear();
  for (int j = -20; j <= 20; j += 2) cfg.jsr_grid_db.push_back(j);
  const auto rows = run_sweep(cfg, jobs);
  emit_csv(rows, (dir / "monotone.csv").string());
  double worst = -1e9;
  std::string at;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double z = (rows[i - 1].gain - rows[i].gain) / pooled_se(rows[i - 1], rows[i]);
    if (z > worst) {
      worst = z;
      at = fmt::format("{:g} -> {:g} dB: {:.3f} -> {:.3f}", rows[i - 1].jsr_db, rows[i].jsr_db, rows[i - 1].gain,
                       rows[i].gain);
    }
  }
  report_invariant("DRFM monotone trend", worst <= 2.0,
                   fmt::format("largest step decrease {:.2f} SE ({}), default configuration", worst, at));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the antifragility simulator"};
  int jobs = 1;
  std::string out_dir = "acceptance_out";
  std::string config_dir = AF_CONFIG_DIR;
  std::string simulate = AF_SIMULATE;
  app.add_option("--jobs", jobs, "worker threads for the sweeps")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "where the sweep CSVs are written");
  app.add_option("--config-dir", config_dir, "directory holding the figure configurations");
  app.add_option("--simulate", simulate, "simulate executable");
  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path dir(out_dir), cfgs(config_dir);
    fs::create_directories(dir);

    formula_oracles();
    cascade_equivalence();
    scaling_law();
    delay_estimation();
    reed_solomon();

    auto sweep = [&](const std::string& name) {
      const auto cfg = load_config((cfgs / (name + ".ini")).string());
      Sweep s{name, run_sweep(cfg, jobs)};
      emit_csv(s.rows, (dir / (name + ".csv")).string());
      return s;
    };

    auto cls_cfg = load_config((cfgs / "fig4_ris_aware.ini").string());
    cls_cfg.jsr_grid_db = {0.0, 10.0, 20.0};
    classification(cls_cfg);

    const auto fig2a = sweep("fig2a");
    const auto fig2b = sweep("fig2b");
    figure2(fig2a, fig2b);
    const auto fig3 = sweep("fig3");
    figure3(fig3);
    const auto fig4s = sweep("fig4_source_aware");
    const auto fig4r = sweep("fig4_ris_aware");
    figure4(fig4s, fig4r);
    headline({fig2a, fig2b, fig3, fig4s, fig4r});
    determinism(simulate, cfgs / "default.ini", dir);
    invariants(dir, jobs);
  } catch (const std::exception& e) {
    fmt::print(stderr, "acceptance aborted: {}\n", e.what());
    return 2;
  }

  fmt::print("{} of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
