#include "antifrag/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace antifrag {
namespace {

constexpr std::uint64_t kCalibrationSeed = 0xca1b0a7e5eedULL;
constexpr int kCalibrationDraws = 4000;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = lower(trim(v));
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double d = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError(fmt::format("{}: {} out of range", key, v));
  return static_cast<int>(x);
}

/// "a, b, c" or "start:step:stop" (inclusive).
std::vector<double> parse_grid(const std::string& key, const std::string& v) {
  if (v.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(to_double(key, item));
    if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0])
      throw ConfigError(fmt::format("{}: expected start:step:stop with step > 0", key));
    std::vector<double> grid;
    const long count = std::lround(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
    for (long i = 0; i <= count; ++i) grid.push_back(parts[0] + static_cast<double>(i) * parts[1]);
    return grid;
  }
  std::vector<double> grid;
  for (const auto& item : split_list(v)) grid.push_back(to_double(key, item));
  return grid;
}

template <typename F>
auto wrap_domain(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::unordered_map<std::string, Setter>& setters() {
  static const std::unordered_map<std::string, Setter> table = [] {
    std::unordered_map<std::string, Setter> t;
    auto real = [&t](const std::string& k, double ExperimentConfig::*field) {
      t[k] = [field](ExperimentConfig& c, const std::string& key, const std::string& v) { c.*field = to_double(key, v); };
    };
    auto integer = [&t](const std::string& k, int ExperimentConfig::*field) {
      t[k] = [field](ExperimentConfig& c, const std::string& key, const std::string& v) { c.*field = to_int(key, v); };
    };

    t["experiment.topology"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      c.topology = wrap_domain(key, [&] { return parse_topology(trim(v)); });
    };
    t["experiment.jammers"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      c.jammer_models.clear();
      for (const auto& item : split_list(v))
        c.jammer_models.push_back(wrap_domain(key, [&] { return parse_jammer_model(item); }));
    };
    t["experiment.ris_sizes"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      c.ris_sizes.clear();
      for (const auto& item : split_list(v)) c.ris_sizes.push_back(to_int(key, item));
    };
    t["experiment.jsr_grid_db"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      c.jsr_grid_db = parse_grid(key, v);
    };
    real("experiment.baseline_snr_db", &ExperimentConfig::baseline_snr_db);
    integer("experiment.reference_ris_size", &ExperimentConfig::reference_ris_size);
    t["experiment.orthogonality"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      const auto s = lower(trim(v));
      if (s == "spatial") c.orthogonality = Orthogonality::Spatial;
      else if (s == "temporal") c.orthogonality = Orthogonality::Temporal;
      else if (s == "none") c.orthogonality = Orthogonality::None;
      else throw ConfigError(fmt::format("{}: expected spatial, temporal or none", key));
    };
    t["experiment.code_mode"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      const auto s = lower(trim(v));
      if (s == "adaptive") c.code_mode = CodeMode::Adaptive;
      else if (s == "fixed") c.code_mode = CodeMode::Fixed;
      else throw ConfigError(fmt::format("{}: expected adaptive or fixed", key));
    };
    real("experiment.fixed_code_rate", &ExperimentConfig::fixed_code_rate);
    integer("experiment.trials", &ExperimentConfig::trials);
    t["experiment.seed"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      const std::string s = trim(v);
      std::uint64_t out = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(fmt::format("{}: bad seed '{}'", key, v));
      c.seed = out;
    };
    real("experiment.bandwidth_hz", &ExperimentConfig::bandwidth_hz);
    t["experiment.baseline_family"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      c.baseline_family = wrap_domain(key, [&] { return parse_mod_family(trim(v)); });
    };

    t["channel.d_sr"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.link.d_sr = to_double(k, v); };
    t["channel.d_rd"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.link.d_rd = to_double(k, v); };
    t["channel.d_rj"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.link.d_rj = to_double(k, v); };
    t["channel.path_loss_exp"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.link.path_loss_exp = to_double(k, v);
    };
    t["channel.corr_rate"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.link.corr_rate = to_double(k, v);
    };
    t["channel.carrier_hz"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.link.carrier_hz = to_double(k, v);
    };
    t["channel.rj_alignment"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.link.rj_alignment = to_double(k, v);
    };
    t["channel.jammer_rician_k"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.jammer_channel.rician_k = to_double(k, v);
    };
    t["channel.jammer_avg_amp"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.jammer_channel.avg_amp = to_double(k, v);
    };
    t["channel.jammer_path_count"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.jammer_channel.path_count = to_int(k, v);
    };

    real("jammer.tx_power_dbm", &ExperimentConfig::tx_power_dbm);
    real("jammer.min_power_dbm", &ExperimentConfig::jammer_min_dbm);
    real("jammer.max_power_dbm", &ExperimentConfig::jammer_max_dbm);
    real("jammer.amp_gain", &ExperimentConfig::amp_gain);
    integer("jammer.delay_samples", &ExperimentConfig::delay_samples);
    t["jammer.cycle_period"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      const int p = to_int(key, v);
      if (p > 0) c.cycle_period = p;
      else c.cycle_period.reset();
    };
    real("jammer.eavesdrop_gain_db", &ExperimentConfig::eavesdrop_gain_db);
    real("jammer.jam_link_gain_db", &ExperimentConfig::jam_link_gain_db);

    integer("waveform.frame_len", &ExperimentConfig::frame_len);
    integer("waveform.pilot_len", &ExperimentConfig::pilot_len);

    integer("receiver.antennas", &ExperimentConfig::antennas);
    real("receiver.legit_aoa_deg", &ExperimentConfig::legit_aoa_deg);
    real("receiver.jam_aoa_deg", &ExperimentConfig::jam_aoa_deg);
    t["receiver.sim_threshold"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.thresholds.sim_threshold = to_double(k, v);
    };
    t["receiver.inversion_threshold"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.thresholds.inversion_threshold = to_double(k, v);
    };
    real("receiver.detection_threshold", &ExperimentConfig::detection_threshold);
    real("receiver.detection_jnr_db", &ExperimentConfig::detection_jnr_db);
    real("receiver.classify_jnr_db", &ExperimentConfig::classify_jnr_db);
    integer("receiver.gamma_max", &ExperimentConfig::gamma_max);

    real("adaptation.delta", &ExperimentConfig::delta);
    t["adaptation.code_k"] = [](ExperimentConfig& c, const std::string& key, const std::string& v) {
      c.codes.clear();
      for (const auto& item : split_list(v)) c.codes.push_back(RsCode{255, to_int(key, item)});
    };
    return t;
  }();
  return table;
}

/// Mean legitimate channel power |h_L|^2 over a fixed set of draws.
double mean_link_power(const RisLinkConfig& link, const RicianParams& jp, const CorrelationMatrix<double>& R) {
  Rng rng(kCalibrationSeed);
  double acc = 0.0;
  for (int i = 0; i < kCalibrationDraws; ++i) {
    const auto real = sample_realization<double>(link, jp, rng);
    const auto phi = optimize_phases(real.h_sr, real.h_rd, R);
    acc += std::norm(cascaded_coefficient(real.h_sr, real.h_rd, R, phi));
  }
  return acc / kCalibrationDraws;
}

double deg_to_rad(double deg) { return deg * kPi<double> / 180.0; }

}  // namespace

std::string_view to_string(Orthogonality o) {
  switch (o) {
    case Orthogonality::Spatial: return "spatial";
    case Orthogonality::Temporal: return "temporal";
    case Orthogonality::None: return "none";
  }
  return "?";
}

std::string_view to_string(CodeMode c) { return c == CodeMode::Adaptive ? "adaptive" : "fixed"; }

ExperimentConfig::ExperimentConfig() {
  for (int j = -20; j <= 20; ++j) jsr_grid_db.push_back(j);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (trials < 1) fail("trials must be >= 1");
  if (jammer_models.empty()) fail("jammers must list at least one model");
  if (ris_sizes.empty()) fail("ris_sizes must list at least one size");
  for (int m : ris_sizes)
    if (m < 1) fail("ris_sizes entries must be >= 1");
  if (reference_ris_size < 1) fail("reference_ris_size must be >= 1");
  if (jsr_grid_db.empty()) fail("jsr_grid_db must not be empty");
  for (double j : jsr_grid_db)
    if (std::isnan(j)) fail("jsr_grid_db entries must be numbers");
  if (!std::isfinite(baseline_snr_db)) fail("baseline_snr_db must be finite");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth_hz must be positive");
  if (code_mode == CodeMode::Fixed && !(fixed_code_rate > 0.0 && fixed_code_rate < 1.0))
    fail("fixed_code_rate must lie in (0, 1)");
  if (!std::isfinite(tx_power_dbm)) fail("tx_power_dbm must be finite");
  if (!(jammer_min_dbm <= jammer_max_dbm)) fail("min_power_dbm must not exceed max_power_dbm");
  if (std::isnan(jammer_max_dbm) || jammer_max_dbm == std::numeric_limits<double>::infinity())
    fail("max_power_dbm must be finite");
  if (!std::isfinite(eavesdrop_gain_db) || !std::isfinite(jam_link_gain_db)) fail("link gains must be finite");
  if (pilot_len < 1) fail("pilot_len must be >= 1");
  if (frame_len <= pilot_len) fail("frame_len must exceed pilot_len");
  if (delay_samples < 0) fail("delay_samples must be >= 0");
  if (jammer_delay() < 1 || jammer_delay() > search_bound())
    fail(fmt::format("jammer delay {} must lie in [1, gamma_max = {}]", jammer_delay(), search_bound()));
  if (gamma_max < 0) fail("gamma_max must be >= 0");
  if (cycle_period && *cycle_period < 2) fail("cycle_period must be >= 2");
  if (antennas < 1) fail("antennas must be >= 1");
  if (!(detection_threshold >= 0.0)) fail("detection_threshold must be non-negative");
  if (std::isnan(detection_jnr_db) || std::isnan(classify_jnr_db)) fail("receiver JNR floors must be numbers");
  if (!(delta < 1.0)) fail("delta must be < 1");
  if (codes.empty()) fail("code_k must list at least one code");
  try {
    thresholds.validate();
    for (const auto& c : codes) c.validate();
    JammerSpec js;
    js.amp_gain = amp_gain;
    js.validate();
    RisLinkConfig l = link;
    l.validate();
    jammer_channel.validate();
    ModScheme{baseline_family, 2}.validate();
  } catch (const DomainError& e) {
    fail(e.what());
  }
}

std::vector<RsCode> ExperimentConfig::code_table() const {
  if (code_mode == CodeMode::Fixed) return {code_for_rate(fixed_code_rate)};
  return codes;
}

double ExperimentConfig::jammer_power_dbm(double jsr) const {
  return std::clamp(tx_power_dbm + jsr, jammer_min_dbm, jammer_max_dbm);
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> out;
  for (double jsr : jsr_grid_db) {
    const double wanted = tx_power_dbm + jsr;
    const double got = jammer_power_dbm(jsr);
    if (wanted != got)
      out.push_back(fmt::format("JSR {} dB needs {} dBm of jammer power, clamped to {} dBm", jsr, wanted, got));
  }
  return out;
}

ExperimentConfig parse_config(std::istream& in) {
  // ini_parser only knows ';' comments.
  std::stringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (!t.empty() && t.front() == '#') continue;
    cleaned << line << '\n';
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config parse error at line {}: {}", e.line(), e.message()));
  }

  ExperimentConfig cfg;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(fmt::format("key '{}' outside of any section", section));
    for (const auto& [key, value] : body) {
      const std::string full = lower(section) + "." + lower(key);
      const auto it = table.find(full);
      if (it == table.end()) throw ConfigError(fmt::format("unknown config key '{}'", full));
      it->second(cfg, full, value.data());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path));
  return parse_config(in);
}

Simulator::Simulator(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  auto build = [this](int m) {
    SizeContext ctx;
    ctx.link = cfg_.link;
    ctx.link.element_count = m;
    ctx.R = build_correlation<double>(ctx.link);
    return ctx;
  };
  for (int m : cfg_.ris_sizes)
    if (!contexts_.count(m)) contexts_.emplace(m, build(m));
  if (!contexts_.count(cfg_.reference_ris_size)) contexts_.emplace(cfg_.reference_ris_size, build(cfg_.reference_ris_size));

  const auto& ref = contexts_.at(cfg_.reference_ris_size);
  const double p_t = dbm_to_watts(cfg_.tx_power_dbm);
  noise_var_ = p_t * mean_link_power(ref.link, cfg_.jammer_channel, ref.R) / db_to_linear(cfg_.baseline_snr_db);
}

const Simulator::SizeContext& Simulator::context(int ris_size) const {
  const auto it = contexts_.find(ris_size);
  if (it == contexts_.end()) throw DomainError(fmt::format("RIS size {} is not part of the configuration", ris_size));
  return it->second;
}

// Everything the adaptation step needs from the receiver chain.
struct Simulator::Analysis {
  JammerClass verdict = JammerClass::Unknown;
  double sinr_l = 0.0;
  double sinr_j = 0.0;
  double payload_fraction = 1.0;
  double sinr_tolerate = 0.0;  // jam left in place as extra noise, full frame
  bool separated = false;
};

TrialResult Simulator::run_trial(double jsr, JammerModel model, int ris_size, std::uint64_t seed) const {
  return simulate(jsr, model, ris_size, seed, false);
}

JammerClass Simulator::classify_once(double jsr, JammerModel model, int ris_size, std::uint64_t seed) const {
  return simulate(jsr, model, ris_size, seed, true).verdict;
}

TrialResult Simulator::simulate(double jsr, JammerModel model, int ris_size, std::uint64_t seed,
                                bool force_analysis) const {
  const auto& ctx = context(ris_size);
  const auto table = cfg_.code_table();
  const int F = cfg_.frame_len;
  const int P = cfg_.pilot_len;
  const int tau = cfg_.jammer_delay();
  const double sigma2 = noise_var_;
  const double p_t = dbm_to_watts(cfg_.tx_power_dbm);
  const double snr_ref = db_to_linear(cfg_.baseline_snr_db);
  Rng rng(seed);

  // Channels and RIS configuration.
  const auto real = sample_realization<double>(ctx.link, cfg_.jammer_channel, rng);
  const auto phi = optimize_phases(real.h_sr, real.h_rd, ctx.R);
  const cd h_l = cascaded_coefficient(real.h_sr, real.h_rd, ctx.R, phi);
  const cd legit = std::sqrt(p_t) * h_l;
  const double snr_l = p_t * std::norm(h_l) / sigma2;

  // Baseline, no jammer.
  const auto baseline = select_scheme(cfg_.baseline_family, snr_l, cfg_.delta, table);
  TrialResult out;
  out.t_baseline = throughput(cfg_.bandwidth_hz, baseline.code, baseline.scheme, 1.0);
  out.t_jammed = out.t_baseline;
  out.scheme = baseline.scheme;
  out.code_rate = baseline.code.rate();

  // Jamming path SNRs.
  const bool ris_aware = cfg_.topology == PathTopology::RisAware;
  const double p_j = dbm_to_watts(cfg_.jammer_power_dbm(jsr));
  const cd h_j = ris_aware ? real.h_j2 : real.h_j1;
  const cd h_e = ris_aware ? cascaded_coefficient(real.h_sr, real.h_rj, ctx.R, phi) : real.h_e1;
  const double gamma_j = p_j / p_t * snr_ref * db_to_linear(cfg_.jam_link_gain_db) * std::norm(h_j);
  const double gamma_e = ris_aware ? p_t * std::norm(h_e) / sigma2
                                   : snr_ref * db_to_linear(cfg_.eavesdrop_gain_db) * std::norm(h_e);
  const double snr_j = snr_jamming(gamma_e, gamma_j);

  JammerSpec spec;
  spec.model = model;
  spec.amp_gain = cfg_.amp_gain;
  spec.delay_samples = tau;
  spec.power_dbm = cfg_.jammer_power_dbm(jsr);
  spec.cycle_period = cfg_.cycle_period;
  const double jam_amp = std::sqrt(snr_j * sigma2 / spec.mean_power_factor());
  const cd jam_coeff = std::polar(jam_amp, std::arg(h_e * h_j));

  // y[n] = legit x[n] + c_J A x[n - tau] + w[n]
  auto receive = [&](const VectorXcd& x, double noise) {
    VectorXcd y = jam_coeff * jammer_transform(spec, x, rng);
    y.head(x.size()) += legit * x;
    add_noise(y, noise, rng);
    return y;
  };

  // Frame under jamming.
  const Frame frame1 = build_frame(baseline.scheme, baseline.code, F, P, rng);
  const VectorXcd y1 = receive(frame1.symbols, sigma2);
  const FrameDecode dec1 = decode_frame(y1.head(F) / legit, frame1);
  VectorXcd residual = y1;
  residual.head(F) -= legit * dec1.reference;
  const DelayEstimate loc = locate_replica(dec1.reference, residual, cfg_.search_bound());
  // Only the replica is left once the legitimate frame has ended.
  const int tail = std::min(std::max(loc.tau, 1), static_cast<int>(y1.size()) - F);
  const double tail_jnr = tail > 0 ? y1.segment(F, tail).squaredNorm() / (tail * sigma2) - 1.0 : 0.0;
  const bool detected = detect_jamming(dec1.failure) && loc.significance > cfg_.detection_threshold &&
                        tail_jnr >= db_to_linear(cfg_.detection_jnr_db);
  if (!detected && !force_analysis) return out;

  out.detected = detected;
  out.tau_error = std::abs(loc.tau - tau);
  const int tau_hat = std::max(loc.tau, 1);
  const auto pattern = pilot_pattern(P);
  const VectorXcd pilot = pilot_symbols(pattern);
  const double p_jam = snr_j * sigma2;  // received jamming power
  const double p_leg = p_t * std::norm(h_l);

  Analysis an;
  // Similarity is measured on the symbols the receiver could verify.
  auto classify = [&](const VectorXcd& jam_aligned, const FrameDecode& legit_dec, double noise) {
    const double jnr = jam_aligned.squaredNorm() / (static_cast<double>(jam_aligned.size()) * noise) - 1.0;
    if (jnr < db_to_linear(cfg_.classify_jnr_db)) return JammerClass::Unknown;
    const VectorXcd mask = legit_dec.verified.cast<cd>();
    const VectorXcd norm = normalize_jam_stream(jam_aligned, pilot, noise).cwiseProduct(mask);
    const VectorXcd ref = legit_dec.reference.cwiseProduct(mask);
    const auto sim = similarity_ratio(norm, ref, static_cast<int>(ref.size()));
    const auto inv = count_pilot_inversions(jam_aligned.head(P), pattern);
    return classify_jammer(sim, inv, cfg_.thresholds);
  };

  bool done = false;
  if (cfg_.orthogonality == Orthogonality::Spatial) {
    try {
      const ReceiveArray array{cfg_.antennas};
      const int m = cfg_.antennas;
      const double th_l = deg_to_rad(cfg_.legit_aoa_deg);
      const double th_j = deg_to_rad(cfg_.jam_aoa_deg);
      const Frame frame2 = build_frame(baseline.scheme, baseline.code, F, P, rng);
      VectorXcd legit_stream = VectorXcd::Zero(F + tau);
      legit_stream.head(F) = legit * frame2.symbols;
      const VectorXcd jam_stream = jam_coeff * jammer_transform(spec, frame2.symbols, rng);
      const MatrixXcd Y = array_receive(legit_stream, array, th_l, 0.0, rng) +
                          array_receive(jam_stream, array, th_j, m * sigma2, rng);

      const auto angles = estimate_aoa(Y, 2);
      const bool first_is_legit = std::abs(angles[0] - th_l) <= std::abs(angles[1] - th_l);
      const double est_l = first_is_legit ? angles[0] : angles[1];
      const double est_j = first_is_legit ? angles[1] : angles[0];
      const auto sep = separate_spatial(Y, est_l, est_j);

      const VectorXcd s_l = array.steering(th_l);
      const VectorXcd s_j = array.steering(th_j);
      const double n_l = m * sigma2 * sep.w_legit.squaredNorm();
      const double n_j = m * sigma2 * sep.w_jam.squaredNorm();
      an.sinr_l = p_leg * std::norm(sep.w_legit.dot(s_l)) / (p_jam * std::norm(sep.w_legit.dot(s_j)) + n_l);
      an.sinr_j = p_jam * std::norm(sep.w_jam.dot(s_j)) / (p_leg * std::norm(sep.w_jam.dot(s_l)) + n_j);
      an.payload_fraction = 1.0;
      an.sinr_tolerate = p_leg / (p_jam * std::norm(s_l.dot(s_j)) / (m * m) + sigma2);
      an.separated = true;

      const FrameDecode dec2 = decode_frame(sep.legit.head(F) / legit, frame2, 1.0 / an.sinr_l);
      const int start = std::min<int>(tau_hat, static_cast<int>(sep.jam.size()) - F);
      an.verdict = classify(sep.jam.segment(start, F), dec2, n_j);
      done = true;
    } catch (const SeparationError&) {
    } catch (const CapabilityError&) {
    }
  }

  if (!done) {
    const auto sched = partition_temporal(F, tau_hat, CycleTracker{});
    const int b = sched.length;
    an.sinr_l = snr_l;
    an.sinr_j = snr_j;
    an.payload_fraction = sched.payload_fraction;
    an.sinr_tolerate = snr_l / (1.0 + snr_j);
    if (b > P) {
      const Frame frame2 = build_frame(baseline.scheme, baseline.code, b, P, rng);
      const VectorXcd y2 = receive(frame2.symbols, sigma2);
      const FrameDecode dec2 = decode_frame(y2.head(b) / legit, frame2, 1.0 / snr_l);
      const int start = std::min<int>(tau_hat, static_cast<int>(y2.size()) - b);
      an.verdict = classify(y2.segment(start, b), dec2, sigma2);
    }
  }

  out.verdict = an.verdict;
  out.classified_correct = matches(an.verdict, model);
  out.separated = an.separated;
  if (!detected) return out;

  // Adaptation: the verdict picks the remapped family and the error model.
  const ModScheme remapped = remap_modulation(an.verdict, baseline.scheme);
  auto planned_ber = [&](JammerClass cls) -> BerModel {
    switch (cls) {
      case JammerClass::DRFM:
      case JammerClass::PS:
        return [&](const ModScheme& s) { return ber_awgn(s, an.sinr_l + an.sinr_j); };
      case JammerClass::AS:
        return [&](const ModScheme& s) { return ber_with_amplitude_jitter(s, an.sinr_l, an.sinr_j); };
      case JammerClass::Unknown: break;
    }
    return [&](const ModScheme& s) { return ber_awgn(s, an.sinr_l); };
  };
  const auto decision = select_scheme(remapped.family, planned_ber(an.verdict), cfg_.delta, table);

  // Combining gains only materialise when the verdict matches the jammer actually present.
  double realized_residual = decision.residual;
  if (an.verdict != JammerClass::Unknown && !matches(an.verdict, model)) {
    const ModScheme& s = decision.scheme;
    double ber = ber_awgn(s, an.sinr_l);
    if (model == JammerModel::DRFM) ber = ber_awgn(s, an.sinr_l + an.sinr_j);
    else if (model == JammerModel::AS && s.family == ModFamily::PSK) ber = ber_with_amplitude_jitter(s, an.sinr_l, an.sinr_j);
    else if (model == JammerModel::PS && s.family == ModFamily::ASK) ber = ber_awgn(s, an.sinr_l + an.sinr_j);
    realized_residual = residual_error(decision.code, ser_from_ber(ber, s.order));
  }
  const bool delivered = decision.compliant ? realized_residual <= cfg_.delta : realized_residual <= decision.residual;

  // Riding out a weak jammer can beat paying for the separation.
  const auto tolerate = select_scheme(cfg_.baseline_family, an.sinr_tolerate, cfg_.delta, table);
  const double t_tolerate = throughput(cfg_.bandwidth_hz, tolerate.code, tolerate.scheme, 1.0);
  const double t_planned = throughput(cfg_.bandwidth_hz, decision.code, decision.scheme, an.payload_fraction);
  if (t_tolerate > t_planned) {
    out.scheme = tolerate.scheme;
    out.code_rate = tolerate.code.rate();
    out.payload_fraction = 1.0;
    out.t_jammed = t_tolerate;
    return out;
  }

  out.scheme = decision.scheme;
  out.code_rate = decision.code.rate();
  out.payload_fraction = an.payload_fraction;
  out.t_jammed = delivered ? t_planned : 0.0;
  return out;
}

TrialResult run_trial(const ExperimentConfig& cfg, double jsr, JammerModel model, int ris_size,
                      std::uint64_t seed) {
  ExperimentConfig c = cfg;
  if (std::find(c.ris_sizes.begin(), c.ris_sizes.end(), ris_size) == c.ris_sizes.end()) c.ris_sizes.push_back(ris_size);
  return Simulator(std::move(c)).run_trial(jsr, model, ris_size, seed);
}

std::uint64_t trial_seed(std::uint64_t master, JammerModel model, std::size_t ris_idx, std::size_t jsr_idx, int trial) {
  return derive_seed(master, static_cast<std::uint64_t>(model), ris_idx, jsr_idx, static_cast<std::uint64_t>(trial));
}

SweepRecord aggregate(const std::vector<TrialResult>& trials, double jsr, JammerModel model, PathTopology topology,
                      int ris_size) {
  if (trials.empty()) throw DomainError("aggregate: no trials");
  const double n = static_cast<double>(trials.size());
  SweepRecord r;
  r.jsr_db = jsr;
  r.jammer = model;
  r.topology = topology;
  r.ris_size = ris_size;

  double sum_l = 0, sum_j = 0, det = 0, cls = 0, tau_sum = 0, rate = 0, frac = 0;
  std::map<std::string, int> names;
  for (const auto& t : trials) {
    sum_l += t.t_baseline;
    sum_j += t.t_jammed;
    rate += t.code_rate;
    frac += t.payload_fraction;
    ++names[t.scheme.name()];
    if (t.detected) {
      ++det;
      cls += t.classified_correct;
      tau_sum += t.tau_error.value_or(0);
    }
  }
  r.t_baseline = sum_l / n;
  r.t_jammed = sum_j / n;
  r.gain = r.t_baseline > 0.0 ? r.t_jammed / r.t_baseline : 1.0;
  r.detect_rate = det / n;
  r.classify_rate = det > 0 ? cls / det : 0.0;
  r.tau_err = det > 0 ? tau_sum / det : std::numeric_limits<double>::quiet_NaN();
  r.code_rate = rate / n;
  r.payload_fraction = frac / n;
  r.modulation = std::max_element(names.begin(), names.end(), [](const auto& a, const auto& b) {
                   return a.second < b.second;
                 })->first;

  if (trials.size() > 1 && r.t_baseline > 0.0) {
    double mean_d = 0.0;
    for (const auto& t : trials) mean_d += t.t_jammed - r.gain * t.t_baseline;
    mean_d /= n;
    double var = 0.0;
    for (const auto& t : trials) var += std::pow(t.t_jammed - r.gain * t.t_baseline - mean_d, 2);
    var /= n - 1.0;
    r.stderr_gain = std::sqrt(var / n) / r.t_baseline;
  }
  return r;
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, int jobs) { return run_sweep(Simulator(cfg), jobs); }

std::vector<SweepRecord> run_sweep(const Simulator& sim, int jobs) {
  const auto& cfg = sim.config();
  struct Point {
    JammerModel model;
    std::size_t ris_idx;
    std::size_t jsr_idx;
  };
  std::vector<JammerModel> models = cfg.jammer_models;
  std::sort(models.begin(), models.end());
  models.erase(std::unique(models.begin(), models.end()), models.end());
  std::vector<std::size_t> ris_order(cfg.ris_sizes.size());
  for (std::size_t i = 0; i < ris_order.size(); ++i) ris_order[i] = i;
  std::stable_sort(ris_order.begin(), ris_order.end(),
                   [&](std::size_t a, std::size_t b) { return cfg.ris_sizes[a] < cfg.ris_sizes[b]; });
  std::vector<std::size_t> jsr_order(cfg.jsr_grid_db.size());
  for (std::size_t i = 0; i < jsr_order.size(); ++i) jsr_order[i] = i;
  std::stable_sort(jsr_order.begin(), jsr_order.end(),
                   [&](std::size_t a, std::size_t b) { return cfg.jsr_grid_db[a] < cfg.jsr_grid_db[b]; });

  std::vector<Point> points;
  for (auto m : models)
    for (auto ri : ris_order)
      for (auto ji : jsr_order) points.push_back({m, ri, ji});

  const std::size_t per_point = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = points.size() * per_point;
  std::vector<TrialResult> results(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const auto& p = points[i / per_point];
      const int trial = static_cast<int>(i % per_point);
      try {
        results[i] = sim.run_trial(cfg.jsr_grid_db[p.jsr_idx], p.model, cfg.ris_sizes[p.ris_idx],
                                   trial_seed(cfg.seed, p.model, p.ris_idx, p.jsr_idx, trial));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };
  const int workers = std::max(1, jobs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SweepRecord> records;
  records.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    std::vector<TrialResult> chunk(results.begin() + static_cast<std::ptrdiff_t>(k * per_point),
                                   results.begin() + static_cast<std::ptrdiff_t>((k + 1) * per_point));
    records.push_back(aggregate(chunk, cfg.jsr_grid_db[p.jsr_idx], p.model, cfg.topology, cfg.ris_sizes[p.ris_idx]));
  }
  return records;
}

void write_csv(const std::vector<SweepRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    const std::string tau = std::isnan(r.tau_err) ? "nan" : fmt::format("{:.3f}", r.tau_err);
    out << fmt::format("{:g},{},{},{},{:.3f},{:.3f},{:.6f},{:.4f},{:.4f},{},{},{:.6f},{:.6f},{:.6f}\n", r.jsr_db,
                       to_string(r.jammer), to_string(r.topology), r.ris_size, r.t_baseline, r.t_jammed, r.gain,
                       r.detect_rate, r.classify_rate, tau, r.modulation, r.code_rate, r.payload_fraction,
                       r.stderr_gain);
  }
}

void emit_csv(const std::vector<SweepRecord>& records, const std::string& path) {
  if (records.empty()) throw DomainError("emit_csv: no records");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path));
  write_csv(records, out);
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path));
}

std::optional<double> crossover_jsr(const std::vector<SweepRecord>& records, JammerModel model, int ris_size) {
  std::optional<double> best;
  for (const auto& r : records)
    if (r.jammer == model && r.ris_size == ris_size && is_antifragile(r.gain) && (!best || r.jsr_db < *best))
      best = r.jsr_db;
  return best;
}

std::string emit_summary(const std::vector<SweepRecord>& records) {
  if (records.empty()) throw DomainError("emit_summary: no records");
  std::string out;
  std::vector<std::pair<JammerModel, int>> series;
  for (const auto& r : records)
    if (std::find(series.begin(), series.end(), std::pair{r.jammer, r.ris_size}) == series.end())
      series.emplace_back(r.jammer, r.ris_size);

  for (const auto& [model, m] : series) {
    std::vector<const SweepRecord*> rows;
    for (const auto& r : records)
      if (r.jammer == model && r.ris_size == m) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->jsr_db < b->jsr_db; });

    const auto cross = crossover_jsr(records, model, m);
    out += fmt::format("{} M={} ({}): ", to_string(model), m, to_string(rows.front()->topology));
    if (!cross) {
      out += "no antifragile region\n";
      continue;
    }
    out += fmt::format("crossover at {:g} dB; antifragile JSR", *cross);
    for (std::size_t i = 0; i < rows.size();) {
      if (!is_antifragile(rows[i]->gain)) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < rows.size() && is_antifragile(rows[j + 1]->gain)) ++j;
      out += fmt::format(" [{:g}, {:g}]", rows[i]->jsr_db, rows[j]->jsr_db);
      i = j + 1;
    }
    out += " dB\n";
  }

  const auto best = std::max_element(records.begin(), records.end(),
                                     [](const auto& a, const auto& b) { return a.gain < b.gain; });
  out += fmt::format("max gain {:.3f} ({} M={} JSR={:g} dB, {})\n", best->gain, to_string(best->jammer),
                     best->ris_size, best->jsr_db, best->modulation);
  return out;
}

}  // namespace antifrag
