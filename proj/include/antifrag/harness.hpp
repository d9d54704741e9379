#pragma once

// End-to-end trial pipeline, JSR x jammer x RIS-size sweeps and their CSV / summary output.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "antifrag/adaptation.hpp"
#include "antifrag/channel.hpp"
#include "antifrag/jammer.hpp"
#include "antifrag/receiver.hpp"
#include "antifrag/waveform.hpp"

namespace antifrag {

enum class Orthogonality { Spatial, Temporal, None };
enum class CodeMode { Adaptive, Fixed };

std::string_view to_string(Orthogonality o);
std::string_view to_string(CodeMode c);

struct ExperimentConfig {
  // [experiment]
  PathTopology topology = PathTopology::SourceAware;
  std::vector<JammerModel> jammer_models{JammerModel::DRFM, JammerModel::PS, JammerModel::AS};
  std::vector<int> ris_sizes{64};
  std::vector<double> jsr_grid_db;  ///< defaults to -20..20 dB in 1 dB steps
  double baseline_snr_db = 7.0;
  int reference_ris_size = 64;  ///< RIS size at which the mean legitimate SNR equals baseline_snr_db
  Orthogonality orthogonality = Orthogonality::Spatial;
  CodeMode code_mode = CodeMode::Adaptive;
  double fixed_code_rate = 0.94;
  int trials = 200;
  std::uint64_t seed = 1;
  double bandwidth_hz = 1.0e6;
  ModFamily baseline_family = ModFamily::PSK;

  // [channel]
  RisLinkConfig link{64, 18.0, 7.0, 2.7, 0.05, 28e9, 0.5, 0.95};
  RicianParams jammer_channel{4.0, 1.0, 1};

  // [jammer]
  double tx_power_dbm = 20.0;
  double jammer_min_dbm = 0.0;
  double jammer_max_dbm = 40.0;
  double amp_gain = 1.0;
  int delay_samples = 0;  ///< 0 selects frame_len / 2
  std::optional<int> cycle_period;
  double eavesdrop_gain_db = 3.0;  ///< source-to-jammer link relative to the calibrated legitimate link
  double jam_link_gain_db = 6.0;   ///< jammer-to-destination link, same reference

  // [waveform]
  int frame_len = 4096;
  int pilot_len = 256;

  // [receiver]
  int antennas = 8;
  double legit_aoa_deg = 0.0;
  double jam_aoa_deg = 6.0;
  ClassifierThresholds thresholds;
  double detection_threshold = 40.0;
  double detection_jnr_db = -10.0;  ///< replica tail after the frame must clear the noise floor by this much
  double classify_jnr_db = 0.0;     ///< weaker jam streams are left unclassified
  int gamma_max = 0;  ///< 0 selects frame_len / 2

  // [adaptation]
  double delta = -0.005;
  std::vector<RsCode> codes = default_code_table();

  ExperimentConfig();

  void validate() const;
  int jammer_delay() const { return delay_samples > 0 ? delay_samples : frame_len / 2; }
  int search_bound() const { return gamma_max > 0 ? gamma_max : frame_len / 2; }
  std::vector<RsCode> code_table() const;
  /// Jammer power for a JSR point, clamped to [jammer_min_dbm, jammer_max_dbm].
  double jammer_power_dbm(double jsr) const;
  /// One line per JSR point whose jammer power had to be clamped.
  std::vector<std::string> warnings() const;
};

/// INI-style text: `[section]` headers and `key = value` lines; unknown sections or keys raise ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

struct TrialResult {
  double t_baseline = 0.0;
  double t_jammed = 0.0;
  bool detected = false;
  bool classified_correct = false;
  JammerClass verdict = JammerClass::Unknown;
  std::optional<int> tau_error;
  ModScheme scheme;
  double code_rate = 0.0;
  double payload_fraction = 1.0;
  bool separated = false;  ///< spatial separation succeeded
};

/// Per-RIS-size state shared by every trial: correlation root and calibrated noise floor.
class Simulator {
 public:
  explicit Simulator(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  double noise_var() const { return noise_var_; }

  TrialResult run_trial(double jsr, JammerModel model, int ris_size, std::uint64_t trial_seed) const;

  /// Classification only, with the analysis forced on regardless of the detection trigger.
  JammerClass classify_once(double jsr, JammerModel model, int ris_size, std::uint64_t trial_seed) const;

 private:
  struct SizeContext {
    RisLinkConfig link;
    CorrelationMatrix<double> R;
  };
  struct Analysis;

  const SizeContext& context(int ris_size) const;
  TrialResult simulate(double jsr, JammerModel model, int ris_size, std::uint64_t seed, bool force_analysis) const;

  ExperimentConfig cfg_;
  std::map<int, SizeContext> contexts_;
  double noise_var_ = 1.0;
};

TrialResult run_trial(const ExperimentConfig& cfg, double jsr, JammerModel model, int ris_size,
                      std::uint64_t trial_seed);

struct SweepRecord {
  double jsr_db = 0.0;
  JammerModel jammer = JammerModel::DRFM;
  PathTopology topology = PathTopology::SourceAware;
  int ris_size = 0;
  double t_baseline = 0.0;
  double t_jammed = 0.0;
  double gain = 1.0;
  double detect_rate = 0.0;
  double classify_rate = 0.0;
  double tau_err = 0.0;  ///< mean |tau_hat - tau| over detected trials, NaN without detections
  std::string modulation;
  double code_rate = 0.0;
  double payload_fraction = 1.0;
  double stderr_gain = 0.0;
};

std::uint64_t trial_seed(std::uint64_t master, JammerModel model, std::size_t ris_idx, std::size_t jsr_idx, int trial);

SweepRecord aggregate(const std::vector<TrialResult>& trials, double jsr, JammerModel model, PathTopology topology,
                      int ris_size);

/// Rows ordered by (jammer, ris_size, jsr); identical for any `jobs`.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, int jobs = 1);
std::vector<SweepRecord> run_sweep(const Simulator& sim, int jobs = 1);

inline constexpr const char* kCsvHeader =
    "jsr_db,jammer,topology,ris_size,t_baseline,t_jammed,gain,detect_rate,classify_rate,tau_err,modulation,"
    "code_rate,payload_fraction,stderr_gain";

void write_csv(const std::vector<SweepRecord>& records, std::ostream& out);
void emit_csv(const std::vector<SweepRecord>& records, const std::string& path);

/// Smallest antifragile JSR for one (jammer, ris_size) series; none when every gain <= 1.
std::optional<double> crossover_jsr(const std::vector<SweepRecord>& records, JammerModel model, int ris_size);

std::string emit_summary(const std::vector<SweepRecord>& records);

}  // namespace antifrag
