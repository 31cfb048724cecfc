#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbmexit/analysis.hpp"
#include "fbmexit/geometry.hpp"
#include "fbmexit/kernel.hpp"

namespace fbmexit::cli {

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Experiment {
  Exponent1d,
  ExponentBall,
  ExponentCube,
  RecordInequality,
  Fernique,
  NetBridge,
  AdGap,
  RkhsNorm,
  OracleCheck,
  HalfcubeExplore,
};

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

struct ExperimentInfo {
  Experiment id;
  std::string name;
  std::string claim;
  std::string runtime_class;
  bool gating = true;  ///< false for exploratory experiments
};

/// Stable table of every runnable experiment.
const std::vector<ExperimentInfo>& list_experiments();
const ExperimentInfo& info(Experiment e);
void print_experiment_table(std::ostream& os);

using KeyValues = std::map<std::string, std::string>;

/// Flat "key = value" text; '#' starts a comment, blank lines are ignored.
KeyValues parse_key_values(std::istream& is);
/// Applies one "key=value" override.
void apply_override(KeyValues& kv, const std::string& assignment);

struct ExperimentConfig {
  Experiment experiment = Experiment::Exponent1d;
  int d = 1;
  HurstIndex H{0.5};
  DomainKind domain = DomainKind::Interval;
  int half_dims = 0;
  std::vector<double> T_list;
  std::vector<double> levels;
  double level = 1.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double q = 0.5;
  double gap = 1.0;
  double spacing = 1.0;
  double dense_spacing = 0.25;
  double T0 = 8.0;
  RadialNetOptions radial{};
  BumpProfile bump = BumpProfile::QuinticSmoothstep;
  NormReading reading = NormReading::Squared;
  double dilation = 2.0;
  int n_configs = 20;
  std::string output_dir;  ///< empty: FBMEXIT_OUTPUT_DIR, then "results"
  KeyValues raw;           ///< effective key-value set after defaults
};

/// Fills per-experiment defaults, then validates every field against the
/// preconditions of the modules it feeds. Throws ConfigError.
ExperimentConfig make_config(const KeyValues& kv);

struct CsvRow {
  std::string experiment;
  int d = 0;
  double H = 0.0;
  std::string domain;
  double T_or_level = 0.0;
  std::size_t N = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_hits = -1;
};

inline constexpr const char* kCsvHeader = "experiment,d,H,domain,T_or_level,N,n_samples,seed,value,stderr,n_hits";
void write_csv_row(std::ostream& os, const CsvRow& row);

struct ExperimentResult {
  nlohmann::json results = nlohmann::json::object();
  bool pass = false;
  bool degenerate = false;  ///< an estimate had too few hits; reported, not an invariant failure
  std::vector<std::string> warnings;
  std::vector<CsvRow> rows;
  std::vector<PlotPoint> plot;
  std::string plot_header;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// {experiment, paper_ref, config, results, pass}.
nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentResult& res);

struct Artifacts {
  std::filesystem::path csv, json, plot;
};

std::filesystem::path output_dir(const ExperimentConfig& cfg);
/// Appends CSV rows (header on first write) and writes the JSON summary and plot data.
Artifacts write_artifacts(const ExperimentConfig& cfg, const ExperimentResult& res);

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInvariant = 3;

/// Exit status for a finished run: invariant failures of gating experiments give 3.
int exit_status(const ExperimentConfig& cfg, const ExperimentResult& res);

/// Command-line entry point: subcommands run, list, validate-config.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbmexit::cli
