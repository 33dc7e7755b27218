#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssstab/classifiers.hpp"
#include "ssstab/dataset.hpp"
#include "ssstab/metrics.hpp"
#include "ssstab/modal.hpp"

// End-to-end runs behind the command-line tool: dataset generation,
// training with evaluation, and the benchmark sweep.
namespace ssstab::pipeline {

enum class IslandingPolicy { discard, label_unstable };
enum class DataSource { grid, synthetic };

std::string islanding_name(IslandingPolicy p);
IslandingPolicy parse_islanding(const std::string& name);
std::string source_name(DataSource s);
DataSource parse_source(const std::string& name);

struct RunConfig {
  std::string case_path = "ieee14_standard.csv";  // file path, or a case bundled under data/
  std::uint64_t budget = 20000;
  std::uint64_t seed = 0;
  modal::LabelThresholds thresholds{};
  IslandingPolicy islanding = IslandingPolicy::discard;
  DataSource source = DataSource::grid;
  std::size_t synthetic_per_class = 3400;
  double snap_tolerance = 1e-9;  // eigenvalue components below this become exactly zero
  std::vector<double> fractions{0.25, 0.5, 0.75, 1.0};
  std::vector<int> layer_counts{1, 2, 3, 5, 7, 10};
  int hidden_width = 100;
  int mlp_epochs = 30;
  int knn_k = 5;
  double train_fraction = 0.75;
  int repeats = 3;
  std::string out_dir = "out";

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Fields present in `j` override `base`; unknown keys raise UsageError.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Resolves a case argument: an existing file, else a file bundled under data/.
std::filesystem::path resolve_case(const std::string& case_path);

struct GenReport {
  std::string source;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  std::map<std::size_t, std::size_t> scenarios_per_order;  // k -> sampled count
  std::size_t scenarios = 0;
  std::size_t islanding = 0;
  std::size_t discarded = 0;
  std::array<std::size_t, modal::kLabelCount> histogram{};
  std::size_t rows = 0;
};

struct GenResult {
  std::vector<modal::DampingRecord> records;
  GenReport report;
};

/// Samples contingencies, linearizes each, labels every eigenvalue. Islanding
/// scenarios are dropped (`discard`) or contribute one unstable record at +1
/// (`label_unstable`). The synthetic source bypasses the grid.
GenResult generate_records(const RunConfig& cfg);
nlohmann::json report_json(const GenReport& report);

struct TrainOutcome {
  classifiers::ClassifierModel model;
  metrics::ScoreReport report;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// Balance, stratified split, fit, timed evaluation. `params` holds
/// algorithm-specific hyperparameters as text (e.g. "k" -> "5", "hidden" -> "100,100").
TrainOutcome train_and_evaluate(const dataset::Dataset& ds, classifiers::Kind kind,
                                const std::map<std::string, std::string>& params, std::uint64_t seed,
                                double train_fraction = 0.75, int repeats = 3);

/// Scores without timing; the timing lives in `timing_json`.
nlohmann::json score_json(const metrics::ScoreReport& report);
nlohmann::json timing_json(const metrics::ScoreReport& report);

metrics::BenchConfig bench_config(const RunConfig& cfg);

/// Parses "a,b,c" into numbers; UsageError on malformed entries.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace ssstab::pipeline
