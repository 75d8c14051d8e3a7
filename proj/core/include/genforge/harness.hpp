#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "genforge/config.hpp"
#include "genforge/corpus.hpp"
#include "genforge/decode.hpp"
#include "genforge/metrics.hpp"
#include "genforge/ngram_lm.hpp"
#include "genforge/objectives.hpp"

namespace genforge {

/// One fully resolved pipeline: fit the toy LM on the train split, decode the
/// evaluation split, score it. Every field maps to one config key; see
/// experiment_keys().
struct ExperimentConfig {
  std::string dataset;
  DataFormat format = DataFormat::jsonl;
  std::string train_split = "train";
  std::string eval_split = "test";
  TokenizerSpec tokenizer;

  NgramLmOptions lm;
  /// Train examples drawn per seed without replacement; 0 uses all of them.
  std::size_t lm_subsample = 0;

  /// Optional extra LM data: targets of corrupted train sources (reserved
  /// tokens dropped). Disabled when unset.
  std::optional<CorruptionSpec> corruption;

  DecodeParams decode;
  std::vector<std::string> metrics = {"bleu", "rouge-1", "rouge-2", "rouge-l"};
  std::string objective = "rouge-l";
  BleuConfig bleu;
  std::vector<std::uint64_t> seeds = {2020, 2021, 2022};
  /// Threads for decoding and scoring inside one trial.
  std::size_t workers = 1;

  /// Throws ConfigError: empty seeds, objective not among metrics, bad
  /// decode or LM parameters.
  void validate() const;
};

/// Every key experiment_from_config() accepts, sorted.
const std::vector<std::string>& experiment_keys();

/// Defaults overlaid with `config`. Unknown keys raise ConfigError.
ExperimentConfig experiment_from_config(const Config& config);
/// Every key with its resolved value; experiment_from_config(to_config(e))
/// reproduces e.
Config to_config(const ExperimentConfig& experiment);

struct TrialResult {
  std::size_t index = 0;
  /// Searched parameters in space order, values as config text.
  std::vector<std::pair<std::string, std::string>> assignment;
  std::string objective;
  std::vector<std::uint64_t> seeds;
  std::vector<double> objective_values;
  double mean = 0.0;
  double std = 0.0;
  std::vector<MetricReport> reports;
  /// Mean and sample std per metric across seeds.
  MetricReport aggregate;
  /// Informational only; excluded from result tables.
  double wall_seconds = 0.0;
};

/// Runs the pipeline once per seed. Stage failures raise StageError tagged
/// load, corrupt, fit, decode or evaluate.
TrialResult run_experiment(const ExperimentConfig& config);

/// Elementwise mean and sample std of the corpus scores. Throws
/// AlignmentError when the metric sets differ and ArgumentError when empty.
MetricReport aggregate_seeds(std::span<const MetricReport> reports);

/// Builds a TrialResult from per-seed reports: objective values, mean, std.
TrialResult summarize_trial(const std::string& objective, std::span<const std::uint64_t> seeds,
                            std::vector<MetricReport> reports);

// ---------------------------------------------------------------------------
// Search

enum class Scale { linear, log };

struct SearchParam {
  std::string name;
  /// Explicit values (config text). Empty for ranges.
  std::vector<std::string> values;
  double lo = 0.0;
  double hi = 0.0;
  Scale scale = Scale::linear;
  bool integer = false;

  bool is_range() const noexcept { return values.empty(); }
};

/// Space files use one parameter per line:
///   decode.beam_size = 1, 3, 5
///   decode.length_penalty = range(0.5, 2.0)
///   lm.add_k = range(0.001, 0.1, log)
///   lm.order = range(2, 4, linear, int)
/// Parameters keep the (sorted) key order of the file.
struct SearchSpace {
  std::vector<SearchParam> params;

  static SearchSpace from_config(const Config& config);
  /// Throws ArgumentError on an empty list or a range with lo >= hi (or
  /// lo <= 0 on a log scale).
  void validate() const;
};

/// Maps a fully assigned config to a trial outcome; the default parses it
/// with experiment_from_config and calls run_experiment.
using TrialRunner = std::function<TrialResult(const Config&)>;

struct SearchOptions {
  /// Concurrent trials; 0 means default_workers().
  std::size_t workers = 0;
  TrialRunner runner;
};

struct SearchResult {
  /// Ranked: mean descending, std ascending, assignment ascending.
  std::vector<TrialResult> trials;
  /// Base config with the winning assignment applied; `workers` is dropped.
  Config best;
};

/// Worker bound from GENFORGE_WORKERS, else the hardware thread count.
/// Throws ConfigError on a malformed value.
std::size_t default_workers();

/// Full Cartesian product in space order (last parameter varies fastest).
/// Throws ArgumentError when a parameter is a range or the product is empty.
SearchResult grid_search(const SearchSpace& space, const Config& base,
                         const SearchOptions& options = {});

/// `budget` assignments; trial t draws from make_rng(mix_seed(seed, t)).
/// Lists are sampled uniformly, ranges uniformly on their scale.
SearchResult random_search(const SearchSpace& space, const Config& base, std::size_t budget,
                           std::uint64_t seed, const SearchOptions& options = {});

/// One row per trial in rank order; byte-stable for identical results.
std::string results_tsv(const SearchResult& result);
std::string results_json(const SearchResult& result);

/// Writes results.tsv, results.json and best.cfg into `dir`.
void write_search_outputs(const SearchResult& result, const std::filesystem::path& dir);

}  // namespace genforge
