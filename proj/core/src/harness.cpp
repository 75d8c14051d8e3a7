#include "genforge/harness.hpp"
#include "genforge/error.hpp"
#include "genforge/parallel.hpp"
#include "genforge/random.hpp"
#include "genforge/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

#include "json.hpp"

namespace genforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

DataFormat parse_format(std::string_view name) {
  if (name == "jsonl") return DataFormat::jsonl;
  if (name == "tsv") return DataFormat::tsv;
  throw ConfigError("unknown data format '" + std::string(name) + "' (jsonl, tsv)");
}

std::string join(const std::vector<std::string>& items, std::string_view sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string to_text(bool v) { return v ? "true" : "false"; }

std::size_t to_size(const Config& c, const std::string& key) {
  return static_cast<std::size_t>(c.get_uint(key));
}

/// Runs `fn`, rethrowing any library or standard failure tagged with `stage`.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = {
        "bleu.add_k",          "bleu.epsilon",
        "bleu.max_n",          "bleu.smoothing",
        "corrupt.mask_ratio",  "corrupt.mean_span",
        "corrupt.objective",   "corrupt.permute_sentences",
        "data.eval_split",     "data.format",
        "data.train_split",    "dataset",
        "decode.beam_size",    "decode.block_source_ngrams",
        "decode.length_penalty", "decode.max_len",
        "decode.no_repeat_ngram", "decode.strategy",
        "decode.temperature",  "decode.top_k",
        "decode.top_p",        "lm.add_k",
        "lm.copy_lambda",      "lm.order",
        "lm.subsample",        "metrics",
        "objective",           "seeds",
        "tokenizer.lowercase", "tokenizer.mode",
        "tokenizer.strip_punctuation", "workers"};
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (metrics.empty()) throw ConfigError("metrics must not be empty");
  parse_metric_list(join(metrics));
  if (std::find(metrics.begin(), metrics.end(), objective) == metrics.end())
    throw ConfigError("objective '" + objective + "' is not among the requested metrics");
  if (lm.order < 1) throw ConfigError("lm.order must be >= 1");
  if (!(lm.add_k > 0)) throw ConfigError("lm.add_k must be positive");
  if (!(lm.copy_lambda >= 0 && lm.copy_lambda < 1))
    throw ConfigError("lm.copy_lambda must lie in [0, 1)");
  try {
    decode.validate();
    bleu.validate();
    if (corruption) corruption->validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig experiment_from_config(const Config& config) {
  const auto& known = experiment_keys();
  for (const auto& [key, value] : config.values())
    if (!std::binary_search(known.begin(), known.end(), key))
      throw ConfigError("unknown config key '" + key + "'");

  ExperimentConfig e;
  const auto has = [&](const char* k) { return config.has(k); };
  try {
    if (has("dataset")) e.dataset = config.get("dataset");
    if (has("data.format")) e.format = parse_format(config.get("data.format"));
    if (has("data.train_split")) e.train_split = config.get("data.train_split");
    if (has("data.eval_split")) e.eval_split = config.get("data.eval_split");
    if (has("tokenizer.mode"))
      e.tokenizer.mode = parse_tokenizer_mode(config.get("tokenizer.mode"));
    if (has("tokenizer.lowercase")) e.tokenizer.lowercase = config.get_bool("tokenizer.lowercase");
    if (has("tokenizer.strip_punctuation"))
      e.tokenizer.strip_punctuation = config.get_bool("tokenizer.strip_punctuation");

    if (has("lm.order")) e.lm.order = to_size(config, "lm.order");
    if (has("lm.add_k")) e.lm.add_k = config.get_double("lm.add_k");
    if (has("lm.copy_lambda")) e.lm.copy_lambda = config.get_double("lm.copy_lambda");
    if (has("lm.subsample")) e.lm_subsample = to_size(config, "lm.subsample");

    const std::string corrupt = config.get_or("corrupt.objective", "none");
    if (corrupt != "none") {
      CorruptionSpec spec = CorruptionSpec::defaults(parse_objective(corrupt));
      if (has("corrupt.mask_ratio")) spec.mask_ratio = config.get_double("corrupt.mask_ratio");
      if (has("corrupt.mean_span")) spec.mean_span = config.get_double("corrupt.mean_span");
      if (has("corrupt.permute_sentences"))
        spec.permute_sentences = config.get_bool("corrupt.permute_sentences");
      e.corruption = spec;
    }

    DecodeParams& d = e.decode;
    if (has("decode.strategy")) d.strategy = parse_strategy(config.get("decode.strategy"));
    if (has("decode.beam_size")) d.beam_size = to_size(config, "decode.beam_size");
    if (has("decode.max_len")) d.max_len = to_size(config, "decode.max_len");
    if (has("decode.no_repeat_ngram")) d.no_repeat_ngram = to_size(config, "decode.no_repeat_ngram");
    if (has("decode.length_penalty")) d.length_penalty = config.get_double("decode.length_penalty");
    if (has("decode.block_source_ngrams"))
      d.block_source_ngrams = config.get_bool("decode.block_source_ngrams");
    if (has("decode.top_k")) d.top_k = to_size(config, "decode.top_k");
    if (has("decode.top_p")) d.top_p = config.get_double("decode.top_p");
    if (has("decode.temperature")) d.temperature = config.get_double("decode.temperature");

    if (has("metrics")) e.metrics = parse_metric_list(config.get("metrics"));
    if (has("objective")) e.objective = config.get("objective");
    if (has("bleu.max_n")) e.bleu.max_n = to_size(config, "bleu.max_n");
    if (has("bleu.smoothing")) e.bleu.smoothing = parse_smoothing(config.get("bleu.smoothing"));
    if (has("bleu.epsilon")) e.bleu.epsilon = config.get_double("bleu.epsilon");
    if (has("bleu.add_k")) e.bleu.add_k = config.get_double("bleu.add_k");
    if (has("seeds")) {
      e.seeds.clear();
      for (const auto& s : config.get_list("seeds")) e.seeds.push_back(parse_uint(s, "seeds"));
    }
    if (has("workers")) e.workers = std::max<std::size_t>(1, to_size(config, "workers"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  e.validate();
  return e;
}

Config to_config(const ExperimentConfig& e) {
  Config c;
  c.set("dataset", e.dataset);
  c.set("data.format", e.format == DataFormat::jsonl ? "jsonl" : "tsv");
  c.set("data.train_split", e.train_split);
  c.set("data.eval_split", e.eval_split);
  c.set("tokenizer.mode", std::string(to_string(e.tokenizer.mode)));
  c.set("tokenizer.lowercase", to_text(e.tokenizer.lowercase));
  c.set("tokenizer.strip_punctuation", to_text(e.tokenizer.strip_punctuation));
  c.set("lm.order", std::to_string(e.lm.order));
  c.set("lm.add_k", format_double(e.lm.add_k));
  c.set("lm.copy_lambda", format_double(e.lm.copy_lambda));
  c.set("lm.subsample", std::to_string(e.lm_subsample));
  if (e.corruption) {
    c.set("corrupt.objective", std::string(to_string(e.corruption->objective)));
    c.set("corrupt.mask_ratio", format_double(e.corruption->mask_ratio));
    c.set("corrupt.mean_span", format_double(e.corruption->mean_span));
    c.set("corrupt.permute_sentences", to_text(e.corruption->permute_sentences));
  } else {
    c.set("corrupt.objective", "none");
  }
  const DecodeParams& d = e.decode;
  c.set("decode.strategy", std::string(to_string(d.strategy)));
  c.set("decode.beam_size", std::to_string(d.beam_size));
  c.set("decode.max_len", std::to_string(d.max_len));
  c.set("decode.no_repeat_ngram", std::to_string(d.no_repeat_ngram));
  c.set("decode.length_penalty", format_double(d.length_penalty));
  c.set("decode.block_source_ngrams", to_text(d.block_source_ngrams));
  c.set("decode.top_k", std::to_string(d.top_k));
  c.set("decode.top_p", format_double(d.top_p));
  c.set("decode.temperature", format_double(d.temperature));
  c.set("metrics", join(e.metrics));
  c.set("objective", e.objective);
  c.set("bleu.max_n", std::to_string(e.bleu.max_n));
  c.set("bleu.smoothing", std::string(to_string(e.bleu.smoothing)));
  c.set("bleu.epsilon", format_double(e.bleu.epsilon));
  c.set("bleu.add_k", format_double(e.bleu.add_k));
  std::vector<std::string> seeds;
  for (auto s : e.seeds) seeds.push_back(std::to_string(s));
  c.set("seeds", join(seeds));
  c.set("workers", std::to_string(e.workers));
  return c;
}

MetricReport aggregate_seeds(std::span<const MetricReport> reports) {
  if (reports.empty()) throw ArgumentError("aggregate_seeds: no reports");
  std::set<std::string> names;
  for (const auto& [k, v] : reports.front().corpus) names.insert(k);
  for (std::size_t r = 1; r < reports.size(); ++r) {
    std::set<std::string> other;
    for (const auto& [k, v] : reports[r].corpus) other.insert(k);
    if (other != names) {
      std::vector<std::string> diff;
      std::set_symmetric_difference(names.begin(), names.end(), other.begin(), other.end(),
                                    std::back_inserter(diff));
      throw AlignmentError("report " + std::to_string(r) +
                           " has a different metric set; differing: " + join(diff, ", "));
    }
  }
  MetricReport out;
  out.n = reports.front().n;
  for (const auto& name : names) {
    std::vector<double> values;
    for (const auto& r : reports) values.push_back(r.corpus.at(name));
    const MeanStd ms{mean(values), sample_std(values)};
    out.corpus[name] = ms.mean;
    out.across_seeds[name] = ms;
  }
  return out;
}

TrialResult summarize_trial(const std::string& objective, std::span<const std::uint64_t> seeds,
                            std::vector<MetricReport> reports) {
  if (reports.size() != seeds.size())
    throw ArgumentError("summarize_trial: one report per seed required");
  TrialResult t;
  t.objective = objective;
  t.seeds.assign(seeds.begin(), seeds.end());
  for (const auto& r : reports) {
    const auto it = r.corpus.find(objective);
    if (it == r.corpus.end())
      throw AlignmentError("objective '" + objective + "' missing from a seed report");
    t.objective_values.push_back(it->second);
  }
  t.mean = mean(t.objective_values);
  t.std = sample_std(t.objective_values);
  t.aggregate = aggregate_seeds(reports);
  t.reports = std::move(reports);
  return t;
}

TrialResult run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  stage("config", [&] { config.validate(); });
  if (config.dataset.empty()) throw StageError("load", "no dataset configured");

  const Dataset data = stage("load", [&] { return load_dataset(config.dataset, config.format); });
  const std::vector<Example>& train = stage("load", [&] { return data.split(config.train_split); });
  const std::vector<Example>& eval = stage("load", [&] { return data.split(config.eval_split); });

  std::vector<TokenSeq> train_sources, eval_sources;
  std::vector<std::vector<TokenSeq>> train_refs;
  for (const auto& ex : train) {
    train_sources.push_back(tokenize(ex.source, config.tokenizer));
    auto& refs = train_refs.emplace_back();
    for (const auto& r : ex.references) refs.push_back(tokenize(r, config.tokenizer));
  }
  for (const auto& ex : eval) eval_sources.push_back(tokenize(ex.source, config.tokenizer));

  EvalOptions eval_options;
  eval_options.tokenizer = config.tokenizer;
  eval_options.bleu = config.bleu;
  eval_options.workers = config.workers;

  std::vector<MetricReport> reports;
  for (const std::uint64_t seed : config.seeds) {
    std::vector<std::size_t> chosen(train.size());
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    if (config.lm_subsample > 0 && config.lm_subsample < chosen.size()) {
      Rng rng = make_rng(mix_seed(seed, 1));
      for (std::size_t i = 0; i < config.lm_subsample; ++i)
        std::swap(chosen[i], chosen[i + uniform_index(rng, chosen.size() - i)]);
      chosen.resize(config.lm_subsample);
      std::sort(chosen.begin(), chosen.end());
    }

    std::vector<TokenSeq> lm_data;
    for (std::size_t i : chosen)
      lm_data.insert(lm_data.end(), train_refs[i].begin(), train_refs[i].end());

    if (config.corruption) {
      stage("corrupt", [&] {
        for (std::size_t i : chosen) {
          const TokenSeq& src = train_sources[i];
          if (src.size() < 2) continue;
          CorruptionSpec spec = *config.corruption;
          spec.seed = mix_seed(seed, 1000 + i);
          const CorruptionPair pair = corrupt(src, spec);
          TokenSeq kept;
          for (const auto& t : pair.target)
            if (!is_reserved_token(t)) kept.push_back(t);
          if (!kept.empty()) lm_data.push_back(std::move(kept));
        }
      });
    }

    const auto lm = stage("fit", [&] { return NgramLm::fit(lm_data, config.lm); });

    std::vector<Hypothesis> hyps = stage("decode", [&] {
      DecodeParams params = config.decode;
      params.seed = seed;
      return decode_batch(*lm, eval_sources, params, config.workers);
    });

    reports.push_back(stage("evaluate", [&] {
      std::vector<GenerationRecord> records;
      records.reserve(eval.size());
      for (std::size_t i = 0; i < eval.size(); ++i)
        records.push_back({eval[i].id, hyps[i].text(lm->vocabulary()), eval[i].references,
                           eval[i].source});
      return evaluate(records, config.metrics, eval_options);
    }));
  }

  TrialResult result = summarize_trial(config.objective, config.seeds, std::move(reports));
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

// ---------------------------------------------------------------------------
// Search

SearchSpace SearchSpace::from_config(const Config& config) {
  SearchSpace space;
  for (const auto& [key, raw] : config.values()) {
    SearchParam p;
    p.name = key;
    const std::string value = trim(raw);
    if (value.rfind("range(", 0) == 0) {
      if (value.back() != ')') throw ConfigError(key + ": unterminated range(...)");
      const auto args = split_list(std::string_view(value).substr(6, value.size() - 7));
      if (args.size() < 2 || args.size() > 4)
        throw ConfigError(key + ": expected range(lo, hi[, linear|log][, int])");
      p.lo = parse_double(args[0], key);
      p.hi = parse_double(args[1], key);
      for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "linear") p.scale = Scale::linear;
        else if (args[i] == "log") p.scale = Scale::log;
        else if (args[i] == "int") p.integer = true;
        else throw ConfigError(key + ": unknown range option '" + args[i] + "'");
      }
    } else {
      p.values = split_list(value);
      if (p.values.empty()) throw ConfigError(key + ": empty value list");
    }
    space.params.push_back(std::move(p));
  }
  space.validate();
  return space;
}

void SearchSpace::validate() const {
  for (const auto& p : params) {
    if (!p.is_range()) continue;
    if (!(p.lo < p.hi)) throw ArgumentError(p.name + ": range needs lo < hi");
    if (p.scale == Scale::log && !(p.lo > 0))
      throw ArgumentError(p.name + ": log range needs lo > 0");
  }
}

std::size_t default_workers() {
  if (const char* env = std::getenv("GENFORGE_WORKERS"); env && *env) {
    const std::uint64_t n = parse_uint(env, "GENFORGE_WORKERS");
    if (n == 0) throw ConfigError("GENFORGE_WORKERS must be >= 1");
    return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

using Assignment = std::vector<std::pair<std::string, std::string>>;

TrialResult default_runner(const Config& config) {
  return run_experiment(experiment_from_config(config));
}

SearchResult run_trials(const std::vector<Assignment>& assignments, const Config& base,
                        const SearchOptions& options) {
  const TrialRunner runner = options.runner ? options.runner : TrialRunner(default_runner);
  const std::size_t workers = options.workers ? options.workers : default_workers();

  std::vector<TrialResult> trials(assignments.size());
  parallel_for(assignments.size(), workers, [&](std::size_t t) {
    Config cfg = base;
    for (const auto& [k, v] : assignments[t]) cfg.set(k, v);
    TrialResult r = runner(cfg);
    r.index = t;
    r.assignment = assignments[t];
    trials[t] = std::move(r);
  });

  std::stable_sort(trials.begin(), trials.end(), [](const TrialResult& a, const TrialResult& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    if (a.std != b.std) return a.std < b.std;
    if (a.assignment != b.assignment) return a.assignment < b.assignment;
    return a.index < b.index;
  });

  SearchResult out;
  out.trials = std::move(trials);
  out.best = base;
  // Thread counts never change results, so they stay out of the outputs.
  out.best.erase("workers");
  if (!out.trials.empty())
    for (const auto& [k, v] : out.trials.front().assignment) out.best.set(k, v);
  return out;
}

std::string draw(const SearchParam& p, Rng& rng) {
  if (!p.is_range()) return p.values[uniform_index(rng, p.values.size())];
  if (p.integer) {
    const auto lo = static_cast<std::int64_t>(std::ceil(p.lo));
    const auto hi = static_cast<std::int64_t>(std::floor(p.hi));
    if (hi < lo) throw ArgumentError(p.name + ": integer range holds no integer");
    if (p.scale == Scale::linear)
      return std::to_string(lo + static_cast<std::int64_t>(
                                     uniform_index(rng, static_cast<std::size_t>(hi - lo + 1))));
    const double x = std::exp(std::log(static_cast<double>(lo)) +
                              uniform01(rng) * (std::log(static_cast<double>(hi) + 1) -
                                                std::log(static_cast<double>(lo))));
    return std::to_string(std::clamp(static_cast<std::int64_t>(std::floor(x)), lo, hi));
  }
  const double u = uniform01(rng);
  double x = p.scale == Scale::linear
                 ? p.lo + u * (p.hi - p.lo)
                 : std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)));
  x = std::clamp(x, p.lo, p.hi);
  return format_double(x);
}

}  // namespace

SearchResult grid_search(const SearchSpace& space, const Config& base,
                         const SearchOptions& options) {
  space.validate();
  for (const auto& p : space.params)
    if (p.is_range())
      throw ArgumentError("grid search needs value lists; '" + p.name + "' is a range");

  std::vector<Assignment> assignments = {{}};
  for (const auto& p : space.params) {
    std::vector<Assignment> next;
    for (const auto& partial : assignments)
      for (const auto& v : p.values) {
        Assignment a = partial;
        a.emplace_back(p.name, v);
        next.push_back(std::move(a));
      }
    assignments = std::move(next);
  }
  if (assignments.empty()) throw ArgumentError("grid search over an empty product");
  return run_trials(assignments, base, options);
}

SearchResult random_search(const SearchSpace& space, const Config& base, std::size_t budget,
                           std::uint64_t seed, const SearchOptions& options) {
  if (budget == 0) throw ArgumentError("random search budget must be >= 1");
  space.validate();
  std::vector<Assignment> assignments;
  for (std::size_t t = 0; t < budget; ++t) {
    Rng rng = make_rng(mix_seed(seed, t));
    Assignment a;
    for (const auto& p : space.params) a.emplace_back(p.name, draw(p, rng));
    assignments.push_back(std::move(a));
  }
  return run_trials(assignments, base, options);
}

std::string results_tsv(const SearchResult& result) {
  std::vector<std::string> params;
  std::vector<std::uint64_t> seeds;
  if (!result.trials.empty()) {
    for (const auto& [k, v] : result.trials.front().assignment) params.push_back(k);
    seeds = result.trials.front().seeds;
  }
  std::string out = "rank\ttrial";
  for (const auto& p : params) out += "\t" + p;
  out += "\tobjective\tmean\tstd";
  for (auto s : seeds) out += "\tseed_" + std::to_string(s);
  out += "\n";
  for (std::size_t r = 0; r < result.trials.size(); ++r) {
    const TrialResult& t = result.trials[r];
    out += std::to_string(r + 1) + "\t" + std::to_string(t.index);
    for (const auto& [k, v] : t.assignment) out += "\t" + v;
    out += "\t" + t.objective + "\t" + format_double(t.mean) + "\t" + format_double(t.std);
    for (double v : t.objective_values) out += "\t" + format_double(v);
    out += "\n";
  }
  return out;
}

std::string results_json(const SearchResult& result) {
  json trials = json::array();
  for (std::size_t r = 0; r < result.trials.size(); ++r) {
    const TrialResult& t = result.trials[r];
    json assignment = json::object();
    for (const auto& [k, v] : t.assignment) assignment[k] = v;
    json metrics = json::object();
    for (const auto& [name, ms] : t.aggregate.across_seeds) {
      std::vector<double> per_seed;
      for (const auto& rep : t.reports) per_seed.push_back(rep.corpus.at(name));
      metrics[name] = {{"mean", ms.mean}, {"std", ms.std}, {"per_seed", per_seed}};
    }
    trials.push_back({{"rank", r + 1},
                      {"trial", t.index},
                      {"assignment", assignment},
                      {"objective", t.objective},
                      {"seeds", t.seeds},
                      {"objective_values", t.objective_values},
                      {"mean", t.mean},
                      {"std", t.std},
                      {"metrics", metrics}});
  }
  json best = json::object();
  for (const auto& [k, v] : result.best.values()) best[k] = v;
  return json{{"trials", trials}, {"best", best}}.dump(2) + "\n";
}

void write_search_outputs(const SearchResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  const auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << text;
  };
  write("results.tsv", results_tsv(result));
  write("results.json", results_json(result));
  write("best.cfg", result.best.dump());
}

}  // namespace genforge
