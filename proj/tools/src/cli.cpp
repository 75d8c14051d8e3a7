#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "genforge/analysis.hpp"
#include "genforge/config.hpp"
#include "genforge/corpus.hpp"
#include "genforge/decode.hpp"
#include "genforge/error.hpp"
#include "genforge/harness.hpp"
#include "genforge/metrics.hpp"
#include "genforge/ngram_lm.hpp"
#include "genforge/objectives.hpp"
#include "genforge/random.hpp"
#include "genforge/version.hpp"

namespace genforge::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

/// Writes to `path`, or to `fallback` when the path is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw Error("cannot write " + path);
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

/// The named split, or the only split of a single-split dataset.
const std::vector<Example>& pick_split(const Dataset& data, const std::string& name) {
  if (data.splits.count(name)) return data.splits.at(name);
  if (data.splits.size() == 1) return data.splits.begin()->second;
  return data.split(name);
}

TokenizerSpec tokenizer_from(const std::string& mode, bool keep_case) {
  TokenizerSpec spec;
  spec.mode = parse_tokenizer_mode(mode);
  spec.lowercase = !keep_case;
  return spec;
}

// ---------------------------------------------------------------------------
// Config overlays shared by run and search

struct Overlay {
  std::string config_file;
  bool dump_config = false;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* sub, const std::vector<std::string>& skip = {}) {
    sub->add_option("--config", config_file, "Config file of `key = value` lines")
        ->check(CLI::ExistingFile);
    sub->add_flag("--dump-config", dump_config, "Print the resolved configuration and exit");
    for (const auto& key : experiment_keys()) {
      if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
      options[key] = sub->add_option("--" + key, values[key], "Config key " + key)
                         ->group("Config keys");
    }
  }

  /// Defaults < config file < command line.
  Config resolve() const {
    Config cfg;
    if (!config_file.empty()) cfg = Config::load(config_file);
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) cfg.set(key, values.at(key));
    return cfg;
  }
};

ordered_json metrics_json(const TrialResult& t) {
  ordered_json metrics = ordered_json::object();
  for (const auto& [name, ms] : t.aggregate.across_seeds) {
    std::vector<double> per_seed;
    for (const auto& r : t.reports) per_seed.push_back(r.corpus.at(name));
    metrics[name] = {{"mean", ms.mean}, {"std", ms.std}, {"per_seed", per_seed}};
  }
  return metrics;
}

// ---------------------------------------------------------------------------
// Subcommands

struct EvalArgs {
  std::string hyp, ref, split = "test", metrics = "bleu,rouge-1,rouge-2,rouge-l";
  std::string tokenizer = "unicode", side_scores, output, smoothing = "epsilon";
  bool keep_case = false;
  std::size_t workers = 1;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const auto predictions = read_predictions(a.hyp);
  const Dataset data = load_dataset(a.ref);
  const auto records = join_records(predictions, pick_split(data, a.split));

  EvalOptions options;
  options.tokenizer = tokenizer_from(a.tokenizer, a.keep_case);
  options.bleu.smoothing = parse_smoothing(a.smoothing);
  options.workers = std::max<std::size_t>(1, a.workers);
  const auto metrics = parse_metric_list(a.metrics);
  const MetricReport report = evaluate(records, metrics, options);

  std::string text = report_to_json(report);
  if (!a.side_scores.empty()) {
    std::ifstream in(a.side_scores);
    if (!in) throw Error("cannot open " + a.side_scores);
    json side;
    try {
      side = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(a.side_scores + ": " + e.what(), 1);
    }
    if (!side.contains("inform") || !side.contains("success") || !side["inform"].is_number() ||
        !side["success"].is_number())
      throw ValidationError(a.side_scores + ": expected numeric 'inform' and 'success'");
    if (!report.corpus.count("bleu"))
      throw ConfigError("combined score needs the bleu metric");
    const double inform = side["inform"].get<double>();
    const double success = side["success"].get<double>();
    const double bleu = 100.0 * report.corpus.at("bleu");
    json doc = json::parse(text);
    doc["combined"] = {{"inform", inform}, {"success", success}, {"bleu", bleu},
                       {"score", combined_score(inform, success, bleu)}};
    text = doc.dump(2) + "\n";
  }
  Sink sink(a.output, out);
  *sink << text;
  return kOk;
}

struct DecodeArgs {
  std::string dataset, split = "test", train_split = "train", scorer = "ngram";
  std::string strategy = "beam", tokenizer = "unicode", output;
  std::size_t order = 3, beam = 5, max_len = 64, no_repeat = 3, top_k = 50, workers = 1;
  double length_penalty = 1.0, top_p = 0.9, temperature = 1.0, add_k = 0.01, copy_lambda = 0.3;
  std::uint64_t seed = 2020;
  bool block_source = false;
};

int run_decode(const DecodeArgs& a, std::ostream& out) {
  if (a.scorer != "ngram")
    throw ConfigError("unknown scorer '" + a.scorer + "' (only 'ngram' is available)");
  const Dataset data = load_dataset(a.dataset);
  const TokenizerSpec tok = tokenizer_from(a.tokenizer, false);

  NgramLmOptions lm_options;
  lm_options.order = a.order;
  lm_options.add_k = a.add_k;
  lm_options.copy_lambda = a.copy_lambda;
  const auto lm = ngram_lm_fit(data, lm_options, tok, a.train_split);

  DecodeParams params;
  params.strategy = parse_strategy(a.strategy);
  params.beam_size = a.beam;
  params.max_len = a.max_len;
  params.no_repeat_ngram = a.no_repeat;
  params.length_penalty = a.length_penalty;
  params.block_source_ngrams = a.block_source;
  params.top_k = a.top_k;
  params.top_p = a.top_p;
  params.temperature = a.temperature;
  params.seed = a.seed;
  params.validate();

  const auto& examples = data.split(a.split);
  std::vector<TokenSeq> sources;
  for (const auto& ex : examples) sources.push_back(tokenize(ex.source, tok));
  const auto hyps = decode_batch(*lm, sources, params, std::max<std::size_t>(1, a.workers));

  Sink sink(a.output, out);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    ordered_json line = {{"id", examples[i].id},
                         {"hypothesis", hyps[i].text(lm->vocabulary())},
                         {"score", hyps[i].score}};
    *sink << line.dump() << '\n';
  }
  return kOk;
}

struct CorruptArgs {
  std::string input, split = "train", field = "source", objective = "span-prediction", output;
  double mask_ratio = -1, mean_span = -1;
  bool permute = false;
  std::uint64_t seed = 2020;
};

int run_corrupt(const CorruptArgs& a, std::ostream& out, std::ostream& err) {
  if (a.field != "source" && a.field != "target")
    throw ConfigError("--field must be 'source' or 'target'");
  CorruptionSpec base = CorruptionSpec::defaults(parse_objective(a.objective));
  if (a.mask_ratio >= 0) base.mask_ratio = a.mask_ratio;
  if (a.mean_span >= 0) base.mean_span = a.mean_span;
  base.permute_sentences = a.permute;
  base.validate();

  const Dataset data = load_dataset(a.input);
  const auto& examples = pick_split(data, a.split);
  const TokenizerSpec tok{TokenizerMode::whitespace, false, false};
  const std::size_t min_len = base.objective == Objective::masked_seq2seq ||
                                      base.objective == Objective::span_prediction
                                  ? 2
                                  : 1;
  Sink sink(a.output, out);
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[i];
    const TokenSeq tokens = tokenize(a.field == "source" ? ex.source : ex.references.front(), tok);
    if (tokens.size() < min_len) {
      ++skipped;
      continue;
    }
    check_no_reserved_tokens(tokens);
    CorruptionSpec spec = base;
    spec.seed = mix_seed(a.seed, i);
    *sink << pair_to_jsonl(ex.id, corrupt(tokens, spec)) << '\n';
  }
  if (skipped > 0)
    err << "skipped " << skipped << " record(s) shorter than " << min_len << " token(s)\n";
  return kOk;
}

struct SearchArgs {
  std::string space, search, output_dir = "search_results";
  std::size_t budget = 0, workers = 0;
  std::uint64_t seed = 2020;
  Overlay overlay;
};

int run_search(const SearchArgs& a, std::ostream& out, std::ostream& err) {
  const Config base = a.overlay.resolve();
  if (a.overlay.dump_config) {
    out << to_config(experiment_from_config(base)).dump();
    return kOk;
  }
  experiment_from_config(base);
  const SearchSpace space = SearchSpace::from_config(Config::load(a.space));
  const std::string method = a.search.empty() ? (a.budget > 0 ? "random" : "grid") : a.search;

  SearchOptions options;
  options.workers = a.workers;
  SearchResult result;
  if (method == "grid") {
    result = grid_search(space, base, options);
  } else if (method == "random") {
    if (a.budget == 0) throw ConfigError("random search needs --budget >= 1");
    result = random_search(space, base, a.budget, a.seed, options);
  } else {
    throw ConfigError("unknown search method '" + method + "' (grid, random)");
  }
  write_search_outputs(result, a.output_dir);
  out << results_tsv(result);
  err << "wrote " << a.output_dir << "/results.tsv, results.json, best.cfg ("
      << result.trials.size() << " trials)\n";
  return kOk;
}

struct RunArgs {
  std::string output;
  Overlay overlay;
};

int run_run(const RunArgs& a, std::ostream& out) {
  const ExperimentConfig experiment = experiment_from_config(a.overlay.resolve());
  const Config resolved = to_config(experiment);
  if (a.overlay.dump_config) {
    out << resolved.dump();
    return kOk;
  }
  const TrialResult t = run_experiment(experiment);
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : resolved.values()) config[k] = v;
  ordered_json doc = {{"config", config},
                      {"objective", t.objective},
                      {"seeds", t.seeds},
                      {"objective_values", t.objective_values},
                      {"mean", t.mean},
                      {"std", t.std},
                      {"metrics", metrics_json(t)}};
  Sink sink(a.output, out);
  *sink << doc.dump(2) << '\n';
  return kOk;
}

struct AnalyzeArgs {
  std::string hyp, hyp2, dataset, split = "test", metric = "rouge-l", metrics;
  std::string bucket_by = "source-length", format = "html", output, name_a, name_b;
  std::string edges;
};

int run_analyze(const AnalyzeArgs& a, std::ostream& out) {
  if (a.bucket_by != "source-length")
    throw ConfigError("unknown --bucket-by '" + a.bucket_by + "' (source-length)");
  const ReportFormat format = parse_report_format(a.format);
  std::vector<double> edges = default_bucket_edges();
  if (!a.edges.empty()) {
    edges.clear();
    for (const auto& e : split_list(a.edges)) edges.push_back(parse_double(e, "--edges"));
  }
  std::vector<std::string> metrics = parse_metric_list(a.metrics.empty() ? a.metric : a.metrics);
  if (std::find(metrics.begin(), metrics.end(), a.metric) == metrics.end())
    metrics.push_back(a.metric);
  parse_metric_list(a.metric);

  const Dataset data = load_dataset(a.dataset);
  const auto& examples = pick_split(data, a.split);
  const TokenizerSpec tok;

  std::vector<RecordContext> contexts;
  std::vector<TokenSeq> sources, references;
  std::vector<std::size_t> lengths;
  for (const auto& ex : examples) {
    contexts.push_back({ex.id, tokenize(ex.source, tok), tokenize(ex.references.front(), tok)});
    sources.push_back(contexts.back().source);
    references.push_back(contexts.back().reference);
    lengths.push_back(contexts.back().source.size());
  }

  AnalysisResults results;
  results.metric = a.metric;
  results.reference_copy_rates = copy_rate_curve(references, sources);

  std::vector<ModelRun> runs;
  const std::vector<std::pair<std::string, std::string>> inputs = {
      {a.hyp, a.name_a.empty() ? "A" : a.name_a}, {a.hyp2, a.name_b.empty() ? "B" : a.name_b}};
  for (const auto& [path, name] : inputs) {
    if (path.empty()) continue;
    const auto predictions = read_predictions(path);
    // join_records checks both directions; records follow prediction order.
    join_records(predictions, examples);
    std::map<std::string, const Prediction*> by_id;
    for (const auto& p : predictions) by_id[p.id] = &p;
    std::vector<GenerationRecord> records;
    ModelRun run;
    run.name = name;
    for (const auto& ex : examples) {
      const Prediction& p = *by_id.at(ex.id);
      records.push_back({ex.id, p.hypothesis, ex.references, ex.source});
      run.ids.push_back(ex.id);
      run.hypotheses.push_back(tokenize(p.hypothesis, tok));
    }
    EvalOptions options;
    options.tokenizer = tok;
    run.report = evaluate(records, metrics, options);

    ModelAnalysis m;
    m.name = name;
    m.buckets = bucket_scores(lengths, run.report.per_sample.at(a.metric), edges);
    m.copy_rates = copy_rate_curve(run.hypotheses, sources);
    results.models.push_back(std::move(m));
    runs.push_back(std::move(run));
  }
  if (runs.size() == 2)
    results.comparison = compare_models(runs[0], runs[1], contexts, a.metric, edges);

  Sink sink(a.output, out);
  *sink << render_report(results, format);
  return kOk;
}

struct LeaderboardArgs {
  std::string dir = "leaderboards", dataset, model, scores, source, generated, external;
  std::string primary = "rouge-l", format = "markdown";
};

int run_leaderboard(const LeaderboardArgs& a, std::ostream& out) {
  const auto path = leaderboard_path(a.dir, a.dataset);
  Leaderboard board = leaderboard_load(path, a.dataset);
  bool changed = false;
  for (const auto& name : split_list(a.external))
    if (std::find(board.external_metrics.begin(), board.external_metrics.end(), name) ==
        board.external_metrics.end()) {
      board.external_metrics.push_back(name);
      changed = true;
    }
  if (!a.model.empty()) {
    LeaderboardEntry entry;
    entry.model = a.model;
    entry.dataset = a.dataset;
    entry.source = a.source;
    if (!a.generated.empty()) entry.generated_path = a.generated;
    for (const auto& item : split_list(a.scores)) {
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--scores items must look like metric=value, got '" + item + "'");
      entry.scores[trim(item.substr(0, eq))] = parse_double(item.substr(eq + 1), "--scores");
    }
    leaderboard_update(board, entry);
    changed = true;
  } else if (!a.scores.empty()) {
    throw ConfigError("--scores requires --model");
  }
  const std::string table = leaderboard_render(board, a.primary, parse_table_format(a.format));
  if (changed) leaderboard_save(board, path);
  out << table;
  return kOk;
}

void add_tokenizer_option(CLI::App* sub, std::string& target) {
  sub->add_option("--tokenizer", target, "whitespace, unicode or character")
      ->capture_default_str();
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Text-generation evaluation, decoding, corruption and search toolkit",
               "genforge"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  app.fallthrough(false);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score hypotheses against references");
  eval_cmd->add_option("--hyp", eval.hyp, "Predictions JSONL {id, hypothesis}")->required();
  eval_cmd->add_option("--ref", eval.ref, "Reference dataset file or directory")->required();
  eval_cmd->add_option("--split", eval.split, "Reference split")->capture_default_str();
  eval_cmd->add_option("--metrics", eval.metrics, "Comma-separated metric names")
      ->capture_default_str();
  add_tokenizer_option(eval_cmd, eval.tokenizer);
  eval_cmd->add_flag("--keep-case", eval.keep_case, "Do not lowercase before scoring");
  eval_cmd->add_option("--bleu-smoothing", eval.smoothing, "none, epsilon or add-k")
      ->capture_default_str();
  eval_cmd->add_option("--side-scores", eval.side_scores,
                       "JSON {inform, success} for the combined score");
  eval_cmd->add_option("--workers", eval.workers, "Scoring threads")->capture_default_str();
  eval_cmd->add_option("-o,--output", eval.output, "Write the report here instead of stdout");

  DecodeArgs dec;
  auto* decode_cmd = app.add_subcommand("decode", "Decode a dataset split with the n-gram LM");
  decode_cmd->add_option("--dataset", dec.dataset, "Dataset file or directory")->required();
  decode_cmd->add_option("--split", dec.split, "Split to decode")->capture_default_str();
  decode_cmd->add_option("--train-split", dec.train_split, "Split the LM is fit on")
      ->capture_default_str();
  decode_cmd->add_option("--scorer", dec.scorer, "Scorer backend")->capture_default_str();
  decode_cmd->add_option("--order", dec.order, "N-gram order")->capture_default_str();
  decode_cmd->add_option("--add-k", dec.add_k, "Add-k smoothing constant")->capture_default_str();
  decode_cmd->add_option("--copy-lambda", dec.copy_lambda, "Weight of the source copy mixture")
      ->capture_default_str();
  decode_cmd->add_option("--strategy", dec.strategy, "greedy, beam, topk or topp")
      ->capture_default_str();
  decode_cmd->add_option("--beam", dec.beam, "Beam size")->capture_default_str();
  decode_cmd->add_option("--max-len", dec.max_len, "Maximum generated tokens")
      ->capture_default_str();
  decode_cmd->add_option("--no-repeat-ngram", dec.no_repeat, "Blocked n-gram size (0 = off)")
      ->capture_default_str();
  decode_cmd->add_option("--length-penalty", dec.length_penalty, "Length normalization exponent")
      ->capture_default_str();
  decode_cmd->add_flag("--block-source-ngrams", dec.block_source,
                       "Also block n-grams that occur in the source");
  decode_cmd->add_option("--top-k", dec.top_k, "Top-k cutoff")->capture_default_str();
  decode_cmd->add_option("--top-p", dec.top_p, "Nucleus mass")->capture_default_str();
  decode_cmd->add_option("--temperature", dec.temperature, "Sampling temperature")
      ->capture_default_str();
  decode_cmd->add_option("--seed", dec.seed, "Sampling seed")->capture_default_str();
  add_tokenizer_option(decode_cmd, dec.tokenizer);
  decode_cmd->add_option("--workers", dec.workers, "Decoding threads")->capture_default_str();
  decode_cmd->add_option("-o,--output", dec.output, "Write JSONL here instead of stdout");

  CorruptArgs cor;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "Emit pre-training corruption pairs");
  corrupt_cmd->add_option("--input", cor.input, "Dataset file or directory")->required();
  corrupt_cmd->add_option("--split", cor.split, "Split to read")->capture_default_str();
  corrupt_cmd->add_option("--field", cor.field, "source or target")->capture_default_str();
  corrupt_cmd->add_option("--objective", cor.objective,
                          "lm, masked-seq2seq, denoising or span-prediction")
      ->capture_default_str();
  corrupt_cmd->add_option("--mask-ratio", cor.mask_ratio, "Masked fraction (objective default)");
  corrupt_cmd->add_option("--mean-span", cor.mean_span, "Mean span length (objective default)");
  corrupt_cmd->add_flag("--permute-sentences", cor.permute, "Shuffle sentences (denoising)");
  corrupt_cmd->add_option("--seed", cor.seed, "Base seed")->capture_default_str();
  corrupt_cmd->add_option("-o,--output", cor.output, "Write JSONL here instead of stdout");

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "Grid or random hyper-parameter search");
  search_cmd->add_option("--space", search.space, "Search space file")
      ->required()
      ->check(CLI::ExistingFile);
  search_cmd->add_option("--search", search.search, "grid or random (default by --budget)");
  search_cmd->add_option("--budget", search.budget, "Random-search trial count");
  search_cmd->add_option("--seed", search.seed, "Random-search seed")->capture_default_str();
  search_cmd->add_option("--workers", search.workers,
                         "Concurrent trials (default GENFORGE_WORKERS or all cores)");
  search_cmd->add_option("--output-dir", search.output_dir, "Where result files go")
      ->capture_default_str();
  search.overlay.attach(search_cmd, {"workers"});

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment over its seeds");
  run_cmd->add_option("-o,--output", run.output, "Write the result JSON here");
  run.overlay.attach(run_cmd);

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Length buckets, copy rates, comparison");
  analyze_cmd->add_option("--hyp", an.hyp, "Predictions JSONL of model A")->required();
  analyze_cmd->add_option("--hyp2", an.hyp2, "Predictions JSONL of model B");
  analyze_cmd->add_option("--name", an.name_a, "Display name of model A");
  analyze_cmd->add_option("--name2", an.name_b, "Display name of model B");
  analyze_cmd->add_option("--dataset", an.dataset, "Dataset file or directory")->required();
  analyze_cmd->add_option("--split", an.split, "Split")->capture_default_str();
  analyze_cmd->add_option("--metric", an.metric, "Metric to bucket and compare")
      ->capture_default_str();
  analyze_cmd->add_option("--metrics", an.metrics, "Metrics reported in the comparison");
  analyze_cmd->add_option("--bucket-by", an.bucket_by, "Bucketing key")->capture_default_str();
  analyze_cmd->add_option("--edges", an.edges, "Comma-separated bucket edges");
  analyze_cmd->add_option("--format", an.format, "html or json")->capture_default_str();
  analyze_cmd->add_option("-o,--output", an.output, "Write the report here");

  LeaderboardArgs lb;
  auto* lb_cmd = app.add_subcommand("leaderboard", "Update and render a dataset leaderboard");
  lb_cmd->add_option("--dir", lb.dir, "Leaderboard directory")->capture_default_str();
  lb_cmd->add_option("--dataset", lb.dataset, "Dataset name")->required();
  lb_cmd->add_option("--model", lb.model, "Model name of the entry to upsert");
  lb_cmd->add_option("--scores", lb.scores, "metric=value pairs, comma-separated");
  lb_cmd->add_option("--source", lb.source, "Citation or run id");
  lb_cmd->add_option("--generated", lb.generated, "Path of the generated texts");
  lb_cmd->add_option("--external", lb.external, "Score names to accept besides metrics");
  lb_cmd->add_option("--primary", lb.primary, "Ranking metric")->capture_default_str();
  lb_cmd->add_option("--format", lb.format, "markdown or json")->capture_default_str();

  if (!args.empty() && !args.front().empty() && args.front().front() != '-') {
    const auto subs = app.get_subcommands([](CLI::App*) { return true; });
    const bool known = std::any_of(subs.begin(), subs.end(),
                                   [&](const CLI::App* s) { return s->get_name() == args.front(); });
    if (!known) {
      err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
      return kUsageError;
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto active = app.get_subcommands();
    err << (active.empty() ? app.help() : active.front()->help());
    return kUsageError;
  }

  try {
    if (eval_cmd->parsed()) return run_eval(eval, out);
    if (decode_cmd->parsed()) return run_decode(dec, out);
    if (corrupt_cmd->parsed()) return run_corrupt(cor, out, err);
    if (search_cmd->parsed()) return run_search(search, out, err);
    if (run_cmd->parsed()) return run_run(run, out);
    if (analyze_cmd->parsed()) return run_analyze(an, out);
    if (lb_cmd->parsed()) return run_leaderboard(lb, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  err << app.help();
  return kUsageError;
}

}  // namespace genforge::cli
