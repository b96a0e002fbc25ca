#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "bench.hpp"
#include "subrank/error.hpp"
#include "subrank/io.hpp"
#include "subrank/linear.hpp"
#include "subrank/metrics.hpp"
#include "subrank/model_io.hpp"
#include "subrank/nested.hpp"
#include "subrank/parallel.hpp"
#include "subrank/report.hpp"
#include "subrank/text.hpp"

namespace subrank::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string data;
  std::string out;
  std::string model_kind = "linear";
  std::vector<std::string> model_files;
  std::string log;
  std::string table;
  std::string method = "model";

  std::uint64_t seed = 0;
  unsigned threads = 1;

  std::string gain = "logistic";
  std::string discount;
  std::string phi1 = "shifted_logistic";
  std::string phi2 = "shifted_logistic";
  double mu = 0.1;
  double lambda = 0.01;
  double lambda1 = 0.01;
  double lambda2 = 0.01;
  std::size_t epochs = 20;
  double tolerance = 1e-5;
  bool shuffle = false;
  std::size_t k2 = 0;
  double jitter = 0.01;
  std::string nested_sampling = "shared_aggregate";

  std::size_t samples = 50;
  std::size_t burn_in = 100;
  std::size_t thinning = 1;
  std::string acceptance = "standard_metropolis";
  std::string backend = "metropolis";

  bool strict = true;
  bool normalize = false;

  std::size_t k_max = 10;
  bool singles = false;

  std::size_t queries = 100;
  std::size_t candidates = 10;
  std::vector<double> noise{0.0, 0.5, 1.0, 1.5, 2.0};
  int max_grade = 4;
  std::string format;

  std::size_t bench_candidates = 50;
  std::size_t bench_lists = 4;
  std::size_t bench_hidden = 8;
  std::size_t bench_doublings = 3;
  std::size_t bench_queries = 20;
  std::size_t bench_repeats = 5;
  std::vector<std::string> bench_axes;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

template <class Fn>
auto parse_or_usage(Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
}

void validate_hyper(const Options& o) {
  require(o.mu > 0.0, "--mu must be > 0");
  require(o.lambda >= 0.0, "--lambda must be >= 0");
  require(o.lambda1 >= 0.0, "--lambda1 must be >= 0");
  require(o.lambda2 >= 0.0, "--lambda2 must be >= 0");
  require(o.epochs >= 1, "--epochs must be >= 1");
  require(o.samples >= 1, "--samples must be >= 1");
  require(o.thinning >= 1, "--thinning must be >= 1");
  require(o.tolerance >= 0.0, "--tolerance must be >= 0");
  require(o.jitter >= 0.0 && o.jitter < 1.0, "--jitter must be in [0, 1)");
  require(o.threads >= 1, "--threads must be >= 1");
  require(o.model_kind == "linear" || o.model_kind == "nested",
          "--model must be linear or nested");
}

ConcaveGain gain_of(const Options& o) {
  return parse_or_usage([&] { return ConcaveGain::parse(o.gain); });
}

Dataset load(const Options& o) {
  require(!o.data.empty(), "--data is required");
  ParseOptions parse;
  parse.strict = o.strict;
  parse.normalize = o.normalize;
  return load_dataset(o.data, parse);
}

// Writes to --out, or to `fallback` when --out is empty.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InvalidInput("cannot write '" + path + "'");
  write(file);
  if (!file) throw InvalidInput("failed writing '" + path + "'");
}

TrainSettings train_settings(const Options& o) {
  TrainSettings s;
  s.expectation.backend = parse_or_usage([&] { return parse_backend(o.backend); });
  s.expectation.chain.num_samples = o.samples;
  s.expectation.chain.burn_in = o.burn_in;
  s.expectation.chain.thinning = o.thinning;
  s.expectation.chain.acceptance_rule =
      parse_or_usage([&] { return parse_acceptance_rule(o.acceptance); });
  s.seed = o.seed;
  s.threads = o.threads;
  return s;
}

void write_log(const TrainingLog& log, std::ostream& out) {
  out << "epoch,objective,weights\n";
  const std::size_t rows = std::max(log.objective.size(), log.snapshots.size() + 1);
  for (std::size_t e = 0; e < rows; ++e) {
    out << e << ',';
    if (e < log.objective.size()) out << format_double(log.objective[e]);
    out << ',';
    if (e > 0 && e <= log.snapshots.size()) {
      const auto& w = log.snapshots[e - 1];
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (i > 0) out << ' ';
        out << format_double(w[i]);
      }
    }
    out << '\n';
  }
}

int cmd_train(const Options& o, std::ostream& out) {
  validate_hyper(o);
  require(!o.out.empty(), "--out is required for train");
  const auto gain = gain_of(o);
  const auto data = load(o);
  const auto settings = train_settings(o);

  AnyModel model = LinearModel{SimplexWeights::uniform(1), gain, {}};
  TrainingLog log;
  if (o.model_kind == "linear") {
    LinearHyper hyper;
    hyper.lambda = o.lambda;
    hyper.mu = o.mu;
    hyper.epochs = o.epochs;
    hyper.tolerance = o.tolerance;
    hyper.shuffle = o.shuffle;
    auto result = train_linear(data.queries, hyper, gain, settings);
    model = std::move(result.model);
    log = std::move(result.log);
  } else {
    NestedHyper hyper;
    hyper.lambda1 = o.lambda1;
    hyper.lambda2 = o.lambda2;
    hyper.mu = o.mu;
    hyper.epochs = o.epochs;
    hyper.tolerance = o.tolerance;
    hyper.jitter = o.jitter;
    hyper.shuffle = o.shuffle;
    hyper.sampling = parse_or_usage([&] { return parse_nested_sampling(o.nested_sampling); });
    const auto phi1 = parse_or_usage([&] { return parse_activation(o.phi1); });
    const auto phi2 = parse_or_usage([&] { return parse_activation(o.phi2); });
    const std::size_t k2 = o.k2 > 0 ? o.k2 : default_hidden_units(data.num_lists());
    auto result = train_nested(data.queries, k2, hyper, gain, phi1, phi2, settings);
    model = std::move(result.model);
    log = std::move(result.log);
  }
  save_model(o.out, model);
  const std::string log_path = o.log.empty() ? o.out + ".log.csv" : o.log;
  emit(log_path, out, [&](std::ostream& s) { write_log(log, s); });

  out << "trained " << o.model_kind << " model on " << data.queries.size()
      << " queries (K=" << data.num_lists() << ") for " << log.epochs_run
      << " epochs" << (log.converged ? " (converged)" : "") << '\n';
  if (!log.objective.empty()) {
    out << "objective " << format_double(log.objective.front()) << " -> "
        << format_double(log.objective.back()) << '\n';
  }
  out << "model written to " << o.out << '\n';
  return kSuccess;
}

// Rankings and aggregated scores of one method across the dataset, computed
// per query in parallel and merged in query order.
struct MethodOutput {
  std::vector<Ranking> rankings;
  std::vector<std::vector<double>> scores;
};

MethodOutput run_method(const Dataset& data, unsigned threads,
                        const std::function<std::vector<double>(const QueryInstance&)>& score) {
  std::vector<std::optional<Ranking>> rankings(data.queries.size());
  std::vector<std::vector<double>> scores(data.queries.size());
  parallel_for(data.queries.size(), threads, [&](std::size_t qi) {
    scores[qi] = score(data.queries[qi]);
    rankings[qi] = ranking_from_scores(scores[qi]);
  });
  MethodOutput out;
  for (auto& r : rankings) out.rankings.push_back(std::move(*r));
  out.scores = std::move(scores);
  return out;
}

std::vector<double> average_scores(const QueryInstance& q) {
  return weighted_scores(q, SimplexWeights::uniform(q.num_lists()).values());
}

AnyModel load_checked(const std::string& path, const Dataset& data) {
  auto model = load_model(path);
  if (model_inputs(model) != data.num_lists()) {
    throw InvalidInput("model '" + path + "' expects K=" +
                       std::to_string(model_inputs(model)) + " but data has K=" +
                       std::to_string(data.num_lists()));
  }
  return model;
}

int cmd_infer(const Options& o, std::ostream& out) {
  require(o.threads >= 1, "--threads must be >= 1");
  const auto data = load(o);
  MethodOutput result;
  if (o.method == "model") {
    require(o.model_files.size() == 1, "infer needs exactly one --model_file");
    const auto model = load_checked(o.model_files.front(), data);
    result = run_method(data, o.threads,
                        [&](const QueryInstance& q) { return aggregate_scores(model, q); });
  } else if (o.method == "average") {
    result = run_method(data, o.threads, average_scores);
  } else if (o.method == "borda") {
    result = run_method(data, o.threads, borda_points);
  } else {
    throw UsageError("--method must be model, average or borda");
  }
  emit(o.out, out, [&](std::ostream& s) {
    s << "query_id,rank,candidate_id,aggregated_score\n";
    for (std::size_t qi = 0; qi < data.queries.size(); ++qi) {
      const auto& ranking = result.rankings[qi];
      for (std::size_t r = 0; r < ranking.size(); ++r) {
        s << csv_escape(data.queries[qi].id()) << ',' << (r + 1) << ',' << ranking[r]
          << ',' << format_double(result.scores[qi][ranking[r]]) << '\n';
      }
    }
  });
  return kSuccess;
}

int cmd_eval(const Options& o, std::ostream& out) {
  require(o.k_max >= 1, "--k_max must be >= 1");
  require(o.threads >= 1, "--threads must be >= 1");
  const auto data = load(o);
  const auto discount = parse_or_usage(
      [&] { return ConcaveGain::parse(o.discount.empty() ? o.gain : o.discount); });

  std::vector<MethodRankings> methods;
  std::size_t linear_count = 0;
  std::size_t nested_count = 0;
  for (const auto& path : o.model_files) {
    const auto model = load_checked(path, data);
    const bool linear = std::holds_alternative<LinearModel>(model);
    std::string name = linear ? "Linear-LBD" : "Nested-LBD";
    const std::size_t index = linear ? ++linear_count : ++nested_count;
    if (index > 1) name += "-" + std::to_string(index);
    methods.push_back({name, run_method(data, o.threads, [&](const QueryInstance& q) {
                               return aggregate_scores(model, q);
                             }).rankings});
  }
  methods.push_back({"Averaging", run_method(data, o.threads, average_scores).rankings});
  methods.push_back({"Borda", run_method(data, o.threads, borda_points).rankings});
  if (o.singles) {
    for (std::size_t i = 0; i < data.num_lists(); ++i) {
      methods.push_back({"Ranker-" + std::to_string(i),
                         run_method(data, o.threads, [i](const QueryInstance& q) {
                           const auto v = q.list(i).values();
                           return std::vector<double>(v.begin(), v.end());
                         }).rankings});
    }
  }

  const auto report = evaluate_ndcg(data, methods, o.k_max, discount);
  if (!o.out.empty()) {
    emit(o.out, out, [&](std::ostream& s) { write_report_csv(report, s); });
  }
  emit(o.table, out, [&](std::ostream& s) { write_report_table(report, s); });
  if (report.skipped_queries > 0) {
    out << "skipped " << report.skipped_queries
        << " queries without relevant candidates\n";
  }
  return kSuccess;
}

int cmd_synth(const Options& o, std::ostream& out) {
  require(!o.out.empty(), "--out is required for synth");
  require(o.queries >= 1 && o.candidates >= 1, "--queries and --candidates must be >= 1");
  require(!o.noise.empty(), "--noise needs at least one level");
  SynthConfig cfg;
  cfg.num_queries = o.queries;
  cfg.num_candidates = o.candidates;
  cfg.noise_levels = o.noise;
  cfg.max_grade = o.max_grade;
  cfg.seed = o.seed;
  const auto data = parse_or_usage([&] { return synth_planted(cfg); });
  std::string format = o.format;
  if (format.empty()) format = o.out.ends_with(".csv") ? "csv" : "letor";
  require(format == "csv" || format == "letor", "--format must be csv or letor");
  emit(o.out, out, [&](std::ostream& s) {
    if (format == "csv") {
      write_scores_csv(data, s);
    } else {
      write_letor(data, s);
    }
  });
  out << "wrote " << data.queries.size() << " queries (" << data.provenance << ") to "
      << o.out << '\n';
  return kSuccess;
}

int cmd_bench(const Options& o, std::ostream& out) {
  require(o.bench_candidates >= 1 && o.bench_lists >= 1 && o.bench_hidden >= 1,
          "bench sizes must be >= 1");
  bench::BenchConfig cfg;
  cfg.base_candidates = o.bench_candidates;
  cfg.base_lists = o.bench_lists;
  cfg.base_hidden = o.bench_hidden;
  cfg.doublings = o.bench_doublings;
  cfg.queries = o.bench_queries;
  cfg.repeats = o.bench_repeats;
  cfg.samples = o.samples;
  cfg.burn_in = o.burn_in;
  cfg.seed = o.seed;
  cfg.axes = o.bench_axes;
  for (const auto& axis : cfg.axes) {
    require(axis == "N" || axis == "K" || axis == "K1K2", "--axes takes N, K, K1K2");
  }
  const auto report = bench::run_scaling_bench(cfg);
  emit(o.out, out, [&](std::ostream& s) { bench::write_bench_table(report, cfg.max_ratio, s); });
  return kSuccess;
}

void add_options(CLI::App& app, Options& o) {
  app.set_config("--config", "", "Flat key=value config file ('#' comments)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  app.add_option("--data", o.data, "Dataset: .csv scores file or LETOR text");
  app.add_option("--out", o.out, "Output path (model, rankings, report, dataset)");
  app.add_option("--model", o.model_kind, "Model kind: linear or nested");
  app.add_option("--model_file", o.model_files, "Trained model file(s) for infer/eval");
  app.add_option("--log", o.log, "Training log path (default <out>.log.csv)");
  app.add_option("--table", o.table, "Text table path for eval (default stdout)");
  app.add_option("--method", o.method, "infer: model, average or borda");

  app.add_option("--seed", o.seed, "Master random seed");
  app.add_option("--threads", o.threads, "Worker threads for per-query work");

  app.add_option("--gain", o.gain, "Concave gain: logistic, log2, linear:L, table:d1,d2,...");
  app.add_option("--discount", o.discount, "NDCG discount for eval (default: --gain)");
  app.add_option("--phi1", o.phi1, "Hidden activation: shifted_logistic, logistic, identity");
  app.add_option("--phi2", o.phi2, "Output activation");
  app.add_option("--mu", o.mu, "Learning rate");
  app.add_option("--lambda", o.lambda, "Linear regularization");
  app.add_option("--lambda1", o.lambda1, "Nested bottom-layer regularization");
  app.add_option("--lambda2", o.lambda2, "Nested top-layer regularization");
  app.add_option("--epochs", o.epochs, "Maximum training epochs");
  app.add_option("--tolerance", o.tolerance, "Early-stop max weight change per epoch");
  app.add_option("--shuffle", o.shuffle, "Seeded query shuffle per epoch");
  app.add_option("--k2", o.k2, "Hidden units (0: max(10, 2K) capped at 64)");
  app.add_option("--jitter", o.jitter, "Relative jitter of the nested initialization");
  app.add_option("--nested_sampling", o.nested_sampling, "shared_aggregate or per_unit");

  app.add_option("--samples", o.samples, "Retained chain samples M per query");
  app.add_option("--burn_in", o.burn_in, "Discarded chain steps");
  app.add_option("--thinning", o.thinning, "Chain steps per retained sample");
  app.add_option("--acceptance", o.acceptance, "standard_metropolis or paper_literal");
  app.add_option("--backend", o.backend, "Expectation backend: metropolis or exact");

  app.add_option("--strict", o.strict, "Reject missing values instead of filling 0");
  app.add_option("--normalize", o.normalize, "Min-max normalize every list");

  app.add_option("--k_max", o.k_max, "eval: largest NDCG cut-off");
  app.add_option("--singles", o.singles, "eval: also report every input ranker");

  app.add_option("--queries", o.queries, "synth: number of queries");
  app.add_option("--candidates", o.candidates, "synth: candidates per query");
  app.add_option("--noise", o.noise, "synth: per-ranker noise levels")->delimiter(',');
  app.add_option("--max_grade", o.max_grade, "synth: relevance grades 0..max_grade");
  app.add_option("--format", o.format, "synth: csv or letor (default by extension)");

  app.add_option("--bench_candidates", o.bench_candidates, "bench: base N");
  app.add_option("--bench_lists", o.bench_lists, "bench: base K");
  app.add_option("--bench_hidden", o.bench_hidden, "bench: base K2");
  app.add_option("--bench_doublings", o.bench_doublings, "bench: doublings per axis");
  app.add_option("--bench_queries", o.bench_queries, "bench: queries per epoch");
  app.add_option("--bench_repeats", o.bench_repeats, "bench: timing repeats (min taken)");
  app.add_option("--axes", o.bench_axes, "bench: subset of N,K,K1K2")->delimiter(',');
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised rank aggregation with the Lovasz-Bregman divergence",
               "subrank"};
  Options o;
  add_options(app, o);
  app.require_subcommand(1);
  const char* commands[][2] = {
      {"train", "Train a linear or nested model"},
      {"infer", "Aggregate rankings with a model or baseline"},
      {"eval", "NDCG@1..k report for models and baselines"},
      {"synth", "Generate a planted synthetic dataset"},
      {"bench", "Per-epoch training cost across size doublings"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "train") return cmd_train(o, out);
    if (command == "infer") return cmd_infer(o, out);
    if (command == "eval") return cmd_eval(o, out);
    if (command == "synth") return cmd_synth(o, out);
    if (command == "bench") return cmd_bench(o, out);
    throw UsageError("unknown command " + command);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const InvariantViolation& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  } catch (const InvalidInput& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace subrank::cli
