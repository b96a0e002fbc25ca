#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>

#include "subrank/io.hpp"
#include "subrank/linear.hpp"
#include "subrank/nested.hpp"

namespace subrank::bench {

bool BenchReport::any_flagged() const {
  return std::any_of(points.begin(), points.end(),
                     [](const BenchPoint& p) { return p.flagged; });
}

namespace {

Dataset bench_data(const BenchConfig& config, std::size_t n, std::size_t k) {
  SynthConfig synth;
  synth.num_queries = config.queries;
  synth.num_candidates = n;
  synth.noise_levels.clear();
  for (std::size_t i = 0; i < k; ++i) synth.noise_levels.push_back(0.25 * static_cast<double>(i));
  synth.seed = config.seed;
  return synth_planted(synth);
}

TrainSettings bench_settings(const BenchConfig& config) {
  TrainSettings settings;
  settings.expectation.chain.num_samples = config.samples;
  settings.expectation.chain.burn_in = config.burn_in;
  settings.seed = config.seed;
  settings.record_objective = false;
  return settings;
}

/// Best-of-`repeats` time for each job. Repeats are interleaved across the
/// jobs of one axis so a transient slowdown does not land on a single size.
std::vector<double> min_seconds(std::size_t repeats,
                                const std::vector<std::function<void()>>& jobs) {
  std::vector<double> best(jobs.size(), std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const auto start = std::chrono::steady_clock::now();
      jobs[j]();
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      best[j] = std::min(best[j], elapsed.count());
    }
  }
  return best;
}

bool wants(const BenchConfig& config, const std::string& axis) {
  return config.axes.empty() ||
         std::find(config.axes.begin(), config.axes.end(), axis) != config.axes.end();
}

void push(BenchReport& report, const BenchConfig& config, std::string axis,
          std::size_t size, double seconds) {
  BenchPoint p{std::move(axis), size, seconds, 0.0, false};
  if (!report.points.empty() && report.points.back().axis == p.axis) {
    p.ratio = seconds / report.points.back().seconds;
    p.flagged = p.ratio > config.max_ratio;
  }
  report.points.push_back(std::move(p));
}

}  // namespace

BenchReport run_scaling_bench(const BenchConfig& config) {
  BenchReport report;
  const auto settings = bench_settings(config);
  LinearHyper linear_hyper;
  linear_hyper.epochs = 1;
  linear_hyper.tolerance = 0.0;
  NestedHyper nested_hyper;
  nested_hyper.epochs = 1;
  nested_hyper.tolerance = 0.0;
  const auto gain = ConcaveGain::logistic();

  const auto sweep = [&](const std::string& axis, const std::vector<std::size_t>& sizes,
                         const std::vector<std::function<void()>>& jobs) {
    const auto seconds = min_seconds(config.repeats, jobs);
    for (std::size_t i = 0; i < sizes.size(); ++i) push(report, config, axis, sizes[i], seconds[i]);
  };

  if (wants(config, "N")) {
    std::vector<std::size_t> sizes;
    std::vector<Dataset> sets;
    for (std::size_t d = 0; d <= config.doublings; ++d) {
      sizes.push_back(config.base_candidates << d);
      sets.push_back(bench_data(config, sizes.back(), config.base_lists));
    }
    std::vector<std::function<void()>> jobs;
    for (const auto& data : sets) {
      jobs.emplace_back([&] { train_linear(data.queries, linear_hyper, gain, settings); });
    }
    sweep("N", sizes, jobs);
  }
  if (wants(config, "K")) {
    std::vector<std::size_t> sizes;
    std::vector<Dataset> sets;
    for (std::size_t d = 0; d <= config.doublings; ++d) {
      sizes.push_back(config.base_lists << d);
      sets.push_back(bench_data(config, config.base_candidates, sizes.back()));
    }
    std::vector<std::function<void()>> jobs;
    for (const auto& data : sets) {
      jobs.emplace_back([&] { train_linear(data.queries, linear_hyper, gain, settings); });
    }
    sweep("K", sizes, jobs);
  }
  if (wants(config, "K1K2")) {
    const auto data = bench_data(config, config.base_candidates, config.nested_inputs);
    std::vector<std::size_t> sizes;
    std::vector<std::function<void()>> jobs;
    for (std::size_t d = 0; d <= config.doublings; ++d) {
      const std::size_t k2 = config.base_hidden << d;
      sizes.push_back(config.nested_inputs * k2);
      jobs.emplace_back([&, k2] {
        train_nested(data.queries, k2, nested_hyper, gain, Activation::shifted_logistic,
                     Activation::shifted_logistic, settings);
      });
    }
    sweep("K1K2", sizes, jobs);
  }
  return report;
}

void write_bench_table(const BenchReport& report, double max_ratio, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(6) << "axis" << std::right << std::setw(8) << "size"
      << std::setw(14) << "epoch_ms" << std::setw(9) << "ratio" << "  flag\n";
  for (const auto& p : report.points) {
    out << std::left << std::setw(6) << p.axis << std::right << std::setw(8) << p.size
        << std::fixed << std::setprecision(3) << std::setw(14) << p.seconds * 1e3
        << std::setprecision(2) << std::setw(9);
    if (p.ratio > 0.0) {
      out << p.ratio;
    } else {
      out << "-";
    }
    out << "  " << (p.flagged ? "SUPERLINEAR" : "") << '\n';
  }
  out << (report.any_flagged() ? "super-linear growth beyond x" : "all steps within x")
      << std::setprecision(2) << max_ratio << " per doubling\n";
  out.flags(flags);
  out.precision(precision);
}

}  // namespace subrank::bench
