#pragma once

// Per-epoch training cost across doublings of N, K and K1*K2 at a fixed
// sampler budget. A step whose time ratio exceeds `max_ratio` is flagged as
// super-linear.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace subrank::bench {

struct BenchConfig {
  std::size_t base_candidates = 50;
  std::size_t base_lists = 4;
  std::size_t base_hidden = 8;
  /// K1 used for the K1*K2 sweep.
  std::size_t nested_inputs = 8;
  std::size_t doublings = 3;
  std::size_t queries = 20;
  std::size_t samples = 50;
  std::size_t burn_in = 100;
  std::size_t repeats = 5;
  double max_ratio = 2.5;
  std::uint64_t seed = 0;
  /// Subset of {"N", "K", "K1K2"}; empty means all three.
  std::vector<std::string> axes;
};

struct BenchPoint {
  std::string axis;
  std::size_t size = 0;
  double seconds = 0.0;
  /// seconds / previous point's seconds; 0 for the first point of an axis.
  double ratio = 0.0;
  bool flagged = false;
};

struct BenchReport {
  std::vector<BenchPoint> points;
  bool any_flagged() const;
};

BenchReport run_scaling_bench(const BenchConfig& config);

void write_bench_table(const BenchReport& report, double max_ratio, std::ostream& out);

}  // namespace subrank::bench
