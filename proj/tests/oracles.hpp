#pragma once

// Reference implementations used only by the tests. None of them calls into
// the library's divergence, sampler or gradient code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Perm = std::vector<std::size_t>;

/// All permutations of {0..n-1} in lexicographic order.
inline std::vector<Perm> all_perms(std::size_t n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<Perm> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

/// g(|X|) from increments: g(0) = 0, g(m) = delta[0] + ... + delta[m-1].
inline double g_of(const std::vector<double>& delta, std::size_t m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += delta[i];
  return s;
}

/// <x, h_sigma> with h built from explicit chain differences of f(X) = g(|X|):
/// the set S grows one candidate at a time and f is re-evaluated from scratch.
inline double chain_sum(const std::vector<double>& x, const Perm& sigma,
                        const std::vector<double>& delta) {
  std::vector<bool> in(x.size(), false);
  double total = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const auto count = [&] {
      return static_cast<std::size_t>(std::count(in.begin(), in.end(), true));
    };
    const double before = g_of(delta, count());
    in[sigma[i]] = true;
    const double after = g_of(delta, count());
    total += x[sigma[i]] * (after - before);
  }
  return total;
}

/// The Lovasz extension of a submodular f is the maximum of <x, h_sigma> over
/// all chains. Brute force over n! orders.
inline double lovasz_by_max(const std::vector<double>& x,
                            const std::vector<double>& delta) {
  double best = -INFINITY;
  for (const auto& p : all_perms(x.size())) best = std::max(best, chain_sum(x, p, delta));
  return best;
}

inline double divergence(const std::vector<double>& x, const Perm& sigma,
                         const std::vector<double>& delta) {
  return lovasz_by_max(x, delta) - chain_sum(x, sigma, delta);
}

/// Divergence for every permutation at once, sharing the max.
inline std::vector<double> divergences_all(const std::vector<double>& x,
                                           const std::vector<Perm>& perms,
                                           const std::vector<double>& delta) {
  std::vector<double> inner(perms.size());
  double best = -INFINITY;
  for (std::size_t t = 0; t < perms.size(); ++t) {
    inner[t] = chain_sum(x, perms[t], delta);
    best = std::max(best, inner[t]);
  }
  for (auto& v : inner) v = best - v;
  return inner;
}

struct Mallows {
  std::vector<Perm> perms;
  std::vector<double> prob;
  /// d[i][t] = divergence of list i from perms[t].
  std::vector<std::vector<double>> d;

  std::vector<double> expectations() const {
    std::vector<double> e(d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (std::size_t t = 0; t < perms.size(); ++t) e[i] += prob[t] * d[i][t];
    }
    return e;
  }
};

/// P(pi) proportional to exp(-sum_i w_i d(x_i || pi)), normalized directly.
inline Mallows mallows(const std::vector<std::vector<double>>& lists,
                       const std::vector<double>& w, const std::vector<double>& delta) {
  Mallows m;
  m.perms = all_perms(lists.front().size());
  for (const auto& x : lists) m.d.push_back(divergences_all(x, m.perms, delta));
  std::vector<double> energy(m.perms.size(), 0.0);
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (std::size_t t = 0; t < m.perms.size(); ++t) energy[t] += w[i] * m.d[i][t];
  }
  double z = 0.0;
  for (double e : energy) z += std::exp(-e);
  for (double e : energy) m.prob.push_back(std::exp(-e) / z);
  return m;
}

/// Central difference of f at x along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t i, double h = 1e-6) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(numeric));
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(k);
  double s = 0.0;
  for (auto& v : w) s += (v = e(rng));
  for (auto& v : w) v /= s;
  return w;
}

inline std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n,
                                         double lo = -3.0, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

/// Random positive non-increasing increments.
inline std::vector<double> random_delta(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> d(n);
  for (auto& v : d) v = u(rng);
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

}  // namespace oracle
