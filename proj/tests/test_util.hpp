#pragma once

// Independent oracles shared by the unit and acceptance suites. Nothing here
// calls into the sampler or the prior conditionals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

namespace pnarm::testing {

// All set partitions of n nodes as restricted growth strings (canonical
// first-appearance labels).
inline std::vector<std::vector<int>> enumerate_partitions(std::size_t n) {
  std::vector<std::vector<int>> out;
  std::vector<int> z(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_label) {
    if (i == n) {
      out.push_back(z);
      return;
    }
    for (int l = 0; l <= max_label + 1; ++l) {
      z[i] = l;
      rec(i + 1, std::max(max_label, l));
    }
  };
  if (n == 0) return {{}};
  z[0] = 0;
  rec(1, 0);
  return out;
}

// All label vectors in {0..k-1}^n.
inline std::vector<std::vector<int>> enumerate_label_vectors(std::size_t n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> z(n, 0);
  for (;;) {
    out.push_back(z);
    std::size_t i = 0;
    while (i < n && ++z[i] == k) z[i++] = 0;
    if (i == n) break;
  }
  return out;
}

// Closed-form CRP probability alpha^K prod (|S_k|-1)! / prod_{n<N} (alpha+n).
inline double crp_probability(const std::vector<int>& labels, double alpha) {
  std::map<int, int> sizes;
  for (int l : labels) ++sizes[l];
  double p = std::pow(alpha, static_cast<double>(sizes.size()));
  for (const auto& [l, s] : sizes) p *= std::tgamma(static_cast<double>(s));
  for (std::size_t n = 0; n < labels.size(); ++n) p /= alpha + static_cast<double>(n);
  return p;
}

// Node-order sequential allocation probability: node n joins an existing
// block with weight sum_{j<n in block} w[n][j], a new block with alpha, over
// the normalizer sum_{j<n} w[n][j] + alpha. `w` is row-major n x n.
inline double sequential_allocation_probability(const std::vector<int>& labels,
                                                const std::vector<double>& w, double alpha) {
  const std::size_t n = labels.size();
  double p = 1.0;
  int seen = -1;
  for (std::size_t a = 0; a < n; ++a) {
    double total = alpha, same = 0.0;
    for (std::size_t j = 0; j < a; ++j) {
      total += w[a * n + j];
      if (labels[j] == labels[a]) same += w[a * n + j];
    }
    p *= (labels[a] > seen ? alpha : same) / total;
    seen = std::max(seen, labels[a]);
  }
  return p;
}

// Collapsed Dirichlet-multinomial probability of a label vector over k
// components with symmetric concentration g.
inline double dirichlet_multinomial_probability(const std::vector<int>& labels, int k, double g) {
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (int l : labels) counts[static_cast<std::size_t>(l)] += 1.0;
  double log_p = std::lgamma(k * g) - std::lgamma(labels.size() + k * g);
  for (double c : counts) log_p += std::lgamma(c + g) - std::lgamma(g);
  return std::exp(log_p);
}

inline double choose2(double x) { return x * (x - 1.0) / 2.0; }

inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [k, v] : table) index += choose2(v);
  for (const auto& [k, v] : ra) sa += choose2(v);
  for (const auto& [k, v] : rb) sb += choose2(v);
  const double expected = sa * sb / choose2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

inline double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Monte-Carlo standard error of the mean of a correlated series by batch means.
inline double batch_means_se(const std::vector<double>& x, std::size_t batches = 50) {
  const std::size_t len = x.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += x[b * len + k];
    means.push_back(s / static_cast<double>(len));
  }
  const double m = mean(means);
  double v = 0.0;
  for (double bm : means) v += (bm - m) * (bm - m);
  v /= static_cast<double>(batches - 1);
  return std::sqrt(v / static_cast<double>(batches));
}

// Standard error of an empirical frequency from n independent draws.
inline double binomial_se(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 1e-12) / n); }

}  // namespace pnarm::testing
