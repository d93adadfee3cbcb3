#pragma once
// Independent reference implementations used only by tests. They follow the
// textbook definitions directly and share no code with the library paths
// they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Jaro by explicit enumeration: a character of s1 matches the first unused
// equal character of s2 within the window; transpositions are counted by
// comparing the two matched subsequences.
inline double jaro(const std::u32string& s1, const std::u32string& s2) {
  if (s1.empty() && s2.empty()) return 1.0;
  if (s1.empty() || s2.empty()) return 0.0;
  const long window = std::max(0L, static_cast<long>(std::max(s1.size(), s2.size()) / 2) - 1);
  std::vector<int> used(s2.size(), 0);
  std::u32string m1;
  std::vector<int> m1_from(s1.size(), 0);
  for (long i = 0; i < static_cast<long>(s1.size()); ++i) {
    for (long j = 0; j < static_cast<long>(s2.size()); ++j) {
      if (std::labs(i - j) > window) continue;
      if (used[j] || s1[i] != s2[j]) continue;
      used[j] = 1;
      m1_from[i] = 1;
      break;
    }
  }
  for (std::size_t i = 0; i < s1.size(); ++i)
    if (m1_from[i]) m1.push_back(s1[i]);
  std::u32string m2;
  for (std::size_t j = 0; j < s2.size(); ++j)
    if (used[j]) m2.push_back(s2[j]);
  const double m = static_cast<double>(m1.size());
  if (m == 0) return 0.0;
  int mismatched = 0;
  for (std::size_t k = 0; k < m1.size(); ++k) mismatched += (m1[k] != m2[k]);
  const double t = mismatched / 2.0;
  return (m / s1.size() + m / s2.size() + (m - t) / m) / 3.0;
}

inline double jaro_winkler(const std::u32string& s1, const std::u32string& s2, double p = 0.1) {
  const double j = jaro(s1, s2);
  int l = 0;
  while (l < 4 && l < static_cast<int>(s1.size()) && l < static_cast<int>(s2.size()) && s1[l] == s2[l]) ++l;
  return j + l * p * (1 - j);
}

// Epiweight evaluated from its definition with long double accumulation.
inline std::optional<double> epiweight(const std::vector<double>& p, const std::vector<std::optional<double>>& s) {
  long double num = 0, den = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!s[i]) continue;
    num += static_cast<long double>(p[i]) * static_cast<long double>(*s[i]);
    den += p[i];
  }
  if (den <= 0) return std::nullopt;
  return static_cast<double>(num / den);
}

// Grid search over each coordinate of the separable constrained problem
// min sum (x_i - w_i)^2 s.t. 0 <= x_i <= 1 - f_i. The grid spans the feasible
// interval, endpoints included, with spacing at most h.
inline std::pair<std::vector<double>, double> error_rate_grid(const std::vector<double>& w,
                                                              const std::vector<double>& f, double h = 1e-4) {
  std::vector<double> x(w.size());
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double hi = 1.0 - f[i];
    const long steps = std::max(1L, static_cast<long>(std::ceil(hi / h)));
    double best = std::numeric_limits<double>::infinity(), arg = 0;
    for (long k = 0; k <= steps; ++k) {
      const double xi = hi * static_cast<double>(k) / static_cast<double>(steps);
      const double obj = (xi - w[i]) * (xi - w[i]);
      if (obj < best) {
        best = obj;
        arg = xi;
      }
    }
    x[i] = arg;
    total += best;
  }
  return {x, total};
}

// Small undirected/directed graph helpers over dense node ids.
struct Graph {
  int n = 0;
  std::set<std::pair<int, int>> directed;  // (source, target)

  std::vector<std::set<int>> undirected() const {
    std::vector<std::set<int>> adj(n);
    for (auto [a, b] : directed) {
      if (a == b) continue;
      adj[a].insert(b);
      adj[b].insert(a);
    }
    return adj;
  }
};

inline double transitivity(const Graph& g) {
  const auto adj = g.undirected();
  long triangles_x6 = 0, triples = 0;
  for (int v = 0; v < g.n; ++v) {
    const long d = static_cast<long>(adj[v].size());
    triples += d * (d - 1) / 2;
    for (int a : adj[v])
      for (int b : adj[v])
        if (a != b && adj[a].count(b)) ++triangles_x6;
  }
  // each triangle is seen twice at each of its three corners
  if (triples == 0) return 0.0;
  return static_cast<double>(triangles_x6 / 2) / static_cast<double>(triples);
}

inline double reciprocity(const Graph& g) {
  long e = 0, r = 0;
  for (auto [a, b] : g.directed) {
    if (a == b) continue;
    ++e;
    if (g.directed.count({b, a})) ++r;
  }
  return e ? static_cast<double>(r) / static_cast<double>(e) : 0.0;
}

// Floyd-Warshall over the undirected graph.
inline double average_path_length(const Graph& g) {
  const auto adj = g.undirected();
  const int inf = 1 << 28;
  std::vector<std::vector<int>> d(g.n, std::vector<int>(g.n, inf));
  for (int v = 0; v < g.n; ++v) {
    d[v][v] = 0;
    for (int u : adj[v]) d[v][u] = 1;
  }
  for (int k = 0; k < g.n; ++k)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  long sum = 0, cnt = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (i != j && d[i][j] < inf) {
        sum += d[i][j];
        ++cnt;
      }
  return cnt ? static_cast<double>(sum) / static_cast<double>(cnt) : 0.0;
}

inline double top_component_share(const Graph& g) {
  const auto adj = g.undirected();
  std::vector<int> label(g.n, -1);
  int best = 0;
  for (int s = 0; s < g.n; ++s) {
    if (label[s] >= 0) continue;
    int size = 0;
    std::deque<int> q{s};
    label[s] = s;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      ++size;
      for (int u : adj[v])
        if (label[u] < 0) {
          label[u] = s;
          q.push_back(u);
        }
    }
    best = std::max(best, size);
  }
  return g.n ? static_cast<double>(best) / g.n : 0.0;
}

// Newman's discrete assortativity from an explicit mixing matrix.
inline std::optional<double> assortativity_discrete(const Graph& g, const std::vector<std::optional<int>>& attr) {
  const auto adj = g.undirected();
  std::map<std::pair<int, int>, double> e;
  double total = 0;
  for (int v = 0; v < g.n; ++v)
    for (int u : adj[v])
      if (attr[v] && attr[u]) {
        e[{*attr[v], *attr[u]}] += 1;
        total += 1;
      }
  if (total == 0) return std::nullopt;
  std::map<int, double> a, b;
  double trace = 0;
  for (auto& [k, val] : e) {
    val /= total;
    a[k.first] += val;
    b[k.second] += val;
    if (k.first == k.second) trace += val;
  }
  double ab = 0;
  for (auto [k, val] : a) ab += val * (b.count(k) ? b[k] : 0.0);
  if (std::abs(1 - ab) < 1e-15) return std::nullopt;
  return (trace - ab) / (1 - ab);
}

inline std::optional<double> pearson_edges(const Graph& g, const std::vector<std::optional<double>>& x) {
  const auto adj = g.undirected();
  std::vector<std::pair<double, double>> pairs;
  for (int v = 0; v < g.n; ++v)
    for (int u : adj[v])
      if (x[v] && x[u]) pairs.emplace_back(*x[v], *x[u]);
  if (pairs.empty()) return std::nullopt;
  double mx = 0, my = 0;
  for (auto [a, b] : pairs) {
    mx += a;
    my += b;
  }
  mx /= pairs.size();
  my /= pairs.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (auto [a, b] : pairs) {
    sxy += (a - mx) * (b - my);
    sxx += (a - mx) * (a - mx);
    syy += (b - my) * (b - my);
  }
  if (sxx <= 0 || syy <= 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
