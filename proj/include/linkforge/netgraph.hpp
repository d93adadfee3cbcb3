#pragma once
// Social graph over residents built from final matches, its summary
// statistics and Newman assortativity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "linkforge/csv.hpp"
#include "linkforge/error.hpp"
#include "linkforge/parallel.hpp"
#include "linkforge/records.hpp"

namespace linkforge {

enum class NodeFilter { all, adult, stable_adult };

inline std::string_view to_string(NodeFilter f) {
  switch (f) {
    case NodeFilter::all: return "all";
    case NodeFilter::adult: return "adult";
    case NodeFilter::stable_adult: return "stable_adult";
  }
  return "all";
}

inline NodeFilter parse_node_filter(std::string_view s) {
  if (s == "all") return NodeFilter::all;
  if (s == "adult") return NodeFilter::adult;
  if (s == "stable_adult") return NodeFilter::stable_adult;
  fail(ErrorKind::config, "unknown node filter '" + std::string(s) + "'");
}

inline bool passes(const ResidentRecord& r, NodeFilter f) {
  switch (f) {
    case NodeFilter::all: return true;
    case NodeFilter::adult: return r.is_adult;
    case NodeFilter::stable_adult: return r.is_adult && r.is_stable;
  }
  return true;
}

// One final naming event: namer named someone resolved to resident.
struct Link {
  std::string namer_id;
  std::string resident_id;
  Domain domain = Domain::money;
};

using DomainMask = std::uint8_t;

inline DomainMask domain_bit(Domain d) { return static_cast<DomainMask>(1u << static_cast<unsigned>(d)); }

inline std::string domain_list(DomainMask m) {
  std::string out;
  for (Domain d : kAllDomains)
    if (m & domain_bit(d)) {
      if (!out.empty()) out += ';';
      out += to_string(d);
    }
  return out;
}

struct DirectedEdge {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  DomainMask domains = 0;
  std::uint32_t multiplicity = 0;

  bool operator==(const DirectedEdge&) const = default;
};

class SocialGraph {
 public:
  std::vector<const ResidentRecord*> nodes;
  std::vector<DirectedEdge> edges;                    // sorted by (source, target)
  std::vector<std::vector<std::uint32_t>> adjacency;  // undirected, sorted, no duplicates
  NodeFilter filter = NodeFilter::all;

  std::size_t n_nodes() const { return nodes.size(); }

  std::size_t n_undirected_edges() const {
    std::size_t twice = 0;
    for (const auto& a : adjacency) twice += a.size();
    return twice / 2;
  }

  std::optional<std::uint32_t> node_of(const std::string& resident_id) const {
    auto it = index_.find(resident_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool has_edge(std::uint32_t s, std::uint32_t t) const {
    auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{s, t},
                               [](const DirectedEdge& e, std::pair<std::uint32_t, std::uint32_t> k) {
                                 return std::pair{e.source, e.target} < k;
                               });
    return it != edges.end() && it->source == s && it->target == t;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  friend SocialGraph build_graph(const std::vector<ResidentRecord>&, const std::vector<Link>&, NodeFilter);
};

// Nodes keep the residents' input order. Links whose endpoints are filtered
// out, unknown or identical are skipped.
inline SocialGraph build_graph(const std::vector<ResidentRecord>& residents, const std::vector<Link>& links,
                               NodeFilter filter = NodeFilter::all) {
  SocialGraph g;
  g.filter = filter;
  for (const auto& r : residents) {
    if (!passes(r, filter)) continue;
    g.index_.emplace(r.resident_id, static_cast<std::uint32_t>(g.nodes.size()));
    g.nodes.push_back(&r);
  }
  std::vector<DirectedEdge> raw;
  raw.reserve(links.size());
  for (const auto& l : links) {
    auto s = g.node_of(l.namer_id);
    auto t = g.node_of(l.resident_id);
    if (!s || !t || *s == *t) continue;
    raw.push_back({*s, *t, domain_bit(l.domain), 1});
  }
  std::sort(raw.begin(), raw.end(), [](const DirectedEdge& a, const DirectedEdge& b) {
    return std::pair{a.source, a.target} < std::pair{b.source, b.target};
  });
  for (const auto& e : raw) {
    if (!g.edges.empty() && g.edges.back().source == e.source && g.edges.back().target == e.target) {
      g.edges.back().domains |= e.domains;
      ++g.edges.back().multiplicity;
    } else {
      g.edges.push_back(e);
    }
  }
  g.adjacency.assign(g.nodes.size(), {});
  for (const auto& e : g.edges) {
    g.adjacency[e.source].push_back(e.target);
    g.adjacency[e.target].push_back(e.source);
  }
  for (auto& a : g.adjacency) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return g;
}

// Statistics ----------------------------------------------------------------

struct GraphStats {
  std::size_t n_nodes = 0;
  std::size_t n_directed_edges = 0;
  std::size_t n_undirected_edges = 0;
  std::optional<double> cross_household_fraction;  // undefined without edges
  double average_degree = 0;
  double transitivity = 0;
  double reciprocity = 0;
  double average_path_length = 0;
  double top_cc_coverage = 0;
  bool path_length_sampled = false;
};

struct StatsOptions {
  unsigned threads = 0;
  std::size_t path_sources = 0;  // 0 = exact BFS from every node
  std::uint64_t seed = 1;
};

inline double average_degree(std::size_t n_nodes, std::size_t n_undirected_edges) {
  return n_nodes ? 2.0 * static_cast<double>(n_undirected_edges) / static_cast<double>(n_nodes) : 0.0;
}

inline double transitivity(const SocialGraph& g, unsigned threads = 1) {
  const std::size_t n = g.n_nodes();
  // triangles counted once per (v < u < w) via sorted adjacency intersection
  std::vector<std::uint64_t> tri(resolve_threads(threads) * 4 + 1, 0);
  parallel_chunks(n, resolve_threads(threads), tri.size(), [&](std::size_t chunk, std::size_t b, std::size_t e) {
    std::uint64_t local = 0;
    for (std::size_t v = b; v < e; ++v) {
      const auto& av = g.adjacency[v];
      for (auto u : av) {
        if (u <= v) continue;
        const auto& au = g.adjacency[u];
        auto i = std::upper_bound(av.begin(), av.end(), u);
        auto j = std::upper_bound(au.begin(), au.end(), u);
        while (i != av.end() && j != au.end()) {
          if (*i < *j) ++i;
          else if (*j < *i) ++j;
          else {
            ++local;
            ++i;
            ++j;
          }
        }
      }
    }
    tri[chunk] = local;
  });
  const std::uint64_t triangles = std::accumulate(tri.begin(), tri.end(), std::uint64_t{0});
  std::uint64_t triples = 0;
  for (const auto& a : g.adjacency) triples += static_cast<std::uint64_t>(a.size()) * (a.size() - (a.empty() ? 0 : 1)) / 2;
  if (triples == 0) return 0.0;
  return 3.0 * static_cast<double>(triangles) / static_cast<double>(triples);
}

inline double reciprocity(const SocialGraph& g) {
  if (g.edges.empty()) return 0.0;
  std::size_t r = 0;
  for (const auto& e : g.edges) r += g.has_edge(e.target, e.source);
  return static_cast<double>(r) / static_cast<double>(g.edges.size());
}

inline double top_cc_coverage(const SocialGraph& g) {
  const std::size_t n = g.n_nodes();
  if (n == 0) return 0.0;
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::uint32_t> stack;
  std::size_t best = 0;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::size_t size = 0;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      ++size;
      for (auto u : g.adjacency[v])
        if (!seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
    }
    best = std::max(best, size);
  }
  return static_cast<double>(best) / static_cast<double>(n);
}

// Mean BFS distance over ordered connected pairs. With sources > 0 and fewer
// than n nodes the mean is taken over BFS trees from a seeded sample.
inline std::pair<double, bool> average_path_length(const SocialGraph& g, unsigned threads = 1, std::size_t sources = 0,
                                                   std::uint64_t seed = 1) {
  const std::size_t n = g.n_nodes();
  std::vector<std::uint32_t> from(n);
  std::iota(from.begin(), from.end(), 0u);
  bool sampled = false;
  if (sources > 0 && sources < n) {
    std::mt19937_64 rng(seed);
    std::shuffle(from.begin(), from.end(), rng);
    from.resize(sources);
    std::sort(from.begin(), from.end());
    sampled = true;
  }
  const unsigned t = resolve_threads(threads);
  const std::size_t n_chunks = std::max<std::size_t>(1, std::min<std::size_t>(from.size(), t * 4));
  std::vector<std::uint64_t> sum(n_chunks, 0), cnt(n_chunks, 0);
  parallel_chunks(from.size(), t, n_chunks, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    std::vector<std::int32_t> dist(n, -1);
    std::vector<std::uint32_t> queue(n), visited;
    for (std::size_t k = b; k < e; ++k) {
      const auto s = from[k];
      std::size_t head = 0, tail = 0;
      queue[tail++] = s;
      dist[s] = 0;
      while (head < tail) {
        const auto v = queue[head++];
        for (auto u : g.adjacency[v])
          if (dist[u] < 0) {
            dist[u] = dist[v] + 1;
            sum[chunk] += static_cast<std::uint64_t>(dist[u]);
            ++cnt[chunk];
            queue[tail++] = u;
          }
      }
      for (std::size_t i = 0; i < tail; ++i) dist[queue[i]] = -1;
    }
  });
  const auto total = std::accumulate(sum.begin(), sum.end(), std::uint64_t{0});
  const auto pairs = std::accumulate(cnt.begin(), cnt.end(), std::uint64_t{0});
  return {pairs ? static_cast<double>(total) / static_cast<double>(pairs) : 0.0, sampled};
}

inline std::optional<double> cross_household_fraction(const SocialGraph& g) {
  std::size_t total = 0, cross = 0;
  for (std::uint32_t v = 0; v < g.n_nodes(); ++v)
    for (auto u : g.adjacency[v]) {
      if (u <= v) continue;
      ++total;
      cross += g.nodes[v]->household_id != g.nodes[u]->household_id;
    }
  if (total == 0) return std::nullopt;
  return static_cast<double>(cross) / static_cast<double>(total);
}

inline GraphStats graph_stats(const SocialGraph& g, const StatsOptions& opt = {}) {
  GraphStats s;
  s.n_nodes = g.n_nodes();
  s.n_directed_edges = g.edges.size();
  s.n_undirected_edges = g.n_undirected_edges();
  s.average_degree = average_degree(s.n_nodes, s.n_undirected_edges);
  s.cross_household_fraction = cross_household_fraction(g);
  s.transitivity = transitivity(g, opt.threads);
  s.reciprocity = reciprocity(g);
  std::tie(s.average_path_length, s.path_length_sampled) =
      average_path_length(g, opt.threads, opt.path_sources, opt.seed);
  s.top_cc_coverage = top_cc_coverage(g);
  return s;
}

// Assortativity ----------------------------------------------------------------

// Discrete coefficient from the symmetric mixing matrix over undirected edges
// whose endpoints both carry the attribute. nullopt when undefined.
inline std::optional<double> assortativity_discrete(const SocialGraph& g,
                                                    const std::vector<std::optional<std::string>>& attr) {
  require(attr.size() == g.n_nodes(), "attribute vector must have one entry per node");
  std::unordered_map<std::string, std::uint32_t> codes;
  std::vector<std::int64_t> code(g.n_nodes(), -1);
  for (std::size_t v = 0; v < attr.size(); ++v)
    if (attr[v]) code[v] = codes.emplace(*attr[v], static_cast<std::uint32_t>(codes.size())).first->second;
  std::vector<double> a(codes.size(), 0.0);
  double diag = 0, total = 0;
  for (std::uint32_t v = 0; v < g.n_nodes(); ++v) {
    if (code[v] < 0) continue;
    for (auto u : g.adjacency[v]) {
      if (code[u] < 0) continue;
      // each orientation once; a_i doubles as b_i by symmetry
      total += 1;
      a[static_cast<std::size_t>(code[v])] += 1;
      if (code[u] == code[v]) diag += 1;
    }
  }
  if (total == 0) return std::nullopt;
  double ab = 0;
  for (double x : a) ab += (x / total) * (x / total);
  const double denom = 1.0 - ab;
  if (std::abs(denom) < 1e-15) return std::nullopt;
  return (diag / total - ab) / denom;
}

// Pearson correlation of endpoint values over both orientations of every
// undirected edge with two observed endpoints.
inline std::optional<double> assortativity_continuous(const SocialGraph& g, const std::vector<std::optional<double>>& x) {
  require(x.size() == g.n_nodes(), "attribute vector must have one entry per node");
  double n = 0, mean = 0;
  for (std::uint32_t v = 0; v < g.n_nodes(); ++v) {
    if (!x[v]) continue;
    for (auto u : g.adjacency[v])
      if (x[u]) {
        n += 1;
        mean += *x[v];
      }
  }
  if (n == 0) return std::nullopt;
  mean /= n;
  // symmetric edge list: both marginals share mean and variance
  double sxy = 0, sxx = 0;
  for (std::uint32_t v = 0; v < g.n_nodes(); ++v) {
    if (!x[v]) continue;
    for (auto u : g.adjacency[v])
      if (x[u]) {
        sxy += (*x[v] - mean) * (*x[u] - mean);
        sxx += (*x[v] - mean) * (*x[v] - mean);
      }
  }
  if (sxx <= 0) return std::nullopt;
  return sxy / sxx;
}

inline constexpr std::array<std::string_view, 8> kAssortativityCovariates{
    "age", "sex", "village", "education", "occupation", "wealth_index", "alcohol_use", "contraception_use"};

inline std::vector<std::optional<std::string>> discrete_attribute(const SocialGraph& g, std::string_view name) {
  std::vector<std::optional<std::string>> out(g.n_nodes());
  for (std::size_t v = 0; v < g.n_nodes(); ++v) {
    const auto& r = *g.nodes[v];
    if (name == "sex") {
      if (r.sex) out[v] = std::string(to_string(*r.sex));
    } else if (name == "village") {
      if (!r.village.empty()) out[v] = r.village;
    } else if (name == "household") {
      out[v] = r.household_id;
    } else if (const auto* c = covariate(r.covariates, name)) {
      out[v] = *c;
    } else {
      fail(ErrorKind::config, "unknown discrete attribute '" + std::string(name) + "'");
    }
  }
  return out;
}

inline std::vector<std::optional<double>> age_attribute(const SocialGraph& g) {
  std::vector<std::optional<double>> out(g.n_nodes());
  for (std::size_t v = 0; v < g.n_nodes(); ++v)
    if (g.nodes[v]->age) out[v] = *g.nodes[v]->age;
  return out;
}

struct AssortativityRow {
  std::string covariate;
  std::optional<double> r;
};

inline std::vector<AssortativityRow> assortativity_table(const SocialGraph& g) {
  std::vector<AssortativityRow> out;
  for (auto name : kAssortativityCovariates) {
    AssortativityRow row{std::string(name), {}};
    row.r = name == "age" ? assortativity_continuous(g, age_attribute(g))
                          : assortativity_discrete(g, discrete_attribute(g, name));
    out.push_back(row);
  }
  return out;
}

// Exports ------------------------------------------------------------------------

inline csv::Table edges_table(const SocialGraph& g) {
  csv::Table t;
  t.header = {"source", "target", "domains", "multiplicity"};
  for (const auto& e : g.edges)
    t.rows.push_back({g.nodes[e.source]->resident_id, g.nodes[e.target]->resident_id, domain_list(e.domains),
                      std::to_string(e.multiplicity)});
  return t;
}

inline std::string opt_str(const std::optional<std::string>& v) { return v ? *v : std::string(); }

inline csv::Table nodes_table(const SocialGraph& g) {
  csv::Table t;
  t.header = {"resident_id", "age", "sex", "village", "household_id", "is_adult", "is_stable", "degree"};
  for (auto c : kCovariateNames) t.header.emplace_back(c);
  for (std::size_t v = 0; v < g.n_nodes(); ++v) {
    const auto& r = *g.nodes[v];
    csv::Row row{r.resident_id,
                 r.age ? std::to_string(*r.age) : "",
                 r.sex ? std::string(to_string(*r.sex)) : "",
                 r.village,
                 r.household_id,
                 r.is_adult ? "1" : "0",
                 r.is_stable ? "1" : "0",
                 std::to_string(g.adjacency[v].size())};
    for (auto c : kCovariateNames) row.push_back(opt_str(*covariate(r.covariates, c)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string graphml(const SocialGraph& g) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      "  <key id=\"age\" for=\"node\" attr.name=\"age\" attr.type=\"int\"/>\n"
      "  <key id=\"sex\" for=\"node\" attr.name=\"sex\" attr.type=\"string\"/>\n"
      "  <key id=\"village\" for=\"node\" attr.name=\"village\" attr.type=\"string\"/>\n"
      "  <key id=\"household\" for=\"node\" attr.name=\"household\" attr.type=\"string\"/>\n"
      "  <key id=\"domains\" for=\"edge\" attr.name=\"domains\" attr.type=\"string\"/>\n"
      "  <key id=\"multiplicity\" for=\"edge\" attr.name=\"multiplicity\" attr.type=\"int\"/>\n"
      "  <graph id=\"G\" edgedefault=\"directed\">\n";
  for (const auto* r : g.nodes) {
    out += "    <node id=\"" + xml_escape(r->resident_id) + "\">";
    if (r->age) out += "<data key=\"age\">" + std::to_string(*r->age) + "</data>";
    if (r->sex) out += "<data key=\"sex\">" + std::string(to_string(*r->sex)) + "</data>";
    out += "<data key=\"village\">" + xml_escape(r->village) + "</data>";
    out += "<data key=\"household\">" + xml_escape(r->household_id) + "</data>";
    out += "</node>\n";
  }
  for (const auto& e : g.edges) {
    out += "    <edge source=\"" + xml_escape(g.nodes[e.source]->resident_id) + "\" target=\"" +
           xml_escape(g.nodes[e.target]->resident_id) + "\">";
    out += "<data key=\"domains\">" + domain_list(e.domains) + "</data>";
    out += "<data key=\"multiplicity\">" + std::to_string(e.multiplicity) + "</data>";
    out += "</edge>\n";
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

inline void export_graph(const SocialGraph& g, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  csv::write((dir / (stem + "_edges.csv")).string(), edges_table(g));
  csv::write((dir / (stem + "_nodes.csv")).string(), nodes_table(g));
  csv::write_file((dir / (stem + ".graphml")).string(), graphml(g));
}

}  // namespace linkforge
