#pragma once
// Data-quality and linkage metrics per community and the table/JSON emitters.
// Undefined values stay undefined all the way to the files (empty cells,
// JSON null); they are never written as zero.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "linkforge/config.hpp"
#include "linkforge/csv.hpp"
#include "linkforge/format.hpp"
#include "linkforge/matcher.hpp"
#include "linkforge/netgraph.hpp"
#include "linkforge/records.hpp"

namespace linkforge {

struct CappedPercent {
  std::optional<double> value;  // min(raw, 100)
  std::optional<double> raw;
  bool capped = false;
};

inline CappedPercent capped_percent(std::size_t num, std::size_t den) {
  CappedPercent c;
  if (den == 0) return c;
  c.raw = 100.0 * static_cast<double>(num) / static_cast<double>(den);
  c.capped = *c.raw > 100.0;
  c.value = std::min(*c.raw, 100.0);
  return c;
}

inline std::optional<double> percent(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

struct GraphSection {
  NodeFilter filter = NodeFilter::all;
  GraphStats stats;
};

struct CommunityReport {
  std::string community_id;
  std::size_t n_enumerated = 0;
  std::size_t n_adults = 0;
  std::size_t n_namers = 0;
  std::size_t contacts_total = 0;
  std::size_t contacts_matched = 0;

  std::optional<double> pct_contacts_missing_age;            // metric 1
  std::optional<double> pct_contacts_outside_or_no_village;  // metric 2
  std::optional<double> pct_contacts_blank_village;          // share of metric 2 with no village at all
  std::optional<double> pct_contacts_in_community;
  std::optional<double> pct_contacts_matched;                // metric 3
  CappedPercent pct_in_community_matched;                    // metric 4
  CappedPercent matched_per_in_community;                    // all matches / in-community contacts
  std::optional<double> cross_household_fraction;            // metric 5

  std::vector<GraphSection> graphs;
  NodeFilter assortativity_filter = NodeFilter::adult;
  std::vector<AssortativityRow> assortativity;
};

// Metrics 1-4 from the preprocessed dataset and the ids of matched contacts.
inline CommunityReport data_quality_report(const CommunityDataset& ds, const std::set<std::string>& matched_contact_ids) {
  CommunityReport r;
  r.community_id = ds.community_id;
  r.n_enumerated = ds.residents.size();
  for (const auto& res : ds.residents) r.n_adults += res.is_adult;
  std::set<std::string> namers;
  std::size_t missing_age = 0, blank_village = 0, outside = 0, in_comm = 0, matched = 0, matched_in = 0;
  for (const auto& c : ds.contacts) {
    namers.insert(c.namer_id);
    if (!c.reported_age) ++missing_age;
    const bool blank = !c.reported_village || c.reported_village->empty();
    const bool inside = !blank && c.village_in_registry;
    blank_village += blank;
    outside += !inside;
    in_comm += inside;
    const bool m = matched_contact_ids.count(c.contact_id) > 0;
    matched += m;
    matched_in += m && inside;
  }
  r.n_namers = namers.size();
  r.contacts_total = ds.contacts.size();
  r.contacts_matched = matched;
  const std::size_t n = ds.contacts.size();
  r.pct_contacts_missing_age = percent(missing_age, n);
  r.pct_contacts_outside_or_no_village = percent(outside, n);
  r.pct_contacts_blank_village = percent(blank_village, n);
  r.pct_contacts_in_community = percent(in_comm, n);
  r.pct_contacts_matched = percent(matched, n);
  r.pct_in_community_matched = capped_percent(matched_in, in_comm);
  r.matched_per_in_community = capped_percent(matched, in_comm);
  return r;
}

// Contact indices in the match result refer to ds.contacts.
inline CommunityReport data_quality_report(const CommunityDataset& ds, const MatchResult& m) {
  std::set<std::string> ids;
  for (const auto& p : m.matched) {
    if (p.contact >= ds.contacts.size()) fail(ErrorKind::contract, "match result does not belong to this dataset");
    ids.insert(ds.contacts[p.contact].contact_id);
  }
  return data_quality_report(ds, ids);
}

// Adds graph statistics, metric 5 and assortativity.
inline void add_network_sections(CommunityReport& r, const std::vector<ResidentRecord>& residents,
                                 const std::vector<Link>& links, const std::vector<NodeFilter>& filters,
                                 const StatsOptions& opt = {},
                                 const std::vector<GraphSection>* precomputed = nullptr) {
  r.graphs.clear();
  bool have_assort = false;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const auto f = filters[i];
    const bool reuse = precomputed && i < precomputed->size() && (*precomputed)[i].filter == f;
    if (reuse && f != r.assortativity_filter) {
      r.graphs.push_back((*precomputed)[i]);
      if (f == NodeFilter::all) r.cross_household_fraction = r.graphs.back().stats.cross_household_fraction;
      continue;
    }
    const auto g = build_graph(residents, links, f);
    r.graphs.push_back(reuse ? (*precomputed)[i] : GraphSection{f, graph_stats(g, opt)});
    if (f == NodeFilter::all) r.cross_household_fraction = r.graphs.back().stats.cross_household_fraction;
    if (f == r.assortativity_filter) {
      r.assortativity = assortativity_table(g);
      have_assort = true;
    }
  }
  if (!r.cross_household_fraction)
    r.cross_household_fraction = cross_household_fraction(build_graph(residents, links, NodeFilter::all));
  if (!have_assort) r.assortativity = assortativity_table(build_graph(residents, links, r.assortativity_filter));
}

// Emission ----------------------------------------------------------------------

inline const std::vector<std::string>& table1_header() {
  static const std::vector<std::string> h{"community_id",
                                          "n_enumerated",
                                          "n_adults",
                                          "n_namers",
                                          "contacts_total",
                                          "contacts_matched",
                                          "pct_contacts_missing_age",
                                          "pct_contacts_outside_or_no_village",
                                          "pct_contacts_blank_village",
                                          "pct_contacts_in_community",
                                          "pct_contacts_matched",
                                          "pct_in_community_matched",
                                          "pct_in_community_matched_raw",
                                          "pct_in_community_matched_capped",
                                          "matched_per_in_community",
                                          "matched_per_in_community_raw",
                                          "matched_per_in_community_capped",
                                          "cross_household_fraction"};
  return h;
}

inline const std::vector<std::string>& table2_header() {
  static const std::vector<std::string> h{"community_id",       "filter",          "n_nodes",
                                          "n_directed_edges",   "n_undirected_edges", "average_degree",
                                          "transitivity",       "reciprocity",     "average_path_length",
                                          "path_length_sampled", "top_cc_coverage", "cross_household_fraction"};
  return h;
}

inline csv::Table table1(std::vector<const CommunityReport*> rs) {
  csv::Table t;
  t.header = table1_header();
  for (const auto* r : rs) {
    t.rows.push_back({r->community_id, std::to_string(r->n_enumerated), std::to_string(r->n_adults),
                      std::to_string(r->n_namers), std::to_string(r->contacts_total), std::to_string(r->contacts_matched),
                      format_optional(r->pct_contacts_missing_age), format_optional(r->pct_contacts_outside_or_no_village),
                      format_optional(r->pct_contacts_blank_village), format_optional(r->pct_contacts_in_community),
                      format_optional(r->pct_contacts_matched), format_optional(r->pct_in_community_matched.value),
                      format_optional(r->pct_in_community_matched.raw),
                      r->pct_in_community_matched.value ? (r->pct_in_community_matched.capped ? "1" : "0") : "",
                      format_optional(r->matched_per_in_community.value), format_optional(r->matched_per_in_community.raw),
                      r->matched_per_in_community.value ? (r->matched_per_in_community.capped ? "1" : "0") : "",
                      format_optional(r->cross_household_fraction)});
  }
  return t;
}

inline csv::Table table2(std::vector<const CommunityReport*> rs) {
  csv::Table t;
  t.header = table2_header();
  for (const auto* r : rs)
    for (const auto& g : r->graphs) {
      const auto& s = g.stats;
      t.rows.push_back({r->community_id, std::string(to_string(g.filter)), std::to_string(s.n_nodes),
                        std::to_string(s.n_directed_edges), std::to_string(s.n_undirected_edges),
                        format_double(s.average_degree), format_double(s.transitivity), format_double(s.reciprocity),
                        format_double(s.average_path_length), s.path_length_sampled ? "1" : "0",
                        format_double(s.top_cc_coverage), format_optional(s.cross_household_fraction)});
    }
  return t;
}

inline csv::Table assortativity_csv(std::vector<const CommunityReport*> rs) {
  csv::Table t;
  t.header = {"community_id", "filter"};
  for (auto c : kAssortativityCovariates) t.header.emplace_back(c);
  for (const auto* r : rs) {
    csv::Row row{r->community_id, std::string(to_string(r->assortativity_filter))};
    for (auto c : kAssortativityCovariates) {
      std::optional<double> v;
      for (const auto& a : r->assortativity)
        if (a.covariate == c) v = a.r;
      row.push_back(format_optional(v));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(); }

inline json capped_json(const CappedPercent& c) {
  return json{{"value", opt_json(c.value)}, {"raw", opt_json(c.raw)}, {"capped", c.capped}};
}

inline json to_json(const CommunityReport& r) {
  json graphs = json::array();
  for (const auto& g : r.graphs) {
    const auto& s = g.stats;
    graphs.push_back(json{{"filter", to_string(g.filter)},
                          {"n_nodes", s.n_nodes},
                          {"n_directed_edges", s.n_directed_edges},
                          {"n_undirected_edges", s.n_undirected_edges},
                          {"average_degree", s.average_degree},
                          {"transitivity", s.transitivity},
                          {"reciprocity", s.reciprocity},
                          {"average_path_length", s.average_path_length},
                          {"path_length_sampled", s.path_length_sampled},
                          {"top_cc_coverage", s.top_cc_coverage},
                          {"cross_household_fraction", opt_json(s.cross_household_fraction)}});
  }
  json assort = json::object();
  for (const auto& a : r.assortativity) assort[a.covariate] = opt_json(a.r);
  return json{{"community_id", r.community_id},
              {"n_enumerated", r.n_enumerated},
              {"n_adults", r.n_adults},
              {"n_namers", r.n_namers},
              {"contacts_total", r.contacts_total},
              {"contacts_matched", r.contacts_matched},
              {"pct_contacts_missing_age", opt_json(r.pct_contacts_missing_age)},
              {"pct_contacts_outside_or_no_village", opt_json(r.pct_contacts_outside_or_no_village)},
              {"pct_contacts_blank_village", opt_json(r.pct_contacts_blank_village)},
              {"pct_contacts_in_community", opt_json(r.pct_contacts_in_community)},
              {"pct_contacts_matched", opt_json(r.pct_contacts_matched)},
              {"pct_in_community_matched", capped_json(r.pct_in_community_matched)},
              {"matched_per_in_community", capped_json(r.matched_per_in_community)},
              {"cross_household_fraction", opt_json(r.cross_household_fraction)},
              {"graphs", graphs},
              {"assortativity_filter", to_string(r.assortativity_filter)},
              {"assortativity", assort}};
}

// Writes table1.csv, table2.csv, assortativity.csv and report.json with
// communities sorted by id.
inline std::vector<fs::path> emit_reports(const std::vector<CommunityReport>& reports, const fs::path& dir) {
  if (reports.empty()) fail(ErrorKind::contract, "emit_reports needs at least one report");
  std::vector<const CommunityReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto* a, const auto* b) { return a->community_id < b->community_id; });
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> out{dir / "table1.csv", dir / "table2.csv", dir / "assortativity.csv", dir / "report.json"};
  csv::write(out[0].string(), table1(sorted));
  csv::write(out[1].string(), table2(sorted));
  csv::write(out[2].string(), assortativity_csv(sorted));
  json all = json::array();
  for (const auto* r : sorted) all.push_back(to_json(*r));
  write_json_file(out[3], json{{"format_version", 1}, {"communities", all}});
  return out;
}

}  // namespace linkforge
