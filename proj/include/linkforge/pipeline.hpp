#pragma once
// End-to-end stages driven by a PipelineConfig: load, preprocess, match,
// network, report. Every run records a deterministic manifest.json and a
// separate timings.json.

#include <chrono>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "linkforge/config.hpp"
#include "linkforge/csv.hpp"
#include "linkforge/format.hpp"
#include "linkforge/matcher.hpp"
#include "linkforge/netgraph.hpp"
#include "linkforge/parallel.hpp"
#include "linkforge/preprocess.hpp"
#include "linkforge/records.hpp"
#include "linkforge/report.hpp"
#include "linkforge/tuning.hpp"

#ifndef LINKFORGE_VERSION
#define LINKFORGE_VERSION "0.0.0"
#endif

namespace linkforge {

inline std::string file_digest(const fs::path& p) { return Fnv1a().add(csv::read_file(p.string())).hex(); }

inline std::string config_hash(const MatchConfig& c) { return Fnv1a().add(to_json(c).dump()).hex(); }

// Manifest and timings for one CLI invocation. The manifest holds only
// values that are a function of inputs, config and seeds.
class RunLog {
 public:
  explicit RunLog(std::string command) {
    manifest_ = json{{"tool", "linkforge"}, {"version", LINKFORGE_VERSION}, {"format_version", 1}, {"command", std::move(command)}};
    timings_ = json{{"stages", json::object()}};
  }

  json& manifest() { return manifest_; }
  const json& manifest() const { return manifest_; }

  template <typename F>
  decltype(auto) timed(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Record {
      RunLog* self;
      std::string stage;
      std::chrono::steady_clock::time_point t0;
      ~Record() {
        self->timings_["stages"][stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
    } rec{this, stage, t0};
    return f();
  }

  void input(const std::string& role, const fs::path& p) {
    manifest_["inputs"][role] = json{{"file", p.filename().string()}, {"fnv1a", file_digest(p)}};
  }

  void output(const fs::path& dir, const fs::path& p) {
    manifest_["outputs"][fs::relative(p, dir).generic_string()] = file_digest(p);
  }

  // <command>.manifest.json and <command>.timings.json
  fs::path write(const fs::path& dir, unsigned threads) {
    const std::string cmd = manifest_["command"].get<std::string>();
    timings_["threads"] = threads;
    timings_["finished_at"] = utc_timestamp();
    write_json_file(dir / (cmd + ".manifest.json"), manifest_);
    write_json_file(dir / (cmd + ".timings.json"), timings_);
    return dir / (cmd + ".manifest.json");
  }

 private:
  json manifest_;
  json timings_;
};

inline json load_report_json(const LoadReport& r) {
  return json{{"rows_in", r.rows_in}, {"records_out", r.records_out}, {"dropped", r.dropped}, {"warnings", r.warnings}};
}

inline json preprocess_report_json(const PreprocessReport& r) {
  return json{{"residents", r.residents},
              {"contacts", r.contacts},
              {"contacts_nickname_corrected", r.contacts_nickname_corrected},
              {"nickname_fraction", r.nickname_fraction()},
              {"contacts_with_village", r.contacts_with_village},
              {"contact_villages_corrected", r.contact_villages_corrected},
              {"village_fix_fraction", r.village_fix_fraction()},
              {"contacts_out_of_registry", r.contacts_out_of_registry},
              {"contacts_sex_imputed", r.contacts_sex_imputed},
              {"unusable_resident_names", r.unusable_resident_names},
              {"unusable_contact_names", r.unusable_contact_names},
              {"residents_out_of_registry", r.residents_out_of_registry}};
}

inline json drop_counts_json(const DropCounts& d) {
  return json{{"no_candidates", d.no_candidates},     {"below_threshold", d.below_threshold},
              {"self_match", d.self_match},           {"undefined_score", d.undefined_score},
              {"rule_a", d.rule_a},                   {"rule_b", d.rule_b},
              {"rule_c", d.rule_c},                   {"postprocess_removed", d.postprocess_removed}};
}

inline json stage_fit_json(const StageFit& s) {
  return json{{"stage", to_string(s.stage)},  {"n_pairs", s.n_pairs},          {"n_contacts", s.n_contacts},
              {"u", s.fit.u},                 {"sigma", s.fit.sigma},          {"xi", s.fit.xi},
              {"t", s.fit.t},                 {"effective_t", s.effective_t},  {"fallback", s.fit.fallback},
              {"n_scores", s.fit.n_scores},   {"n_exceedances", s.fit.n_exceedances}};
}

// Loading ------------------------------------------------------------------------

inline LookupTables load_tables(const TableSources& src) {
  LookupTables t;
  if (src.nicknames) t.nickname_prefixes = load_nickname_table(src.nicknames->string());
  if (src.honorifics) t.honorifics = load_honorific_table(src.honorifics->string());
  if (src.sex_names) t.sex_by_first_name = load_sex_table(src.sex_names->string());
  if (src.village_fixes) t.village_fixes = load_village_fix_table(src.village_fixes->string());
  return t;
}

struct Prepared {
  CommunityDataset dataset;  // preprocessed
  PreprocessReport report;
  LoadReport residents_report, contacts_report;
};

inline CommunityDataset load_raw(const PipelineConfig& c, RunLog& log, LoadReport* rr = nullptr, LoadReport* cr = nullptr) {
  if (!c.residents) fail(ErrorKind::config, "data.residents is not set");
  if (!c.contacts) fail(ErrorKind::config, "data.contacts is not set");
  validate_paths(c);
  CommunityDataset ds;
  ds.community_id = c.community_id;
  auto res = load_residents(c.residents->string(), c.resident_columns);
  auto con = load_contacts(c.contacts->string(), c.contact_columns, res.records, c.community_id);
  ds.residents = std::move(res.records);
  ds.contacts = std::move(con.records);
  if (c.villages) {
    ds.village_registry = load_villages(c.villages->string());
    log.input("villages", *c.villages);
  } else {
    for (const auto& r : ds.residents)
      if (!r.village.empty()) ds.village_registry.insert(r.village);
  }
  log.input("residents", *c.residents);
  log.input("contacts", *c.contacts);
  log.manifest()["community_id"] = c.community_id;
  log.manifest()["load"] = json{{"residents", load_report_json(res.report)}, {"contacts", load_report_json(con.report)}};
  if (rr) *rr = res.report;
  if (cr) *cr = con.report;
  return ds;
}

inline Prepared prepare(const PipelineConfig& c, RunLog& log) {
  Prepared p;
  auto raw = log.timed("load", [&] { return load_raw(c, log, &p.residents_report, &p.contacts_report); });
  const auto tables = load_tables(c.tables);
  for (auto [role, path] : {std::pair{"nicknames", c.tables.nicknames}, std::pair{"honorifics", c.tables.honorifics},
                            std::pair{"sex_names", c.tables.sex_names}, std::pair{"village_fixes", c.tables.village_fixes}})
    if (path) log.input(role, *path);
  auto out = log.timed("preprocess", [&] { return preprocess_dataset(std::move(raw), tables); });
  p.dataset = std::move(out.dataset);
  p.report = out.report;
  log.manifest()["preprocess"] = preprocess_report_json(p.report);
  return p;
}

// Matching -----------------------------------------------------------------------

struct MatchRow {
  std::string contact_id, resident_id, namer_id;
  Domain domain = Domain::money;
  double score = 0;
  std::string stage;
};

inline const std::vector<std::string>& matches_header() {
  static const std::vector<std::string> h{"contact_id", "resident_id", "namer_id", "domain", "score", "stage"};
  return h;
}

inline std::vector<MatchRow> match_rows(const CommunityDataset& ds, const MatchResult& m) {
  std::vector<MatchRow> out;
  out.reserve(m.matched.size());
  for (const auto& p : m.matched) {
    const auto& c = ds.contacts[p.contact];
    out.push_back({c.contact_id, ds.residents[p.resident].resident_id, c.namer_id, c.domain, p.score,
                   std::string(to_string(p.stage))});
  }
  return out;
}

inline csv::Table matches_table(const std::vector<MatchRow>& rows) {
  csv::Table t;
  t.header = matches_header();
  for (const auto& r : rows)
    t.rows.push_back({r.contact_id, r.resident_id, r.namer_id, std::string(to_string(r.domain)), format_double(r.score), r.stage});
  return t;
}

inline std::vector<MatchRow> read_matches(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::config, "matches file not found: " + path.string() + " (run `match` first)");
  const auto t = csv::read(path.string());
  std::vector<std::size_t> col;
  for (const auto& h : matches_header()) {
    auto c = t.column(h);
    if (!c) fail(ErrorKind::schema, path.string() + ": missing column '" + h + "'");
    col.push_back(*c);
  }
  std::vector<MatchRow> out;
  for (const auto& row : t.rows) {
    auto cell = [&](std::size_t k) -> const std::string& {
      if (col[k] >= row.size()) fail(ErrorKind::data, path.string() + ": ragged row");
      return row[col[k]];
    };
    auto d = parse_domain(cell(3));
    if (!d) fail(ErrorKind::data, path.string() + ": bad domain '" + cell(3) + "'");
    out.push_back({cell(0), cell(1), cell(2), *d, require_double(cell(4), "score"), cell(5)});
  }
  return out;
}

inline std::vector<Link> links_from(const std::vector<MatchRow>& rows) {
  std::vector<Link> links;
  links.reserve(rows.size());
  for (const auto& r : rows) links.push_back({r.namer_id, r.resident_id, r.domain});
  return links;
}

inline MatchResult run_match(const PipelineConfig& c, const Prepared& p, const MatchConfig& config, RunLog& log) {
  MatchOptions opt;
  opt.threads = resolve_threads(c.threads);
  opt.pair_budget = c.pair_budget;
  log.manifest()["match_config"] = to_json(config);
  log.manifest()["config_hash"] = config_hash(config);
  log.manifest()["pair_budget"] = c.pair_budget;
  auto result = log.timed("match", [&] {
    const MatchInputs in(p.dataset.residents, p.dataset.contacts);
    return run_two_stage(in, config, opt);
  });
  json stages = json::array();
  for (const auto& f : result.fits) stages.push_back(stage_fit_json(f));
  log.manifest()["match"] = json{{"contacts", p.dataset.contacts.size()},
                                 {"matched", result.matched.size()},
                                 {"unmatched", result.unmatched.size()},
                                 {"stages", stages},
                                 {"dropped", drop_counts_json(result.dropped)}};
  const auto rows = match_rows(p.dataset, result);
  fs::create_directories(c.output_dir);
  const auto path = c.output_dir / "matches.csv";
  csv::write(path.string(), matches_table(rows));
  log.output(c.output_dir, path);
  csv::Table un;
  un.header = {"contact_id", "namer_id", "domain", "name"};
  for (auto i : result.unmatched) {
    const auto& k = p.dataset.contacts[i];
    un.rows.push_back({k.contact_id, k.namer_id, std::string(to_string(k.domain)), k.raw_name});
  }
  csv::write((c.output_dir / "unmatched.csv").string(), un);
  log.output(c.output_dir, c.output_dir / "unmatched.csv");
  return result;
}

// Network and report -------------------------------------------------------------

inline std::vector<GraphSection> run_network(const PipelineConfig& c, const std::vector<ResidentRecord>& residents,
                                             const std::vector<Link>& links, RunLog& log) {
  std::vector<GraphSection> out;
  const auto dir = c.output_dir / "network";
  StatsOptions opt;
  opt.threads = resolve_threads(c.threads);
  opt.path_sources = c.path_sources;
  opt.seed = c.seed;
  json stats = json::array();
  log.timed("network", [&] {
    for (auto f : c.node_filters) {
      const auto g = build_graph(residents, links, f);
      const std::string stem(to_string(f));
      export_graph(g, dir, stem);
      for (auto suffix : {"_edges.csv", "_nodes.csv", ".graphml"}) log.output(c.output_dir, dir / (stem + suffix));
      out.push_back({f, graph_stats(g, opt)});
      const auto& s = out.back().stats;
      stats.push_back(json{{"filter", stem},
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
    return 0;
  });
  log.manifest()["network"] = json{{"path_sources", c.path_sources}, {"seed", c.seed}, {"graphs", stats}};
  return out;
}

inline CommunityReport run_report(const PipelineConfig& c, const Prepared& p, const std::vector<MatchRow>& rows,
                                  RunLog& log, const std::vector<GraphSection>* graphs = nullptr) {
  std::set<std::string> matched;
  for (const auto& r : rows) matched.insert(r.contact_id);
  auto report = log.timed("report", [&] {
    auto r = data_quality_report(p.dataset, matched);
    StatsOptions opt;
    opt.threads = resolve_threads(c.threads);
    opt.path_sources = c.path_sources;
    opt.seed = c.seed;
    add_network_sections(r, p.dataset.residents, links_from(rows), c.node_filters, opt, graphs);
    return r;
  });
  const auto dir = c.output_dir / "report";
  for (const auto& f : emit_reports({report}, dir)) log.output(c.output_dir, f);
  return report;
}

struct PipelineRun {
  Prepared prepared;
  MatchResult match;
  std::vector<MatchRow> rows;
  CommunityReport report;
};

// preprocess -> match -> network -> report with a pre-selected config.
inline PipelineRun run_pipeline(const PipelineConfig& c, RunLog& log) {
  const auto config = resolve_match_config(c);
  PipelineRun run;
  run.prepared = prepare(c, log);
  run.match = run_match(c, run.prepared, config, log);
  run.rows = match_rows(run.prepared.dataset, run.match);
  const auto graphs = run_network(c, run.prepared.dataset.residents, links_from(run.rows), log);
  run.report = run_report(c, run.prepared, run.rows, log, &graphs);
  return run;
}

// Tuning ---------------------------------------------------------------------------

inline TuningSession run_tune(const PipelineConfig& c, const fs::path& session_dir, RunLog& log) {
  const auto p = prepare(c, log);
  TuningParams params;
  params.n_contacts = c.tune_contacts;
  params.n_weights = c.tune_weights;
  params.seed = c.seed;
  params.threads = resolve_threads(c.threads);
  auto s = log.timed("sample_session", [&] { return sample_session(p.dataset, params); });
  log.timed("save_session", [&] {
    save_session(s, session_dir);
    return 0;
  });
  log.manifest()["tuning"] = json{{"session_id", s.session_id}, {"seed", params.seed}, {"n_contacts", params.n_contacts},
                                  {"n_weights", params.n_weights}, {"n_configs", s.configs.size()},
                                  {"n_pairs", s.pairs.size()}, {"warnings", s.warnings}};
  return s;
}

}  // namespace linkforge
