#pragma once
// Pipeline configuration file (TOML) and the JSON form of a match
// configuration as written by tuning and read by the matcher.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "linkforge/epilink.hpp"
#include "linkforge/error.hpp"
#include "linkforge/netgraph.hpp"
#include "linkforge/records.hpp"

namespace linkforge {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// MatchConfig <-> JSON ----------------------------------------------------------

inline json to_json(const MatchConfig& c) {
  json w = json::object();
  for (Field f : kAllFields) w[std::string(to_string(f))] = c.weights[static_cast<std::size_t>(f)];
  return json{{"weights", w}, {"exceedance_quantile", c.exceedance_quantile}};
}

inline MatchConfig match_config_from_json(const json& j) {
  MatchConfig c;
  try {
    const auto& w = j.at("weights");
    if (w.is_array()) {
      if (w.size() != kFieldCount) fail(ErrorKind::config, "match config: weights must have 7 entries");
      for (std::size_t i = 0; i < kFieldCount; ++i) c.weights[i] = w[i].get<double>();
    } else {
      for (Field f : kAllFields) c.weights[static_cast<std::size_t>(f)] = w.at(std::string(to_string(f))).get<double>();
    }
    c.exceedance_quantile = j.at("exceedance_quantile").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("match config: ") + e.what());
  }
  c.validate();
  return c;
}

inline json read_json_file(const fs::path& p) {
  std::ifstream f(p);
  if (!f) fail(ErrorKind::io, "cannot read " + p.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, p.string() + ": " + e.what());
  }
}

// Written to a sibling temp file, then renamed over the target.
inline void write_json_file(const fs::path& p, const json& j) {
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::io, "cannot write " + p.string());
    f << j.dump(2) << '\n';
    if (!f) fail(ErrorKind::io, "write failed: " + p.string());
  }
  fs::rename(tmp, p, ec);
  if (ec) fail(ErrorKind::io, "cannot replace " + p.string() + ": " + ec.message());
}

inline MatchConfig read_match_config(const fs::path& p) { return match_config_from_json(read_json_file(p)); }

// Pipeline configuration ----------------------------------------------------------

struct TableSources {
  std::optional<fs::path> nicknames, honorifics, sex_names, village_fixes;
};

struct PipelineConfig {
  fs::path base_dir;  // relative paths resolve against the config file's directory
  std::string community_id = "community";
  std::optional<fs::path> residents, contacts, villages;
  fs::path output_dir = "out";
  ResidentSchema resident_columns;
  ContactSchema contact_columns;
  TableSources tables;

  std::optional<MatchConfig> match;  // explicit weights and quantile
  std::optional<fs::path> session;   // tuning session holding chosen_config.json
  std::uint64_t pair_budget = 500'000'000ULL;
  unsigned threads = 0;

  std::vector<NodeFilter> node_filters{NodeFilter::all, NodeFilter::adult, NodeFilter::stable_adult};
  std::size_t path_sources = 0;

  std::size_t tune_contacts = 1000;
  std::size_t tune_weights = 1000;
  std::uint64_t seed = 1;

  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<fs::path> static_dir;
};

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

template <typename T>
std::optional<T> get(const toml::table& t, std::string_view key) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) return *v;  // integers convert too
  } else if (auto v = node->value<T>()) {
    return *v;
  }
  fail(ErrorKind::config, "config key '" + std::string(key) + "' has the wrong type");
}

inline void read_columns(const toml::table* t, std::initializer_list<std::pair<const char*, std::string*>> slots) {
  if (!t) return;
  for (auto [key, slot] : slots)
    if (auto v = get<std::string>(*t, key)) *slot = *v;
  for (auto&& [k, _] : *t) {
    bool known = false;
    for (auto [key, slot] : slots) known |= k.str() == key;
    if (!known) fail(ErrorKind::config, "unknown column mapping key '" + std::string(k.str()) + "'");
  }
}

}  // namespace detail

inline PipelineConfig parse_pipeline_config(std::string_view text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    fail(ErrorKind::config, std::string("config parse error: ") + std::string(e.description()) + " at line " +
                                std::to_string(e.source().begin.line));
  }
  PipelineConfig c;
  c.base_dir = base_dir;
  using detail::get;
  using detail::resolve;

  if (auto* d = root["data"].as_table()) {
    if (auto v = get<std::string>(*d, "community_id")) c.community_id = *v;
    if (auto v = get<std::string>(*d, "residents")) c.residents = resolve(base_dir, *v);
    if (auto v = get<std::string>(*d, "contacts")) c.contacts = resolve(base_dir, *v);
    if (auto v = get<std::string>(*d, "villages")) c.villages = resolve(base_dir, *v);
    if (auto v = get<std::string>(*d, "output_dir")) c.output_dir = resolve(base_dir, *v);
  }
  if (auto* cols = root["columns"].as_table()) {
    auto& r = c.resident_columns;
    detail::read_columns(cols->get_as<toml::table>("residents"),
                         {{"id", &r.id}, {"name", &r.name}, {"village", &r.village}, {"household", &r.household},
                          {"age", &r.age}, {"sex", &r.sex}, {"stable", &r.stable}, {"education", &r.education},
                          {"occupation", &r.occupation}, {"wealth_index", &r.wealth_index},
                          {"alcohol_use", &r.alcohol_use}, {"contraception_use", &r.contraception_use}});
    auto& k = c.contact_columns;
    detail::read_columns(cols->get_as<toml::table>("contacts"),
                         {{"contact_id", &k.contact_id}, {"namer_id", &k.namer}, {"domain", &k.domain},
                          {"name", &k.name}, {"age", &k.age}, {"village", &k.village}, {"sex", &k.sex}});
  }
  if (auto* t = root["tables"].as_table()) {
    if (auto v = get<std::string>(*t, "nicknames")) c.tables.nicknames = resolve(base_dir, *v);
    if (auto v = get<std::string>(*t, "honorifics")) c.tables.honorifics = resolve(base_dir, *v);
    if (auto v = get<std::string>(*t, "sex_names")) c.tables.sex_names = resolve(base_dir, *v);
    if (auto v = get<std::string>(*t, "village_fixes")) c.tables.village_fixes = resolve(base_dir, *v);
  }
  if (auto* m = root["match"].as_table()) {
    if (const auto* w = m->get("weights")) {
      MatchConfig mc;
      if (auto* arr = w->as_array()) {
        if (arr->size() != kFieldCount) fail(ErrorKind::config, "match.weights must have 7 entries");
        for (std::size_t i = 0; i < kFieldCount; ++i) {
          auto v = (*arr)[i].value<double>();
          if (!v) fail(ErrorKind::config, "match.weights entries must be numbers");
          mc.weights[i] = *v;
        }
      } else if (auto* tbl = w->as_table()) {
        for (Field f : kAllFields) {
          auto v = get<double>(*tbl, to_string(f));
          if (!v) fail(ErrorKind::config, "match.weights is missing '" + std::string(to_string(f)) + "'");
          mc.weights[static_cast<std::size_t>(f)] = *v;
        }
      } else {
        fail(ErrorKind::config, "match.weights must be an array or a table");
      }
      mc.exceedance_quantile = get<double>(*m, "exceedance_quantile").value_or(0.95);
      mc.validate();
      c.match = mc;
    } else if (m->get("exceedance_quantile")) {
      fail(ErrorKind::config, "match.exceedance_quantile given without match.weights");
    }
    if (auto v = get<std::string>(*m, "session")) c.session = resolve(base_dir, *v);
    if (auto v = get<std::int64_t>(*m, "pair_budget")) {
      if (*v <= 0) fail(ErrorKind::config, "match.pair_budget must be positive");
      c.pair_budget = static_cast<std::uint64_t>(*v);
    }
    if (auto v = get<std::int64_t>(*m, "threads")) {
      if (*v < 0) fail(ErrorKind::config, "match.threads must be >= 0");
      c.threads = static_cast<unsigned>(*v);
    }
  }
  if (auto* n = root["network"].as_table()) {
    if (auto* arr = n->get_as<toml::array>("filters")) {
      c.node_filters.clear();
      for (auto&& el : *arr) {
        auto v = el.value<std::string>();
        if (!v) fail(ErrorKind::config, "network.filters entries must be strings");
        c.node_filters.push_back(parse_node_filter(*v));
      }
    }
    if (auto v = get<std::int64_t>(*n, "path_sources")) c.path_sources = static_cast<std::size_t>(std::max<std::int64_t>(0, *v));
  }
  if (auto* t = root["tuning"].as_table()) {
    if (auto v = get<std::int64_t>(*t, "n_contacts")) c.tune_contacts = static_cast<std::size_t>(std::max<std::int64_t>(1, *v));
    if (auto v = get<std::int64_t>(*t, "n_weights")) c.tune_weights = static_cast<std::size_t>(std::max<std::int64_t>(1, *v));
    if (auto v = get<std::int64_t>(*t, "seed")) c.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto* s = root["service"].as_table()) {
    if (auto v = get<std::string>(*s, "host")) c.host = *v;
    if (auto v = get<std::int64_t>(*s, "port")) {
      if (*v < 0 || *v > 65535) fail(ErrorKind::config, "service.port out of range");
      c.port = static_cast<int>(*v);
    }
    if (auto v = get<std::string>(*s, "static_dir")) c.static_dir = resolve(base_dir, *v);
  }
  return c;
}

inline PipelineConfig load_pipeline_config(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::config, "config file not found: " + path.string());
  const auto text = csv::read_file(path.string());
  return parse_pipeline_config(text, fs::absolute(path).parent_path());
}

// Existence checks for every referenced input path.
inline void validate_paths(const PipelineConfig& c) {
  auto check = [](const std::optional<fs::path>& p, const char* what) {
    if (p && !fs::exists(*p)) fail(ErrorKind::config, std::string(what) + " not found: " + p->string());
  };
  check(c.residents, "residents file");
  check(c.contacts, "contacts file");
  check(c.villages, "villages file");
  check(c.tables.nicknames, "nickname table");
  check(c.tables.honorifics, "honorific table");
  check(c.tables.sex_names, "sex table");
  check(c.tables.village_fixes, "village fix table");
  check(c.session, "tuning session");
  check(c.static_dir, "static directory");
}

// Exactly one of explicit weights or a tuning session must be configured.
inline MatchConfig resolve_match_config(const PipelineConfig& c) {
  if (c.match && c.session) fail(ErrorKind::config, "give either match.weights or match.session, not both");
  if (c.match) return *c.match;
  if (c.session) {
    const auto chosen = *c.session / "chosen_config.json";
    if (!fs::exists(chosen))
      fail(ErrorKind::config, "tuning session has no chosen_config.json yet: " + c.session->string());
    return read_match_config(chosen);
  }
  fail(ErrorKind::config, "no match configuration: set match.weights or match.session");
}

}  // namespace linkforge
