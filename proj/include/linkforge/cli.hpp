#pragma once
// Command-line front end. Kept in a header so tests can drive it in-process.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <toml.hpp>

#include "linkforge/config.hpp"
#include "linkforge/error.hpp"
#include "linkforge/pipeline.hpp"
#include "linkforge/service.hpp"
#include "linkforge/synthgen.hpp"
#include "linkforge/tuning.hpp"

#ifndef LINKFORGE_DATA_DIR
#define LINKFORGE_DATA_DIR "data"
#endif
#ifndef LINKFORGE_UI_DIR
#define LINKFORGE_UI_DIR "ui/static"
#endif

namespace linkforge {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_data = 3, exit_budget = 4, exit_internal = 5 };

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
    case ErrorKind::conflict:
    case ErrorKind::not_found: return exit_config;
    case ErrorKind::schema:
    case ErrorKind::validation:
    case ErrorKind::data:
    case ErrorKind::insufficient_data:
    case ErrorKind::io: return exit_data;
    case ErrorKind::budget: return exit_budget;
    case ErrorKind::contract: return exit_internal;
  }
  return exit_internal;
}

namespace detail {

struct CliState {
  std::optional<fs::path> config;
  std::optional<fs::path> out_dir;
  std::optional<fs::path> session;
  unsigned threads = 0;
};

inline PipelineConfig load_cli_config(const CliState& st) {
  if (!st.config) fail(ErrorKind::config, "--config is required");
  auto c = load_pipeline_config(*st.config);
  if (st.out_dir) c.output_dir = fs::absolute(*st.out_dir);
  if (st.threads) c.threads = st.threads;
  return c;
}

inline void print_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"linkforge: record linkage and sociocentric network construction", "linkforge"};
  app.set_version_flag("--version", std::string(LINKFORGE_VERSION));
  app.require_subcommand(1);
  detail::CliState st;
  app.add_option("--threads", st.threads, "worker threads (default: LINKFORGE_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", st.config, "pipeline config file (TOML)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", st.out_dir, "output directory (overrides data.output_dir)");
  };

  auto* validate = app.add_subcommand("validate", "check config, paths and input schemas");
  with_config(validate);
  auto* preprocess = app.add_subcommand("preprocess", "standardize names and villages");
  with_config(preprocess);

  auto* tune = app.add_subcommand("tune", "create a tuning session and serve the review API");
  with_config(tune);
  bool no_serve = false;
  std::optional<int> port;
  std::optional<std::string> host;
  tune->add_option("--session-dir", st.session, "session directory (default: <out>/session)");
  tune->add_flag("--no-serve", no_serve, "create the session and exit without starting the service");
  tune->add_option("--port", port, "service port (0 picks a free port)")->check(CLI::Range(0, 65535));
  tune->add_option("--host", host, "service host");

  auto* serve = app.add_subcommand("serve", "serve an existing tuning session");
  fs::path serve_dir;
  std::optional<fs::path> serve_static;
  serve->add_option("session", serve_dir, "session directory")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", host);
  serve->add_option("--static-dir", serve_static)->check(CLI::ExistingDirectory);

  auto* match = app.add_subcommand("match", "link contacts to residents");
  with_config(match);
  match->add_option("--session", st.session, "tuning session whose chosen_config.json to use");
  auto* network = app.add_subcommand("network", "build networks from matches.csv");
  with_config(network);
  auto* report = app.add_subcommand("report", "data-quality metrics, network tables and assortativity");
  with_config(report);
  auto* pipeline = app.add_subcommand("pipeline", "preprocess, match, network and report in one run");
  with_config(pipeline);
  pipeline->add_option("--session", st.session, "tuning session whose chosen_config.json to use");

  auto* synth = app.add_subcommand("synth", "generate a synthetic community with ground truth");
  fs::path synth_out;
  std::size_t n_residents = 2000, n_villages = 8;
  std::uint64_t seed = 1;
  std::string profile_name = "moderate", bank_name = "east_african", community_id = "synth";
  auto profile = CorruptionProfile::moderate();
  std::optional<double> typo, drop, nick, missing_age, jitter, vtypo, missing_village, outside;
  synth->add_option("-o,--out", synth_out, "output directory")->required();
  synth->add_option("--residents", n_residents)->check(CLI::Range(std::size_t{10}, std::size_t{10'000'000}));
  synth->add_option("--villages", n_villages)->check(CLI::Range(std::size_t{1}, std::size_t{100'000}));
  synth->add_option("--seed", seed);
  synth->add_option("--community-id", community_id);
  synth->add_option("--profile", profile_name, "none or moderate")->check(CLI::IsMember({"none", "moderate"}));
  synth->add_option("--bank", bank_name, "east_african, generic, or a name-bank CSV path");
  synth->add_option("--typo-rate", typo);
  synth->add_option("--token-drop-rate", drop);
  synth->add_option("--nickname-rate", nick);
  synth->add_option("--missing-age-rate", missing_age);
  synth->add_option("--age-jitter-sd", jitter);
  synth->add_option("--village-typo-rate", vtypo);
  synth->add_option("--missing-village-rate", missing_village);
  synth->add_option("--outside-rate", outside);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    out << LINKFORGE_VERSION << '\n';
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << error_json(ErrorKind::config, e.what()).dump() << '\n';
    return exit_config;
  }

  try {
    const unsigned threads = resolve_threads(st.threads);
    if (*validate) {
      auto c = detail::load_cli_config(st);
      RunLog log("validate");
      const auto ds = load_raw(c, log);
      if (c.match || c.session) resolve_match_config(c);
      json summary{{"ok", true},
                   {"community_id", ds.community_id},
                   {"residents", ds.residents.size()},
                   {"contacts", ds.contacts.size()},
                   {"villages", ds.village_registry.size()},
                   {"load", log.manifest()["load"]}};
      detail::print_json(out, summary);
      return exit_ok;
    }
    if (*preprocess) {
      auto c = detail::load_cli_config(st);
      RunLog log("preprocess");
      const auto p = prepare(c, log);
      const auto dir = c.output_dir / "preprocessed";
      export_dataset(p.dataset, dir);
      for (auto f : {"residents.csv", "contacts.csv", "villages.csv"}) log.output(c.output_dir, dir / f);
      write_json_file(dir / "preprocess_report.json", preprocess_report_json(p.report));
      log.write(c.output_dir, threads);
      detail::print_json(out, log.manifest()["preprocess"]);
      return exit_ok;
    }
    if (*tune) {
      auto c = detail::load_cli_config(st);
      const fs::path dir = st.session ? fs::absolute(*st.session) : c.output_dir / "session";
      RunLog log("tune");
      const auto s = run_tune(c, dir, log);
      fs::create_directories(c.output_dir);
      log.write(c.output_dir, threads);
      json summary{{"session_dir", dir.string()}, {"session_id", s.session_id}, {"configs", s.configs.size()},
                   {"pairs", s.pairs.size()}, {"warnings", s.warnings}};
      if (no_serve) {
        detail::print_json(out, summary);
        return exit_ok;
      }
      std::optional<fs::path> statics = c.static_dir;
      if (!statics && fs::exists(LINKFORGE_UI_DIR)) statics = fs::path(LINKFORGE_UI_DIR);
      ReviewService svc(dir, statics);
      const int bound = svc.bind(host.value_or(c.host), port.value_or(c.port));
      err << "review service on http://" << host.value_or(c.host) << ":" << bound << "/ (select a config to finish)\n";
      std::thread th([&] { svc.serve(); });
      const auto chosen = svc.wait_for_selection();
      svc.stop();
      th.join();
      summary["chosen_config_id"] = chosen;
      summary["chosen_config"] = (dir / "chosen_config.json").string();
      detail::print_json(out, summary);
      return exit_ok;
    }
    if (*serve) {
      PipelineConfig defaults;
      std::optional<fs::path> statics = serve_static;
      if (!statics && fs::exists(LINKFORGE_UI_DIR)) statics = fs::path(LINKFORGE_UI_DIR);
      ReviewService svc(serve_dir, statics);
      const int bound = svc.bind(host.value_or(defaults.host), port.value_or(defaults.port));
      err << "review service on http://" << host.value_or(defaults.host) << ":" << bound << "/\n";
      svc.serve();
      return exit_ok;
    }
    if (*match || *pipeline) {
      auto c = detail::load_cli_config(st);
      if (st.session) {
        c.session = fs::absolute(*st.session);
        c.match.reset();
      }
      RunLog log(*match ? "match" : "pipeline");
      json summary;
      if (*match) {
        const auto config = resolve_match_config(c);
        const auto p = prepare(c, log);
        run_match(c, p, config, log);
        summary = log.manifest()["match"];
      } else {
        const auto run = run_pipeline(c, log);
        summary = json{{"match", log.manifest()["match"]}, {"report", to_json(run.report)}};
      }
      log.write(c.output_dir, threads);
      detail::print_json(out, summary);
      return exit_ok;
    }
    if (*network) {
      auto c = detail::load_cli_config(st);
      RunLog log("network");
      const auto ds = log.timed("load", [&] { return load_raw(c, log); });
      const auto rows = read_matches(c.output_dir / "matches.csv");
      log.input("matches", c.output_dir / "matches.csv");
      run_network(c, ds.residents, links_from(rows), log);
      log.write(c.output_dir, threads);
      detail::print_json(out, log.manifest()["network"]);
      return exit_ok;
    }
    if (*report) {
      auto c = detail::load_cli_config(st);
      RunLog log("report");
      const auto p = prepare(c, log);
      const auto rows = read_matches(c.output_dir / "matches.csv");
      log.input("matches", c.output_dir / "matches.csv");
      const auto r = run_report(c, p, rows, log);
      log.write(c.output_dir, threads);
      detail::print_json(out, to_json(r));
      return exit_ok;
    }
    if (*synth) {
      if (profile_name == "none") profile = CorruptionProfile::none();
      if (typo) profile.typo_rate = *typo;
      if (drop) profile.token_drop_rate = *drop;
      if (nick) profile.nickname_prefix_rate = *nick;
      if (missing_age) profile.missing_age_rate = *missing_age;
      if (jitter) profile.age_jitter_sd = *jitter;
      if (vtypo) profile.village_typo_rate = *vtypo;
      if (missing_village) profile.missing_village_rate = *missing_village;
      if (outside) profile.out_of_community_rate = *outside;
      NameBank bank = bank_name == "east_african" ? east_african_bank()
                      : bank_name == "generic"    ? generic_bank()
                                                  : load_name_bank(bank_name);
      RunLog log("synth");
      const auto s = log.timed("generate", [&] { return generate_community(n_residents, n_villages, profile, seed, bank, community_id); });
      write_synthetic(s, synth_out);
      csv::write_file((synth_out / "pipeline.toml").string(),
                      synthetic_config_toml(community_id, fs::path(LINKFORGE_DATA_DIR) / "tables"));
      for (auto f : {"residents.csv", "contacts.csv", "villages.csv", "truth.csv", "pipeline.toml"}) log.output(synth_out, synth_out / f);
      log.manifest()["synth"] = json{{"seed", seed},
                                     {"residents", s.dataset.residents.size()},
                                     {"contacts", s.dataset.contacts.size()},
                                     {"villages", n_villages},
                                     {"profile", json{{"typo_rate", profile.typo_rate},
                                                      {"token_drop_rate", profile.token_drop_rate},
                                                      {"nickname_prefix_rate", profile.nickname_prefix_rate},
                                                      {"missing_age_rate", profile.missing_age_rate},
                                                      {"age_jitter_sd", profile.age_jitter_sd},
                                                      {"village_typo_rate", profile.village_typo_rate},
                                                      {"missing_village_rate", profile.missing_village_rate},
                                                      {"out_of_community_rate", profile.out_of_community_rate}}}};
      log.write(synth_out, threads);
      detail::print_json(out, log.manifest()["synth"]);
      return exit_ok;
    }
  } catch (const Error& e) {
    err << error_json(e.kind(), e.what()).dump() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << error_json(ErrorKind::contract, e.what()).dump() << '\n';
    return exit_internal;
  }
  return exit_internal;
}

}  // namespace linkforge
