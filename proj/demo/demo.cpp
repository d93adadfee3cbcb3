// Generates a noisy synthetic community, links it with uniform weights,
// scores the links against the planted truth and prints the network tables.
//
//   linkforge_demo [residents] [seed]

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>

#include "linkforge/linkforge.hpp"

namespace lf = linkforge;

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1500;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;

  const auto synth = lf::generate_community(n, 6, lf::CorruptionProfile::moderate(), seed);
  const auto tables_dir = std::filesystem::path(LINKFORGE_DATA_DIR) / "tables";
  lf::LookupTables tables;
  tables.nickname_prefixes = lf::load_nickname_table((tables_dir / "nicknames.csv").string());
  tables.honorifics = lf::load_honorific_table((tables_dir / "honorifics.csv").string());
  tables.sex_by_first_name = lf::load_sex_table((tables_dir / "sex_names.csv").string());
  const auto prepared = lf::preprocess_dataset(synth.dataset, tables);
  const auto& ds = prepared.dataset;

  const auto result = lf::run_two_stage(lf::MatchInputs(ds.residents, ds.contacts), lf::MatchConfig::uniform());

  std::size_t correct = 0, linkable = 0;
  for (const auto& t : synth.truth) linkable += t.resident_id.has_value();
  std::vector<lf::Link> links;
  for (const auto& m : result.matched) {
    const auto& c = ds.contacts[m.contact];
    const auto& r = ds.residents[m.resident];
    correct += synth.truth[m.contact].resident_id == r.resident_id;
    links.push_back({c.namer_id, r.resident_id, c.domain});
  }
  std::printf("residents %zu, contacts %zu, matched %zu\n", ds.residents.size(), ds.contacts.size(), result.matched.size());
  std::printf("precision %.4f, recall %.4f\n", static_cast<double>(correct) / static_cast<double>(result.matched.size()),
              static_cast<double>(correct) / static_cast<double>(linkable));
  for (const auto& f : result.fits)
    std::printf("%s stage: u=%.4f t=%.4f%s\n", std::string(lf::to_string(f.stage)).c_str(), f.fit.u, f.effective_t,
                f.fit.fallback ? " (fallback)" : "");

  std::set<std::string> matched;
  for (const auto& m : result.matched) matched.insert(ds.contacts[m.contact].contact_id);
  auto report = lf::data_quality_report(ds, matched);
  lf::add_network_sections(report, ds.residents, links, {lf::NodeFilter::all, lf::NodeFilter::adult});
  std::cout << '\n' << lf::csv::format(lf::table2({&report})) << '\n' << lf::csv::format(lf::assortativity_csv({&report}));
}
