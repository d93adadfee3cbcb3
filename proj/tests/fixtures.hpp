#pragma once
// Hand-rolled record builders shared by several test binaries.

#include <algorithm>
#include <array>
#include <random>
#include <string>
#include <vector>

#include "linkforge/preprocess.hpp"
#include "linkforge/matcher.hpp"
#include "linkforge/netgraph.hpp"
#include "linkforge/records.hpp"
#include "linkforge/tuning.hpp"
#include "oracles.hpp"

namespace fixture {

namespace lf = linkforge;

inline lf::ResidentRecord resident(std::string id, const std::string& name, std::optional<int> age, std::string village,
                                   std::optional<lf::Sex> sex = std::nullopt, std::string household = {}) {
  lf::ResidentRecord r;
  r.resident_id = std::move(id);
  r.raw_name = name;
  r.name = lf::standardize_name(name, {});
  r.age = age;
  r.is_adult = age && *age >= lf::kAdultAge;
  r.village = std::move(village);
  r.household_id = household.empty() ? "h-" + r.resident_id : std::move(household);
  r.sex = sex;
  return r;
}

inline lf::ContactRecord contact(std::string id, std::string namer, const std::string& name, std::optional<int> age,
                                 std::optional<std::string> village, std::optional<lf::Sex> sex = std::nullopt,
                                 lf::Domain domain = lf::Domain::money) {
  lf::ContactRecord c;
  c.contact_id = std::move(id);
  c.namer_id = std::move(namer);
  c.domain = domain;
  c.raw_name = name;
  c.name = lf::standardize_name(name, {});
  c.reported_age = age;
  c.reported_village = std::move(village);
  c.imputed_sex = sex;
  return c;
}

// A small community where contacts are noisy copies of residents: some names
// get a typo, some ages drift, some villages go missing.
inline lf::CommunityDataset noisy_community(std::size_t n_residents, std::size_t n_contacts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> first{"ann", "john", "grace", "peter", "mary", "joseph", "ruth", "paul",
                                       "esther", "moses", "agnes", "david", "sarah", "james", "rose", "isaac"};
  const std::vector<std::string> last{"akello", "okello", "auma", "ochieng", "oduor", "atieno", "otieno",
                                      "wanjiru", "kato", "nakato", "mugisha", "namubiru", "ssali", "byaruhanga"};
  const std::vector<std::string> villages{"Kamuge", "Nsiika", "Rubaare", "Kameke"};
  lf::CommunityDataset ds;
  ds.community_id = "fixture";
  for (std::size_t i = 0; i < n_residents; ++i) {
    const auto sex = (rng() & 1) ? lf::Sex::male : lf::Sex::female;
    ds.residents.push_back(resident("R" + std::to_string(10000 + i),
                                    first[rng() % first.size()] + " " + last[rng() % last.size()],
                                    15 + static_cast<int>(rng() % 60), villages[rng() % villages.size()], sex,
                                    "H" + std::to_string(i / 4)));
  }
  for (const auto& v : villages) ds.village_registry.insert(v);
  for (std::size_t i = 0; i < n_contacts; ++i) {
    const auto& namer = ds.residents[rng() % n_residents];
    const auto& alter = ds.residents[rng() % n_residents];
    std::string name = alter.raw_name;
    if (rng() % 4 == 0) name[1 + rng() % (name.size() - 2)] = 'x';
    std::optional<int> age = alter.age;
    if (rng() % 3 == 0) age = *age + static_cast<int>(rng() % 7) - 3;
    if (rng() % 5 == 0) age.reset();
    std::optional<std::string> village = alter.village;
    if (rng() % 6 == 0) village.reset();
    ds.contacts.push_back(contact("C" + std::to_string(i), namer.resident_id, name, age, village, alter.sex,
                                  lf::kAllDomains[rng() % 5]));
  }
  return ds;
}

// Field assignment by component count, written out case by case.
inline std::array<std::optional<std::string>, 3> oracle_fields(const std::vector<std::string>& c) {
  switch (c.size()) {
    case 1: return {c[0], std::nullopt, std::nullopt};
    case 2: return {c[0], std::nullopt, c[1]};
    case 3: return {c[0], c[1], c[2]};
    case 4: return {c[0], c[1] + " " + c[2], c[3]};
    default: return {};
  }
}

// Blocking keys by brute force over every ordering of the contact name.
inline std::uint8_t blocking_keys(const lf::ResidentRecord& r, const lf::ContactRecord& c) {
  std::uint8_t keys = 0;
  if (!r.name.components.empty() && !c.name.components.empty()) {
    const auto rf = oracle_fields(r.name.components);
    auto perm = c.name.components;
    std::sort(perm.begin(), perm.end());
    do {
      const auto cf = oracle_fields(perm);
      for (int i = 0; i < 3; ++i)
        if (rf[i] && cf[i] && *rf[i] == *cf[i]) keys |= static_cast<std::uint8_t>(1u << i);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  const auto rv = lf::text::normalize(r.village);
  if (c.reported_village && !rv.empty() && rv == lf::text::normalize(*c.reported_village)) keys |= lf::kKeyVillage;
  if (r.sex && c.imputed_sex && *r.sex == *c.imputed_sex) keys |= lf::kKeySex;
  return keys;
}

struct RandomWorld {
  std::vector<lf::ResidentRecord> residents;
  std::vector<lf::ContactRecord> contacts;
};

// Random residents and contacts drawn from tiny token and village pools so
// that many pairs share a key.
inline RandomWorld random_world(std::size_t nr, std::size_t nc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> tokens{"ann", "akello", "john", "okello", "grace", "auma", "peter", "ochieng", "mary", "oduor"};
  const std::vector<std::string> villages{"Kamuge", "Nsiika", "Rubaare", "Kameke", ""};
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };
  auto name = [&] {
    std::string s;
    const int k = static_cast<int>(rng() % 5);  // 0..4 components
    for (int i = 0; i < k; ++i) s += (i ? " " : "") + pick(tokens);
    return s;
  };
  auto sex = [&]() -> std::optional<lf::Sex> {
    const auto x = rng() % 3;
    if (x == 2) return std::nullopt;
    return x ? lf::Sex::male : lf::Sex::female;
  };
  RandomWorld w;
  for (std::size_t i = 0; i < nr; ++i)
    w.residents.push_back(resident("R" + std::to_string(i), name(), 20 + static_cast<int>(rng() % 50), pick(villages), sex()));
  for (std::size_t i = 0; i < nc; ++i) {
    std::optional<std::string> v = pick(villages);
    if (v->empty()) v.reset();
    w.contacts.push_back(contact("C" + std::to_string(i), "R" + std::to_string(rng() % nr), name(), std::nullopt, v, sex()));
  }
  return w;
}

// Hand-built session: six pool pairs, three configs.
//   pair:     0  1  2  3  4  5
//   label:    M  M  M  N  N  U
//   config 0: 1  1  1  1  0  1   -> TP 3 FP 1 FN 0 TN 1
//   config 1: 1  1  0  0  0  0   -> TP 2 FP 0 FN 1 TN 2
//   config 2: 0  0  0  0  0  1   -> TP 0 FP 0 FN 3 TN 2
inline lf::TuningSession tuning_session() {
  lf::TuningSession s;
  s.pairs.resize(6);
  for (std::uint32_t i = 0; i < 6; ++i) s.pairs[i].pair_id = i;
  const std::vector<std::vector<int>> cls{{1, 1, 1, 1, 0, 1}, {1, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 1}};
  const double qs[3] = {0.95, 0.93, 0.92};
  for (std::uint32_t k = 0; k < 3; ++k) {
    lf::TuningConfig tc;
    tc.config_id = k;
    tc.config = lf::MatchConfig::uniform(qs[k]);
    s.configs.push_back(tc);
    lf::Bitset b(6);
    for (int i = 0; i < 6; ++i)
      if (cls[k][i]) b.set(i);
    s.classified.push_back(b);
  }
  const lf::Label labels[6] = {lf::Label::match, lf::Label::match, lf::Label::match,
                               lf::Label::nonmatch, lf::Label::nonmatch, lf::Label::unsure};
  for (std::uint32_t i = 0; i < 6; ++i) lf::apply_label(s, i, labels[i], "ann", "2026-01-01T00:00:00.000Z");
  return s;
}

// n adults in households of three, alternating between two villages.
inline std::vector<lf::ResidentRecord> people(int n) {
  std::vector<lf::ResidentRecord> rs(n);
  for (int i = 0; i < n; ++i) {
    rs[i].resident_id = "P" + std::to_string(i);
    rs[i].household_id = "H" + std::to_string(i / 3);
    rs[i].village = i % 2 ? "East" : "West";
    rs[i].age = 20 + i;
    rs[i].is_adult = true;
  }
  return rs;
}

inline lf::Link link(int a, int b, lf::Domain d = lf::Domain::money) {
  return {"P" + std::to_string(a), "P" + std::to_string(b), d};
}

struct Random {
  std::vector<lf::ResidentRecord> residents;
  std::vector<lf::Link> links;
  oracle::Graph og;
};

inline Random random_graph(int n, double p, std::mt19937_64& rng) {
  Random out;
  out.residents = people(n);
  out.og.n = n;
  std::bernoulli_distribution coin(p);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && coin(rng)) {
        out.links.push_back(link(a, b));
        out.og.directed.insert({a, b});
      }
  return out;
}


}  // namespace fixture
