#pragma once
// Candidate generation and two-stage matching.
//
// Stage one links a contact only to residents sharing an exact value on the
// first, middle or last name (under any contact name permutation), village or
// sex. Stage two re-links the contacts left unmatched against every resident.
// Each stage scores candidates with the epiweight, fits a Pareto-tail
// threshold on its own score multiset and resolves each contact to its single
// best resident at or above the threshold. Surviving matches are then
// filtered by the name/age/village plausibility rules.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "linkforge/epilink.hpp"
#include "linkforge/error.hpp"
#include "linkforge/parallel.hpp"
#include "linkforge/records.hpp"
#include "linkforge/similarity.hpp"

namespace linkforge {

enum class Stage : std::uint8_t { blocked, unblocked };

inline std::string_view to_string(Stage s) { return s == Stage::blocked ? "blocked" : "unblocked"; }

// Blocking keys ----------------------------------------------------------------

enum BlockKey : std::uint8_t {
  kKeyFirst = 1u << 0,
  kKeyMiddle = 1u << 1,
  kKeyLast = 1u << 2,
  kKeyVillage = 1u << 3,
  kKeySex = 1u << 4,
};

struct CandidatePair {
  std::uint32_t resident = 0;  // index into residents
  std::uint32_t contact = 0;   // index into contacts
  std::uint8_t keys = 0;       // BlockKey bits; 0 for unblocked candidates

  bool operator==(const CandidatePair&) const = default;
  auto operator<=>(const CandidatePair&) const = default;
};

// Prepared residents and contacts plus the per-field inverted indexes.
class MatchInputs {
 public:
  MatchInputs(const std::vector<ResidentRecord>& residents, const std::vector<ContactRecord>& contacts)
      : residents_(&residents), contacts_(&contacts) {
    if (residents.size() > UINT32_MAX || contacts.size() > UINT32_MAX)
      fail(ErrorKind::data, "dataset too large for 32-bit record indexes");
    prepared_residents_.reserve(residents.size());
    for (const auto& r : residents) prepared_residents_.push_back(prepare(r));
    prepared_contacts_.reserve(contacts.size());
    for (const auto& c : contacts) prepared_contacts_.push_back(prepare(c));
    frequencies_ = field_frequencies(residents, contacts);
    for (std::uint32_t i = 0; i < prepared_residents_.size(); ++i) {
      const auto& r = prepared_residents_[i];
      if (r.usable) {
        by_first_[r.name.first].push_back(i);
        if (r.name.has_middle) by_middle_[r.name.middle].push_back(i);
        if (r.name.has_last) by_last_[r.name.last].push_back(i);
      }
      if (r.village) by_village_[*r.village].push_back(i);
      if (r.sex) by_sex_[static_cast<std::size_t>(*r.sex)].push_back(i);
    }
  }

  const std::vector<ResidentRecord>& residents() const { return *residents_; }
  const std::vector<ContactRecord>& contacts() const { return *contacts_; }
  const PreparedResident& resident(std::size_t i) const { return prepared_residents_[i]; }
  const PreparedContact& contact(std::size_t i) const { return prepared_contacts_[i]; }
  const FrequencyTable& frequencies() const { return frequencies_; }

  // Calls fn(resident_index, keys) once per blocked candidate of contact c,
  // in ascending resident order. scratch must hold one byte per resident and
  // be all zero on entry; it is restored before returning.
  template <typename Fn>
  void for_each_blocked(std::size_t c, std::vector<std::uint8_t>& scratch, std::vector<std::uint32_t>& touched,
                        Fn&& fn) const {
    const auto& pc = prepared_contacts_[c];
    touched.clear();
    auto hit = [&](const std::vector<std::uint32_t>& list, std::uint8_t key) {
      for (auto r : list) {
        if (scratch[r] == 0) touched.push_back(r);
        scratch[r] |= key;
      }
    };
    auto hit_map = [&](const auto& map, const std::string& value, std::uint8_t key) {
      auto it = map.find(value);
      if (it != map.end()) hit(it->second, key);
    };
    if (pc.usable) {
      for (const auto& v : pc.first_cands) hit_map(by_first_, v, kKeyFirst);
      for (const auto& v : pc.middle_cands) hit_map(by_middle_, v, kKeyMiddle);
      for (const auto& v : pc.last_cands) hit_map(by_last_, v, kKeyLast);
    }
    if (pc.village) hit_map(by_village_, *pc.village, kKeyVillage);
    if (pc.sex) hit(by_sex_[static_cast<std::size_t>(*pc.sex)], kKeySex);
    std::sort(touched.begin(), touched.end());
    for (auto r : touched) {
      const std::uint8_t keys = scratch[r];
      scratch[r] = 0;
      fn(r, keys);
    }
  }

 private:
  const std::vector<ResidentRecord>* residents_;
  const std::vector<ContactRecord>* contacts_;
  std::vector<PreparedResident> prepared_residents_;
  std::vector<PreparedContact> prepared_contacts_;
  FrequencyTable frequencies_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_first_, by_middle_, by_last_, by_village_;
  std::array<std::vector<std::uint32_t>, 2> by_sex_;
};

// Every (resident, contact) pair that agrees exactly on at least one blocking
// field, ordered by contact then resident.
inline std::vector<CandidatePair> block_candidates(const MatchInputs& in, unsigned threads = 1) {
  const std::size_t nr = in.residents().size();
  return parallel_collect<CandidatePair>(in.contacts().size(), resolve_threads(threads),
                                         [&](std::size_t c, std::vector<CandidatePair>& out) {
                                           thread_local std::vector<std::uint8_t> scratch;
                                           thread_local std::vector<std::uint32_t> touched;
                                           if (scratch.size() < nr) scratch.assign(nr, 0);
                                           in.for_each_blocked(c, scratch, touched, [&](std::uint32_t r, std::uint8_t k) {
                                             out.push_back({r, static_cast<std::uint32_t>(c), k});
                                           });
                                         });
}

inline std::vector<CandidatePair> block_candidates(const std::vector<ResidentRecord>& residents,
                                                   const std::vector<ContactRecord>& contacts) {
  return block_candidates(MatchInputs(residents, contacts));
}

// Post-processing flags -----------------------------------------------------

inline constexpr double kGoodNameMean = 0.9;
inline constexpr double kVeryGoodNameMean = 0.95;
inline constexpr int kChildAgeTolerance = 5;
inline constexpr int kAdultAgeTolerance = 10;
inline constexpr double kGoodVillage = 0.9;

struct PairFlags {
  bool good_name = false;
  bool very_good_name = false;
  bool good_age = false;
  bool good_village = false;

  bool operator==(const PairFlags&) const = default;
};

inline std::optional<double> name_mean(const FieldSimilarities& sims) {
  double sum = 0;
  int n = 0;
  for (Field f : {Field::first, Field::middle, Field::last}) {
    if (auto v = sims.get(f)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

inline PairFlags pair_flags(const FieldSimilarities& sims, std::size_t resident_components,
                            std::size_t contact_components, std::optional<int> resident_age,
                            std::optional<int> contact_age) {
  PairFlags f;
  const bool two_fields = resident_components >= 2 && contact_components >= 2;
  if (auto mean = name_mean(sims); mean && two_fields) {
    f.good_name = *mean > kGoodNameMean;
    f.very_good_name = *mean > kVeryGoodNameMean;
  }
  if (contact_age && resident_age) {
    const int tol = *resident_age < kAdultAge ? kChildAgeTolerance : kAdultAgeTolerance;
    f.good_age = std::abs(*contact_age - *resident_age) <= tol;
  }
  if (auto v = sims.get(Field::village)) f.good_village = *v > kGoodVillage;
  return f;
}

inline PairFlags pair_flags(const FieldSimilarities& sims, const ResidentRecord& r, const ContactRecord& c) {
  return pair_flags(sims, r.name.components.size(), c.name.components.size(), r.age, c.reported_age);
}

struct RuleHits {
  bool a = false;  // neither good name nor good village
  bool b = false;  // neither very good name nor good age
  bool c = false;  // neither good age nor good village
  bool any() const { return a || b || c; }
};

inline RuleHits removal_rules(const PairFlags& f) {
  return {!f.good_name && !f.good_village, !f.very_good_name && !f.good_age, !f.good_age && !f.good_village};
}

// Matching ------------------------------------------------------------------

struct MatchedPair {
  std::uint32_t contact = 0;
  std::uint32_t resident = 0;
  double score = 0;
  Stage stage = Stage::blocked;
  std::uint8_t keys = 0;
  FieldSimilarities sims;
  PairFlags flags;
};

struct DropCounts {
  std::size_t no_candidates = 0;    // contacts with an empty candidate set
  std::size_t below_threshold = 0;  // contacts whose best score < t
  std::size_t self_match = 0;       // candidate pairs pointing at the namer
  std::size_t undefined_score = 0;  // candidate pairs with no scorable field
  std::size_t rule_a = 0;
  std::size_t rule_b = 0;
  std::size_t rule_c = 0;
  std::size_t postprocess_removed = 0;  // matches removed by any rule

  bool operator==(const DropCounts&) const = default;
};

struct StageFit {
  Stage stage = Stage::blocked;
  ThresholdFit fit;
  double effective_t = 0;  // threshold applied, capped at the score maximum of 1
  std::size_t n_pairs = 0;
  std::size_t n_contacts = 0;
};

struct MatchResult {
  std::vector<MatchedPair> matched;         // ascending contact index
  std::vector<std::uint32_t> unmatched;     // ascending contact index
  DropCounts dropped;
  std::vector<StageFit> fits;
};

struct MatchOptions {
  unsigned threads = 0;
  std::uint64_t pair_budget = 500'000'000ULL;
  bool postprocess = true;
};

namespace detail {

struct BestCandidate {
  bool any = false;
  double score = -1;
  std::uint32_t resident = 0;
  std::uint8_t keys = 0;
  FieldSimilarities sims;
};

struct ContactOutcome {
  BestCandidate best;
  std::size_t self_matches = 0;
  std::size_t undefined = 0;
};

}  // namespace detail

// Runs one stage over the given contacts. blocked=false scores each contact
// against every resident.
inline MatchResult match_stage(const MatchInputs& in, const std::vector<std::uint32_t>& contact_subset,
                               const MatchConfig& config, bool blocked, const MatchOptions& opt = {}) {
  config.validate();
  const FieldStats stats = field_stats(config.weights, in.frequencies().f);
  const auto& residents = in.residents();
  const auto& contacts = in.contacts();
  const std::size_t nr = residents.size();
  const unsigned threads = resolve_threads(opt.threads);

  std::vector<detail::ContactOutcome> outcomes(contact_subset.size());
  const std::size_t n_chunks = std::max<std::size_t>(1, std::size_t(threads) * 8);
  std::vector<std::vector<double>> chunk_scores(std::min(n_chunks, std::max<std::size_t>(contact_subset.size(), 1)));

  parallel_chunks(contact_subset.size(), threads, chunk_scores.size(), [&](std::size_t chunk, std::size_t b, std::size_t e) {
    std::vector<std::uint8_t> scratch(blocked ? nr : 0, 0);
    std::vector<std::uint32_t> touched;
    auto& scores = chunk_scores[chunk];
    for (std::size_t k = b; k < e; ++k) {
      const std::uint32_t c = contact_subset[k];
      auto& out = outcomes[k];
      const auto& pc = in.contact(c);
      const std::string& namer = contacts[c].namer_id;
      auto consider = [&](std::uint32_t r, std::uint8_t keys) {
        if (residents[r].resident_id == namer) {
          ++out.self_matches;
          return;
        }
        const FieldSimilarities sims = field_similarity_vector(in.resident(r), pc);
        const auto score = epiweight(sims, stats);
        if (!score) {
          ++out.undefined;
          return;
        }
        scores.push_back(*score);
        auto& best = out.best;
        if (!best.any || *score > best.score ||
            (*score == best.score && residents[r].resident_id < residents[best.resident].resident_id)) {
          best = {true, *score, r, keys, sims};
        }
      };
      if (blocked) {
        in.for_each_blocked(c, scratch, touched, consider);
      } else {
        for (std::uint32_t r = 0; r < nr; ++r) consider(r, 0);
      }
    }
  });

  std::vector<double> all;
  std::size_t total = 0;
  for (const auto& s : chunk_scores) total += s.size();
  all.reserve(total);
  for (const auto& s : chunk_scores) all.insert(all.end(), s.begin(), s.end());
  std::sort(all.begin(), all.end());

  MatchResult res;
  StageFit sf;
  sf.stage = blocked ? Stage::blocked : Stage::unblocked;
  sf.n_pairs = all.size();
  sf.n_contacts = contact_subset.size();
  sf.fit = fit_gpd_threshold_sorted(all, config.exceedance_quantile, /*allow_small=*/true);
  sf.effective_t = std::min(sf.fit.t, 1.0);

  for (std::size_t k = 0; k < contact_subset.size(); ++k) {
    const auto& o = outcomes[k];
    res.dropped.self_match += o.self_matches;
    res.dropped.undefined_score += o.undefined;
    const std::uint32_t c = contact_subset[k];
    if (!o.best.any) {
      ++res.dropped.no_candidates;
      res.unmatched.push_back(c);
    } else if (o.best.score >= sf.effective_t) {
      MatchedPair m;
      m.contact = c;
      m.resident = o.best.resident;
      m.score = o.best.score;
      m.stage = sf.stage;
      m.keys = o.best.keys;
      m.sims = o.best.sims;
      m.flags = pair_flags(m.sims, residents[m.resident], contacts[c]);
      res.matched.push_back(m);
    } else {
      ++res.dropped.below_threshold;
      res.unmatched.push_back(c);
    }
  }
  res.fits.push_back(sf);
  return res;
}

inline std::vector<std::uint32_t> all_contacts(const MatchInputs& in) {
  std::vector<std::uint32_t> ids(in.contacts().size());
  for (std::uint32_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return ids;
}

struct FilterResult {
  std::vector<MatchedPair> kept;
  std::vector<MatchedPair> removed;
  std::size_t rule_a = 0, rule_b = 0, rule_c = 0;
};

// A match tripping several rules is counted under each.
inline FilterResult postprocess_filter(const std::vector<MatchedPair>& matches) {
  FilterResult out;
  for (const auto& m : matches) {
    const auto hits = removal_rules(m.flags);
    out.rule_a += hits.a;
    out.rule_b += hits.b;
    out.rule_c += hits.c;
    (hits.any() ? out.removed : out.kept).push_back(m);
  }
  return out;
}

// Blocked stage over all contacts, then an unblocked stage over the contacts
// it left unmatched with the same configuration, then post-processing.
inline MatchResult run_two_stage(const MatchInputs& in, const MatchConfig& config, const MatchOptions& opt = {}) {
  MatchResult first = match_stage(in, all_contacts(in), config, /*blocked=*/true, opt);

  MatchResult out;
  out.fits = first.fits;
  out.dropped.self_match = first.dropped.self_match;
  out.dropped.undefined_score = first.dropped.undefined_score;
  out.matched = std::move(first.matched);

  if (!first.unmatched.empty()) {
    const auto pairs = static_cast<std::uint64_t>(in.residents().size()) * first.unmatched.size();
    if (pairs > opt.pair_budget)
      fail(ErrorKind::budget, "unblocked stage needs " + std::to_string(pairs) + " pairs, above the budget of " +
                                  std::to_string(opt.pair_budget) +
                                  "; sample contacts, raise the budget or use a larger machine");
    MatchResult second = match_stage(in, first.unmatched, config, /*blocked=*/false, opt);
    out.fits.insert(out.fits.end(), second.fits.begin(), second.fits.end());
    out.dropped.self_match += second.dropped.self_match;
    out.dropped.undefined_score += second.dropped.undefined_score;
    out.dropped.no_candidates = second.dropped.no_candidates;
    out.dropped.below_threshold = second.dropped.below_threshold;
    out.matched.insert(out.matched.end(), second.matched.begin(), second.matched.end());
    out.unmatched = std::move(second.unmatched);
  }
  std::sort(out.matched.begin(), out.matched.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.contact < b.contact; });

  if (opt.postprocess) {
    auto filtered = postprocess_filter(out.matched);
    out.dropped.rule_a = filtered.rule_a;
    out.dropped.rule_b = filtered.rule_b;
    out.dropped.rule_c = filtered.rule_c;
    out.dropped.postprocess_removed = filtered.removed.size();
    for (const auto& m : filtered.removed) out.unmatched.push_back(m.contact);
    out.matched = std::move(filtered.kept);
  }
  std::sort(out.unmatched.begin(), out.unmatched.end());
  return out;
}

}  // namespace linkforge
