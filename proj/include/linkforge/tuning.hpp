#pragma once
// Hyperparameter search over (w, q): sample contacts, run the blocked stage
// for every configuration, collect human labels on the classified pairs and
// pick the lowest false-positive configuration that keeps recall high.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "linkforge/config.hpp"
#include "linkforge/csv.hpp"
#include "linkforge/epilink.hpp"
#include "linkforge/error.hpp"
#include "linkforge/format.hpp"
#include "linkforge/matcher.hpp"
#include "linkforge/parallel.hpp"
#include "linkforge/random.hpp"
#include "linkforge/records.hpp"

namespace linkforge {

// Random draws ------------------------------------------------------------------

// Uniform point on the probability simplex via normalized unit exponentials.
inline FieldVector sample_simplex(std::mt19937_64& rng) {
  FieldVector w{};
  double s = 0;
  for (auto& v : w) s += (v = -std::log1p(-uniform01(rng)));
  for (auto& v : w) v /= s;
  return w;
}

inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_below(rng, n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::vector<double> default_quantile_grid() {
  std::vector<double> q;
  for (int i = 92; i <= 98; ++i) q.push_back(i / 100.0);
  return q;
}

// Session types -----------------------------------------------------------------

// `cleared` withdraws an earlier label (undo); it is kept in the log.
enum class Label { match, nonmatch, unsure, cleared };

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::match: return "match";
    case Label::nonmatch: return "nonmatch";
    case Label::unsure: return "unsure";
    case Label::cleared: return "cleared";
  }
  return "unsure";
}

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "match") return Label::match;
  if (s == "nonmatch") return Label::nonmatch;
  if (s == "unsure") return Label::unsure;
  if (s == "cleared") return Label::cleared;
  return std::nullopt;
}

class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}
  std::size_t size() const { return n_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }
  bool operator==(const Bitset&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

struct TuningParams {
  std::size_t n_contacts = 1000;
  std::size_t n_weights = 1000;
  std::uint64_t seed = 1;
  std::vector<double> quantiles = default_quantile_grid();
  unsigned threads = 0;
};

struct TuningConfig {
  std::uint32_t config_id = 0;
  MatchConfig config;
  double u = 0;
  double t = 0;  // applied threshold (capped at 1)
  bool fallback = false;
  std::size_t n_classified = 0;
};

struct PoolPair {
  std::uint32_t pair_id = 0;
  std::uint32_t resident = 0;  // index into session residents
  std::uint32_t contact = 0;   // index into session contacts
  FieldSimilarities sims;
  std::uint32_t votes = 0;     // configs classifying the pair as a match
};

struct LabelEvent {
  std::uint32_t pair_id = 0;
  Label label = Label::unsure;
  std::string annotator;
  std::string timestamp;
};

struct TuningSession {
  std::string session_id;
  TuningParams params;
  CommunityDataset sample;  // every resident, the sampled contacts
  std::vector<std::string> warnings;
  std::vector<TuningConfig> configs;
  std::vector<PoolPair> pairs;     // pool ordered by (contact, resident); pair_id = position
  std::vector<Bitset> classified;  // one per config, over the pool
  std::vector<LabelEvent> label_log;

  // Last write wins per pair.
  std::map<std::uint32_t, Label> current_labels() const {
    std::map<std::uint32_t, Label> out;
    for (const auto& e : label_log) {
      if (e.label == Label::cleared) out.erase(e.pair_id);
      else out[e.pair_id] = e.label;
    }
    return out;
  }
};

// Sampling and classification ------------------------------------------------------

namespace detail {

struct Candidates {
  std::vector<std::uint32_t> offsets{0};  // per contact into resident/sims
  std::vector<std::uint32_t> resident;
  std::vector<FieldSimilarities> sims;
};

inline Candidates blocked_candidates(const MatchInputs& in, unsigned threads) {
  const auto& contacts = in.contacts();
  const auto& residents = in.residents();
  struct Item {
    std::uint32_t contact, resident;
    FieldSimilarities sims;
  };
  const std::size_t nr = residents.size();
  auto items = parallel_collect<Item>(contacts.size(), threads, [&](std::size_t c, std::vector<Item>& out) {
    thread_local std::vector<std::uint8_t> scratch;
    thread_local std::vector<std::uint32_t> touched;
    if (scratch.size() < nr) scratch.assign(nr, 0);
    in.for_each_blocked(c, scratch, touched, [&](std::uint32_t r, std::uint8_t) {
      if (residents[r].resident_id == contacts[c].namer_id) return;
      out.push_back({static_cast<std::uint32_t>(c), r, field_similarity_vector(in.resident(r), in.contact(c))});
    });
  });
  Candidates cand;
  cand.offsets.assign(contacts.size() + 1, 0);
  cand.resident.reserve(items.size());
  cand.sims.reserve(items.size());
  for (const auto& it : items) {
    ++cand.offsets[it.contact + 1];
    cand.resident.push_back(it.resident);
    cand.sims.push_back(it.sims);
  }
  for (std::size_t c = 0; c < contacts.size(); ++c) cand.offsets[c + 1] += cand.offsets[c];
  return cand;
}

struct WeightOutcome {
  std::vector<ThresholdFit> fits;                  // one per quantile
  std::vector<std::vector<std::uint32_t>> chosen;  // candidate indexes per quantile
};

// Blocked-stage classification for one weight vector across the quantile grid.
inline WeightOutcome classify_weight(const Candidates& cand, const std::vector<ResidentRecord>& residents,
                                     const FieldVector& f, const FieldVector& w, const std::vector<double>& grid) {
  const FieldStats stats = field_stats(w, f);
  const std::size_t n_contacts = cand.offsets.size() - 1;
  std::vector<double> scores;
  scores.reserve(cand.sims.size());
  std::vector<std::int64_t> best(n_contacts, -1);
  std::vector<double> best_score(n_contacts, -1.0);
  for (std::size_t c = 0; c < n_contacts; ++c) {
    for (std::uint32_t k = cand.offsets[c]; k < cand.offsets[c + 1]; ++k) {
      const auto s = epiweight(cand.sims[k], stats);
      if (!s) continue;
      scores.push_back(*s);
      if (best[c] < 0 || *s > best_score[c] ||
          (*s == best_score[c] &&
           residents[cand.resident[k]].resident_id < residents[cand.resident[static_cast<std::size_t>(best[c])]].resident_id)) {
        best[c] = k;
        best_score[c] = *s;
      }
    }
  }
  // Order statistics at and above the lowest grid quantile are all a fit needs.
  const double q_min = *std::min_element(grid.begin(), grid.end());
  std::size_t from = 0;
  if (!scores.empty()) {
    from = static_cast<std::size_t>(std::floor((static_cast<double>(scores.size()) - 1.0) * q_min));
    std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(from), scores.end());
    std::sort(scores.begin() + static_cast<std::ptrdiff_t>(from), scores.end());
  }
  WeightOutcome out;
  for (double q : grid) {
    auto fit = fit_gpd_threshold_partial(scores, from, q, /*allow_small=*/true);
    const double t = std::min(fit.t, 1.0);
    std::vector<std::uint32_t> chosen;
    for (std::size_t c = 0; c < n_contacts; ++c)
      if (best[c] >= 0 && best_score[c] >= t) chosen.push_back(static_cast<std::uint32_t>(best[c]));
    out.fits.push_back(fit);
    out.chosen.push_back(std::move(chosen));
  }
  return out;
}

inline std::string session_id_for(const CommunityDataset& ds, const TuningParams& p) {
  Fnv1a h;
  h.field(ds.community_id).field(std::to_string(ds.residents.size())).field(std::to_string(ds.contacts.size()));
  h.field(std::to_string(p.seed)).field(std::to_string(p.n_contacts)).field(std::to_string(p.n_weights));
  for (double q : p.quantiles) h.field(format_double(q));
  return "t" + h.hex();
}

}  // namespace detail

// `dataset` must already be preprocessed.
inline TuningSession sample_session(const CommunityDataset& dataset, const TuningParams& params) {
  require(!params.quantiles.empty(), "quantile grid must not be empty");
  require(params.n_weights > 0, "n_weights must be positive");
  for (double q : params.quantiles) MatchConfig::uniform(q).validate();

  TuningSession s;
  s.params = params;
  s.session_id = detail::session_id_for(dataset, params);
  std::mt19937_64 rng(params.seed);

  std::size_t want = params.n_contacts;
  if (want > dataset.contacts.size()) {
    s.warnings.push_back("requested " + std::to_string(want) + " contacts but only " +
                         std::to_string(dataset.contacts.size()) + " exist; using all");
    want = dataset.contacts.size();
  }
  s.sample.community_id = dataset.community_id;
  s.sample.residents = dataset.residents;
  s.sample.village_registry = dataset.village_registry;
  for (auto i : sample_without_replacement(dataset.contacts.size(), want, rng))
    s.sample.contacts.push_back(dataset.contacts[i]);

  std::vector<FieldVector> weights(params.n_weights);
  for (auto& w : weights) w = sample_simplex(rng);

  const unsigned threads = resolve_threads(params.threads);
  const MatchInputs in(s.sample.residents, s.sample.contacts);
  const auto cand = detail::blocked_candidates(in, threads);

  const std::size_t nq = params.quantiles.size();
  std::vector<detail::WeightOutcome> outcomes(weights.size());
  parallel_for(weights.size(), threads, [&](std::size_t wi) {
    outcomes[wi] = detail::classify_weight(cand, s.sample.residents, in.frequencies().f, weights[wi], params.quantiles);
  });

  // Pool = union of classified candidates, in candidate (contact, resident) order.
  std::vector<std::uint8_t> in_pool(cand.sims.size(), 0);
  for (const auto& o : outcomes)
    for (const auto& ch : o.chosen)
      for (auto k : ch) in_pool[k] = 1;
  std::vector<std::int64_t> pair_of(cand.sims.size(), -1);
  for (std::uint32_t c = 0; c + 1 < cand.offsets.size(); ++c)
    for (std::uint32_t k = cand.offsets[c]; k < cand.offsets[c + 1]; ++k)
      if (in_pool[k]) {
        pair_of[k] = static_cast<std::int64_t>(s.pairs.size());
        s.pairs.push_back({static_cast<std::uint32_t>(s.pairs.size()), cand.resident[k], c, cand.sims[k], 0});
      }

  for (std::size_t wi = 0; wi < weights.size(); ++wi) {
    for (std::size_t qi = 0; qi < nq; ++qi) {
      TuningConfig tc;
      tc.config_id = static_cast<std::uint32_t>(wi * nq + qi);
      tc.config.weights = weights[wi];
      tc.config.exceedance_quantile = params.quantiles[qi];
      const auto& fit = outcomes[wi].fits[qi];
      tc.u = fit.u;
      tc.t = std::min(fit.t, 1.0);
      tc.fallback = fit.fallback;
      Bitset bits(s.pairs.size());
      for (auto k : outcomes[wi].chosen[qi]) {
        const auto pid = static_cast<std::size_t>(pair_of[k]);
        bits.set(pid);
        ++s.pairs[pid].votes;
      }
      tc.n_classified = outcomes[wi].chosen[qi].size();
      s.configs.push_back(tc);
      s.classified.push_back(std::move(bits));
    }
  }
  return s;
}

// Labels ---------------------------------------------------------------------------

inline const LabelEvent& apply_label(TuningSession& s, std::uint32_t pair_id, Label label, std::string annotator,
                                     std::string timestamp = utc_timestamp()) {
  if (pair_id >= s.pairs.size()) fail(ErrorKind::not_found, "unknown pair id " + std::to_string(pair_id));
  s.label_log.push_back({pair_id, label, std::move(annotator), std::move(timestamp)});
  return s.label_log.back();
}

// Metrics and selection ------------------------------------------------------------

struct ConfigMetrics {
  std::uint32_t config_id = 0;
  double quantile = 0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::optional<double> tpr, fpr;
  std::optional<double> coverage;  // labeled share of the config's classified pairs

  bool operator==(const ConfigMetrics&) const = default;
};

inline std::vector<ConfigMetrics> config_metrics(const TuningSession& s) {
  const auto labels = s.current_labels();
  if (labels.empty()) fail(ErrorKind::insufficient_data, "no labels recorded; metrics need at least one label");
  std::vector<std::pair<std::uint32_t, bool>> decided;  // (pair, is_match)
  for (auto [pid, l] : labels)
    if (l != Label::unsure) decided.emplace_back(pid, l == Label::match);
  std::vector<ConfigMetrics> out;
  out.reserve(s.configs.size());
  for (std::size_t k = 0; k < s.configs.size(); ++k) {
    ConfigMetrics m;
    m.config_id = s.configs[k].config_id;
    m.quantile = s.configs[k].config.exceedance_quantile;
    const auto& bits = s.classified[k];
    for (auto [pid, is_match] : decided) {
      const bool cls = bits.test(pid);
      if (cls) (is_match ? m.tp : m.fp) += 1;
      else (is_match ? m.fn : m.tn) += 1;
    }
    if (m.tp + m.fn) m.tpr = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    if (m.fp + m.tn) m.fpr = static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn);
    if (const auto n = bits.count()) m.coverage = static_cast<double>(m.tp + m.fp) / static_cast<double>(n);
    out.push_back(m);
  }
  return out;
}

inline constexpr double kMinTpr = 0.85;

struct Selection {
  std::uint32_t config_id = 0;
  bool constraint_met = true;
  std::optional<std::string> warning;
};

// Lowest FPR among configs with TPR >= min_tpr; ties prefer higher TPR, then
// lower q, then lower id. Without any qualifying config, the highest-TPR one.
inline Selection select_config(const std::vector<ConfigMetrics>& metrics, double min_tpr = kMinTpr) {
  const ConfigMetrics* best = nullptr;
  auto better_constrained = [](const ConfigMetrics& a, const ConfigMetrics& b) {
    if (*a.fpr != *b.fpr) return *a.fpr < *b.fpr;
    if (*a.tpr != *b.tpr) return *a.tpr > *b.tpr;
    if (a.quantile != b.quantile) return a.quantile < b.quantile;
    return a.config_id < b.config_id;
  };
  auto better_fallback = [](const ConfigMetrics& a, const ConfigMetrics& b) {
    if (*a.tpr != *b.tpr) return *a.tpr > *b.tpr;
    if (*a.fpr != *b.fpr) return *a.fpr < *b.fpr;
    if (a.quantile != b.quantile) return a.quantile < b.quantile;
    return a.config_id < b.config_id;
  };
  for (const auto& m : metrics)
    if (m.tpr && m.fpr && *m.tpr >= min_tpr && (!best || better_constrained(m, *best))) best = &m;
  if (best) return {best->config_id, true, std::nullopt};
  for (const auto& m : metrics)
    if (m.tpr && m.fpr && (!best || better_fallback(m, *best))) best = &m;
  if (!best)
    fail(ErrorKind::insufficient_data,
         "no configuration has both TPR and FPR defined; label at least one match and one non-match");
  return {best->config_id, false,
          "no configuration reaches TPR " + format_double(min_tpr) + "; chose the highest-TPR configuration"};
}

inline const TuningConfig& find_config(const TuningSession& s, std::uint32_t config_id) {
  if (config_id >= s.configs.size() || s.configs[config_id].config_id != config_id)
    fail(ErrorKind::not_found, "unknown config id " + std::to_string(config_id));
  return s.configs[config_id];
}

// Review order: pairs the configs disagree on most come first.
inline std::vector<std::uint32_t> disagreement_order(const TuningSession& s) {
  const double n = static_cast<double>(s.configs.size());
  std::vector<std::uint32_t> ids(s.pairs.size());
  for (std::uint32_t i = 0; i < ids.size(); ++i) ids[i] = i;
  auto dis = [&](std::uint32_t i) {
    const double v = s.pairs[i].votes;
    return std::min(v, n - v);
  };
  std::stable_sort(ids.begin(), ids.end(), [&](auto a, auto b) { return dis(a) > dis(b); });
  return ids;
}

// Persistence -----------------------------------------------------------------------

inline constexpr char kClassificationMagic[4] = {'L', 'F', 'C', 'B'};

inline json session_json(const TuningSession& s) {
  json contacts = json::array();
  for (const auto& c : s.sample.contacts) contacts.push_back(c.contact_id);
  json q = json::array();
  for (double v : s.params.quantiles) q.push_back(v);
  return json{{"format_version", 1},
              {"session_id", s.session_id},
              {"community_id", s.sample.community_id},
              {"seed", s.params.seed},
              {"n_contacts_requested", s.params.n_contacts},
              {"n_weights", s.params.n_weights},
              {"quantiles", q},
              {"n_configs", s.configs.size()},
              {"n_pairs", s.pairs.size()},
              {"warnings", s.warnings},
              {"sampled_contact_ids", contacts}};
}

inline csv::Table configs_table(const TuningSession& s) {
  csv::Table t;
  t.header = {"config_id"};
  for (Field f : kAllFields) t.header.push_back("w_" + std::string(to_string(f)));
  for (auto h : {"q", "u", "t", "fallback", "n_classified"}) t.header.emplace_back(h);
  for (const auto& c : s.configs) {
    csv::Row r{std::to_string(c.config_id)};
    for (double w : c.config.weights) r.push_back(format_double(w));
    r.push_back(format_double(c.config.exceedance_quantile));
    r.push_back(format_double(c.u));
    r.push_back(format_double(c.t));
    r.push_back(c.fallback ? "1" : "0");
    r.push_back(std::to_string(c.n_classified));
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline csv::Table pairs_table(const TuningSession& s) {
  csv::Table t;
  t.header = {"pair_id", "resident_id", "contact_id", "namer_id"};
  for (Field f : kAllFields) t.header.push_back("s_" + std::string(to_string(f)));
  t.header.push_back("votes");
  for (const auto& p : s.pairs) {
    const auto& c = s.sample.contacts[p.contact];
    csv::Row r{std::to_string(p.pair_id), s.sample.residents[p.resident].resident_id, c.contact_id, c.namer_id};
    for (Field f : kAllFields) r.push_back(format_optional(p.sims.get(f)));
    r.push_back(std::to_string(p.votes));
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline std::string classifications_blob(const TuningSession& s) {
  std::string out(kClassificationMagic, 4);
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put32(1);
  put32(static_cast<std::uint32_t>(s.configs.size()));
  put32(static_cast<std::uint32_t>(s.pairs.size()));
  for (const auto& b : s.classified)
    for (auto w : b.words())
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((w >> (8 * i)) & 0xFF));
  return out;
}

inline const char* kLabelsHeader = "pair_id,label,annotator,timestamp\n";

inline void save_session(const TuningSession& s, const fs::path& dir) {
  fs::create_directories(dir);
  write_json_file(dir / "session.json", session_json(s));
  export_dataset(s.sample, dir);
  csv::write((dir / "configs.csv").string(), configs_table(s));
  csv::write((dir / "pairs.csv").string(), pairs_table(s));
  csv::write_file((dir / "classifications.bin").string(), classifications_blob(s));
  std::string labels = kLabelsHeader;
  for (const auto& e : s.label_log)
    csv::append_row(labels, {std::to_string(e.pair_id), std::string(to_string(e.label)), e.annotator, e.timestamp});
  csv::write_file((dir / "labels.csv").string(), labels);
}

// Appends one label row and fsyncs before returning.
inline void append_label_durable(const fs::path& dir, const LabelEvent& e) {
  std::string row;
  csv::append_row(row, {std::to_string(e.pair_id), std::string(to_string(e.label)), e.annotator, e.timestamp});
  const auto path = (dir / "labels.csv").string();
  const int fd = ::open(path.c_str(), O_RDWR | O_APPEND | O_CREAT, 0644);
  if (fd < 0) fail(ErrorKind::io, "cannot open " + path + ": " + std::strerror(errno));
  // finish a torn last line so the new row starts clean
  if (const auto end = ::lseek(fd, 0, SEEK_END); end > 0) {
    char last = '\n';
    if (::pread(fd, &last, 1, end - 1) == 1 && last != '\n') row.insert(0, 1, '\n');
  } else if (end == 0) {
    row.insert(0, kLabelsHeader);
  }
  std::size_t done = 0;
  while (done < row.size()) {
    const auto n = ::write(fd, row.data() + done, row.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      fail(ErrorKind::io, "write failed on " + path);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    fail(ErrorKind::io, "fsync failed on " + path);
  }
  ::close(fd);
}

inline TuningSession load_session(const fs::path& dir) {
  if (!fs::exists(dir / "session.json")) fail(ErrorKind::not_found, "no tuning session at " + dir.string());
  TuningSession s;
  const auto meta = read_json_file(dir / "session.json");
  try {
    s.session_id = meta.at("session_id").get<std::string>();
    s.params.seed = meta.at("seed").get<std::uint64_t>();
    s.params.n_contacts = meta.at("n_contacts_requested").get<std::size_t>();
    s.params.n_weights = meta.at("n_weights").get<std::size_t>();
    s.params.quantiles = meta.at("quantiles").get<std::vector<double>>();
    s.warnings = meta.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::data, "session.json: " + std::string(e.what()));
  }
  s.sample = import_dataset(dir, meta.at("community_id").get<std::string>()).dataset;
  std::unordered_map<std::string, std::uint32_t> rix, cix;
  for (std::uint32_t i = 0; i < s.sample.residents.size(); ++i) rix.emplace(s.sample.residents[i].resident_id, i);
  for (std::uint32_t i = 0; i < s.sample.contacts.size(); ++i) cix.emplace(s.sample.contacts[i].contact_id, i);

  const auto configs = csv::read((dir / "configs.csv").string());
  for (const auto& row : configs.rows) {
    if (row.size() != configs.header.size()) fail(ErrorKind::data, "configs.csv: ragged row");
    TuningConfig tc;
    tc.config_id = static_cast<std::uint32_t>(require_double(row[0], "config_id"));
    for (std::size_t i = 0; i < kFieldCount; ++i) tc.config.weights[i] = require_double(row[1 + i], "weight");
    tc.config.exceedance_quantile = require_double(row[8], "q");
    tc.u = require_double(row[9], "u");
    tc.t = require_double(row[10], "t");
    tc.fallback = row[11] == "1";
    tc.n_classified = static_cast<std::size_t>(require_double(row[12], "n_classified"));
    s.configs.push_back(tc);
  }
  const auto pairs = csv::read((dir / "pairs.csv").string());
  for (const auto& row : pairs.rows) {
    if (row.size() != pairs.header.size()) fail(ErrorKind::data, "pairs.csv: ragged row");
    PoolPair p;
    p.pair_id = static_cast<std::uint32_t>(require_double(row[0], "pair_id"));
    auto r = rix.find(row[1]);
    auto c = cix.find(row[2]);
    if (r == rix.end() || c == cix.end()) fail(ErrorKind::data, "pairs.csv references unknown records");
    p.resident = r->second;
    p.contact = c->second;
    for (std::size_t i = 0; i < kFieldCount; ++i)
      if (auto v = parse_double(row[4 + i])) p.sims.set(static_cast<Field>(i), *v);
    p.votes = static_cast<std::uint32_t>(require_double(row[11], "votes"));
    if (p.pair_id != s.pairs.size()) fail(ErrorKind::data, "pairs.csv: pair ids must be dense and ordered");
    s.pairs.push_back(p);
  }
  const auto blob = csv::read_file((dir / "classifications.bin").string());
  auto get32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[off + i])) << (8 * i);
    return v;
  };
  if (blob.size() < 16 || blob.compare(0, 4, kClassificationMagic, 4) != 0)
    fail(ErrorKind::data, "classifications.bin: bad header");
  if (get32(8) != s.configs.size() || get32(12) != s.pairs.size())
    fail(ErrorKind::data, "classifications.bin does not match configs.csv/pairs.csv");
  const std::size_t words = (s.pairs.size() + 63) / 64;
  if (blob.size() != 16 + s.configs.size() * words * 8) fail(ErrorKind::data, "classifications.bin: truncated");
  std::size_t off = 16;
  for (std::size_t k = 0; k < s.configs.size(); ++k) {
    Bitset b(s.pairs.size());
    for (auto& w : b.words()) {
      w = 0;
      for (int i = 0; i < 8; ++i) w |= static_cast<std::uint64_t>(static_cast<unsigned char>(blob[off++])) << (8 * i);
    }
    s.classified.push_back(std::move(b));
  }
  if (fs::exists(dir / "labels.csv")) {
    const auto labels = csv::read((dir / "labels.csv").string());
    for (const auto& row : labels.rows) {
      // a torn final row from a crash is skipped
      if (row.size() != 4) continue;
      auto l = parse_label(row[1]);
      auto pid = parse_double(row[0]);
      if (!l || !pid || *pid < 0 || *pid >= static_cast<double>(s.pairs.size())) continue;
      s.label_log.push_back({static_cast<std::uint32_t>(*pid), *l, row[2], row[3]});
    }
  }
  return s;
}

inline json chosen_config_json(const TuningSession& s, const TuningConfig& c, const std::optional<ConfigMetrics>& m) {
  json j = to_json(c.config);
  j["source"] = json{{"session_id", s.session_id}, {"config_id", c.config_id}};
  if (m) {
    j["metrics"] = json{{"tp", m->tp}, {"fp", m->fp}, {"fn", m->fn}, {"tn", m->tn},
                        {"tpr", m->tpr ? json(*m->tpr) : json()}, {"fpr", m->fpr ? json(*m->fpr) : json()}};
  }
  return j;
}

inline void write_chosen_config(const TuningSession& s, const fs::path& dir, std::uint32_t config_id) {
  const auto& c = find_config(s, config_id);
  std::optional<ConfigMetrics> m;
  if (!s.current_labels().empty()) m = config_metrics(s)[config_id];
  write_json_file(dir / "chosen_config.json", chosen_config_json(s, c, m));
}

}  // namespace linkforge
