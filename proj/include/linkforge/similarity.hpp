#pragma once
// Field-level similarity: Jaro, Jaro-Winkler, age similarity and the
// seven-field similarity vector between a resident and a contact.
//
// Jaro and Jaro-Winkler are returned as similarities (identical strings
// score 1). Strings are compared by Unicode code point.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linkforge/error.hpp"
#include "linkforge/records.hpp"
#include "linkforge/text.hpp"

namespace linkforge {

// Order matches the MatchConfig weight vector.
enum class Field : std::uint8_t { first, middle, last, age, village, sex, honorific };

inline constexpr std::size_t kFieldCount = 7;
inline constexpr std::array<Field, kFieldCount> kAllFields = {Field::first, Field::middle, Field::last, Field::age,
                                                              Field::village, Field::sex, Field::honorific};

inline std::string_view to_string(Field f) {
  static constexpr std::array<std::string_view, kFieldCount> names = {"first", "middle", "last", "age",
                                                                      "village", "sex", "honorific"};
  return names[static_cast<std::size_t>(f)];
}

namespace detail {

// Greedy Jaro matching over random-access sequences. The flag buffers live on
// the stack for short inputs.
template <typename A, typename B>
double jaro_impl(const A& a, const B& b) {
  const std::size_t la = a.size(), lb = b.size();
  if (la == 0 && lb == 0) return 1.0;
  if (la == 0 || lb == 0) return 0.0;

  const std::size_t half = std::max(la, lb) / 2;
  const std::size_t window = half > 0 ? half - 1 : 0;

  constexpr std::size_t kStack = 64;
  std::array<bool, kStack> stack_a{}, stack_b{};
  std::vector<bool> heap_a, heap_b;
  const bool small = la <= kStack && lb <= kStack;
  if (!small) {
    heap_a.assign(la, false);
    heap_b.assign(lb, false);
  }
  auto flag_a = [&](std::size_t i) -> bool { return small ? stack_a[i] : heap_a[i]; };
  auto flag_b = [&](std::size_t j) -> bool { return small ? stack_b[j] : heap_b[j]; };
  auto set_a = [&](std::size_t i) { small ? (stack_a[i] = true) : (heap_a[i] = true); };
  auto set_b = [&](std::size_t j) { small ? (stack_b[j] = true) : (heap_b[j] = true); };

  std::size_t m = 0;
  for (std::size_t i = 0; i < la; ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(lb, i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!flag_b(j) && a[i] == b[j]) {
        set_a(i);
        set_b(j);
        ++m;
        break;
      }
    }
  }
  if (m == 0) return 0.0;

  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, k = 0; i < la; ++i) {
    if (!flag_a(i)) continue;
    while (!flag_b(k)) ++k;
    if (a[i] != b[k]) ++half_transpositions;
    ++k;
  }
  const double md = static_cast<double>(m);
  const double t = static_cast<double>(half_transpositions) / 2.0;
  return (md / static_cast<double>(la) + md / static_cast<double>(lb) + (md - t) / md) / 3.0;
}

template <typename A, typename B>
std::size_t common_prefix(const A& a, const B& b, std::size_t cap) {
  const std::size_t n = std::min({a.size(), b.size(), cap});
  std::size_t l = 0;
  while (l < n && a[l] == b[l]) ++l;
  return l;
}

template <typename A, typename B>
double jaro_winkler_impl(const A& a, const B& b, double p) {
  const double j = jaro_impl(a, b);
  const auto l = static_cast<double>(common_prefix(a, b, 4));
  return j + l * p * (1.0 - j);
}

// Calls fn(seq_a, seq_b) with byte views for ASCII inputs and code-point
// sequences otherwise.
template <typename Fn>
double with_code_points(std::string_view a, std::string_view b, Fn&& fn) {
  if (text::is_ascii(a) && text::is_ascii(b)) return fn(a, b);
  return fn(text::to_u32(a), text::to_u32(b));
}

}  // namespace detail

inline double jaro(std::string_view s1, std::string_view s2) {
  return detail::with_code_points(s1, s2, [](const auto& a, const auto& b) { return detail::jaro_impl(a, b); });
}

inline constexpr double kDefaultPrefixScale = 0.1;

// Prefix length is capped at 4 characters.
inline double jaro_winkler(std::string_view s1, std::string_view s2, double p = kDefaultPrefixScale) {
  require(p >= 0.0 && p <= 0.25, "jaro_winkler: prefix scale must lie in [0, 0.25]");
  return detail::with_code_points(s1, s2,
                                  [p](const auto& a, const auto& b) { return detail::jaro_winkler_impl(a, b, p); });
}

// 1 - |a1 - a2| / 100, clamped to [0, 1]; missing if either age is missing.
inline std::optional<double> age_similarity(std::optional<int> a1, std::optional<int> a2) {
  if (!a1 || !a2) return std::nullopt;
  const double d = std::abs(static_cast<double>(*a1) - static_cast<double>(*a2));
  return std::clamp(1.0 - d / 100.0, 0.0, 1.0);
}

struct FieldSimilarities {
  std::array<double, kFieldCount> value{};
  std::uint8_t present = 0;  // bit i set when field i has a similarity

  bool has(Field f) const { return (present >> static_cast<unsigned>(f)) & 1u; }
  std::optional<double> get(Field f) const {
    if (!has(f)) return std::nullopt;
    return value[static_cast<std::size_t>(f)];
  }
  void set(Field f, double v) {
    value[static_cast<std::size_t>(f)] = v;
    present |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(f));
  }
  void set(Field f, std::optional<double> v) {
    if (v) set(f, *v);
  }
  void clear(Field f) {
    value[static_cast<std::size_t>(f)] = 0.0;
    present &= static_cast<std::uint8_t>(~(1u << static_cast<unsigned>(f)));
  }

  bool operator==(const FieldSimilarities&) const = default;
};

// Positional name fields: first token is the first name, the final token the
// last name, and whatever lies between the middle name.
struct NameFields {
  std::string first, middle, last;
  bool has_first = false, has_middle = false, has_last = false;
};

inline NameFields name_fields(const std::vector<std::string>& components) {
  NameFields f;
  const std::size_t k = components.size();
  if (k >= 1) {
    f.first = components[0];
    f.has_first = true;
  }
  if (k >= 2) {
    f.last = components[k - 1];
    f.has_last = true;
  }
  if (k >= 3) {
    f.middle = components[1];
    for (std::size_t i = 2; i + 1 < k; ++i) f.middle += " " + components[i];
    f.has_middle = true;
  }
  return f;
}

// All distinct orderings of the components, enumerated from the sorted
// multiset so the result does not depend on input order.
inline std::vector<std::vector<std::string>> distinct_permutations(std::vector<std::string> components) {
  std::vector<std::vector<std::string>> out;
  std::sort(components.begin(), components.end());
  do {
    out.push_back(components);
  } while (std::next_permutation(components.begin(), components.end()));
  return out;
}

inline std::string village_key(std::string_view village) { return text::normalize(village); }

// Contact-side data prepared once per contact for repeated scoring. Each
// variant refers to candidate strings by index so a resident's name fields
// are compared with each distinct candidate only once.
struct PreparedContact {
  std::vector<std::string> first_cands, middle_cands, last_cands;
  std::vector<std::array<std::int16_t, 3>> variants;  // indexes; -1 when absent
  bool usable = false;
  std::optional<int> age;
  std::optional<std::string> village;
  std::optional<Sex> sex;
  std::optional<std::string> honorific;
  std::size_t n_components = 0;
};

struct PreparedResident {
  NameFields name;
  bool usable = false;
  std::optional<int> age;
  std::optional<std::string> village;
  std::optional<Sex> sex;
  std::optional<std::string> honorific;
  std::size_t n_components = 0;
};

namespace detail {
inline std::int16_t intern(std::vector<std::string>& pool, const std::string& s) {
  auto it = std::find(pool.begin(), pool.end(), s);
  if (it != pool.end()) return static_cast<std::int16_t>(it - pool.begin());
  pool.push_back(s);
  return static_cast<std::int16_t>(pool.size() - 1);
}

inline std::optional<std::string> honorific_string(const NameParts& n) {
  if (n.honorific_tokens.empty()) return std::nullopt;
  return text::join(n.honorific_tokens, " ");
}
}  // namespace detail

inline PreparedContact prepare(const ContactRecord& c) {
  PreparedContact p;
  p.usable = c.name.usable && !c.name.components.empty();
  p.n_components = c.name.components.size();
  if (p.usable) {
    for (const auto& v : distinct_permutations(c.name.components)) {
      const NameFields f = name_fields(v);
      std::array<std::int16_t, 3> idx{-1, -1, -1};
      if (f.has_first) idx[0] = detail::intern(p.first_cands, f.first);
      if (f.has_middle) idx[1] = detail::intern(p.middle_cands, f.middle);
      if (f.has_last) idx[2] = detail::intern(p.last_cands, f.last);
      p.variants.push_back(idx);
    }
  }
  p.age = c.reported_age;
  if (c.reported_village) {
    auto key = village_key(*c.reported_village);
    if (!key.empty()) p.village = std::move(key);
  }
  p.sex = c.imputed_sex;
  p.honorific = detail::honorific_string(c.name);
  return p;
}

inline PreparedResident prepare(const ResidentRecord& r) {
  PreparedResident p;
  p.usable = r.name.usable && !r.name.components.empty();
  p.n_components = r.name.components.size();
  if (p.usable) p.name = name_fields(r.name.components);
  p.age = r.age;
  if (auto key = village_key(r.village); !key.empty()) p.village = std::move(key);
  p.sex = r.sex;
  p.honorific = detail::honorific_string(r.name);
  return p;
}

// Name similarities come from the contact name permutation with the highest
// summed positional Jaro-Winkler score; ties keep the earliest permutation.
inline FieldSimilarities field_similarity_vector(const PreparedResident& r, const PreparedContact& c,
                                                 double p = kDefaultPrefixScale) {
  FieldSimilarities s;
  if (r.usable && c.usable) {
    constexpr std::size_t kMaxCands = 24;
    std::array<double, kMaxCands> sf{}, sm{}, sl{};
    for (std::size_t i = 0; i < c.first_cands.size(); ++i) sf[i] = jaro_winkler(r.name.first, c.first_cands[i], p);
    if (r.name.has_middle)
      for (std::size_t i = 0; i < c.middle_cands.size(); ++i) sm[i] = jaro_winkler(r.name.middle, c.middle_cands[i], p);
    if (r.name.has_last)
      for (std::size_t i = 0; i < c.last_cands.size(); ++i) sl[i] = jaro_winkler(r.name.last, c.last_cands[i], p);

    double best = -1.0;
    std::array<double, 3> best_v{};
    std::array<bool, 3> best_has{};
    for (const auto& v : c.variants) {
      std::array<double, 3> cur{};
      std::array<bool, 3> has{};
      double sum = 0;
      if (v[0] >= 0) {
        cur[0] = sf[static_cast<std::size_t>(v[0])];
        has[0] = true;
      }
      if (v[1] >= 0 && r.name.has_middle) {
        cur[1] = sm[static_cast<std::size_t>(v[1])];
        has[1] = true;
      }
      if (v[2] >= 0 && r.name.has_last) {
        cur[2] = sl[static_cast<std::size_t>(v[2])];
        has[2] = true;
      }
      sum = cur[0] + cur[1] + cur[2];
      if (sum > best) {
        best = sum;
        best_v = cur;
        best_has = has;
      }
    }
    if (best_has[0]) s.set(Field::first, best_v[0]);
    if (best_has[1]) s.set(Field::middle, best_v[1]);
    if (best_has[2]) s.set(Field::last, best_v[2]);
  }
  s.set(Field::age, age_similarity(r.age, c.age));
  if (r.village && c.village) s.set(Field::village, jaro_winkler(*r.village, *c.village, p));
  if (r.sex && c.sex) s.set(Field::sex, *r.sex == *c.sex ? 1.0 : 0.0);
  if (r.honorific || c.honorific)
    s.set(Field::honorific, (r.honorific && c.honorific) ? jaro_winkler(*r.honorific, *c.honorific, p) : 0.0);
  return s;
}

inline FieldSimilarities field_similarity_vector(const ResidentRecord& r, const ContactRecord& c) {
  return field_similarity_vector(prepare(r), prepare(c));
}

}  // namespace linkforge
