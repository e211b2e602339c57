/*
 * Copyright 2026 The depstrat Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depstrat/error.hpp"

// Semantic versions and npm-style range expressions.
//
// A range is normalized into two interval lists over the SemVer precedence
// order. `intervals` holds the admitted *releases*: each entry is either a
// point [a, a] or a half-open [a, b) whose bounds are releases (b may be
// unbounded). `prerelease_intervals` holds the admitted prerelease versions;
// following npm, a comparator set only admits prereleases of a triple that
// one of its comparators names with a prerelease tag, so every such interval
// lies inside [x.y.z-0, x.y.z) for one triple.

namespace depstrat::semver {

struct Version {
  std::uint64_t major = 0;
  std::uint64_t minor = 0;
  std::uint64_t patch = 0;
  std::vector<std::string> prerelease;
  std::string build;  // never affects ordering

  bool is_prerelease() const { return !prerelease.empty(); }
  Version release() const { return Version{major, minor, patch, {}, {}}; }
  Version next_patch() const { return Version{major, minor, patch + 1, {}, {}}; }
};

inline Version make_version(std::uint64_t major, std::uint64_t minor, std::uint64_t patch,
                            std::vector<std::string> prerelease = {}) {
  return Version{major, minor, patch, std::move(prerelease), {}};
}

namespace detail {

inline bool is_numeric(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::strong_ordering compare_numeric_text(std::string_view a, std::string_view b) {
  while (a.size() > 1 && a.front() == '0') a.remove_prefix(1);
  while (b.size() > 1 && b.front() == '0') b.remove_prefix(1);
  if (a.size() != b.size()) return a.size() <=> b.size();
  const int c = a.compare(b);
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

inline std::strong_ordering compare_identifier(std::string_view a, std::string_view b) {
  const bool na = is_numeric(a);
  const bool nb = is_numeric(b);
  if (na && nb) return compare_numeric_text(a, b);
  if (na != nb) return na ? std::strong_ordering::less : std::strong_ordering::greater;
  const int c = a.compare(b);
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

}  // namespace detail

inline std::strong_ordering operator<=>(const Version& a, const Version& b) {
  if (auto c = a.major <=> b.major; c != 0) return c;
  if (auto c = a.minor <=> b.minor; c != 0) return c;
  if (auto c = a.patch <=> b.patch; c != 0) return c;
  // A prerelease precedes the plain release of the same triple.
  if (a.prerelease.empty() || b.prerelease.empty()) {
    return b.prerelease.size() == 0 && a.prerelease.size() == 0
               ? std::strong_ordering::equal
               : (a.prerelease.empty() ? std::strong_ordering::greater : std::strong_ordering::less);
  }
  const std::size_t n = std::min(a.prerelease.size(), b.prerelease.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = detail::compare_identifier(a.prerelease[i], b.prerelease[i]); c != 0) return c;
  }
  return a.prerelease.size() <=> b.prerelease.size();
}

inline bool operator==(const Version& a, const Version& b) { return (a <=> b) == 0; }

inline bool same_triple(const Version& a, const Version& b) {
  return a.major == b.major && a.minor == b.minor && a.patch == b.patch;
}

// Renders major.minor.patch[-prerelease]; build metadata is not rendered.
inline std::string to_string(const Version& v) {
  std::string out = std::to_string(v.major) + "." + std::to_string(v.minor) + "." +
                    std::to_string(v.patch);
  for (std::size_t i = 0; i < v.prerelease.size(); ++i) {
    out += (i == 0 ? "-" : ".");
    out += v.prerelease[i];
  }
  return out;
}

namespace detail {

inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-';
}

inline std::optional<std::uint64_t> parse_number(std::string_view text) {
  if (!is_numeric(text)) return std::nullopt;
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

// Splits "-pre.1+build" tails. Returns false on an empty identifier or a
// character outside [0-9A-Za-z-].
inline bool parse_tail(std::string_view tail, std::vector<std::string>& prerelease,
                       std::string& build) {
  const auto plus = tail.find('+');
  std::string_view pre = tail.substr(0, plus);
  if (plus != std::string_view::npos) {
    std::string_view b = tail.substr(plus + 1);
    if (b.empty()) return false;
    std::size_t start = 0;
    for (;;) {
      auto dot = b.find('.', start);
      std::string_view id = b.substr(start, dot == std::string_view::npos ? b.npos : dot - start);
      if (id.empty() || !std::all_of(id.begin(), id.end(), is_ident_char)) return false;
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    build = std::string(b);
  }
  if (pre.empty()) return true;
  if (pre.front() != '-') return false;
  pre.remove_prefix(1);
  if (pre.empty()) return false;
  std::size_t start = 0;
  for (;;) {
    auto dot = pre.find('.', start);
    std::string_view id = pre.substr(start, dot == std::string_view::npos ? pre.npos : dot - start);
    if (id.empty() || !std::all_of(id.begin(), id.end(), is_ident_char)) return false;
    prerelease.emplace_back(id);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Parses a complete version. A leading "v" is accepted; partial versions
// such as "1.2" are rejected.
inline Version parse_version(std::string_view text) {
  const std::string_view original = text;
  auto fail = [&](const char* why) {
    return Error(ErrorCode::kMalformedVersion, "'" + std::string(original) + "': " + why);
  };
  text = detail::trim(text);
  if (!text.empty() && (text.front() == 'v' || text.front() == 'V')) text.remove_prefix(1);
  if (text.empty()) throw fail("empty version");
  std::size_t core_end = text.find_first_of("-+");
  std::string_view core = text.substr(0, core_end);
  std::array<std::uint64_t, 3> parts{};
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const auto dot = core.find('.', start);
    if (i < 2 && dot == std::string_view::npos) throw fail("expected major.minor.patch");
    if (i == 2 && dot != std::string_view::npos) throw fail("too many core components");
    const std::string_view part = core.substr(start, i < 2 ? dot - start : core.npos);
    auto n = detail::parse_number(part);
    if (!n) throw fail("non-numeric core component");
    parts[i] = *n;
    start = dot + 1;
  }
  Version v{parts[0], parts[1], parts[2], {}, {}};
  if (core_end != std::string_view::npos &&
      !detail::parse_tail(text.substr(core_end), v.prerelease, v.build)) {
    throw fail("empty or invalid prerelease/build identifier");
  }
  return v;
}

// One contiguous run of versions. An absent upper bound means unbounded.
struct Interval {
  Version lower;
  bool lower_inclusive = true;
  std::optional<Version> upper;
  bool upper_inclusive = false;

  bool contains(const Version& v) const {
    const auto lo = v <=> lower;
    if (lo < 0 || (lo == 0 && !lower_inclusive)) return false;
    if (!upper) return true;
    const auto hi = v <=> *upper;
    return hi < 0 || (hi == 0 && upper_inclusive);
  }

  bool is_point() const { return upper && lower_inclusive && upper_inclusive && *upper == lower; }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lower == b.lower && a.lower_inclusive == b.lower_inclusive && a.upper == b.upper &&
           a.upper_inclusive == b.upper_inclusive;
  }
};

enum class UpdateStrategy { kBalanced, kRestrictive, kPermissive };

inline std::string_view to_string(UpdateStrategy s) {
  switch (s) {
    case UpdateStrategy::kBalanced: return "balanced";
    case UpdateStrategy::kRestrictive: return "restrictive";
    case UpdateStrategy::kPermissive: return "permissive";
  }
  return "?";
}

struct AdmissionProfile {
  bool pinned = false;
  bool admits_patch = false;
  bool admits_minor = false;
  bool admits_major = false;

  friend bool operator==(const AdmissionProfile&, const AdmissionProfile&) = default;
};

namespace detail {

// A bound on one side of a raw interval. `version` absent means unbounded.
struct Bound {
  std::optional<Version> version;
  bool inclusive = true;
};

// Tighter of two lower bounds.
inline Bound max_lower(const Bound& a, const Bound& b) {
  if (!a.version) return b;
  if (!b.version) return a;
  const auto c = *a.version <=> *b.version;
  if (c != 0) return c > 0 ? a : b;
  return a.inclusive ? b : a;
}

// Tighter of two upper bounds.
inline Bound min_upper(const Bound& a, const Bound& b) {
  if (!a.version) return b;
  if (!b.version) return a;
  const auto c = *a.version <=> *b.version;
  if (c != 0) return c < 0 ? a : b;
  return a.inclusive ? b : a;
}

inline bool non_empty(const Bound& lower, const Bound& upper) {
  if (!lower.version || !upper.version) return true;
  const auto c = *lower.version <=> *upper.version;
  return c < 0 || (c == 0 && lower.inclusive && upper.inclusive);
}

}  // namespace detail

class ConstraintIntervalSet {
 public:
  ConstraintIntervalSet() = default;
  ConstraintIntervalSet(std::vector<Interval> releases, std::vector<Interval> prereleases,
                        std::string source_text)
      : intervals_(std::move(releases)),
        prerelease_intervals_(std::move(prereleases)),
        source_text_(std::move(source_text)) {}

  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::vector<Interval>& prerelease_intervals() const { return prerelease_intervals_; }
  const std::string& source_text() const { return source_text_; }

  bool empty() const { return intervals_.empty() && prerelease_intervals_.empty(); }

  bool contains(const Version& v) const {
    const auto& list = v.is_prerelease() ? prerelease_intervals_ : intervals_;
    return std::any_of(list.begin(), list.end(), [&](const Interval& i) { return i.contains(v); });
  }

  // Smallest admitted version. An exclusive prerelease lower bound x-p is
  // followed immediately by x-p.0.
  Version min_version() const {
    std::optional<Version> best;
    if (!intervals_.empty()) best = intervals_.front().lower;
    if (!prerelease_intervals_.empty()) {
      const Interval& first = prerelease_intervals_.front();
      Version candidate = first.lower;
      if (!first.lower_inclusive) candidate.prerelease.emplace_back("0");
      if (!best || candidate < *best) best = candidate;
    }
    if (!best) throw Error(ErrorCode::kEmptyRange, "empty interval set has no minimum");
    return *best;
  }

  bool admits_exactly_one() const {
    std::size_t count = 0;
    for (const auto& i : intervals_) count += i.is_point() ? 1 : 2;
    for (const auto& i : prerelease_intervals_) count += i.is_point() ? 1 : 2;
    return count == 1;
  }

  // Whether any admitted version lies in [lo, hi); hi absent means unbounded.
  bool intersects(const Version& lo, const std::optional<Version>& hi) const {
    const detail::Bound region_lo{lo, true};
    const detail::Bound region_hi{hi, false};
    for (const auto& i : intervals_) {
      // Release intervals are compared in half-open release form.
      const Version a = i.lower;
      const std::optional<Version> b = i.is_point() ? std::optional<Version>(a.next_patch()) : i.upper;
      const Version start = std::max(a, lo);
      std::optional<Version> end = b;
      if (hi && (!end || *hi < *end)) end = hi;
      if (!end || start < *end) return true;
    }
    for (const auto& i : prerelease_intervals_) {
      const auto lower = detail::max_lower(region_lo, {i.lower, i.lower_inclusive});
      const auto upper = detail::min_upper(region_hi, {i.upper, i.upper_inclusive});
      if (detail::non_empty(lower, upper)) return true;
    }
    return false;
  }

  friend bool operator==(const ConstraintIntervalSet& a, const ConstraintIntervalSet& b) {
    return a.intervals_ == b.intervals_ && a.prerelease_intervals_ == b.prerelease_intervals_;
  }

 private:
  std::vector<Interval> intervals_;
  std::vector<Interval> prerelease_intervals_;
  std::string source_text_;
};

namespace detail {

// A possibly-partial version from a range expression; absent components are
// wildcards ("1.x", "1", "*").
struct Partial {
  std::optional<std::uint64_t> major, minor, patch;
  std::vector<std::string> prerelease;

  int specified() const { return !major ? 0 : (!minor ? 1 : (!patch ? 2 : 3)); }
  Version filled() const {
    return Version{major.value_or(0), minor.value_or(0), patch.value_or(0), prerelease, {}};
  }
};

inline Version zero_prerelease(std::uint64_t major, std::uint64_t minor, std::uint64_t patch) {
  return Version{major, minor, patch, {"0"}, {}};
}

inline Partial parse_partial(std::string_view text, std::string_view source) {
  auto fail = [&]() {
    return Error(ErrorCode::kMalformedRange,
                 "'" + std::string(source) + "': bad version '" + std::string(text) + "'");
  };
  while (!text.empty() && (text.front() == 'v' || text.front() == 'V' || text.front() == '=')) {
    text.remove_prefix(1);
  }
  if (text.empty()) throw fail();
  Partial p;
  const std::size_t core_end = text.find_first_of("-+");
  const std::string_view core = text.substr(0, core_end);
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto dot = core.find('.', start);
    parts.push_back(core.substr(start, dot == std::string_view::npos ? core.npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (parts.size() > 3) throw fail();
  bool wildcard = false;
  std::array<std::optional<std::uint64_t>*, 3> slots{&p.major, &p.minor, &p.patch};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto part = parts[i];
    if (part == "x" || part == "X" || part == "*") {
      wildcard = true;
      continue;
    }
    auto n = parse_number(part);
    if (!n) throw fail();
    // Components after a wildcard are ignored, as npm does for "1.x.3".
    if (!wildcard) *slots[i] = *n;
  }
  if (core_end != std::string_view::npos) {
    std::string build;
    if (p.specified() != 3 || !parse_tail(text.substr(core_end), p.prerelease, build)) throw fail();
  }
  return p;
}

// Raw interval of one comparator set before release/prerelease split.
struct RawInterval {
  Bound lower;
  Bound upper;
  bool empty = false;
  std::vector<Version> prerelease_triples;

  void restrict(const Bound& lo, const Bound& hi) {
    lower = max_lower(lower, lo);
    upper = min_upper(upper, hi);
  }
  void note(const Partial& p) {
    if (!p.prerelease.empty()) prerelease_triples.push_back(p.filled().release());
  }
};

inline void apply_comparator(RawInterval& out, std::string_view op, const Partial& p) {
  const int x = p.specified();
  const std::uint64_t M = p.major.value_or(0);
  const std::uint64_t m = p.minor.value_or(0);
  const std::uint64_t pt = p.patch.value_or(0);
  const Version v = p.filled();
  const Bound none{};
  out.note(p);

  if (op.empty() || op == "=") {
    if (x == 0) return;
    if (x == 3) out.restrict({v, true}, {v, true});
    else if (x == 1) out.restrict({Version{M, 0, 0, {}, {}}, true}, {zero_prerelease(M + 1, 0, 0), false});
    else out.restrict({Version{M, m, 0, {}, {}}, true}, {zero_prerelease(M, m + 1, 0), false});
  } else if (op == "~" || op == "~>") {
    if (x == 0) return;
    if (x == 1) out.restrict({Version{M, 0, 0, {}, {}}, true}, {zero_prerelease(M + 1, 0, 0), false});
    else out.restrict({v, true}, {zero_prerelease(M, m + 1, 0), false});
  } else if (op == "^") {
    if (x == 0) return;
    if (x == 1) {
      out.restrict({Version{M, 0, 0, {}, {}}, true}, {zero_prerelease(M + 1, 0, 0), false});
    } else if (x == 2) {
      out.restrict({Version{M, m, 0, {}, {}}, true},
                   {M > 0 ? zero_prerelease(M + 1, 0, 0) : zero_prerelease(0, m + 1, 0), false});
    } else if (M > 0) {
      out.restrict({v, true}, {zero_prerelease(M + 1, 0, 0), false});
    } else if (m > 0) {
      out.restrict({v, true}, {zero_prerelease(0, m + 1, 0), false});
    } else {
      out.restrict({v, true}, {zero_prerelease(0, 0, pt + 1), false});
    }
  } else if (op == ">") {
    if (x == 0) out.empty = true;
    else if (x == 1) out.restrict({Version{M + 1, 0, 0, {}, {}}, true}, none);
    else if (x == 2) out.restrict({Version{M, m + 1, 0, {}, {}}, true}, none);
    else out.restrict({v, false}, none);
  } else if (op == ">=") {
    if (x > 0) out.restrict({v, true}, none);
  } else if (op == "<") {
    if (x == 0) out.empty = true;
    else if (x == 3) out.restrict(none, {v, false});
    else out.restrict(none, {zero_prerelease(M, m, 0), false});
  } else if (op == "<=") {
    if (x == 0) return;
    if (x == 3) out.restrict(none, {v, true});
    else if (x == 1) out.restrict(none, {zero_prerelease(M + 1, 0, 0), false});
    else out.restrict(none, {zero_prerelease(M, m + 1, 0), false});
  }
}

inline bool is_op_char(char c) { return c == '<' || c == '>' || c == '=' || c == '~' || c == '^'; }

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline RawInterval parse_comparator_set(std::string_view alt, std::string_view source) {
  RawInterval raw;
  const auto tokens = split_ws(alt);
  // Hyphen range "A - B".
  if (tokens.size() == 3 && tokens[1] == "-") {
    const Partial lo = parse_partial(tokens[0], source);
    const Partial hi = parse_partial(tokens[2], source);
    raw.note(lo);
    raw.note(hi);
    Bound lower{}, upper{};
    if (lo.specified() > 0) lower = {lo.filled(), true};
    const std::uint64_t M = hi.major.value_or(0), m = hi.minor.value_or(0);
    switch (hi.specified()) {
      case 0: break;
      case 1: upper = {zero_prerelease(M + 1, 0, 0), false}; break;
      case 2: upper = {zero_prerelease(M, m + 1, 0), false}; break;
      default: upper = {hi.filled(), true}; break;
    }
    raw.restrict(lower, upper);
    return raw;
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string_view tok = tokens[i];
    std::size_t op_len = 0;
    while (op_len < tok.size() && is_op_char(tok[op_len])) ++op_len;
    std::string_view op = tok.substr(0, op_len);
    std::string_view rest = tok.substr(op_len);
    if (rest.empty()) {
      // Operator separated from its version by whitespace (">= 1.2.3").
      if (op.empty() || i + 1 >= tokens.size()) {
        throw Error(ErrorCode::kMalformedRange, "'" + std::string(source) + "': dangling operator");
      }
      rest = tokens[++i];
    }
    if (op == "~>") op = "~";
    if (!(op.empty() || op == "=" || op == "~" || op == "^" || op == ">" || op == ">=" ||
          op == "<" || op == "<=")) {
      throw Error(ErrorCode::kMalformedRange,
                  "'" + std::string(source) + "': unknown operator '" + std::string(op) + "'");
    }
    apply_comparator(raw, op, parse_partial(rest, source));
  }
  return raw;
}

inline bool looks_unsupported(std::string_view t) {
  static constexpr std::string_view kPrefixes[] = {
      "git+", "git:", "github:", "gitlab:", "bitbucket:", "gist:", "file:", "link:",
      "npm:", "workspace:", "http:", "https:", "portal:", "patch:"};
  for (auto prefix : kPrefixes) {
    if (t.substr(0, prefix.size()) == prefix) return true;
  }
  if (t.find("://") != std::string_view::npos) return true;
  if (t.find('/') != std::string_view::npos) return true;  // "user/repo", paths, tarballs
  // Any other bare word is a dist-tag ("next", "beta"); only "latest" is known.
  const bool word = !t.empty() && std::isalpha(static_cast<unsigned char>(t.front())) &&
                    std::all_of(t.begin(), t.end(), [](char c) {
                      return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
                    });
  if (word && t != "x" && t != "X" && t != "latest") {
    const bool version_like = (t.front() == 'v' || t.front() == 'V') && t.size() > 1 &&
                              std::isdigit(static_cast<unsigned char>(t[1]));
    return !version_like;
  }
  return false;
}

inline std::vector<Interval> normalize_releases(std::vector<std::pair<Version, std::optional<Version>>> runs) {
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<Version, std::optional<Version>>> merged;
  for (auto& r : runs) {
    if (!merged.empty()) {
      auto& cur = merged.back();
      if (!cur.second || r.first <= *cur.second) {
        if (cur.second && (!r.second || *cur.second < *r.second)) cur.second = r.second;
        continue;
      }
    }
    merged.push_back(std::move(r));
  }
  std::vector<Interval> out;
  for (auto& [a, b] : merged) {
    if (b && *b == a.next_patch()) {
      out.push_back(Interval{a, true, a, true});
    } else {
      out.push_back(Interval{a, true, b, false});
    }
  }
  return out;
}

inline std::vector<Interval> normalize_prereleases(std::vector<Interval> list) {
  std::sort(list.begin(), list.end(), [](const Interval& a, const Interval& b) {
    const auto c = a.lower <=> b.lower;
    if (c != 0) return c < 0;
    return a.lower_inclusive && !b.lower_inclusive;
  });
  std::vector<Interval> out;
  for (auto& i : list) {
    if (!out.empty()) {
      Interval& cur = out.back();
      const auto c = i.lower <=> *cur.upper;
      if (c < 0 || (c == 0 && (i.lower_inclusive || cur.upper_inclusive))) {
        const auto u = *i.upper <=> *cur.upper;
        if (u > 0 || (u == 0 && i.upper_inclusive)) {
          cur.upper = i.upper;
          cur.upper_inclusive = i.upper_inclusive;
        }
        continue;
      }
    }
    out.push_back(std::move(i));
  }
  return out;
}

}  // namespace detail

// Parses an npm range expression into a normalized interval set.
inline ConstraintIntervalSet parse_range(std::string_view text) {
  const std::string source(text);
  const std::string_view t = detail::trim(text);
  if (detail::looks_unsupported(t)) {
    throw Error(ErrorCode::kUnsupportedConstraint, "'" + source + "' is not a registry version range");
  }

  std::vector<std::string_view> alternatives;
  std::size_t start = 0;
  for (;;) {
    const auto bar = t.find("||", start);
    alternatives.push_back(detail::trim(t.substr(start, bar == std::string_view::npos ? t.npos : bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 2;
  }

  std::vector<std::pair<Version, std::optional<Version>>> releases;
  std::vector<Interval> prereleases;
  for (const auto alt : alternatives) {
    detail::RawInterval raw;
    if (!(alt.empty() || alt == "latest")) raw = detail::parse_comparator_set(alt, source);
    if (raw.empty || !detail::non_empty(raw.lower, raw.upper)) continue;

    // Releases inside the raw interval, as a half-open run [a, b).
    Version a;
    if (raw.lower.version) {
      const Version& lo = *raw.lower.version;
      a = lo.is_prerelease() ? lo.release() : (raw.lower.inclusive ? lo : lo.next_patch());
    }
    std::optional<Version> b;
    if (raw.upper.version) {
      const Version& hi = *raw.upper.version;
      b = hi.is_prerelease() ? hi.release() : (raw.upper.inclusive ? hi.next_patch() : hi);
    }
    if (!b || a < *b) releases.emplace_back(std::move(a), std::move(b));

    // Prereleases of triples the comparators name explicitly.
    std::sort(raw.prerelease_triples.begin(), raw.prerelease_triples.end());
    raw.prerelease_triples.erase(std::unique(raw.prerelease_triples.begin(), raw.prerelease_triples.end()),
                                 raw.prerelease_triples.end());
    for (const auto& triple : raw.prerelease_triples) {
      const detail::Bound lo = detail::max_lower(
          raw.lower, {detail::zero_prerelease(triple.major, triple.minor, triple.patch), true});
      const detail::Bound hi = detail::min_upper(raw.upper, {triple, false});
      if (detail::non_empty(lo, hi)) {
        prereleases.push_back(Interval{*lo.version, lo.inclusive, hi.version, hi.inclusive});
      }
    }
  }

  ConstraintIntervalSet set(detail::normalize_releases(std::move(releases)),
                            detail::normalize_prereleases(std::move(prereleases)), source);
  if (set.empty()) throw Error(ErrorCode::kEmptyRange, "'" + source + "' admits no version");
  return set;
}

// Renders a set as a range expression that parses back to the same set.
inline std::string render(const ConstraintIntervalSet& set) {
  std::vector<std::string> parts;
  for (const auto& i : set.intervals()) {
    if (i.is_point()) {
      parts.push_back(to_string(i.lower));
    } else if (!i.upper) {
      parts.push_back(">=" + to_string(i.lower));
    } else {
      parts.push_back(">=" + to_string(i.lower) + " <" + to_string(*i.upper));
    }
  }
  for (const auto& i : set.prerelease_intervals()) {
    if (i.is_point()) {
      parts.push_back(to_string(i.lower));
    } else {
      parts.push_back((i.lower_inclusive ? ">=" : ">") + to_string(i.lower) + " " +
                      (i.upper_inclusive ? "<=" : "<") + to_string(*i.upper));
    }
  }
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += " || ";
    out += parts[k];
  }
  return out;
}

inline AdmissionProfile admission_profile(const ConstraintIntervalSet& c) {
  if (c.empty()) throw Error(ErrorCode::kEmptyRange, "admission profile of an empty set");
  const Version m = c.min_version();
  AdmissionProfile p;
  p.pinned = c.admits_exactly_one();
  p.admits_patch = c.intersects(Version{m.major, m.minor, m.patch + 1, {}, {}},
                                Version{m.major, m.minor + 1, 0, {}, {}});
  p.admits_minor = c.intersects(Version{m.major, m.minor + 1, 0, {}, {}},
                                Version{m.major + 1, 0, 0, {}, {}});
  p.admits_major = c.intersects(Version{m.major + 1, 0, 0, {}, {}}, std::nullopt);
  return p;
}

inline const Version& first_stable() {
  static const Version kOne{1, 0, 0, {}, {}};
  return kOne;
}

// Post-1.0.0 sets: any major freedom is permissive, minor freedom is
// balanced, patch-only or none is restrictive. Pre-1.0.0 sets: only a pin is
// balanced; everything else is permissive.
inline UpdateStrategy classify(const ConstraintIntervalSet& c) {
  const AdmissionProfile p = admission_profile(c);
  if (c.min_version() >= first_stable()) {
    if (p.admits_major) return UpdateStrategy::kPermissive;
    if (p.admits_minor) return UpdateStrategy::kBalanced;
    return UpdateStrategy::kRestrictive;
  }
  return p.pinned ? UpdateStrategy::kBalanced : UpdateStrategy::kPermissive;
}

// True when the set admits versions on both sides of 1.0.0 and was therefore
// classified by its pre-1.0.0 minimum alone.
inline bool spans_first_stable(const ConstraintIntervalSet& c) {
  return c.min_version() < first_stable() && c.intersects(first_stable(), std::nullopt);
}

inline UpdateStrategy classify(std::string_view range_text) { return classify(parse_range(range_text)); }

}  // namespace depstrat::semver
