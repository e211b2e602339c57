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

// Test-only reimplementation of the npm "satisfies" check. It desugars range
// text into primitive comparators the way node-semver does (string rewriting
// of tilde, caret, x-range and hyphen forms) and then applies node-semver's
// comparator-set test, including its prerelease gate. It shares no code with
// depstrat::semver.

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

struct V {
  std::uint64_t M = 0, m = 0, p = 0;
  std::vector<std::string> pre;
};

inline bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

inline int cmp_ids(const std::string& a, const std::string& b) {
  const bool na = all_digits(a), nb = all_digits(b);
  if (na && nb) {
    const auto x = std::stoull(a), y = std::stoull(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (na) return -1;
  if (nb) return 1;
  return a < b ? -1 : (a > b ? 1 : 0);
}

inline int cmp(const V& a, const V& b) {
  if (a.M != b.M) return a.M < b.M ? -1 : 1;
  if (a.m != b.m) return a.m < b.m ? -1 : 1;
  if (a.p != b.p) return a.p < b.p ? -1 : 1;
  if (a.pre.empty() && b.pre.empty()) return 0;
  if (a.pre.empty()) return 1;
  if (b.pre.empty()) return -1;
  for (std::size_t i = 0; i < a.pre.size() && i < b.pre.size(); ++i) {
    if (int c = cmp_ids(a.pre[i], b.pre[i])) return c;
  }
  if (a.pre.size() == b.pre.size()) return 0;
  return a.pre.size() < b.pre.size() ? -1 : 1;
}

// Parsed "xr(.xr(.xr(-pre)?)?)?" with wildcard markers kept as text.
struct Loose {
  std::string M = "x", m = "x", p = "x", pr;
};

inline bool is_x(const std::string& s) { return s == "x" || s == "X" || s == "*" || s.empty(); }

inline Loose parse_loose(std::string s) {
  while (!s.empty() && (s[0] == 'v' || s[0] == '=')) s.erase(0, 1);
  Loose r;
  auto plus = s.find('+');
  if (plus != std::string::npos) s = s.substr(0, plus);
  std::string core = s;
  auto dash = s.find('-');
  if (dash != std::string::npos) {
    core = s.substr(0, dash);
    r.pr = s.substr(dash + 1);
  }
  std::vector<std::string> parts;
  std::stringstream ss(core);
  std::string item;
  while (std::getline(ss, item, '.')) parts.push_back(item);
  if (parts.size() > 0) r.M = parts[0];
  if (parts.size() > 1) r.m = parts[1];
  if (parts.size() > 2) r.p = parts[2];
  return r;
}

inline V make(const std::string& M, const std::string& m, const std::string& p,
              const std::string& pr = "") {
  V v{std::stoull(M), std::stoull(m), std::stoull(p), {}};
  if (!pr.empty()) {
    std::stringstream ss(pr);
    std::string id;
    while (std::getline(ss, id, '.')) v.pre.push_back(id);
  }
  return v;
}

inline std::string inc(const std::string& n) { return std::to_string(std::stoull(n) + 1); }

struct Comparator {
  std::string op;  // "", "<", "<=", ">", ">=", "=" ; "any" matches everything
  V v;
};

// Primitive comparator text like ">=1.2.3-0" or "<2.0.0-0".
inline Comparator prim(const std::string& op, const std::string& M, const std::string& m,
                       const std::string& p, const std::string& pr = "") {
  return Comparator{op, make(M, m, p, pr)};
}

inline void desugar(std::string op, const Loose& l, std::vector<Comparator>& out, bool& never) {
  const bool xM = is_x(l.M), xm = xM || is_x(l.m), xp = xm || is_x(l.p);
  if (op == "~" || op == "~>") {
    if (xM) return;
    if (xm) { out.push_back(prim(">=", l.M, "0", "0")); out.push_back(prim("<", inc(l.M), "0", "0", "0")); return; }
    if (xp) { out.push_back(prim(">=", l.M, l.m, "0")); out.push_back(prim("<", l.M, inc(l.m), "0", "0")); return; }
    out.push_back(prim(">=", l.M, l.m, l.p, l.pr));
    out.push_back(prim("<", l.M, inc(l.m), "0", "0"));
    return;
  }
  if (op == "^") {
    if (xM) return;
    if (xm) { out.push_back(prim(">=", l.M, "0", "0")); out.push_back(prim("<", inc(l.M), "0", "0", "0")); return; }
    if (xp) {
      out.push_back(prim(">=", l.M, l.m, "0"));
      if (l.M == "0") out.push_back(prim("<", l.M, inc(l.m), "0", "0"));
      else out.push_back(prim("<", inc(l.M), "0", "0", "0"));
      return;
    }
    out.push_back(prim(">=", l.M, l.m, l.p, l.pr));
    if (std::stoull(l.M) == 0) {
      if (std::stoull(l.m) == 0) out.push_back(prim("<", l.M, l.m, inc(l.p), "0"));
      else out.push_back(prim("<", l.M, inc(l.m), "0", "0"));
    } else {
      out.push_back(prim("<", inc(l.M), "0", "0", "0"));
    }
    return;
  }
  // x-range handling for plain and relational operators.
  if (op == "=" && xp) op = "";
  if (xM) {
    if (op == ">" || op == "<") never = true;
    return;
  }
  if (!op.empty() && xp) {
    std::string M = l.M, m = xm ? "0" : l.m, p = "0", pr;
    if (op == ">") {
      op = ">=";
      if (xm) { M = inc(M); m = "0"; } else { m = inc(m); }
    } else if (op == "<=") {
      op = "<";
      if (xm) { M = inc(M); } else { m = inc(m); }
    }
    if (op == "<") pr = "0";
    out.push_back(prim(op, M, m, p, pr));
    return;
  }
  if (xm) { out.push_back(prim(">=", l.M, "0", "0")); out.push_back(prim("<", inc(l.M), "0", "0", "0")); return; }
  if (xp) { out.push_back(prim(">=", l.M, l.m, "0")); out.push_back(prim("<", l.M, inc(l.m), "0", "0")); return; }
  out.push_back(prim(op.empty() ? "=" : op, l.M, l.m, l.p, l.pr));
}

struct ComparatorSet {
  std::vector<Comparator> comparators;
  bool never = false;
};

inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

inline std::vector<ComparatorSet> parse(const std::string& text) {
  std::vector<ComparatorSet> sets;
  std::size_t start = 0;
  for (;;) {
    const auto bar = text.find("||", start);
    const std::string alt = text.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
    ComparatorSet set;
    auto w = words(alt);
    if (w.size() == 3 && w[1] == "-") {
      const Loose a = parse_loose(w[0]), b = parse_loose(w[2]);
      if (!is_x(a.M)) {
        set.comparators.push_back(prim(">=", a.M, is_x(a.m) ? "0" : a.m,
                                       is_x(a.m) || is_x(a.p) ? "0" : a.p, is_x(a.p) ? "" : a.pr));
      }
      if (!is_x(b.M)) {
        if (is_x(b.m)) set.comparators.push_back(prim("<", inc(b.M), "0", "0", "0"));
        else if (is_x(b.p)) set.comparators.push_back(prim("<", b.M, inc(b.m), "0", "0"));
        else set.comparators.push_back(prim("<=", b.M, b.m, b.p, b.pr));
      }
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) {
        std::string tok = w[i];
        std::size_t k = 0;
        while (k < tok.size() && std::string("<>=~^").find(tok[k]) != std::string::npos) ++k;
        std::string op = tok.substr(0, k), rest = tok.substr(k);
        if (rest.empty() && i + 1 < w.size()) rest = w[++i];
        if (rest == "latest") continue;
        desugar(op, parse_loose(rest), set.comparators, set.never);
      }
    }
    sets.push_back(set);
    if (bar == std::string::npos) break;
    start = bar + 2;
  }
  return sets;
}

inline bool test_comparator(const Comparator& c, const V& v) {
  const int r = cmp(v, c.v);
  if (c.op == "=" || c.op.empty()) return r == 0;
  if (c.op == ">") return r > 0;
  if (c.op == ">=") return r >= 0;
  if (c.op == "<") return r < 0;
  if (c.op == "<=") return r <= 0;
  return false;
}

inline bool satisfies(const std::string& range, const V& v) {
  for (const auto& set : parse(range)) {
    if (set.never) continue;
    bool ok = true;
    for (const auto& c : set.comparators) ok = ok && test_comparator(c, v);
    if (!ok) continue;
    if (v.pre.empty()) return true;
    for (const auto& c : set.comparators) {
      if (!c.v.pre.empty() && c.v.M == v.M && c.v.m == v.m && c.v.p == v.p) return true;
    }
  }
  return false;
}

}  // namespace oracle
