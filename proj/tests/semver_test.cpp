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

#include "depstrat/semver.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "depstrat/rng.hpp"
#include "oracles/npm_satisfies.hpp"

namespace depstrat::semver {
namespace {

using S = UpdateStrategy;

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInternal;
}

TEST(ParseVersion, Basic) {
  const Version v = parse_version("1.2.3");
  EXPECT_EQ(v.major, 1u);
  EXPECT_EQ(v.minor, 2u);
  EXPECT_EQ(v.patch, 3u);
  EXPECT_TRUE(v.prerelease.empty());

  const Version pre = parse_version("2.3.4-beta.1");
  EXPECT_EQ(pre.major, 2u);
  EXPECT_EQ(pre.prerelease, (std::vector<std::string>{"beta", "1"}));

  EXPECT_EQ(parse_version("v1.0.0"), make_version(1, 0, 0));
}

TEST(ParseVersion, RejectsPartialAndGarbage) {
  EXPECT_EQ(error_of([] { parse_version("1.2"); }), ErrorCode::kMalformedVersion);
  EXPECT_EQ(error_of([] { parse_version("1.a.3"); }), ErrorCode::kMalformedVersion);
  EXPECT_EQ(error_of([] { parse_version("1.2.3-"); }), ErrorCode::kMalformedVersion);
  EXPECT_EQ(error_of([] { parse_version("1.2.3-beta..1"); }), ErrorCode::kMalformedVersion);
  EXPECT_EQ(error_of([] { parse_version("1.2.3.4"); }), ErrorCode::kMalformedVersion);
}

TEST(VersionOrder, SemverPrecedence) {
  const std::vector<std::string> ascending = {
      "1.0.0-0", "1.0.0-alpha", "1.0.0-alpha.1", "1.0.0-alpha.beta", "1.0.0-beta",
      "1.0.0-beta.2", "1.0.0-beta.11", "1.0.0-rc.1", "1.0.0", "1.0.1", "1.1.0", "2.0.0"};
  for (std::size_t i = 0; i + 1 < ascending.size(); ++i) {
    EXPECT_LT(parse_version(ascending[i]), parse_version(ascending[i + 1]))
        << ascending[i] << " < " << ascending[i + 1];
  }
  EXPECT_EQ(parse_version("1.0.0+build.5"), parse_version("1.0.0+other"));
}

TEST(ParseRange, CaretAndTilde) {
  const auto caret = parse_range("^1.2.3");
  ASSERT_EQ(caret.intervals().size(), 1u);
  EXPECT_EQ(caret.intervals()[0], (Interval{make_version(1, 2, 3), true, make_version(2, 0, 0), false}));

  const auto tilde = parse_range("~2.3.4");
  ASSERT_EQ(tilde.intervals().size(), 1u);
  EXPECT_EQ(tilde.intervals()[0], (Interval{make_version(2, 3, 4), true, make_version(2, 4, 0), false}));

  // The two bounds quoted for the caret form, shifted by one major.
  const auto caret234 = parse_range("^2.3.4");
  EXPECT_EQ(caret234.intervals()[0].lower, make_version(2, 3, 4));
  EXPECT_EQ(*caret234.intervals()[0].upper, make_version(3, 0, 0));
}

TEST(ParseRange, UnionOfPoints) {
  const auto set = parse_range("1.2.3 || 3.0.0");
  ASSERT_EQ(set.intervals().size(), 2u);
  EXPECT_EQ(set.intervals()[0], (Interval{make_version(1, 2, 3), true, make_version(1, 2, 3), true}));
  EXPECT_EQ(set.intervals()[1], (Interval{make_version(3, 0, 0), true, make_version(3, 0, 0), true}));
}

TEST(ParseRange, Errors) {
  EXPECT_EQ(error_of([] { parse_range("git+https://github.com/a/b.git"); }),
            ErrorCode::kUnsupportedConstraint);
  EXPECT_EQ(error_of([] { parse_range("file:../lib"); }), ErrorCode::kUnsupportedConstraint);
  EXPECT_EQ(error_of([] { parse_range("user/repo#v1"); }), ErrorCode::kUnsupportedConstraint);
  EXPECT_EQ(error_of([] { parse_range("next"); }), ErrorCode::kUnsupportedConstraint);
  EXPECT_EQ(error_of([] { parse_range(">2.0.0 <1.0.0"); }), ErrorCode::kEmptyRange);
  EXPECT_EQ(error_of([] { parse_range(">*"); }), ErrorCode::kEmptyRange);
  EXPECT_EQ(error_of([] { parse_range(">=1.2.3 <"); }), ErrorCode::kMalformedRange);
  EXPECT_EQ(error_of([] { parse_range("1.2.3.4"); }), ErrorCode::kMalformedRange);
  EXPECT_EQ(error_of([] { parse_range("!1.2.3"); }), ErrorCode::kMalformedRange);
}

TEST(ParseRange, BuildMetadataIgnored) {
  EXPECT_EQ(parse_range("1.2.3+build.7"), parse_range("1.2.3"));
}

TEST(ParseRange, WhitespaceAfterOperator) {
  EXPECT_EQ(parse_range(">= 1.2.3 < 2"), parse_range(">=1.2.3 <2.0.0"));
}

TEST(AdmissionProfile, Examples) {
  EXPECT_EQ(admission_profile(parse_range("^1.2.3")), (AdmissionProfile{false, true, true, false}));
  EXPECT_EQ(admission_profile(parse_range("1.2.3")), (AdmissionProfile{true, false, false, false}));
  EXPECT_EQ(admission_profile(parse_range("1.2.3 || 3.0.0")),
            (AdmissionProfile{false, false, false, true}));
}

// Brute-force membership over every release with components <= 4 decides
// which update regions a gapped union reaches.
TEST(AdmissionProfile, GappedUnionMatchesEnumeration) {
  const auto set = parse_range("1.2.3 || 3.0.0");
  const Version m = make_version(1, 2, 3);
  bool patch = false, minor = false, major = false;
  int admitted = 0;
  for (std::uint64_t a = 0; a <= 4; ++a) {
    for (std::uint64_t b = 0; b <= 4; ++b) {
      for (std::uint64_t c = 0; c <= 4; ++c) {
        const oracle::V ov{a, b, c, {}};
        if (!oracle::satisfies("1.2.3 || 3.0.0", ov)) continue;
        ++admitted;
        const Version v = make_version(a, b, c);
        EXPECT_TRUE(set.contains(v));
        if (v > m && v < make_version(1, 3, 0)) patch = true;
        if (v >= make_version(1, 3, 0) && v < make_version(2, 0, 0)) minor = true;
        if (v >= make_version(2, 0, 0)) major = true;
      }
    }
  }
  EXPECT_EQ(admitted, 2);
  EXPECT_EQ(admission_profile(set), (AdmissionProfile{false, patch, minor, major}));
}

TEST(Classify, TaxonomyExamples) {
  EXPECT_EQ(classify("^1.2.3"), S::kBalanced);
  EXPECT_EQ(classify("1.x.x"), S::kBalanced);
  EXPECT_EQ(classify("~1.2.3"), S::kRestrictive);
  EXPECT_EQ(classify("1.2.x"), S::kRestrictive);
  EXPECT_EQ(classify("1.2.3"), S::kRestrictive);
  EXPECT_EQ(classify("*"), S::kPermissive);
  EXPECT_EQ(classify(">=1.2.3"), S::kPermissive);
  EXPECT_EQ(classify("latest"), S::kPermissive);
  EXPECT_EQ(classify("0.2.3"), S::kBalanced);
  EXPECT_EQ(classify("^0.2.3"), S::kPermissive);
  EXPECT_EQ(classify("~0.2.3"), S::kPermissive);
}

TEST(Classify, ExclusiveLowerBound) {
  // min_version is the successor release; status is unchanged by it.
  const auto set = parse_range(">1.2.3");
  EXPECT_EQ(set.min_version(), make_version(1, 2, 4));
  EXPECT_EQ(classify(set), S::kPermissive);
  EXPECT_EQ(classify(">0.9.9 <0.9.11"), S::kBalanced);  // only 0.9.10
  EXPECT_EQ(classify(">1.0.0-rc.1 <1.0.0"), S::kPermissive);
  EXPECT_EQ(parse_range(">1.0.0-rc.1 <1.0.0").min_version(), parse_version("1.0.0-rc.1.0"));
}

TEST(Classify, MixedPreAndPostStable) {
  const auto set = parse_range("0.9.0 - 1.5.0");
  EXPECT_EQ(classify(set), S::kPermissive);
  EXPECT_TRUE(spans_first_stable(set));
  EXPECT_FALSE(spans_first_stable(parse_range("^1.0.0")));
}

// Small random grammar over versions with components in [0, 5].
std::string random_partial(Rng& rng, bool allow_pre) {
  const int parts = 1 + static_cast<int>(uniform_index(rng, 3));
  std::string out;
  for (int i = 0; i < parts; ++i) {
    if (i) out += ".";
    if (uniform_index(rng, 8) == 0) {
      out += "x";
    } else {
      out += std::to_string(uniform_index(rng, 6));
    }
  }
  if (allow_pre && parts == 3 && out.find('x') == std::string::npos && uniform_index(rng, 5) == 0) {
    static const char* kTags[] = {"-alpha", "-beta.1", "-0", "-rc.2"};
    out += kTags[uniform_index(rng, 4)];
  }
  return out;
}

std::string random_range(Rng& rng) {
  static const char* kOps[] = {"", "=", "^", "~", ">", ">=", "<", "<="};
  const int alts = 1 + static_cast<int>(uniform_index(rng, 3));
  std::string out;
  for (int a = 0; a < alts; ++a) {
    if (a) out += " || ";
    if (uniform_index(rng, 6) == 0) {
      out += random_partial(rng, true) + " - " + random_partial(rng, true);
      continue;
    }
    const int comps = 1 + static_cast<int>(uniform_index(rng, 2));
    for (int c = 0; c < comps; ++c) {
      if (c) out += " ";
      out += kOps[uniform_index(rng, 8)];
      out += random_partial(rng, true);
    }
  }
  return out;
}

std::vector<std::string> fixed_corpus() {
  return {"^1.2.3", "~1.2.3", "1.x", "1.2.x", "*", "", "latest", "x", ">=1.2.3", ">1.2.3",
          "<2.0.0", "<=2.0.0", "1.2.3 - 2.3.4", "1.2 - 2", "^0.2.3", "^0.0.3", "^0.0", "^0.x",
          "~0", "~1", "~1.2", "^1.2.x", "1.2.3 || 3.0.0", ">=1.0.0 <1.2.0 || >=2.0.0",
          "^1.2.3-beta.2", "~1.2.3-beta.2", ">=1.2.3-alpha <1.2.3", "1.2.3-rc.1",
          "^0.0.3-beta", ">1", ">1.2", "<1.2", "<=1.2", "<=1", "=1.2", "1.2.3 - 2.x",
          ">=0.9.0 <1.5.0", "~> 1.2", "> 1.2.3 < 3", "^4.0.0 || ^5.0.0"};
}

std::vector<oracle::V> probe_versions() {
  std::vector<oracle::V> out;
  for (std::uint64_t a = 0; a <= 5; ++a) {
    for (std::uint64_t b = 0; b <= 5; ++b) {
      for (std::uint64_t c = 0; c <= 5; ++c) {
        out.push_back({a, b, c, {}});
        out.push_back({a, b, c, {"alpha"}});
        out.push_back({a, b, c, {"beta", "1"}});
        out.push_back({a, b, c, {"rc", "2"}});
      }
    }
  }
  return out;
}

Version to_version(const oracle::V& v) { return Version{v.M, v.m, v.p, v.pre, {}}; }

void expect_membership_agrees(const std::string& range) {
  ConstraintIntervalSet set;
  try {
    set = parse_range(range);
  } catch (const Error& e) {
    // An empty range must be empty for the oracle too.
    ASSERT_EQ(e.code(), ErrorCode::kEmptyRange) << range << ": " << e.what();
    for (const auto& v : probe_versions()) {
      ASSERT_FALSE(oracle::satisfies(range, v)) << range;
    }
    return;
  }
  for (const auto& v : probe_versions()) {
    ASSERT_EQ(set.contains(to_version(v)), oracle::satisfies(range, v))
        << "range '" << range << "' version " << to_string(to_version(v)) << " rendered as '"
        << render(set) << "'";
  }
}

TEST(Properties, MembershipMatchesOracleOnFixedCorpus) {
  for (const auto& r : fixed_corpus()) expect_membership_agrees(r);
}

TEST(Properties, MembershipMatchesOracleOnRandomRanges) {
  Rng rng(20200112);
  for (int i = 0; i < 400; ++i) expect_membership_agrees(random_range(rng));
}

TEST(Properties, NormalizationIsIdempotent) {
  Rng rng(7);
  std::vector<std::string> corpus = fixed_corpus();
  for (int i = 0; i < 400; ++i) corpus.push_back(random_range(rng));
  for (const auto& r : corpus) {
    ConstraintIntervalSet set;
    try {
      set = parse_range(r);
    } catch (const Error&) {
      continue;
    }
    const auto again = parse_range(render(set));
    EXPECT_EQ(again, set) << r << " -> " << render(set) << " -> " << render(again);
    EXPECT_EQ(render(again), render(set));
  }
}

TEST(Properties, AlternativeOrderDoesNotMatter) {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> alts;
    const int n = 2 + static_cast<int>(uniform_index(rng, 2));
    for (int k = 0; k < n; ++k) alts.push_back(random_partial(rng, false));
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " || ^" : "^") + v[k];
      return s;
    };
    const std::string forward = join(alts);
    std::reverse(alts.begin(), alts.end());
    const std::string backward = join(alts);
    EXPECT_EQ(classify(forward), classify(backward)) << forward;
    EXPECT_EQ(parse_range(forward), parse_range(backward)) << forward;
  }
}

TEST(Properties, CaretTildeAndPointRules) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto M = uniform_index(rng, 30), m = uniform_index(rng, 30), p = uniform_index(rng, 30);
    const std::string v = std::to_string(M) + "." + std::to_string(m) + "." + std::to_string(p);
    if (M >= 1) {
      EXPECT_EQ(classify("^" + v), S::kBalanced) << v;
      EXPECT_EQ(classify("~" + v), S::kRestrictive) << v;
      EXPECT_EQ(classify(v), S::kRestrictive) << v;
    } else {
      EXPECT_EQ(classify(v), S::kBalanced) << v;
    }
  }
}

}  // namespace
}  // namespace depstrat::semver
