// Copyright 2026 The pbekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <random>

#include "pbekit/errors.hpp"
#include "pbekit/rewrite.hpp"
#include "pbekit/text.hpp"

using namespace pbekit;

namespace {

// Plain recursive edit distance over scalar values, memoized.
std::size_t naive_edit(const std::u32string& a, const std::u32string& b, std::size_t i,
                       std::size_t j, std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const auto key = std::make_pair(i, j);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::size_t best = naive_edit(a, b, i + 1, j + 1, memo) + (a[i] == b[j] ? 0 : 1);
  best = std::min(best, naive_edit(a, b, i + 1, j, memo) + 1);
  best = std::min(best, naive_edit(a, b, i, j + 1, memo) + 1);
  return memo[key] = best;
}

}  // namespace

TEST_CASE("apply_rule scans left to right without overlap or rescanning") {
  CHECK(apply_rule({"c", "wa"}, "wcw") == "wwaw");
  CHECK(apply_rule({"aa", "b"}, "aaa") == "ba");
  CHECK(apply_rule({"a", "aa"}, "aba") == "aabaa");
  CHECK(apply_rule({"ab", "ba"}, "aab") == "aba");
  CHECK(apply_rule({"x", ""}, "xaxx") == "a");
  CHECK(apply_rule({"q", "r"}, "") == "");
  CHECK_THROWS_AS(apply_rule({"", "z"}, "abc"), PreconditionError);
}

TEST_CASE("apply_rule handles multi-byte symbols") {
  CHECK(apply_rule({"é", "e"}, "éaé") == "eae");
  CHECK(text::length("éaé") == 3);
}

TEST_CASE("apply_cascade worked example") {
  const Cascade c = {{"bc", "dc"}, {"ad", "ed"}};
  CHECK(apply_cascade(c, {"abc", "ebc", "aba"}) == StringVector{"edc", "edc", "aba"});
  const auto trace = trace_cascade(c, {"abc", "ebc", "aba"});
  REQUIRE(trace.size() == 3);
  CHECK(trace[0] == StringVector{"abc", "ebc", "aba"});
  CHECK(trace[1] == StringVector{"adc", "edc", "aba"});
  CHECK(trace[2] == StringVector{"edc", "edc", "aba"});
  CHECK(apply_cascade({}, {"ab"}) == StringVector{"ab"});
}

TEST_CASE("occurrence_count matches the non-overlapping scanner") {
  CHECK(occurrence_count("aa", "aaaa") == 2);
  CHECK(occurrence_count("aa", "aaa") == 1);
  CHECK(occurrence_count("ab", "xabyab") == 2);
  CHECK(occurrence_count("z", "abc") == 0);
}

TEST_CASE("string_sets are deduplicated and non-empty") {
  const auto s = string_sets("aba");
  CHECK(s.substrings == std::set<std::string>{"a", "b", "ab", "ba", "aba"});
  CHECK(s.prefixes == std::set<std::string>{"a", "ab", "aba"});
  CHECK(s.suffixes == std::set<std::string>{"a", "ba", "aba"});
  CHECK(string_sets("").substrings.empty());
  CHECK(string_sets("é").substrings == std::set<std::string>{"é"});
}

TEST_CASE("levenshtein frozen values") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("zzb", "ac") == 3);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("é", "e") == 1);
  CHECK(levenshtein(StringVector{"ab", "x"}, StringVector{"ac", "xy"}) == 2);
  CHECK_THROWS_AS(levenshtein(StringVector{"a"}, StringVector{"a", "b"}), PreconditionError);
}

TEST_CASE("levenshtein agrees with a recursive reference") {
  std::mt19937_64 gen(11);
  const std::u32string sym = U"abé";
  for (int trial = 0; trial < 500; ++trial) {
    std::u32string a, b;
    const std::size_t la = gen() % 7, lb = gen() % 7;
    for (std::size_t k = 0; k < la; ++k) a += sym[gen() % sym.size()];
    for (std::size_t k = 0; k < lb; ++k) b += sym[gen() % sym.size()];
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    CHECK(levenshtein(text::encode(a), text::encode(b)) == naive_edit(a, b, 0, 0, memo));
  }
}

TEST_CASE("rule helpers") {
  const RewriteRule r{"ab", "c"};
  CHECK(r.reversed() == RewriteRule{"c", "ab"});
  CHECK(r.complexity() == 3);
  CHECK(complexity(Cascade{{"ab", "c"}, {"a", ""}}) == 4);
  CHECK(to_string(r) == "replace('ab','c')");
  CHECK(to_string(Cascade{{"a", "b"}, {"b", ""}}) == "[replace('a','b'), replace('b','')]");
}

TEST_CASE("alphabet") {
  const auto a = Alphabet::from_utf8("abé");
  CHECK(a.size() == 3);
  CHECK(a.symbol(2) == "é");
  CHECK(a.to_utf8() == "abé");
  CHECK_THROWS_AS(Alphabet::from_utf8("aba"), PreconditionError);
  CHECK_THROWS_AS(Alphabet::from_utf8(""), PreconditionError);
}

TEST_CASE("text decoding replaces malformed bytes") {
  CHECK(text::decode("a\xffz") == std::u32string{U'a', U'�', U'z'});
  CHECK(text::boundaries("aé") == std::vector<std::size_t>{0, 1, 3});
}
