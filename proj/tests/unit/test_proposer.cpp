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

#include <cmath>
#include <set>

#include "pbekit/errors.hpp"
#include "pbekit/io.hpp"
#include "pbekit/proposer.hpp"
#include "pbekit/text.hpp"

using namespace pbekit;

namespace {

GeneratorParams small(std::uint64_t seed, std::size_t D) {
  GeneratorParams p = lite_params(seed);
  p.D = D;
  return p;
}

}  // namespace

TEST_CASE("lite defaults") {
  const auto p = lite_params(4);
  CHECK(p.n == 5);
  CHECK(p.alphabet.size() == 17);
  CHECK(p.alphabet.to_utf8() == "abcdefghijkuvwxyz");
  CHECK(p.l_min == 2);
  CHECK(p.l_max == 6);
  CHECK(p.L_min == 2);
  CHECK(p.L_max == 5);
  CHECK(p.s_min == 1);
  CHECK(p.s_max == 3);
  CHECK(p.D == 1008);
  CHECK(p.tau == 100000);
  CHECK(p.seed == 4);
  CHECK(p.quota_mode == QuotaMode::Category);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("params validation") {
  auto bad = [](auto mutate) {
    GeneratorParams p = lite_params(1);
    mutate(p);
    return p;
  };
  CHECK_THROWS_AS(bad([](GeneratorParams& p) { p.n = 0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](GeneratorParams& p) { p.l_min = 0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](GeneratorParams& p) { p.l_min = 7; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](GeneratorParams& p) { p.L_min = 6; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](GeneratorParams& p) { p.s_min = 0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](GeneratorParams& p) { p.D = 0; }).validate(), ValidationError);
  CHECK_THROWS_AS(parse_quota_mode("balanced"), ValidationError);
  CHECK(parse_quota_mode("both") == QuotaMode::Both);
  CHECK(parse_post_patience_policy("accept-any") == PostPatiencePolicy::AcceptAny);
}

TEST_CASE("sample_rule forced draw") {
  GeneratorParams p = lite_params(1);
  p.alphabet = Alphabet::from_utf8("z");
  p.s_min = p.s_max = 2;
  Rng rng(0);
  const auto r = sample_rule({"zzz"}, p, rng);
  REQUIRE(r.has_value());
  CHECK(r->source == "zz");
  CHECK(r->target == "zz");
}

TEST_CASE("sample_rule draws sources from the intermediate vector") {
  GeneratorParams p = lite_params(1);
  Rng rng(2);
  const StringVector iv = {"abc", "kk"};
  std::set<std::string> subs;
  for (const auto& s : iv)
    for (const auto& x : string_sets(s).substrings) subs.insert(x);
  for (int t = 0; t < 200; ++t) {
    const auto r = sample_rule(iv, p, rng);
    REQUIRE(r.has_value());
    CHECK(subs.count(r->source) == 1);
    CHECK(text::length(r->target) >= 1);
    CHECK(text::length(r->target) <= 3);
  }
  p.s_min = 4;
  p.s_max = 4;
  CHECK_FALSE(sample_rule(iv, p, rng).has_value());
}

TEST_CASE("sample_input_vector respects bounds") {
  const auto p = lite_params(3);
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto v = sample_input_vector(p, rng);
    REQUIRE(v.size() == 5);
    for (const auto& s : v) {
      CHECK(s.size() >= 2);
      CHECK(s.size() <= 6);
      for (char ch : s) CHECK(p.alphabet.symbols().find(char32_t(ch)) != std::u32string::npos);
    }
  }
}

TEST_CASE("small category-balanced dataset") {
  const auto p = small(21, 64);
  const Dataset ds = generate_dataset(p);
  REQUIRE(ds.instances.size() == 64);
  std::array<int, kCategoryCount> per{};
  std::set<std::string> sigs, ids;
  for (const auto& inst : ds.instances) {
    ++per[inst.category.index()];
    CHECK(check_instance(inst, p).empty());
    sigs.insert(dedup_signature(inst));
    ids.insert(inst.id);
  }
  for (int c : per) CHECK(c == 4);
  CHECK(sigs.size() == 64);
  CHECK(ids.size() == 64);
  CHECK(ds.instances.front().id == "pbe-00000");
  CHECK(ds.stats.acceptances == 64);
  CHECK(ds.stats.attempts >= 64);
  CHECK_FALSE(ds.stats.patience_exhausted);
  CHECK(kl_balance_report(ds).kl_nats == 0.0);
}

TEST_CASE("generation is reproducible from the seed") {
  const auto a = io::dump(io::to_json(generate_dataset(small(8, 32))));
  const auto b = io::dump(io::to_json(generate_dataset(small(8, 32))));
  const auto c = io::dump(io::to_json(generate_dataset(small(9, 32))));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("length-balanced mode") {
  GeneratorParams p = small(5, 40);
  p.quota_mode = QuotaMode::Length;
  const Dataset ds = generate_dataset(p);
  REQUIRE(ds.instances.size() == 40);
  const auto rep = kl_balance_report(ds);
  for (std::size_t L = 2; L <= 5; ++L) CHECK(rep.length_counts.at(L) == 10);
}

TEST_CASE("step limit stops generation") {
  GeneratorParams p = small(5, 1008);
  p.max_steps = 50;
  const Dataset ds = generate_dataset(p);
  CHECK(ds.stats.step_limit_hit);
  CHECK(ds.stats.attempts == 50);
  CHECK(ds.instances.size() < 1008);
}

TEST_CASE("zero patience with accept-any fills without quotas") {
  GeneratorParams p = small(6, 48);
  p.tau = 0;
  p.post_patience_policy = PostPatiencePolicy::AcceptAny;
  const Dataset ds = generate_dataset(p);
  CHECK(ds.instances.size() == 48);
  CHECK(ds.stats.patience_exhausted);
  CHECK(ds.stats.rejected_quota == 0);
}

TEST_CASE("check_instance catches tampering") {
  const auto p = small(2, 16);
  Dataset ds = generate_dataset(p);
  PbeInstance inst = ds.instances.front();
  inst.outputs[0] += "a";
  CHECK_FALSE(check_instance(inst, p).empty());
  inst = ds.instances.front();
  inst.category.f = !inst.category.f;
  CHECK_FALSE(check_instance(inst, p).empty());
  inst = ds.instances.front();
  inst.cascade.push_back({"q", "q"});
  CHECK_FALSE(check_instance(inst, p).empty());
}

TEST_CASE("kl_from_uniform hand values") {
  CHECK(std::abs(kl_from_uniform({2, 0}, 1.0) - 0.1438) < 1e-4);
  CHECK(std::abs(kl_from_uniform({2, 0}, 1.0) - 0.5 * std::log(4.0 / 3.0)) < 1e-12);
  CHECK(kl_from_uniform({5, 5, 5}, 1.0) == 0.0);
  CHECK(kl_from_uniform({3, 0, 0, 0}, 1.0) > 0.0);
}
