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

#include <algorithm>
#include <numeric>

#include "pbekit/errors.hpp"
#include "pbekit/permuter.hpp"
#include "pbekit/relations.hpp"

using namespace pbekit;

namespace {

PbeInstance make_instance(const std::string& id, StringVector inputs, Cascade c) {
  PbeInstance inst;
  inst.id = id;
  inst.outputs = apply_cascade(c, inputs);
  inst.inputs = std::move(inputs);
  auto cls = classify_bfcc(c);
  inst.category = cls.category;
  inst.fb_edges = cls.edges;
  inst.cascade = std::move(c);
  return inst;
}

}  // namespace

TEST_CASE("reorder and permutation checks") {
  const Cascade c = {{"a", "b"}, {"b", "c"}, {"c", "d"}};
  CHECK(reorder(c, {2, 0, 1}) == Cascade{{"c", "d"}, {"a", "b"}, {"b", "c"}});
  CHECK(is_permutation_of_range({2, 0, 1}, 3));
  CHECK_FALSE(is_permutation_of_range({0, 0, 1}, 3));
  CHECK_FALSE(is_permutation_of_range({0, 1}, 3));
  CHECK_FALSE(is_permutation_of_range({0, 1, 3}, 3));
  CHECK(is_permutation_of_range({}, 0));
}

TEST_CASE("fb_swap on the worked example") {
  const auto inst = make_instance("x", {"abc", "ebc", "aba"}, {{"bc", "dc"}, {"ad", "ed"}});
  const auto r = fb_swap(inst);
  REQUIRE(r.has_value());
  CHECK(r->source_id == "x");
  CHECK(r->scrambled == Cascade{{"ad", "ed"}, {"bc", "dc"}});
  CHECK(r->gt_order == Permutation{1, 0});
  CHECK(apply_cascade(r->scrambled, r->inputs) != r->outputs);
  CHECK(apply_cascade(reorder(r->scrambled, r->gt_order), r->inputs) == r->outputs);
  CHECK(count_valid_orders(*r) == 1);
  CHECK(check_reorder_instance(*r).empty());
}

TEST_CASE("fb_swap declines cascades with no effective swap") {
  const auto inst = make_instance("y", {"ab"}, {{"a", "x"}, {"b", "y"}});
  CHECK(inst.fb_edges.empty());
  CHECK_FALSE(fb_swap(inst).has_value());
}

TEST_CASE("count_valid_orders enumerates all orders") {
  // Independent rules commute, so every order reproduces the outputs.
  ReorderInstance r;
  r.inputs = {"abc"};
  r.scrambled = {{"a", "x"}, {"b", "y"}, {"c", "z"}};
  r.outputs = {"xyz"};
  r.gt_order = {0, 1, 2};
  CHECK(count_valid_orders(r) == 6);
  CHECK_THROWS_AS(count_valid_orders(r, 5), CapacityError);

  ReorderInstance big;
  big.inputs = {"a"};
  big.outputs = {"a"};
  for (int k = 0; k < 9; ++k) big.scrambled.push_back({"q", "r"});
  CHECK_THROWS_AS(count_valid_orders(big), CapacityError);
}

TEST_CASE("build_perm_dataset marks capped instances as not unique") {
  Dataset ds;
  Cascade c;
  std::string input = "a";
  for (int k = 0; k < 9; ++k) {
    const std::string from(1, char('a' + k)), to(1, char('a' + k + 1));
    c.push_back({from, to});
  }
  ds.instances.push_back(make_instance("chain", {input}, c));
  const auto out = build_perm_dataset(ds);
  REQUIRE(out.size() == 1);
  CHECK_FALSE(out[0].n_valid_orders.has_value());
  CHECK_FALSE(out[0].is_unique);
  CHECK(check_reorder_instance(out[0]).empty());
  CHECK_FALSE(build_perm_dataset(ds, 1)[0].n_valid_orders.has_value());
  CHECK_THROWS_AS(build_perm_dataset(ds, 0), PreconditionError);
}

TEST_CASE("check_reorder_instance reports broken instances") {
  const auto inst = make_instance("x", {"abc", "ebc", "aba"}, {{"bc", "dc"}, {"ad", "ed"}});
  auto r = *fb_swap(inst);
  r.n_valid_orders = 1;
  r.is_unique = true;
  CHECK(check_reorder_instance(r).empty());
  auto bad = r;
  bad.gt_order = {0, 1};
  CHECK_FALSE(check_reorder_instance(bad).empty());
  bad = r;
  bad.gt_order = {0, 0};
  CHECK_FALSE(check_reorder_instance(bad).empty());
  bad = r;
  bad.is_unique = false;
  CHECK_FALSE(check_reorder_instance(bad).empty());
}
