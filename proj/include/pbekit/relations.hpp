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

// Feeding/bleeding calculus over pairs of rewrite rules, cascade-level BFCC
// classification, and brute-force witness search used to cross-check it.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbekit/rewrite.hpp"

namespace pbekit {

enum class RelationKind { Feeding, Bleeding, CounterFeeding, CounterBleeding };

// Only F and B are stored; an edge with i > j is the counter-relation.
struct RelationEdge {
  std::size_t i = 0;
  RelationKind kind = RelationKind::Feeding;
  std::size_t j = 0;

  bool operator==(const RelationEdge&) const = default;
};

// Presence bits in (F, B, CF, CB) order.
struct CategoryString {
  bool f = false;
  bool b = false;
  bool cf = false;
  bool cb = false;

  bool operator==(const CategoryString&) const = default;

  std::string str() const;
  // Index in [0, 16) with F as the most significant bit, so index(str()) is
  // the binary number the string spells.
  std::size_t index() const;
  static CategoryString from_index(std::size_t idx);
  // Throws ValidationError unless s is four '0'/'1' characters.
  static CategoryString parse(const std::string& s);
};

inline constexpr std::size_t kCategoryCount = 16;

// Five-disjunct feeding test. second.source must be non-empty; first.source
// may be empty (bleeds() reaches here with a reversed deletion rule).
bool feeds(const RewriteRule& first, const RewriteRule& second);

// feeds(first.reversed(), second).
bool bleeds(const RewriteRule& first, const RewriteRule& second);

struct Classification {
  CategoryString category;
  std::vector<RelationEdge> edges;
};

// Tests every ordered pair (i, j), i != j, row-major; feeding before bleeding.
Classification classify_bfcc(const Cascade& cascade);

// Exhaustive witness search over strings of length <= max_len drawn from the
// symbols of both rules plus one symbol foreign to them, in length-then-
// lexicographic order. A witness is a string s for which applying `first`
// strictly increases (feeds) or decreases (bleeds) the non-overlapping count
// of second.source.
std::optional<std::string> oracle_feeds(const RewriteRule& first,
                                        const RewriteRule& second,
                                        std::size_t max_len);
std::optional<std::string> oracle_bleeds(const RewriteRule& first,
                                         const RewriteRule& second,
                                         std::size_t max_len);

// Bound under which every constructive feeding case has a witness.
std::size_t witness_bound(const RewriteRule& first, const RewriteRule& second);

struct VerifyOptions {
  std::size_t pairs = 10000;
  std::string alphabet = "abc";
  std::size_t min_len = 1;
  std::size_t max_len = 2;
  std::uint64_t seed = 0;
  // Discrepancy examples retained per class.
  std::size_t keep_examples = 5;
};

struct Discrepancy {
  RewriteRule first;
  RewriteRule second;
  std::optional<std::string> witness;
};

struct VerifyReport {
  std::size_t pairs = 0;
  std::size_t feeds_true = 0;
  std::size_t bleeds_true = 0;
  // Witness found but predicate false.
  std::size_t feeds_unsound = 0;
  std::size_t bleeds_unsound = 0;
  // Predicate true but no witness within witness_bound().
  std::size_t feeds_unwitnessed = 0;
  std::size_t bleeds_unwitnessed = 0;
  // bleeds(p, q) != feeds(reversed(p), q).
  std::size_t identity_violations = 0;
  std::vector<Discrepancy> feeds_unsound_examples;
  std::vector<Discrepancy> feeds_unwitnessed_examples;
  std::vector<Discrepancy> bleeds_unsound_examples;
  std::vector<Discrepancy> bleeds_unwitnessed_examples;

  bool clean() const {
    return feeds_unsound + bleeds_unsound + feeds_unwitnessed +
               bleeds_unwitnessed + identity_violations ==
           0;
  }
};

// Draws random rule pairs and cross-checks feeds/bleeds against the oracles.
VerifyReport verify_relations(const VerifyOptions& options);

}  // namespace pbekit
