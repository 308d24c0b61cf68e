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

// Rewrite rules, cascades, and the string primitives everything else builds
// on. A rule rewrites every occurrence of its source with its target in one
// left-to-right, non-overlapping pass; emitted text is never rescanned.

#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pbekit {

using StringVector = std::vector<std::string>;

// Ordered set of distinct unicode scalar values.
class Alphabet {
 public:
  // Throws PreconditionError when symbols is empty or has duplicates.
  explicit Alphabet(std::u32string symbols);
  static Alphabet from_utf8(std::string_view symbols);

  std::size_t size() const { return symbols_.size(); }
  const std::u32string& symbols() const { return symbols_; }
  // UTF-8 encoding of the i-th symbol.
  const std::string& symbol(std::size_t i) const { return encoded_[i]; }
  std::string to_utf8() const;

  bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }

 private:
  std::u32string symbols_;
  std::vector<std::string> encoded_;
};

struct RewriteRule {
  std::string source;
  std::string target;

  bool operator==(const RewriteRule&) const = default;
  auto operator<=>(const RewriteRule&) const = default;

  RewriteRule reversed() const { return {target, source}; }
  // |source| + |target| in scalar values.
  std::size_t complexity() const;
};

using Cascade = std::vector<RewriteRule>;

// Renders as replace('A','B'); used for signatures and diagnostics.
std::string to_string(const RewriteRule& rule);
std::string to_string(const Cascade& cascade);

std::string apply_rule(const RewriteRule& rule, std::string_view s);
StringVector apply_rule(const RewriteRule& rule, const StringVector& v);

StringVector apply_cascade(const Cascade& cascade, const StringVector& inputs);

// Returns iota_0..iota_L; front() == inputs, back() == outputs.
std::vector<StringVector> trace_cascade(const Cascade& cascade,
                                        const StringVector& inputs);

// Non-overlapping left-to-right matches of needle in haystack, i.e. the
// number of rewrites apply_rule would perform.
std::size_t occurrence_count(std::string_view needle, std::string_view haystack);

struct StringSets {
  std::set<std::string> substrings;
  std::set<std::string> prefixes;
  std::set<std::string> suffixes;
};

// Non-empty substrings, prefixes and suffixes, deduplicated.
StringSets string_sets(std::string_view s);

std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(const StringVector& a, const StringVector& b);

std::size_t complexity(const Cascade& cascade);

}  // namespace pbekit
