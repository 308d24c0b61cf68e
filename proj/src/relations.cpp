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

#include "pbekit/relations.hpp"

#include <algorithm>

#include "pbekit/errors.hpp"
#include "pbekit/random.hpp"
#include "pbekit/text.hpp"

namespace pbekit {

std::string CategoryString::str() const {
  std::string s(4, '0');
  if (f) s[0] = '1';
  if (b) s[1] = '1';
  if (cf) s[2] = '1';
  if (cb) s[3] = '1';
  return s;
}

std::size_t CategoryString::index() const {
  return (f ? 8u : 0u) | (b ? 4u : 0u) | (cf ? 2u : 0u) | (cb ? 1u : 0u);
}

CategoryString CategoryString::from_index(std::size_t idx) {
  return {(idx & 8) != 0, (idx & 4) != 0, (idx & 2) != 0, (idx & 1) != 0};
}

CategoryString CategoryString::parse(const std::string& s) {
  if (s.size() != 4 || s.find_first_not_of("01") != std::string::npos)
    throw ValidationError("category string must be four 0/1 digits: '" + s + "'");
  return {s[0] == '1', s[1] == '1', s[2] == '1', s[3] == '1'};
}

namespace {

bool intersects_outside(const std::set<std::string>& candidates,
                        const std::set<std::string>& excluded,
                        const std::set<std::string>& targets) {
  for (const auto& x : candidates)
    if (!excluded.contains(x) && targets.contains(x)) return true;
  return false;
}

}  // namespace

bool feeds(const RewriteRule& first, const RewriteRule& second) {
  if (second.source.empty())
    throw PreconditionError("feeds: second rule source must be non-empty");
  const std::string& si = first.source;
  const std::string& ti = first.target;
  const std::string& sj = second.source;

  // Deletion joins material on both sides of the deleted span.
  if (ti.empty() && text::length(sj) > 1) return true;

  const StringSets in_si = string_sets(si);
  const StringSets in_ti = string_sets(ti);
  const StringSets in_sj = string_sets(sj);

  // Containment.
  if (in_sj.substrings.contains(ti) && !in_si.substrings.contains(ti)) return true;
  // Subsumption.
  if (in_ti.substrings.contains(sj) && !in_si.substrings.contains(sj)) return true;
  // Completion on either side.
  if (intersects_outside(in_ti.prefixes, in_si.substrings, in_sj.suffixes)) return true;
  if (intersects_outside(in_ti.suffixes, in_si.substrings, in_sj.prefixes)) return true;
  return false;
}

bool bleeds(const RewriteRule& first, const RewriteRule& second) {
  return feeds(first.reversed(), second);
}

Classification classify_bfcc(const Cascade& cascade) {
  Classification out;
  for (const auto& r : cascade)
    if (r.source.empty())
      throw PreconditionError("classify_bfcc: rule source must be non-empty");
  for (std::size_t i = 0; i < cascade.size(); ++i) {
    for (std::size_t j = 0; j < cascade.size(); ++j) {
      if (i == j) continue;
      if (feeds(cascade[i], cascade[j])) {
        out.edges.push_back({i, RelationKind::Feeding, j});
        (i < j ? out.category.f : out.category.cf) = true;
      }
      if (bleeds(cascade[i], cascade[j])) {
        out.edges.push_back({i, RelationKind::Bleeding, j});
        (i < j ? out.category.b : out.category.cb) = true;
      }
    }
  }
  return out;
}

namespace {

// Symbols of all four rule strings plus one foreign symbol, in code point
// order, UTF-8 encoded.
std::vector<std::string> oracle_symbols(const RewriteRule& first,
                                        const RewriteRule& second) {
  std::u32string all = text::decode(first.source + first.target + second.source +
                                    second.target);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  for (char32_t fresh : U"#$%&@!~^*+=?0123456789") {
    if (fresh == 0) break;
    if (!std::binary_search(all.begin(), all.end(), fresh)) {
      all.push_back(fresh);
      break;
    }
  }
  std::sort(all.begin(), all.end());
  std::vector<std::string> out;
  for (char32_t c : all) out.push_back(text::encode(c));
  return out;
}

enum class Direction { Increase, Decrease };

std::optional<std::string> search_witness(const RewriteRule& first,
                                          const RewriteRule& second,
                                          std::size_t max_len, Direction dir) {
  if (second.source.empty())
    throw PreconditionError("oracle: second rule source must be non-empty");
  if (max_len < 1) throw PreconditionError("oracle: max_len must be >= 1");
  if (first.source.empty()) return std::nullopt;
  const auto symbols = oracle_symbols(first, second);
  const std::size_t k = symbols.size();
  const std::string& needle = second.source;

  std::vector<std::size_t> digits;
  std::string s;
  for (std::size_t len = 0; len <= max_len; ++len) {
    digits.assign(len, 0);
    for (;;) {
      s.clear();
      for (std::size_t d : digits) s += symbols[d];
      const std::size_t before = occurrence_count(needle, s);
      const std::size_t after = occurrence_count(needle, apply_rule(first, s));
      if (dir == Direction::Increase ? after > before : after < before) return s;
      // Odometer increment, last position fastest.
      std::size_t pos = len;
      while (pos > 0 && ++digits[pos - 1] == k) digits[--pos] = 0;
      if (pos == 0) break;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> oracle_feeds(const RewriteRule& first,
                                        const RewriteRule& second,
                                        std::size_t max_len) {
  return search_witness(first, second, max_len, Direction::Increase);
}

std::optional<std::string> oracle_bleeds(const RewriteRule& first,
                                         const RewriteRule& second,
                                         std::size_t max_len) {
  return search_witness(first, second, max_len, Direction::Decrease);
}

std::size_t witness_bound(const RewriteRule& first, const RewriteRule& second) {
  return text::length(first.source) + text::length(second.source) +
         text::length(first.target) + 2;
}

VerifyReport verify_relations(const VerifyOptions& options) {
  const Alphabet alphabet = Alphabet::from_utf8(options.alphabet);
  if (options.min_len < 1 || options.min_len > options.max_len)
    throw PreconditionError("verify_relations: need 1 <= min_len <= max_len");
  Rng rng(options.seed);
  auto draw = [&] {
    std::string s;
    const std::size_t n = rng.uniform(options.min_len, options.max_len);
    for (std::size_t c = 0; c < n; ++c) s += alphabet.symbol(rng.index(alphabet.size()));
    return s;
  };
  auto keep = [&](std::vector<Discrepancy>& bucket, Discrepancy d) {
    if (bucket.size() < options.keep_examples) bucket.push_back(std::move(d));
  };

  VerifyReport report;
  for (std::size_t p = 0; p < options.pairs; ++p) {
    RewriteRule first{draw(), ""};
    first.target = draw();
    RewriteRule second{draw(), ""};
    second.target = draw();
    const std::size_t bound = witness_bound(first, second);

    const bool f = feeds(first, second);
    const bool b = bleeds(first, second);
    if (b != feeds(first.reversed(), second)) ++report.identity_violations;
    report.feeds_true += f;
    report.bleeds_true += b;

    const auto wf = oracle_feeds(first, second, bound);
    if (wf && !f) {
      ++report.feeds_unsound;
      keep(report.feeds_unsound_examples, {first, second, wf});
    }
    if (f && !wf) {
      ++report.feeds_unwitnessed;
      keep(report.feeds_unwitnessed_examples, {first, second, std::nullopt});
    }
    const auto wb = oracle_bleeds(first, second, bound);
    if (wb && !b) {
      ++report.bleeds_unsound;
      keep(report.bleeds_unsound_examples, {first, second, wb});
    }
    if (b && !wb) {
      ++report.bleeds_unwitnessed;
      keep(report.bleeds_unwitnessed_examples, {first, second, std::nullopt});
    }
    ++report.pairs;
  }
  return report;
}

}  // namespace pbekit
