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

#include "pbekit/rewrite.hpp"

#include <algorithm>

#include "pbekit/errors.hpp"
#include "pbekit/text.hpp"

namespace pbekit {

Alphabet::Alphabet(std::u32string symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw PreconditionError("alphabet must be non-empty");
  std::u32string sorted = symbols_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw PreconditionError("alphabet has duplicate symbols");
  encoded_.reserve(symbols_.size());
  for (char32_t c : symbols_) encoded_.push_back(text::encode(c));
}

Alphabet Alphabet::from_utf8(std::string_view symbols) {
  return Alphabet(text::decode(symbols));
}

std::string Alphabet::to_utf8() const { return text::encode(symbols_); }

std::size_t RewriteRule::complexity() const {
  return text::length(source) + text::length(target);
}

std::string to_string(const RewriteRule& rule) {
  return "replace('" + rule.source + "','" + rule.target + "')";
}

std::string to_string(const Cascade& cascade) {
  std::string out = "[";
  for (std::size_t k = 0; k < cascade.size(); ++k) {
    if (k) out += ", ";
    out += to_string(cascade[k]);
  }
  return out + "]";
}

std::string apply_rule(const RewriteRule& rule, std::string_view s) {
  if (rule.source.empty())
    throw PreconditionError("apply_rule: rule source must be non-empty");
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t hit = s.find(rule.source, pos);
    if (hit == std::string_view::npos) break;
    out.append(s.substr(pos, hit - pos));
    out += rule.target;
    pos = hit + rule.source.size();
  }
  if (pos == 0) return std::string(s);
  out.append(s.substr(pos));
  return out;
}

StringVector apply_rule(const RewriteRule& rule, const StringVector& v) {
  StringVector out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(apply_rule(rule, s));
  return out;
}

StringVector apply_cascade(const Cascade& cascade, const StringVector& inputs) {
  StringVector cur = inputs;
  for (const auto& rule : cascade) cur = apply_rule(rule, cur);
  return cur;
}

std::vector<StringVector> trace_cascade(const Cascade& cascade,
                                        const StringVector& inputs) {
  std::vector<StringVector> steps;
  steps.reserve(cascade.size() + 1);
  steps.push_back(inputs);
  for (const auto& rule : cascade) steps.push_back(apply_rule(rule, steps.back()));
  return steps;
}

std::size_t occurrence_count(std::string_view needle, std::string_view haystack) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++n;
  return n;
}

StringSets string_sets(std::string_view s) {
  StringSets sets;
  const auto cuts = text::boundaries(s);
  const std::size_t n = cuts.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      std::string sub(s.substr(cuts[i], cuts[j] - cuts[i]));
      if (i == 0) sets.prefixes.insert(sub);
      if (j == n) sets.suffixes.insert(sub);
      sets.substrings.insert(std::move(sub));
    }
  }
  return sets;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::u32string x = text::decode(a);
  const std::u32string y = text::decode(b);
  if (x.size() < y.size()) return levenshtein(b, a);
  std::vector<std::size_t> row(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (x[i - 1] != y[j - 1])});
      diag = up;
    }
  }
  return row[y.size()];
}

std::size_t levenshtein(const StringVector& a, const StringVector& b) {
  if (a.size() != b.size())
    throw PreconditionError("levenshtein: vectors differ in length (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  std::size_t total = 0;
  for (std::size_t j = 0; j < a.size(); ++j) total += levenshtein(a[j], b[j]);
  return total;
}

std::size_t complexity(const Cascade& cascade) {
  std::size_t total = 0;
  for (const auto& r : cascade) total += r.complexity();
  return total;
}

}  // namespace pbekit
