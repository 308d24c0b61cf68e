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

// Turning solver text into executable cascades or permutations, scoring
// them, and aggregating dataset-level metrics and breakdowns.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbekit/permuter.hpp"
#include "pbekit/proposer.hpp"

namespace pbekit {

// ---- extraction -----------------------------------------------------------

// Contents of ``` fenced blocks in order of appearance; an opening fence may
// carry a language tag. Unterminated blocks are dropped.
std::vector<std::string> fenced_blocks(std::string_view text);

// Decodes one Python-style quoted literal starting at text[pos] (either
// quote style, backslash escapes honored). On success advances pos past the
// closing quote.
std::optional<std::string> parse_quoted(std::string_view text, std::size_t& pos);

// Parses `replace('A','B')` (either quote style, whitespace tolerant).
std::optional<RewriteRule> parse_replace_call(std::string_view item);

// Last bracketed list of replace-call strings in a block, if any.
std::optional<Cascade> parse_cascade_block(std::string_view block);

struct ExtractedPrediction {
  std::optional<Cascade> first_cascade;
  std::optional<Cascade> last_cascade;
  bool is_null = true;
};

ExtractedPrediction extract_pbe_prediction(std::string_view text);

enum class BlockChoice { First, Last };

// ---- normalization & scoring ---------------------------------------------

struct NormalizedCascade {
  Cascade rules;
  // One entry per raw rule, before truncation.
  std::vector<bool> per_rule_valid;
  bool truncated = false;
  std::size_t substituted_identity_count = 0;
};

NormalizedCascade normalize_cascade(const Cascade& raw, std::size_t s_max,
                                    std::size_t L_max,
                                    const std::string& identity_symbol);

struct EvalSettings {
  std::size_t s_max = 3;
  std::size_t L_max = 5;
  std::string identity_symbol = "a";

  static EvalSettings from(const GeneratorParams& params);
};

struct EvalRecord {
  std::string instance_id;
  std::size_t attempt_index = 0;
  bool pass = false;
  double edit_sim = 0.0;
  double valid_rate_contrib = 0.0;
  // Over the executed (normalized) cascade.
  std::size_t complexity = 0;
  // Over the raw extracted cascade; 0 for null predictions.
  std::size_t raw_complexity = 0;
  bool is_null = true;
  bool degenerate_denominator = false;
  // Executed length; 0 for null predictions.
  std::size_t predicted_length = 0;
  // BFCC category of the executed rules that were valid; absent when null.
  std::optional<CategoryString> predicted_category;
  std::vector<bool> per_rule_valid;
};

EvalRecord evaluate_pbe(const PbeInstance& instance,
                        const std::optional<NormalizedCascade>& prediction,
                        const EvalSettings& settings);

// extract -> normalize -> evaluate for one response text and block choice.
EvalRecord score_pbe_text(const PbeInstance& instance, std::string_view text,
                          const EvalSettings& settings, BlockChoice block,
                          std::size_t attempt_index = 0);

struct AggregateMetrics {
  std::size_t count = 0;
  std::size_t passes = 0;
  std::size_t nulls = 0;
  std::size_t degenerate = 0;
  double pass_at_1 = 0.0;
  double edit_sim = 0.0;
  double valid_rate = 0.0;
  double complexity = 0.0;
  double raw_complexity = 0.0;

  bool operator==(const AggregateMetrics&) const = default;
};

AggregateMetrics aggregate_pbe(std::span<const EvalRecord> records);

// 1 - C(n-c, k) / C(n, k).
double pass_at_k_estimate(std::size_t n, std::size_t c, std::size_t k);

// ---- reordering -----------------------------------------------------------

std::optional<Permutation> extract_permutation(std::string_view text, std::size_t m);

bool evaluate_reorder(const ReorderInstance& instance,
                      const std::optional<Permutation>& perm);

struct ReorderOutcome {
  std::string source_id;
  bool is_unique = false;
  bool correct = false;
  std::size_t length = 0;
};

struct ReorderAggregate {
  std::size_t count = 0;
  std::size_t correct = 0;
  std::size_t unique_count = 0;
  std::size_t unique_correct = 0;
  double acc = 0.0;
  // Absent when no instance is unique.
  std::optional<double> uacc;

  bool operator==(const ReorderAggregate&) const = default;
};

ReorderAggregate aggregate_reorder(std::span<const ReorderOutcome> results);

// ---- breakdowns -----------------------------------------------------------

struct RelationTable {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  // Null predictions, which carry no relation information.
  std::size_t invalid = 0;
};

inline constexpr std::array<const char*, 4> kRelationNames = {
    "feeding", "bleeding", "counter_feeding", "counter_bleeding"};

struct BreakdownReports {
  // ground-truth length -> (passes, total)
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> pass_by_length;
  // ground-truth length -> predicted length -> count; 0 means null.
  std::map<std::size_t, std::map<std::size_t, std::size_t>> length_confusion;
  // ground-truth category -> predicted category or "INVALID" -> count.
  std::map<std::string, std::map<std::string, std::size_t>> category_confusion;
  // [relation][0 = passing, 1 = failing]
  std::array<std::array<RelationTable, 2>, 4> relation_tables{};
};

// Records are matched to instances by id; records for unknown ids are
// ignored.
BreakdownReports breakdown_reports(std::span<const EvalRecord> records,
                                   std::span<const PbeInstance> instances);

}  // namespace pbekit
