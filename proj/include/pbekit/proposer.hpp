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

// Problem proposer: samples inputs and cascades, then keeps candidates by
// rejection against category and/or length quotas with a patience budget.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbekit/random.hpp"
#include "pbekit/relations.hpp"
#include "pbekit/rewrite.hpp"

namespace pbekit {

enum class QuotaMode { Category, Length, Both };
enum class PostPatiencePolicy { AcceptAny, KeepLengthQuota };

std::string to_string(QuotaMode m);
std::string to_string(PostPatiencePolicy p);
QuotaMode parse_quota_mode(const std::string& s);
PostPatiencePolicy parse_post_patience_policy(const std::string& s);

struct GeneratorParams {
  std::size_t n = 5;
  Alphabet alphabet = Alphabet::from_utf8("abcdefghijkuvwxyz");
  std::size_t l_min = 2, l_max = 6;
  std::size_t L_min = 2, L_max = 5;
  std::size_t s_min = 1, s_max = 3;
  std::size_t D = 1008;
  std::size_t tau = 100000;
  std::uint64_t seed = 0;
  QuotaMode quota_mode = QuotaMode::Category;
  PostPatiencePolicy post_patience_policy = PostPatiencePolicy::KeepLengthQuota;
  // Hard stop on sampling steps; 0 means unlimited.
  std::size_t max_steps = 0;

  // Throws ValidationError on any bound violation.
  void validate() const;
};

// The small benchmark configuration: 5 examples, 17 letters (a-k, u-z),
// cascades of 2-5 rules, 1008 instances balanced over the 16 categories.
GeneratorParams lite_params(std::uint64_t seed);

struct PbeInstance {
  std::string id;
  StringVector inputs;
  Cascade cascade;
  StringVector outputs;
  CategoryString category;
  std::vector<RelationEdge> fb_edges;

  std::size_t effective_length() const { return cascade.size(); }
};

struct GenerationStats {
  std::size_t attempts = 0;
  std::size_t acceptances = 0;
  std::size_t rejected_ineffective = 0;
  std::size_t rejected_duplicate = 0;
  std::size_t rejected_quota = 0;
  bool patience_exhausted = false;
  bool step_limit_hit = false;
};

struct Dataset {
  GeneratorParams params;
  std::vector<PbeInstance> instances;
  GenerationStats stats;
};

StringVector sample_input_vector(const GeneratorParams& params, Rng& rng);

// nullopt when no string in intermediate is long enough for s_min.
std::optional<RewriteRule> sample_rule(const StringVector& intermediate,
                                       const GeneratorParams& params, Rng& rng);

// One pass of the sampling loop body; the id is left empty.
std::optional<PbeInstance> sample_candidate(const GeneratorParams& params, Rng& rng);

Dataset generate_dataset(const GeneratorParams& params);

// Key used for deduplication: inputs, outputs, rendered cascade, length.
std::string dedup_signature(const PbeInstance& inst);

// Every invariant a stored instance must satisfy, re-derived from scratch.
// Returns human-readable violations; empty means valid.
std::vector<std::string> check_instance(const PbeInstance& inst,
                                        const GeneratorParams& params);

struct BalanceReport {
  std::array<std::size_t, kCategoryCount> category_counts{};
  std::map<std::size_t, std::size_t> length_counts;
  double smoothing = 1.0;
  double kl_nats = 0.0;
  // Per cascade length, divergence of that length's category histogram.
  std::map<std::size_t, double> kl_by_length;
};

// D_KL(U || Q) in nats, Q the smoothed empirical distribution over bins.
double kl_from_uniform(const std::vector<std::size_t>& counts, double smoothing = 1.0);

BalanceReport kl_balance_report(const Dataset& dataset, double smoothing = 1.0);

}  // namespace pbekit
