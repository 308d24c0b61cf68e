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

// Program-reordering task built from generated instances by swapping one
// feeding- or bleeding-related pair of rules.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pbekit/proposer.hpp"

namespace pbekit {

using Permutation = std::vector<std::size_t>;

struct ReorderInstance {
  std::string source_id;
  StringVector inputs;
  StringVector outputs;
  Cascade scrambled;
  // Applying scrambled[gt_order[0]], scrambled[gt_order[1]], ... reproduces
  // outputs.
  Permutation gt_order;
  std::optional<std::size_t> n_valid_orders;
  bool is_unique = false;
  // Carried over from the source instance for reporting.
  CategoryString category;
  std::vector<RelationEdge> fb_edges;
};

inline constexpr std::size_t kDefaultOrderCountCap = 40320;  // 8!

// Rules of `rules` taken in `order`.
Cascade reorder(const Cascade& rules, const Permutation& order);

bool is_permutation_of_range(const Permutation& p, std::size_t m);

// First FB-related transposition (in stored edge order) that changes the
// outputs, or nullopt.
std::optional<ReorderInstance> fb_swap(const PbeInstance& instance);

// Counts permutations of scrambled that reproduce outputs. Throws
// CapacityError when |scrambled|! exceeds cap.
std::size_t count_valid_orders(const ReorderInstance& instance,
                               std::size_t cap = kDefaultOrderCountCap);

std::vector<ReorderInstance> build_perm_dataset(
    const Dataset& dataset, std::size_t order_count_cap = kDefaultOrderCountCap);

// Violated ReorderInstance invariants; empty means valid.
std::vector<std::string> check_reorder_instance(const ReorderInstance& inst);

}  // namespace pbekit
