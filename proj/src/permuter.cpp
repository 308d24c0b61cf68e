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

#include "pbekit/permuter.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "pbekit/errors.hpp"

namespace pbekit {

Cascade reorder(const Cascade& rules, const Permutation& order) {
  Cascade out;
  out.reserve(order.size());
  for (std::size_t idx : order) out.push_back(rules.at(idx));
  return out;
}

bool is_permutation_of_range(const Permutation& p, std::size_t m) {
  if (p.size() != m) return false;
  std::vector<bool> hit(m, false);
  for (std::size_t v : p) {
    if (v >= m || hit[v]) return false;
    hit[v] = true;
  }
  return true;
}

std::optional<ReorderInstance> fb_swap(const PbeInstance& instance) {
  const std::size_t m = instance.cascade.size();
  std::set<std::pair<std::size_t, std::size_t>> tried;
  for (const auto& e : instance.fb_edges) {
    const auto key = std::minmax(e.i, e.j);
    if (!tried.insert(key).second) continue;
    Permutation rho(m);
    std::iota(rho.begin(), rho.end(), std::size_t{0});
    std::swap(rho[e.i], rho[e.j]);
    Cascade swapped = reorder(instance.cascade, rho);
    if (apply_cascade(swapped, instance.inputs) == instance.outputs) continue;
    ReorderInstance out;
    out.source_id = instance.id;
    out.inputs = instance.inputs;
    out.outputs = instance.outputs;
    out.scrambled = std::move(swapped);
    out.gt_order = std::move(rho);
    out.category = instance.category;
    out.fb_edges = instance.fb_edges;
    return out;
  }
  return std::nullopt;
}

std::size_t count_valid_orders(const ReorderInstance& instance, std::size_t cap) {
  const std::size_t m = instance.scrambled.size();
  std::size_t fact = 1;
  for (std::size_t k = 2; k <= m; ++k) {
    fact *= k;
    if (fact > cap)
      throw CapacityError("count_valid_orders: " + std::to_string(m) +
                          "! orderings exceed cap " + std::to_string(cap));
  }
  Permutation perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t valid = 0;
  do {
    if (apply_cascade(reorder(instance.scrambled, perm), instance.inputs) ==
        instance.outputs)
      ++valid;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return valid;
}

std::vector<ReorderInstance> build_perm_dataset(const Dataset& dataset,
                                                std::size_t order_count_cap) {
  if (order_count_cap < 1) throw PreconditionError("build_perm_dataset: cap must be >= 1");
  std::vector<ReorderInstance> out;
  for (const auto& inst : dataset.instances) {
    auto r = fb_swap(inst);
    if (!r) continue;
    try {
      r->n_valid_orders = count_valid_orders(*r, order_count_cap);
      r->is_unique = *r->n_valid_orders == 1;
    } catch (const CapacityError&) {
      r->n_valid_orders.reset();
      r->is_unique = false;
    }
    out.push_back(std::move(*r));
  }
  return out;
}

std::vector<std::string> check_reorder_instance(const ReorderInstance& inst) {
  std::vector<std::string> bad;
  auto fail = [&](const std::string& what) { bad.push_back(inst.source_id + ": " + what); };
  if (!is_permutation_of_range(inst.gt_order, inst.scrambled.size())) {
    fail("gt_order is not a permutation");
    return bad;
  }
  if (apply_cascade(inst.scrambled, inst.inputs) == inst.outputs)
    fail("scrambled cascade already reproduces outputs");
  if (apply_cascade(reorder(inst.scrambled, inst.gt_order), inst.inputs) != inst.outputs)
    fail("gt_order does not reproduce outputs");
  if (inst.n_valid_orders) {
    if (*inst.n_valid_orders < 1) fail("n_valid_orders < 1");
    if (inst.is_unique != (*inst.n_valid_orders == 1)) fail("is_unique inconsistent");
  } else if (inst.is_unique) {
    fail("is_unique set without an order count");
  }
  return bad;
}

}  // namespace pbekit
