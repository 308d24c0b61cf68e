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

#include "pbekit/proposer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <unordered_set>

#include "pbekit/errors.hpp"
#include "pbekit/text.hpp"

namespace pbekit {

std::string to_string(QuotaMode m) {
  switch (m) {
    case QuotaMode::Category: return "category";
    case QuotaMode::Length: return "length";
    case QuotaMode::Both: return "both";
  }
  return "?";
}

std::string to_string(PostPatiencePolicy p) {
  return p == PostPatiencePolicy::AcceptAny ? "accept-any" : "keep-length-quota";
}

QuotaMode parse_quota_mode(const std::string& s) {
  if (s == "category") return QuotaMode::Category;
  if (s == "length") return QuotaMode::Length;
  if (s == "both") return QuotaMode::Both;
  throw ValidationError("quota_mode must be category|length|both, got '" + s + "'");
}

PostPatiencePolicy parse_post_patience_policy(const std::string& s) {
  if (s == "accept-any") return PostPatiencePolicy::AcceptAny;
  if (s == "keep-length-quota") return PostPatiencePolicy::KeepLengthQuota;
  throw ValidationError(
      "post_patience_policy must be accept-any|keep-length-quota, got '" + s + "'");
}

void GeneratorParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("generator params: ") + what);
  };
  require(n >= 1, "n must be >= 1");
  require(l_min >= 1 && l_min <= l_max, "need 1 <= l_min <= l_max");
  require(L_min >= 1 && L_min <= L_max, "need 1 <= L_min <= L_max");
  require(s_min >= 1 && s_min <= s_max, "need 1 <= s_min <= s_max");
  require(D >= 1, "D must be >= 1");
}

GeneratorParams lite_params(std::uint64_t seed) {
  GeneratorParams p;
  p.seed = seed;
  return p;
}

StringVector sample_input_vector(const GeneratorParams& params, Rng& rng) {
  StringVector out;
  out.reserve(params.n);
  const Alphabet& sigma = params.alphabet;
  for (std::size_t j = 0; j < params.n; ++j) {
    const std::size_t len = rng.uniform(params.l_min, params.l_max);
    std::string s;
    for (std::size_t c = 0; c < len; ++c) s += sigma.symbol(rng.index(sigma.size()));
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::set<std::string> substrings_of_length(const StringVector& v, std::size_t len) {
  std::set<std::string> out;
  for (const auto& s : v) {
    const auto cuts = text::boundaries(s);
    for (std::size_t i = 0; i + len < cuts.size(); ++i)
      out.insert(s.substr(cuts[i], cuts[i + len] - cuts[i]));
  }
  return out;
}

}  // namespace

std::optional<RewriteRule> sample_rule(const StringVector& intermediate,
                                       const GeneratorParams& params, Rng& rng) {
  if (intermediate.empty())
    throw PreconditionError("sample_rule: intermediate vector is empty");
  std::size_t longest = 0;
  for (const auto& s : intermediate) longest = std::max(longest, text::length(s));
  if (longest < params.s_min) return std::nullopt;

  std::size_t source_len = rng.uniform(params.s_min, params.s_max);
  if (source_len > longest) {
    // Feasible lengths are exactly s_min..min(s_max, longest).
    source_len = rng.uniform(params.s_min, std::min(params.s_max, longest));
  }
  const auto candidates = substrings_of_length(intermediate, source_len);
  auto it = candidates.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(rng.index(candidates.size())));

  RewriteRule rule{*it, ""};
  const std::size_t target_len = rng.uniform(params.s_min, params.s_max);
  const Alphabet& sigma = params.alphabet;
  for (std::size_t c = 0; c < target_len; ++c)
    rule.target += sigma.symbol(rng.index(sigma.size()));
  return rule;
}

std::optional<PbeInstance> sample_candidate(const GeneratorParams& params, Rng& rng) {
  const std::size_t target_len = rng.uniform(params.L_min, params.L_max);
  PbeInstance inst;
  inst.inputs = sample_input_vector(params, rng);
  StringVector current = inst.inputs;
  for (std::size_t k = 0; k < target_len; ++k) {
    auto rule = sample_rule(current, params, rng);
    if (!rule) break;
    StringVector next = apply_rule(*rule, current);
    if (next == current) continue;
    inst.cascade.push_back(std::move(*rule));
    current = std::move(next);
  }
  if (inst.cascade.size() < params.L_min || current == inst.inputs) return std::nullopt;
  inst.outputs = std::move(current);
  auto cls = classify_bfcc(inst.cascade);
  inst.category = cls.category;
  inst.fb_edges = std::move(cls.edges);
  return inst;
}

std::string dedup_signature(const PbeInstance& inst) {
  std::string sig;
  for (const auto& s : inst.inputs) sig += s + '\x1f';
  sig += '\x1e';
  for (const auto& s : inst.outputs) sig += s + '\x1f';
  sig += '\x1e';
  sig += to_string(inst.cascade);
  sig += '\x1e';
  sig += std::to_string(inst.cascade.size());
  return sig;
}

Dataset generate_dataset(const GeneratorParams& params) {
  params.validate();
  Dataset ds;
  ds.params = params;
  Rng rng(params.seed);

  const std::size_t length_bins = params.L_max - params.L_min + 1;
  const std::size_t category_quota = params.D / kCategoryCount;
  const std::size_t length_quota = params.D / length_bins;
  const std::size_t relaxed_length_quota = (params.D + length_bins - 1) / length_bins;
  const bool by_category = params.quota_mode != QuotaMode::Length;
  const bool by_length = params.quota_mode != QuotaMode::Category;

  std::array<std::size_t, kCategoryCount> per_category{};
  std::vector<std::size_t> per_length(length_bins, 0);
  std::unordered_set<std::string> seen;
  GenerationStats& st = ds.stats;

  while (ds.instances.size() < params.D) {
    if (params.max_steps != 0 && st.attempts >= params.max_steps) {
      st.step_limit_hit = true;
      break;
    }
    const std::size_t t = ++st.attempts;
    auto cand = sample_candidate(params, rng);
    if (!cand) {
      ++st.rejected_ineffective;
      continue;
    }
    std::string sig = dedup_signature(*cand);
    if (seen.contains(sig)) {
      ++st.rejected_duplicate;
      continue;
    }
    const std::size_t cat = cand->category.index();
    const std::size_t len_bin = cand->cascade.size() - params.L_min;

    bool accept;
    if (t < params.tau) {
      accept = (!by_category || per_category[cat] < category_quota) &&
               (!by_length || per_length[len_bin] < length_quota);
    } else {
      st.patience_exhausted = true;
      accept = params.post_patience_policy == PostPatiencePolicy::AcceptAny ||
               !by_length || per_length[len_bin] < relaxed_length_quota;
    }
    if (!accept) {
      ++st.rejected_quota;
      continue;
    }
    ++per_category[cat];
    ++per_length[len_bin];
    seen.insert(std::move(sig));
    char id[32];
    std::snprintf(id, sizeof id, "pbe-%05zu", ds.instances.size());
    cand->id = id;
    ds.instances.push_back(std::move(*cand));
    ++st.acceptances;
  }
  return ds;
}

std::vector<std::string> check_instance(const PbeInstance& inst,
                                        const GeneratorParams& params) {
  std::vector<std::string> bad;
  auto fail = [&](std::string what) { bad.push_back(inst.id + ": " + std::move(what)); };

  if (inst.inputs.size() != params.n) fail("input count differs from n");
  if (inst.outputs.size() != inst.inputs.size()) fail("outputs not index-aligned with inputs");
  for (const auto& s : inst.inputs) {
    const std::size_t len = text::length(s);
    if (len < params.l_min || len > params.l_max) fail("input length out of bounds: " + s);
    for (char32_t c : text::decode(s))
      if (params.alphabet.symbols().find(c) == std::u32string::npos)
        fail("input symbol outside alphabet: " + s);
  }
  const std::size_t L = inst.cascade.size();
  if (L < params.L_min || L > params.L_max) fail("cascade length out of bounds");
  for (const auto& r : inst.cascade) {
    const std::size_t a = text::length(r.source), b = text::length(r.target);
    if (a < params.s_min || a > params.s_max || b < params.s_min || b > params.s_max)
      fail("rule substring length out of bounds: " + to_string(r));
  }
  if (!bad.empty()) return bad;

  const auto steps = trace_cascade(inst.cascade, inst.inputs);
  for (std::size_t k = 0; k < L; ++k)
    if (steps[k + 1] == steps[k]) fail("rule " + std::to_string(k) + " is ineffective");
  if (steps.back() != inst.outputs) fail("outputs do not match re-execution");
  if (inst.outputs == inst.inputs) fail("outputs equal inputs");
  const auto cls = classify_bfcc(inst.cascade);
  if (cls.category != inst.category) fail("category differs from reclassification");
  if (cls.edges != inst.fb_edges) fail("fb_edges differ from reclassification");
  return bad;
}

double kl_from_uniform(const std::vector<std::size_t>& counts, double smoothing) {
  if (counts.empty()) throw PreconditionError("kl_from_uniform: no bins");
  const double k = static_cast<double>(counts.size());
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c) + smoothing;
  if (total <= 0.0) throw PreconditionError("kl_from_uniform: empty histogram");
  const double u = 1.0 / k;
  double kl = 0.0;
  for (auto c : counts) {
    const double q = (static_cast<double>(c) + smoothing) / total;
    if (q == 0.0) return std::numeric_limits<double>::infinity();
    kl += u * std::log(u / q);
  }
  return kl;
}

BalanceReport kl_balance_report(const Dataset& dataset, double smoothing) {
  if (dataset.instances.empty())
    throw PreconditionError("kl_balance_report: dataset is empty");
  BalanceReport rep;
  rep.smoothing = smoothing;
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (const auto& inst : dataset.instances) {
    const std::size_t cat = inst.category.index();
    ++rep.category_counts[cat];
    ++rep.length_counts[inst.cascade.size()];
    auto& h = by_length[inst.cascade.size()];
    h.resize(kCategoryCount, 0);
    ++h[cat];
  }
  rep.kl_nats = kl_from_uniform({rep.category_counts.begin(), rep.category_counts.end()},
                                smoothing);
  for (const auto& [len, hist] : by_length)
    rep.kl_by_length[len] = kl_from_uniform(hist, smoothing);
  return rep;
}

}  // namespace pbekit
