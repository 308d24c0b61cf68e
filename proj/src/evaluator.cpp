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

#include "pbekit/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include "json.hpp"

#include "pbekit/errors.hpp"
#include "pbekit/text.hpp"

namespace pbekit {

// ---- extraction -----------------------------------------------------------

std::vector<std::string> fenced_blocks(std::string_view text) {
  std::vector<std::string> blocks;
  constexpr std::string_view fence = "```";
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find(fence, pos);
    if (open == std::string_view::npos) break;
    const std::size_t body = open + fence.size();
    const std::size_t eol = text.find('\n', body);
    const std::size_t inline_close = text.find(fence, body);
    if (inline_close != std::string_view::npos &&
        (eol == std::string_view::npos || inline_close < eol)) {
      // ```[0, 1]``` on a single line.
      blocks.emplace_back(text.substr(body, inline_close - body));
      pos = inline_close + fence.size();
      continue;
    }
    if (eol == std::string_view::npos) break;
    const std::size_t close = text.find(fence, eol + 1);
    if (close == std::string_view::npos) break;
    blocks.emplace_back(text.substr(eol + 1, close - eol - 1));
    pos = close + fence.size();
  }
  return blocks;
}

namespace {

void skip_ws(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

bool consume(std::string_view s, std::size_t& pos, char c) {
  skip_ws(s, pos);
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool read_hex(std::string_view s, std::size_t pos, std::size_t digits, char32_t& out) {
  if (pos + digits > s.size()) return false;
  out = 0;
  for (std::size_t k = 0; k < digits; ++k) {
    const int v = hex_value(s[pos + k]);
    if (v < 0) return false;
    out = out * 16 + static_cast<char32_t>(v);
  }
  return out <= 0x10FFFF;
}

}  // namespace

std::optional<std::string> parse_quoted(std::string_view s, std::size_t& pos) {
  std::size_t p = pos;
  if (p >= s.size() || (s[p] != '\'' && s[p] != '"')) return std::nullopt;
  const char quote = s[p++];
  std::string out;
  while (p < s.size()) {
    const char c = s[p];
    if (c == quote) {
      pos = p + 1;
      return out;
    }
    if (c == '\n') return std::nullopt;
    if (c != '\\') {
      out.push_back(c);
      ++p;
      continue;
    }
    if (p + 1 >= s.size()) return std::nullopt;
    const char e = s[p + 1];
    p += 2;
    char32_t cp;
    switch (e) {
      case '\\': out.push_back('\\'); break;
      case '\'': out.push_back('\''); break;
      case '"': out.push_back('"'); break;
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case '0': out.push_back('\0'); break;
      case 'x':
        if (!read_hex(s, p, 2, cp)) return std::nullopt;
        out += text::encode(cp);
        p += 2;
        break;
      case 'u':
        if (!read_hex(s, p, 4, cp)) return std::nullopt;
        out += text::encode(cp);
        p += 4;
        break;
      case 'U':
        if (!read_hex(s, p, 8, cp)) return std::nullopt;
        out += text::encode(cp);
        p += 8;
        break;
      default:
        // Python keeps unrecognized escapes verbatim.
        out.push_back('\\');
        out.push_back(e);
    }
  }
  return std::nullopt;
}

std::optional<RewriteRule> parse_replace_call(std::string_view item) {
  std::size_t pos = 0;
  skip_ws(item, pos);
  constexpr std::string_view kw = "replace";
  if (item.substr(pos, kw.size()) != kw) return std::nullopt;
  pos += kw.size();
  if (!consume(item, pos, '(')) return std::nullopt;
  skip_ws(item, pos);
  auto a = parse_quoted(item, pos);
  if (!a || !consume(item, pos, ',')) return std::nullopt;
  skip_ws(item, pos);
  auto b = parse_quoted(item, pos);
  if (!b || !consume(item, pos, ')')) return std::nullopt;
  skip_ws(item, pos);
  if (pos != item.size()) return std::nullopt;
  return RewriteRule{std::move(*a), std::move(*b)};
}

namespace {

// Parses a list literal of replace-call strings beginning at s[pos] == '['.
std::optional<Cascade> parse_list_at(std::string_view s, std::size_t& pos) {
  std::size_t p = pos;
  if (!consume(s, p, '[')) return std::nullopt;
  Cascade rules;
  while (true) {
    skip_ws(s, p);
    auto item = parse_quoted(s, p);
    if (!item) return std::nullopt;
    auto rule = parse_replace_call(*item);
    if (!rule) return std::nullopt;
    rules.push_back(std::move(*rule));
    if (consume(s, p, ',')) {
      skip_ws(s, p);
      if (consume(s, p, ']')) break;
      continue;
    }
    if (consume(s, p, ']')) break;
    return std::nullopt;
  }
  pos = p;
  return rules;
}

}  // namespace

std::optional<Cascade> parse_cascade_block(std::string_view block) {
  std::optional<Cascade> last;
  std::size_t pos = 0;
  while ((pos = block.find('[', pos)) != std::string_view::npos) {
    std::size_t end = pos;
    if (auto c = parse_list_at(block, end)) {
      last = std::move(c);
      pos = end;
    } else {
      ++pos;
    }
  }
  return last;
}

ExtractedPrediction extract_pbe_prediction(std::string_view text) {
  ExtractedPrediction out;
  for (const auto& block : fenced_blocks(text)) {
    auto c = parse_cascade_block(block);
    if (!c) continue;
    if (!out.first_cascade) out.first_cascade = *c;
    out.last_cascade = std::move(c);
  }
  out.is_null = !out.last_cascade.has_value();
  return out;
}

// ---- normalization & scoring ---------------------------------------------

NormalizedCascade normalize_cascade(const Cascade& raw, std::size_t s_max,
                                    std::size_t L_max,
                                    const std::string& identity_symbol) {
  if (s_max < 1 || L_max < 1)
    throw PreconditionError("normalize_cascade: s_max and L_max must be >= 1");
  NormalizedCascade out;
  out.per_rule_valid.reserve(raw.size());
  for (const auto& r : raw) {
    const std::size_t a = text::length(r.source), b = text::length(r.target);
    out.per_rule_valid.push_back(a >= 1 && a <= s_max && b <= s_max);
  }
  out.truncated = raw.size() > L_max;
  const std::size_t kept = std::min(raw.size(), L_max);
  for (std::size_t k = 0; k < kept; ++k) {
    if (out.per_rule_valid[k]) {
      out.rules.push_back(raw[k]);
    } else {
      out.rules.push_back({identity_symbol, identity_symbol});
      ++out.substituted_identity_count;
    }
  }
  return out;
}

EvalSettings EvalSettings::from(const GeneratorParams& params) {
  return {params.s_max, params.L_max, params.alphabet.symbol(0)};
}

EvalRecord evaluate_pbe(const PbeInstance& instance,
                        const std::optional<NormalizedCascade>& prediction,
                        const EvalSettings& settings) {
  EvalRecord rec;
  rec.instance_id = instance.id;
  rec.is_null = !prediction.has_value();

  Cascade executed;
  if (prediction) {
    executed = prediction->rules;
    rec.per_rule_valid = prediction->per_rule_valid;
    const auto valid = std::count(rec.per_rule_valid.begin(), rec.per_rule_valid.end(), true);
    rec.valid_rate_contrib =
        rec.per_rule_valid.empty()
            ? 0.0
            : static_cast<double>(valid) / static_cast<double>(rec.per_rule_valid.size());
    rec.predicted_length = executed.size();
    Cascade valid_rules;
    for (std::size_t k = 0; k < executed.size(); ++k)
      if (prediction->per_rule_valid[k]) valid_rules.push_back(executed[k]);
    rec.predicted_category = classify_bfcc(valid_rules).category;
  } else {
    executed.push_back({settings.identity_symbol, settings.identity_symbol});
  }

  const StringVector predicted = apply_cascade(executed, instance.inputs);
  rec.pass = predicted == instance.outputs;
  const std::size_t baseline = levenshtein(instance.inputs, instance.outputs);
  if (baseline == 0) {
    rec.degenerate_denominator = true;
    rec.edit_sim = rec.pass ? 1.0 : 0.0;
  } else {
    const std::size_t remaining = levenshtein(predicted, instance.outputs);
    rec.edit_sim = 1.0 - static_cast<double>(remaining) / static_cast<double>(baseline);
  }
  rec.complexity = complexity(executed);
  return rec;
}

EvalRecord score_pbe_text(const PbeInstance& instance, std::string_view text,
                          const EvalSettings& settings, BlockChoice block,
                          std::size_t attempt_index) {
  const auto extracted = extract_pbe_prediction(text);
  const auto& raw =
      block == BlockChoice::First ? extracted.first_cascade : extracted.last_cascade;
  std::optional<NormalizedCascade> norm;
  if (raw)
    norm = normalize_cascade(*raw, settings.s_max, settings.L_max, settings.identity_symbol);
  EvalRecord rec = evaluate_pbe(instance, norm, settings);
  rec.attempt_index = attempt_index;
  if (raw) rec.raw_complexity = complexity(*raw);
  return rec;
}

AggregateMetrics aggregate_pbe(std::span<const EvalRecord> records) {
  if (records.empty()) throw PreconditionError("aggregate_pbe: no records");
  AggregateMetrics m;
  m.count = records.size();
  double pass = 0, sim = 0, valid = 0, cx = 0, raw_cx = 0;
  for (const auto& r : records) {
    m.passes += r.pass;
    m.nulls += r.is_null;
    m.degenerate += r.degenerate_denominator;
    pass += r.pass ? 1.0 : 0.0;
    sim += r.edit_sim;
    valid += r.valid_rate_contrib;
    cx += static_cast<double>(r.complexity);
    raw_cx += static_cast<double>(r.raw_complexity);
  }
  const double n = static_cast<double>(m.count);
  m.pass_at_1 = pass / n;
  m.edit_sim = sim / n;
  m.valid_rate = valid / n;
  m.complexity = cx / n;
  m.raw_complexity = raw_cx / n;
  return m;
}

namespace {

// Exact binomial coefficient, or nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > UINT64_MAX) return std::nullopt;
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace

double pass_at_k_estimate(std::size_t n, std::size_t c, std::size_t k) {
  if (c > n) throw PreconditionError("pass_at_k_estimate: need c <= n");
  if (k < 1 || k > n) throw PreconditionError("pass_at_k_estimate: need 1 <= k <= n");
  if (n - c < k) return 1.0;
  const auto total = binomial(n, k);
  const auto failing = binomial(n - c, k);
  if (total && failing)
    return static_cast<double>(*total - *failing) / static_cast<double>(*total);
  double miss = 1.0;
  for (std::size_t i = n - c + 1; i <= n; ++i)
    miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  return 1.0 - miss;
}

// ---- reordering -----------------------------------------------------------

std::optional<Permutation> extract_permutation(std::string_view text, std::size_t m) {
  if (m < 1) throw PreconditionError("extract_permutation: m must be >= 1");
  const auto blocks = fenced_blocks(text);
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    const auto j = nlohmann::json::parse(*it, nullptr, /*allow_exceptions=*/false);
    if (!j.is_array()) continue;
    const bool all_ints = std::all_of(j.begin(), j.end(),
                                      [](const auto& v) { return v.is_number_integer(); });
    if (!all_ints) continue;
    Permutation p;
    for (const auto& v : j) {
      const auto x = v.template get<long long>();
      if (x < 0) return std::nullopt;
      p.push_back(static_cast<std::size_t>(x));
    }
    if (!is_permutation_of_range(p, m)) return std::nullopt;
    return p;
  }
  return std::nullopt;
}

bool evaluate_reorder(const ReorderInstance& instance,
                      const std::optional<Permutation>& perm) {
  if (!perm || !is_permutation_of_range(*perm, instance.scrambled.size())) return false;
  return apply_cascade(reorder(instance.scrambled, *perm), instance.inputs) ==
         instance.outputs;
}

ReorderAggregate aggregate_reorder(std::span<const ReorderOutcome> results) {
  if (results.empty()) throw PreconditionError("aggregate_reorder: no results");
  ReorderAggregate a;
  for (const auto& r : results) {
    ++a.count;
    a.correct += r.correct;
    if (r.is_unique) {
      ++a.unique_count;
      a.unique_correct += r.correct;
    }
  }
  a.acc = static_cast<double>(a.correct) / static_cast<double>(a.count);
  if (a.unique_count)
    a.uacc = static_cast<double>(a.unique_correct) / static_cast<double>(a.unique_count);
  return a;
}

// ---- breakdowns -----------------------------------------------------------

BreakdownReports breakdown_reports(std::span<const EvalRecord> records,
                                   std::span<const PbeInstance> instances) {
  std::map<std::string_view, const PbeInstance*> by_id;
  for (const auto& inst : instances) by_id[inst.id] = &inst;

  BreakdownReports rep;
  for (const auto& rec : records) {
    const auto found = by_id.find(rec.instance_id);
    if (found == by_id.end()) continue;
    const PbeInstance& inst = *found->second;
    const std::size_t gt_len = inst.cascade.size();

    auto& [passes, total] = rep.pass_by_length[gt_len];
    passes += rec.pass;
    ++total;
    ++rep.length_confusion[gt_len][rec.is_null ? 0 : rec.predicted_length];
    ++rep.category_confusion[inst.category.str()]
                            [rec.predicted_category ? rec.predicted_category->str()
                                                    : "INVALID"];

    const std::array<bool, 4> truth = {inst.category.f, inst.category.b, inst.category.cf,
                                       inst.category.cb};
    for (std::size_t r = 0; r < 4; ++r) {
      RelationTable& t = rep.relation_tables[r][rec.pass ? 0 : 1];
      if (!rec.predicted_category) {
        ++t.invalid;
        continue;
      }
      const auto& pc = *rec.predicted_category;
      const std::array<bool, 4> pred = {pc.f, pc.b, pc.cf, pc.cb};
      if (truth[r] && pred[r]) ++t.tp;
      else if (!truth[r] && pred[r]) ++t.fp;
      else if (truth[r] && !pred[r]) ++t.fn;
      else ++t.tn;
    }
  }
  return rep;
}

}  // namespace pbekit
