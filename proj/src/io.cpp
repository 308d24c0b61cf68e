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

#include "pbekit/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "pbekit/errors.hpp"

namespace pbekit::io {
namespace {

Json rules_to_json(const Cascade& c) {
  Json arr = Json::array();
  for (const auto& r : c) arr.push_back({{"find", r.source}, {"replace", r.target}});
  return arr;
}

Cascade rules_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": programs must be an array");
  Cascade c;
  for (const auto& r : j) {
    reject_unknown_keys(r, {"find", "replace"}, where + ".programs[]");
    c.push_back({field<std::string>(r, "find", where), field<std::string>(r, "replace", where)});
  }
  return c;
}

Json edges_to_json(const std::vector<RelationEdge>& edges) {
  Json arr = Json::array();
  for (const auto& e : edges)
    arr.push_back(Json::array({e.i, e.kind == RelationKind::Feeding ? "F" : "B", e.j}));
  return arr;
}

std::vector<RelationEdge> edges_from_json(const Json& j, const std::string& where) {
  std::vector<RelationEdge> out;
  if (!j.is_array()) throw ValidationError(where + ": fb_edges must be an array");
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() || !e[1].is_string() ||
        !e[2].is_number_unsigned())
      throw ValidationError(where + ": fb_edges entries must be [i, \"F\"|\"B\", j]");
    const auto kind = e[1].get<std::string>();
    if (kind != "F" && kind != "B")
      throw ValidationError(where + ": fb_edges relation must be F or B");
    out.push_back({e[0].get<std::size_t>(),
                   kind == "F" ? RelationKind::Feeding : RelationKind::Bleeding,
                   e[2].get<std::size_t>()});
  }
  return out;
}

}  // namespace

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

Json to_json(const GeneratorParams& p) {
  return {{"n", p.n},
          {"alphabet", p.alphabet.to_utf8()},
          {"l_min", p.l_min},
          {"l_max", p.l_max},
          {"L_min", p.L_min},
          {"L_max", p.L_max},
          {"s_min", p.s_min},
          {"s_max", p.s_max},
          {"D", p.D},
          {"tau", p.tau},
          {"seed", p.seed},
          {"quota_mode", to_string(p.quota_mode)},
          {"post_patience_policy", to_string(p.post_patience_policy)},
          {"max_steps", p.max_steps}};
}

GeneratorParams params_from_json(const Json& j, GeneratorParams p) {
  const std::string where = "params";
  reject_unknown_keys(j,
                      {"n", "alphabet", "l_min", "l_max", "L_min", "L_max", "s_min", "s_max",
                       "D", "tau", "seed", "quota_mode", "post_patience_policy", "max_steps"},
                      where);
  auto size = [&](const char* key, std::size_t& out) {
    if (j.contains(key)) out = field<std::size_t>(j, key, where);
  };
  size("n", p.n);
  size("l_min", p.l_min);
  size("l_max", p.l_max);
  size("L_min", p.L_min);
  size("L_max", p.L_max);
  size("s_min", p.s_min);
  size("s_max", p.s_max);
  size("D", p.D);
  size("tau", p.tau);
  size("max_steps", p.max_steps);
  if (j.contains("seed")) p.seed = field<std::uint64_t>(j, "seed", where);
  if (j.contains("alphabet")) {
    try {
      p.alphabet = Alphabet::from_utf8(field<std::string>(j, "alphabet", where));
    } catch (const PreconditionError& e) {
      throw ValidationError(std::string("params.alphabet: ") + e.what());
    }
  }
  if (j.contains("quota_mode"))
    p.quota_mode = parse_quota_mode(field<std::string>(j, "quota_mode", where));
  if (j.contains("post_patience_policy"))
    p.post_patience_policy =
        parse_post_patience_policy(field<std::string>(j, "post_patience_policy", where));
  p.validate();
  return p;
}

Json to_json(const PbeInstance& inst) {
  return {{"id", inst.id},
          {"inputs", inst.inputs},
          {"outputs", inst.outputs},
          {"programs", rules_to_json(inst.cascade)},
          {"cascade_length", inst.cascade.size()},
          {"category", inst.category.str()},
          {"fb_edges", edges_to_json(inst.fb_edges)}};
}

PbeInstance instance_from_json(const Json& j) {
  const std::string where = "instance";
  reject_unknown_keys(
      j, {"id", "inputs", "outputs", "programs", "cascade_length", "category", "fb_edges"},
      where);
  PbeInstance inst;
  inst.id = field<std::string>(j, "id", where);
  const std::string w = where + " " + inst.id;
  inst.inputs = field<StringVector>(j, "inputs", w);
  inst.outputs = field<StringVector>(j, "outputs", w);
  inst.cascade = rules_from_json(j.at("programs"), w);
  if (field<std::size_t>(j, "cascade_length", w) != inst.cascade.size())
    throw ValidationError(w + ": cascade_length disagrees with programs");
  inst.category = CategoryString::parse(field<std::string>(j, "category", w));
  inst.fb_edges = j.contains("fb_edges") ? edges_from_json(j.at("fb_edges"), w)
                                         : std::vector<RelationEdge>{};
  if (inst.inputs.size() != inst.outputs.size())
    throw ValidationError(w + ": inputs and outputs differ in length");
  return inst;
}

Json to_json(const Dataset& ds) {
  Json instances = Json::array();
  for (const auto& inst : ds.instances) instances.push_back(to_json(inst));
  const auto& s = ds.stats;
  return {{"params", to_json(ds.params)},
          {"instances", std::move(instances)},
          {"stats",
           {{"attempts", s.attempts},
            {"acceptances", s.acceptances},
            {"rejected_ineffective", s.rejected_ineffective},
            {"rejected_duplicate", s.rejected_duplicate},
            {"rejected_quota", s.rejected_quota},
            {"patience_exhausted", s.patience_exhausted},
            {"step_limit_hit", s.step_limit_hit}}}};
}

Dataset dataset_from_json(const Json& j) {
  reject_unknown_keys(j, {"params", "instances", "stats"}, "dataset");
  Dataset ds;
  ds.params = params_from_json(j.at("params"));
  for (const auto& inst : j.at("instances")) ds.instances.push_back(instance_from_json(inst));
  if (j.contains("stats")) {
    const auto& s = j.at("stats");
    auto get = [&](const char* k, auto& out) {
      if (s.contains(k)) out = s.at(k).get<std::decay_t<decltype(out)>>();
    };
    get("attempts", ds.stats.attempts);
    get("acceptances", ds.stats.acceptances);
    get("rejected_ineffective", ds.stats.rejected_ineffective);
    get("rejected_duplicate", ds.stats.rejected_duplicate);
    get("rejected_quota", ds.stats.rejected_quota);
    get("patience_exhausted", ds.stats.patience_exhausted);
    get("step_limit_hit", ds.stats.step_limit_hit);
  }
  return ds;
}

Json to_json(const ReorderInstance& inst) {
  const Cascade original = reorder(inst.scrambled, inst.gt_order);
  Json j = {{"id", inst.source_id},
            {"inputs", inst.inputs},
            {"outputs", inst.outputs},
            {"programs", rules_to_json(original)},
            {"cascade_length", original.size()},
            {"category", inst.category.str()},
            {"fb_edges", edges_to_json(inst.fb_edges)},
            {"scrambled_programs", rules_to_json(inst.scrambled)},
            {"gt_order", inst.gt_order},
            {"n_valid_orders", nullptr},
            {"is_unique", inst.is_unique}};
  if (inst.n_valid_orders) j["n_valid_orders"] = *inst.n_valid_orders;
  return j;
}

ReorderInstance reorder_instance_from_json(const Json& j) {
  const std::string where = "perm instance";
  reject_unknown_keys(j,
                      {"id", "inputs", "outputs", "programs", "cascade_length", "category",
                       "fb_edges", "scrambled_programs", "gt_order", "n_valid_orders",
                       "is_unique"},
                      where);
  ReorderInstance inst;
  inst.source_id = field<std::string>(j, "id", where);
  const std::string w = where + " " + inst.source_id;
  inst.inputs = field<StringVector>(j, "inputs", w);
  inst.outputs = field<StringVector>(j, "outputs", w);
  inst.scrambled = rules_from_json(j.at("scrambled_programs"), w);
  inst.gt_order = field<Permutation>(j, "gt_order", w);
  if (!is_permutation_of_range(inst.gt_order, inst.scrambled.size()))
    throw ValidationError(w + ": gt_order is not a permutation of the scrambled programs");
  if (j.contains("n_valid_orders") && !j.at("n_valid_orders").is_null())
    inst.n_valid_orders = field<std::size_t>(j, "n_valid_orders", w);
  inst.is_unique = field<bool>(j, "is_unique", w);
  if (j.contains("category"))
    inst.category = CategoryString::parse(field<std::string>(j, "category", w));
  if (j.contains("fb_edges")) inst.fb_edges = edges_from_json(j.at("fb_edges"), w);
  return inst;
}

Json to_json(const PermDataset& ds) {
  Json instances = Json::array();
  for (const auto& inst : ds.instances) instances.push_back(to_json(inst));
  return {{"source_params", to_json(ds.source_params)},
          {"order_count_cap", ds.order_count_cap},
          {"instances", std::move(instances)}};
}

PermDataset perm_dataset_from_json(const Json& j) {
  reject_unknown_keys(j, {"source_params", "order_count_cap", "instances"}, "perm dataset");
  PermDataset ds;
  ds.source_params = params_from_json(j.at("source_params"));
  ds.order_count_cap = field<std::size_t>(j, "order_count_cap", "perm dataset");
  for (const auto& inst : j.at("instances"))
    ds.instances.push_back(reorder_instance_from_json(inst));
  return ds;
}

Json to_json(const EvalRecord& r) {
  Json j = {{"instance_id", r.instance_id},
            {"attempt_index", r.attempt_index},
            {"pass", r.pass},
            {"edit_sim", r.edit_sim},
            {"valid_rate_contrib", r.valid_rate_contrib},
            {"complexity", r.complexity},
            {"raw_complexity", r.raw_complexity},
            {"is_null", r.is_null},
            {"degenerate_denominator", r.degenerate_denominator},
            {"predicted_length", r.predicted_length},
            {"predicted_category", nullptr},
            {"per_rule_valid", r.per_rule_valid}};
  if (r.predicted_category) j["predicted_category"] = r.predicted_category->str();
  return j;
}

EvalRecord eval_record_from_json(const Json& j) {
  const std::string where = "eval record";
  reject_unknown_keys(j,
                      {"instance_id", "attempt_index", "pass", "edit_sim",
                       "valid_rate_contrib", "complexity", "raw_complexity", "is_null",
                       "degenerate_denominator", "predicted_length", "predicted_category",
                       "per_rule_valid"},
                      where);
  EvalRecord r;
  r.instance_id = field<std::string>(j, "instance_id", where);
  r.attempt_index = field<std::size_t>(j, "attempt_index", where);
  r.pass = field<bool>(j, "pass", where);
  r.edit_sim = field<double>(j, "edit_sim", where);
  r.valid_rate_contrib = field<double>(j, "valid_rate_contrib", where);
  r.complexity = field<std::size_t>(j, "complexity", where);
  r.raw_complexity = field<std::size_t>(j, "raw_complexity", where);
  r.is_null = field<bool>(j, "is_null", where);
  r.degenerate_denominator = field<bool>(j, "degenerate_denominator", where);
  r.predicted_length = field<std::size_t>(j, "predicted_length", where);
  if (!j.at("predicted_category").is_null())
    r.predicted_category =
        CategoryString::parse(field<std::string>(j, "predicted_category", where));
  r.per_rule_valid = field<std::vector<bool>>(j, "per_rule_valid", where);
  return r;
}

Json to_json(const AggregateMetrics& m) {
  return {{"count", m.count},
          {"passes", m.passes},
          {"nulls", m.nulls},
          {"degenerate", m.degenerate},
          {"pass_at_1", m.pass_at_1},
          {"edit_sim", m.edit_sim},
          {"valid_rate", m.valid_rate},
          {"complexity", m.complexity},
          {"raw_complexity", m.raw_complexity}};
}

Json to_json(const ReorderAggregate& a) {
  Json j = {{"count", a.count},
            {"correct", a.correct},
            {"unique_count", a.unique_count},
            {"unique_correct", a.unique_correct},
            {"acc", a.acc},
            {"uacc", nullptr}};
  if (a.uacc) j["uacc"] = *a.uacc;
  return j;
}

Json to_json(const BreakdownReports& b) {
  Json by_len = Json::object();
  for (const auto& [len, pt] : b.pass_by_length)
    by_len[std::to_string(len)] = {
        {"passes", pt.first},
        {"total", pt.second},
        {"pass_rate", static_cast<double>(pt.first) / static_cast<double>(pt.second)}};
  Json len_conf = Json::object();
  for (const auto& [gt, row] : b.length_confusion) {
    Json r = Json::object();
    for (const auto& [pred, n] : row) r[std::to_string(pred)] = n;
    len_conf[std::to_string(gt)] = std::move(r);
  }
  Json cat_conf = Json::object();
  for (const auto& [gt, row] : b.category_confusion) {
    Json r = Json::object();
    for (const auto& [pred, n] : row) r[pred] = n;
    cat_conf[gt] = std::move(r);
  }
  Json rel = Json::object();
  for (std::size_t k = 0; k < 4; ++k) {
    Json split = Json::object();
    for (std::size_t s = 0; s < 2; ++s) {
      const auto& t = b.relation_tables[k][s];
      split[s == 0 ? "pass" : "fail"] = {
          {"tp", t.tp}, {"fp", t.fp}, {"fn", t.fn}, {"tn", t.tn}, {"invalid", t.invalid}};
    }
    rel[kRelationNames[k]] = std::move(split);
  }
  return {{"pass_by_length", std::move(by_len)},
          {"length_confusion", std::move(len_conf)},
          {"category_confusion", std::move(cat_conf)},
          {"relation_tables", std::move(rel)}};
}

std::string dump(const Json& j, int indent) {
  return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << dump(j) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace pbekit::io
