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

#include "pbekit/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "pbekit/errors.hpp"
#include "pbekit/gateway.hpp"
#include "pbekit/io.hpp"
#include "pbekit/permuter.hpp"
#include "pbekit/proposer.hpp"
#include "pbekit/relations.hpp"

namespace pbekit::cli {

using io::field;
using io::Json;

namespace {

// ---- run config -----------------------------------------------------------

struct Paths {
  std::optional<std::string> dataset, perm_dataset, attempts, predictions, output;
};

struct RunConfig {
  GeneratorParams generator;
  SolverConfig solver;
  Paths paths;
  std::size_t order_count_cap = kDefaultOrderCountCap;
  VerifyOptions verify;
  BlockChoice block = BlockChoice::Last;
  double smoothing = 1.0;
};

BlockChoice parse_block(const std::string& s) {
  if (s == "last") return BlockChoice::Last;
  if (s == "first") return BlockChoice::First;
  throw ValidationError("block must be 'last' or 'first', got '" + s + "'");
}

RunConfig load_run_config(const std::optional<std::string>& path) {
  RunConfig cfg;
  if (!path) return cfg;
  const Json j = io::read_json_file(*path);
  if (!j.is_object()) throw ValidationError(*path + ": run config must be an object");
  io::reject_unknown_keys(j, {"generator", "solver", "paths", "perm", "verify", "eval"}, *path);
  if (j.contains("generator")) cfg.generator = io::params_from_json(j["generator"]);
  if (j.contains("solver")) cfg.solver = solver_config_from_json(j["solver"]);
  if (j.contains("paths")) {
    const Json& p = j["paths"];
    const std::string where = *path + ".paths";
    io::reject_unknown_keys(p, {"dataset", "perm_dataset", "attempts", "predictions", "output"},
                            where);
    auto get = [&](const char* key, std::optional<std::string>& out) {
      if (p.contains(key)) out = field<std::string>(p, key, where);
    };
    get("dataset", cfg.paths.dataset);
    get("perm_dataset", cfg.paths.perm_dataset);
    get("attempts", cfg.paths.attempts);
    get("predictions", cfg.paths.predictions);
    get("output", cfg.paths.output);
  }
  if (j.contains("perm")) {
    const std::string where = *path + ".perm";
    io::reject_unknown_keys(j["perm"], {"order_count_cap"}, where);
    if (j["perm"].contains("order_count_cap"))
      cfg.order_count_cap = field<std::size_t>(j["perm"], "order_count_cap", where);
  }
  if (j.contains("verify")) {
    const Json& v = j["verify"];
    const std::string where = *path + ".verify";
    io::reject_unknown_keys(v, {"pairs", "alphabet", "min_len", "max_len", "keep_examples"},
                            where);
    if (v.contains("pairs")) cfg.verify.pairs = field<std::size_t>(v, "pairs", where);
    if (v.contains("alphabet")) cfg.verify.alphabet = field<std::string>(v, "alphabet", where);
    if (v.contains("min_len")) cfg.verify.min_len = field<std::size_t>(v, "min_len", where);
    if (v.contains("max_len")) cfg.verify.max_len = field<std::size_t>(v, "max_len", where);
    if (v.contains("keep_examples"))
      cfg.verify.keep_examples = field<std::size_t>(v, "keep_examples", where);
  }
  if (j.contains("eval")) {
    const Json& e = j["eval"];
    const std::string where = *path + ".eval";
    io::reject_unknown_keys(e, {"block", "smoothing"}, where);
    if (e.contains("block")) cfg.block = parse_block(field<std::string>(e, "block", where));
    if (e.contains("smoothing")) cfg.smoothing = field<double>(e, "smoothing", where);
  }
  return cfg;
}

std::string require_path(const std::optional<std::string>& flag,
                         const std::optional<std::string>& from_config, const char* what) {
  if (flag) return *flag;
  if (from_config) return *from_config;
  throw ValidationError(std::string("missing ") + what + " path (flag or paths section)");
}

void emit(const Json& j, const std::optional<std::string>& path, std::ostream& out) {
  if (path)
    io::write_json_file(*path, j);
  else
    out << io::dump(j) << '\n';
}

// ---- reports --------------------------------------------------------------

Json balance_json(const BalanceReport& r) {
  Json j;
  Json cats = Json::object();
  for (std::size_t k = 0; k < kCategoryCount; ++k)
    cats[CategoryString::from_index(k).str()] = r.category_counts[k];
  j["category_counts"] = cats;
  Json lens = Json::object();
  for (const auto& [len, n] : r.length_counts) lens[std::to_string(len)] = n;
  j["length_counts"] = lens;
  j["smoothing"] = r.smoothing;
  j["kl_nats"] = r.kl_nats;
  Json by_len = Json::object();
  for (const auto& [len, kl] : r.kl_by_length) by_len[std::to_string(len)] = kl;
  j["kl_by_length"] = by_len;
  return j;
}

Json discrepancies_json(const std::vector<Discrepancy>& v) {
  Json arr = Json::array();
  for (const auto& d : v)
    arr.push_back({{"first", to_string(d.first)},
                   {"second", to_string(d.second)},
                   {"witness", d.witness ? Json(*d.witness) : Json(nullptr)}});
  return arr;
}

Json verify_json(const VerifyReport& r) {
  Json j;
  j["pairs"] = r.pairs;
  j["feeds_true"] = r.feeds_true;
  j["bleeds_true"] = r.bleeds_true;
  j["feeds_unsound"] = r.feeds_unsound;
  j["feeds_unwitnessed"] = r.feeds_unwitnessed;
  j["bleeds_unsound"] = r.bleeds_unsound;
  j["bleeds_unwitnessed"] = r.bleeds_unwitnessed;
  j["identity_violations"] = r.identity_violations;
  j["clean"] = r.clean();
  j["examples"] = {{"feeds_unsound", discrepancies_json(r.feeds_unsound_examples)},
                   {"feeds_unwitnessed", discrepancies_json(r.feeds_unwitnessed_examples)},
                   {"bleeds_unsound", discrepancies_json(r.bleeds_unsound_examples)},
                   {"bleeds_unwitnessed", discrepancies_json(r.bleeds_unwitnessed_examples)}};
  return j;
}

Json pbe_summary_json(const PbeRunSummary& s, BlockChoice block) {
  Json j;
  j["block"] = block == BlockChoice::Last ? "last" : "first";
  j["metrics"] = io::to_json(block == BlockChoice::Last ? s.metrics_last : s.metrics_first);
  j["metrics_last_block"] = io::to_json(s.metrics_last);
  j["metrics_first_block"] = io::to_json(s.metrics_first);
  Json pak = Json::object();
  for (const auto& [k, v] : s.pass_at_k) pak[std::to_string(k)] = v;
  j["pass_at_k"] = pak;
  return j;
}

// ---- predictions and backends ---------------------------------------------

using TextTable = std::map<std::string, std::vector<std::string>>;

TextTable read_text_table(const std::string& path) {
  const Json j = io::read_json_file(path);
  if (!j.is_object())
    throw ValidationError(path + ": expected an object mapping instance id to text(s)");
  TextTable t;
  for (const auto& [id, v] : j.items()) {
    if (v.is_string()) {
      t[id].push_back(v.get<std::string>());
    } else if (v.is_array()) {
      for (const auto& s : v) {
        if (!s.is_string()) throw ValidationError(path + ": " + id + ": texts must be strings");
        t[id].push_back(s.get<std::string>());
      }
    } else {
      throw ValidationError(path + ": " + id + ": expected a string or an array of strings");
    }
  }
  return t;
}

TextTable ground_truth_texts(const std::vector<PbeInstance>& instances) {
  TextTable t;
  for (const auto& inst : instances) t[inst.id] = {render_cascade_block(inst.cascade)};
  return t;
}

std::string permutation_block(const Permutation& p) {
  std::string s = "```json\n[";
  for (std::size_t k = 0; k < p.size(); ++k) s += (k ? ", " : "") + std::to_string(p[k]);
  return s + "]\n```";
}

TextTable ground_truth_texts(const std::vector<ReorderInstance>& instances) {
  TextTable t;
  for (const auto& inst : instances) t[inst.source_id] = {permutation_block(inst.gt_order)};
  return t;
}

template <typename Instances>
std::unique_ptr<ChatBackend> make_backend(const std::string& name, const SolverConfig& solver,
                                          const Instances& instances) {
  if (name == "http") return std::make_unique<HttpChatBackend>(solver.timeout_ms);
  if (name == "mock-gt")
    return std::make_unique<MockChatBackend>(table_responder(ground_truth_texts(instances)));
  if (name == "mock-null") return std::make_unique<MockChatBackend>(table_responder({}));
  constexpr std::string_view script = "mock-script:";
  if (name.rfind(script, 0) == 0)
    return std::make_unique<MockChatBackend>(
        table_responder(read_text_table(name.substr(script.size()))));
  throw ValidationError("unknown backend '" + name +
                        "' (http, mock-gt, mock-null, mock-script:<file>)");
}

// Attempt logs for offline predictions: text table entries become attempts
// 0..n-1 of their instance.
std::vector<AttemptLog> logs_from_table(const std::vector<PbeInstance>& instances,
                                        const TextTable& table, const EvalSettings& settings) {
  std::vector<AttemptLog> logs;
  for (const auto& inst : instances) {
    const auto it = table.find(inst.id);
    if (it == table.end()) continue;
    const std::string prompt = render_pbe_prompt(inst, settings.s_max, settings.L_max);
    for (std::size_t a = 0; a < it->second.size(); ++a) {
      ChatResult r;
      r.content = it->second[a];
      logs.push_back(score_pbe_attempt(inst, settings, a, prompt, &r, ""));
    }
  }
  return logs;
}

std::vector<AttemptLog> logs_from_table(const std::vector<ReorderInstance>& instances,
                                        const TextTable& table) {
  std::vector<AttemptLog> logs;
  for (const auto& inst : instances) {
    const auto it = table.find(inst.source_id);
    if (it == table.end()) continue;
    const std::string prompt = render_reorder_prompt(inst);
    for (std::size_t a = 0; a < it->second.size(); ++a) {
      ChatResult r;
      r.content = it->second[a];
      logs.push_back(score_reorder_attempt(inst, a, prompt, &r, ""));
    }
  }
  return logs;
}

template <typename Table>
void check_table_ids(const Table& table, const std::set<std::string>& known,
                     const std::string& path) {
  for (const auto& [id, texts] : table)
    if (!known.count(id)) throw ValidationError(path + ": unknown instance id " + id);
}

// ---- command state --------------------------------------------------------

struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> dataset;
  std::optional<std::string> perm_dataset;
  std::optional<std::string> attempts;
  std::optional<std::string> predictions;
  bool ground_truth = false;
  std::string backend = "http";
  std::optional<std::size_t> budget;
  std::optional<std::size_t> max_in_flight;
  std::optional<std::string> api_key_env;
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  bool early_stop = false;
  std::optional<std::string> block;
  std::optional<double> smoothing;
  std::optional<std::size_t> size;
  std::optional<std::string> quota_mode;
  std::optional<std::string> policy;
  std::optional<std::size_t> patience;
  std::optional<std::size_t> max_steps;
  std::optional<std::size_t> cascade_min;
  std::optional<std::size_t> cascade_max;
  std::optional<std::size_t> cap;
  std::optional<std::size_t> pairs;
  std::optional<std::string> alphabet;
  std::optional<std::size_t> min_len;
  std::optional<std::size_t> max_len;
  std::optional<std::size_t> keep_examples;
};

void apply_solver_flags(const Flags& f, SolverConfig& s) {
  if (f.budget) s.sampling_budget = *f.budget;
  if (f.max_in_flight) s.max_in_flight = *f.max_in_flight;
  if (f.api_key_env) s.api_key_env = *f.api_key_env;
  if (f.endpoint) s.endpoint_url = *f.endpoint;
  if (f.model) s.model_id = *f.model;
  if (f.early_stop) s.early_stop = true;
  s.validate();
}

std::vector<PbeInstance> load_instances(const std::string& path, GeneratorParams* params) {
  Dataset ds = io::dataset_from_json(io::read_json_file(path));
  if (params) *params = ds.params;
  return std::move(ds.instances);
}

std::vector<ReorderInstance> load_reorder_instances(const std::string& path) {
  return io::perm_dataset_from_json(io::read_json_file(path)).instances;
}

std::set<std::string> ids_of(const std::vector<PbeInstance>& v) {
  std::set<std::string> s;
  for (const auto& i : v) s.insert(i.id);
  return s;
}

std::set<std::string> ids_of(const std::vector<ReorderInstance>& v) {
  std::set<std::string> s;
  for (const auto& i : v) s.insert(i.source_id);
  return s;
}

int cmd_gen(const Flags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(f.config);
  GeneratorParams p = cfg.generator;
  p.seed = *f.seed;
  if (f.size) p.D = *f.size;
  if (f.quota_mode) p.quota_mode = parse_quota_mode(*f.quota_mode);
  if (f.policy) p.post_patience_policy = parse_post_patience_policy(*f.policy);
  if (f.patience) p.tau = *f.patience;
  if (f.max_steps) p.max_steps = *f.max_steps;
  if (f.cascade_min) p.L_min = *f.cascade_min;
  if (f.cascade_max) p.L_max = *f.cascade_max;
  p.validate();
  const Dataset ds = generate_dataset(p);
  emit(io::to_json(ds), f.out ? f.out : cfg.paths.output, out);
  err << "generated " << ds.instances.size() << " instances in " << ds.stats.attempts
      << " steps\n";
  return 0;
}

int cmd_perm(const Flags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(f.config);
  const std::string path = require_path(f.dataset, cfg.paths.dataset, "dataset");
  const Dataset ds = io::dataset_from_json(io::read_json_file(path));
  io::PermDataset pd;
  pd.source_params = ds.params;
  pd.order_count_cap = f.cap ? *f.cap : cfg.order_count_cap;
  pd.instances = build_perm_dataset(ds, pd.order_count_cap);
  emit(io::to_json(pd), f.out ? f.out : cfg.paths.output, out);
  std::size_t unique = 0;
  for (const auto& r : pd.instances) unique += r.is_unique;
  err << "built " << pd.instances.size() << " reorder instances (" << unique << " unique) from "
      << ds.instances.size() << "\n";
  return 0;
}

int cmd_solve(const Flags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(f.config);
  apply_solver_flags(f, cfg.solver);
  GeneratorParams params;
  const auto instances =
      load_instances(require_path(f.dataset, cfg.paths.dataset, "dataset"), &params);
  const std::string attempts = require_path(f.attempts, cfg.paths.attempts, "attempts");
  const EvalSettings settings = EvalSettings::from(params);
  auto backend = make_backend(f.backend, cfg.solver, instances);
  AttemptWriter writer(attempts);
  const auto logs = solve_dataset(instances, cfg.solver, *backend, settings, &writer);
  const PbeRunSummary s = summarize_pbe_run(instances, logs, settings);
  Json j = pbe_summary_json(s, cfg.block);
  j["attempts"] = logs.size();
  emit(j, f.out ? f.out : cfg.paths.output, out);
  err << "wrote " << logs.size() << " attempts to " << attempts << "\n";
  return 0;
}

int cmd_solve_reorder(const Flags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(f.config);
  apply_solver_flags(f, cfg.solver);
  const auto instances = load_reorder_instances(
      require_path(f.perm_dataset, cfg.paths.perm_dataset, "perm dataset"));
  const std::string attempts = require_path(f.attempts, cfg.paths.attempts, "attempts");
  auto backend = make_backend(f.backend, cfg.solver, instances);
  AttemptWriter writer(attempts);
  const auto logs = solve_dataset(instances, cfg.solver, *backend, &writer);
  const ReorderRunSummary s = summarize_reorder_run(instances, logs);
  Json j;
  j["aggregate"] = io::to_json(s.aggregate);
  j["attempts"] = logs.size();
  emit(j, f.out ? f.out : cfg.paths.output, out);
  err << "wrote " << logs.size() << " attempts to " << attempts << "\n";
  return 0;
}

// Attempts from --attempts, --predictions, or --ground-truth (exactly one).
template <typename Instances, typename FromTable>
std::vector<AttemptLog> gather_logs(const Flags& f, const RunConfig& cfg,
                                    const Instances& instances, FromTable from_table) {
  const int sources = (f.attempts ? 1 : 0) + (f.predictions ? 1 : 0) + (f.ground_truth ? 1 : 0);
  if (sources > 1)
    throw ValidationError("give only one of --attempts, --predictions, --ground-truth");
  if (f.ground_truth) return from_table(ground_truth_texts(instances));
  if (f.predictions || (!f.attempts && cfg.paths.predictions && !cfg.paths.attempts)) {
    const std::string path = f.predictions ? *f.predictions : *cfg.paths.predictions;
    const TextTable table = read_text_table(path);
    check_table_ids(table, ids_of(instances), path);
    return from_table(table);
  }
  return load_attempts(require_path(f.attempts, cfg.paths.attempts, "attempts"));
}

int cmd_eval(const Flags& f, std::ostream& out, bool with_breakdowns) {
  RunConfig cfg = load_run_config(f.config);
  if (f.block) cfg.block = parse_block(*f.block);
  GeneratorParams params;
  const auto instances =
      load_instances(require_path(f.dataset, cfg.paths.dataset, "dataset"), &params);
  const EvalSettings settings = EvalSettings::from(params);
  const auto logs = gather_logs(f, cfg, instances, [&](const TextTable& t) {
    return logs_from_table(instances, t, settings);
  });
  const PbeRunSummary s = summarize_pbe_run(instances, logs, settings);
  Json j = pbe_summary_json(s, cfg.block);
  if (with_breakdowns) {
    const auto& recs = cfg.block == BlockChoice::Last ? s.selected_last : s.selected_first;
    j["breakdowns"] = io::to_json(breakdown_reports(recs, instances));
    Json per = Json::array();
    for (const auto& r : recs) per.push_back(io::to_json(r));
    j["selected"] = per;
  }
  emit(j, f.out ? f.out : cfg.paths.output, out);
  return 0;
}

int cmd_eval_reorder(const Flags& f, std::ostream& out) {
  RunConfig cfg = load_run_config(f.config);
  const auto instances = load_reorder_instances(
      require_path(f.perm_dataset, cfg.paths.perm_dataset, "perm dataset"));
  const auto logs = gather_logs(f, cfg, instances, [&](const TextTable& t) {
    return logs_from_table(instances, t);
  });
  const ReorderRunSummary s = summarize_reorder_run(instances, logs);
  Json j;
  j["aggregate"] = io::to_json(s.aggregate);
  Json by_len = Json::object();
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> acc;
  for (const auto& o : s.selected) {
    acc[o.length].first += o.correct;
    ++acc[o.length].second;
  }
  for (const auto& [len, v] : acc)
    by_len[std::to_string(len)] = {{"correct", v.first}, {"total", v.second}};
  j["by_length"] = by_len;
  emit(j, f.out ? f.out : cfg.paths.output, out);
  return 0;
}

int cmd_verify(const Flags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(f.config);
  VerifyOptions o = cfg.verify;
  o.seed = *f.seed;
  if (f.pairs) o.pairs = *f.pairs;
  if (f.alphabet) o.alphabet = *f.alphabet;
  if (f.min_len) o.min_len = *f.min_len;
  if (f.max_len) o.max_len = *f.max_len;
  if (f.keep_examples) o.keep_examples = *f.keep_examples;
  const VerifyReport r = verify_relations(o);
  emit(verify_json(r), f.out, out);
  if (!r.clean()) {
    err << "relation check found discrepancies: feeds " << r.feeds_unsound << " unsound, "
        << r.feeds_unwitnessed << " unwitnessed; bleeds " << r.bleeds_unsound << " unsound, "
        << r.bleeds_unwitnessed << " unwitnessed; identity " << r.identity_violations << "\n";
    return 1;
  }
  return 0;
}

int cmd_stats(const Flags& f, std::ostream& out) {
  RunConfig cfg = load_run_config(f.config);
  const double smoothing = f.smoothing ? *f.smoothing : cfg.smoothing;
  const Dataset ds = io::dataset_from_json(
      io::read_json_file(require_path(f.dataset, cfg.paths.dataset, "dataset")));
  Json j = balance_json(kl_balance_report(ds, smoothing));
  j["instances"] = ds.instances.size();
  j["generation"] = io::to_json(ds)["stats"];
  emit(j, f.out ? f.out : cfg.paths.output, out);
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"String-rewrite cascade benchmark toolkit", "pbekit"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run config");
    sub->add_option("-o,--out", f.out, "Output file (default: stdout)");
  };
  auto solver_opts = [&](CLI::App* sub) {
    sub->add_option("--backend", f.backend, "http | mock-gt | mock-null | mock-script:<file>");
    sub->add_option("-k,--budget", f.budget, "Attempts per instance");
    sub->add_option("--max-in-flight", f.max_in_flight, "Concurrent requests");
    sub->add_option("--api-key-env", f.api_key_env, "Environment variable holding the API key");
    sub->add_option("--endpoint", f.endpoint, "Chat-completion URL");
    sub->add_option("--model", f.model, "Model id");
    sub->add_flag("--early-stop", f.early_stop, "Stop an instance at its first success");
    sub->add_option("--attempts", f.attempts, "Attempt log (JSONL) to write");
  };
  auto sources = [&](CLI::App* sub) {
    sub->add_option("--attempts", f.attempts, "Attempt log (JSONL)");
    sub->add_option("--predictions", f.predictions, "JSON object: id -> text or [texts]");
    sub->add_flag("--ground-truth", f.ground_truth, "Score each instance's own solution");
  };

  auto* gen = app.add_subcommand("gen", "Generate a balanced PBE dataset");
  common(gen);
  gen->add_option("--seed", f.seed, "RNG seed")->required();
  gen->add_option("--size", f.size, "Dataset size D");
  gen->add_option("--quota-mode", f.quota_mode, "category | length | both");
  gen->add_option("--policy", f.policy, "accept-any | keep-length-quota");
  gen->add_option("--patience", f.patience, "Patience tau");
  gen->add_option("--max-steps", f.max_steps, "Hard step limit (0 = none)");
  gen->add_option("--min-cascade", f.cascade_min, "Minimum cascade length");
  gen->add_option("--max-cascade", f.cascade_max, "Maximum cascade length");

  auto* perm = app.add_subcommand("perm", "Build the reordering dataset");
  common(perm);
  perm->add_option("--dataset", f.dataset, "PBE dataset JSON");
  perm->add_option("--cap", f.cap, "Skip order counting above this many permutations");

  auto* solve = app.add_subcommand("solve", "Run the solver on a PBE dataset");
  common(solve);
  solve->add_option("--dataset", f.dataset, "PBE dataset JSON");
  solver_opts(solve);

  auto* solve_r = app.add_subcommand("solve-reorder", "Run the solver on a reordering dataset");
  common(solve_r);
  solve_r->add_option("--perm-dataset", f.perm_dataset, "Reordering dataset JSON");
  solver_opts(solve_r);

  auto* eval = app.add_subcommand("eval", "Score PBE attempts or predictions");
  common(eval);
  eval->add_option("--dataset", f.dataset, "PBE dataset JSON");
  eval->add_option("--block", f.block, "last | first");
  sources(eval);

  auto* eval_r = app.add_subcommand("eval-reorder", "Score reordering attempts or predictions");
  common(eval_r);
  eval_r->add_option("--perm-dataset", f.perm_dataset, "Reordering dataset JSON");
  sources(eval_r);

  auto* report = app.add_subcommand("report", "Metrics plus per-length and per-relation breakdowns");
  common(report);
  report->add_option("--dataset", f.dataset, "PBE dataset JSON");
  report->add_option("--block", f.block, "last | first");
  sources(report);

  auto* verify = app.add_subcommand("verify-relations", "Cross-check feeds/bleeds against brute force");
  common(verify);
  verify->add_option("--seed", f.seed, "RNG seed")->required();
  verify->add_option("--pairs", f.pairs, "Random rule pairs");
  verify->add_option("--alphabet", f.alphabet, "Symbols");
  verify->add_option("--min-len", f.min_len, "Minimum source/target length");
  verify->add_option("--max-len", f.max_len, "Maximum source/target length");
  verify->add_option("--keep-examples", f.keep_examples, "Examples kept per discrepancy class");

  auto* stats = app.add_subcommand("stats", "Category/length histogram and KL from uniform");
  common(stats);
  stats->add_option("--dataset", f.dataset, "PBE dataset JSON");
  stats->add_option("--smoothing", f.smoothing, "Additive smoothing");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(f, out, err);
    if (perm->parsed()) return cmd_perm(f, out, err);
    if (solve->parsed()) return cmd_solve(f, out, err);
    if (solve_r->parsed()) return cmd_solve_reorder(f, out, err);
    if (eval->parsed()) return cmd_eval(f, out, false);
    if (report->parsed()) return cmd_eval(f, out, true);
    if (eval_r->parsed()) return cmd_eval_reorder(f, out);
    if (verify->parsed()) return cmd_verify(f, out, err);
    if (stats->parsed()) return cmd_stats(f, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace pbekit::cli
