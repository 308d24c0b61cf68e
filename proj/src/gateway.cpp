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

#include "pbekit/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "pbekit/errors.hpp"
#include "pbekit/text.hpp"

namespace pbekit {

using io::field;
using io::Json;

// ---- prompts --------------------------------------------------------------

std::string python_quote(std::string_view s, char quote) {
  std::string out(1, quote);
  for (const char ch : s) {
    const auto u = static_cast<unsigned char>(ch);
    if (ch == '\\' || ch == quote) {
      out += '\\';
      out += ch;
    } else if (ch == '\n') {
      out += "\\n";
    } else if (ch == '\t') {
      out += "\\t";
    } else if (ch == '\r') {
      out += "\\r";
    } else if (u < 0x20 || u == 0x7f) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", u);
      out += buf;
    } else {
      out += ch;
    }
  }
  out += quote;
  return out;
}

std::string render_string_list(const StringVector& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += python_quote(v[k], '"');
  }
  return out + "]";
}

namespace {

std::string replace_call(const RewriteRule& r, char quote, const char* sep) {
  return "replace(" + python_quote(r.source, quote) + sep + python_quote(r.target, quote) + ")";
}

void substitute_all(std::string& s, std::string_view key, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = s.find(key, pos)) != std::string::npos) {
    s.replace(pos, key.size(), value);
    pos += value.size();
  }
}

}  // namespace

std::string render_cascade_block(const Cascade& cascade) {
  std::string out = "```python\n[";
  for (std::size_t k = 0; k < cascade.size(); ++k) {
    if (k) out += ", ";
    out += python_quote(replace_call(cascade[k], '\'', ","), '"');
  }
  return out + "]\n```";
}

std::string render_pbe_prompt(const PbeInstance& instance, std::size_t s_max,
                              std::size_t L_max) {
  std::string p;
  p += "Follow the instructions below to solve the code completion task:\n\n";
  p += "We will provide the input corpus and corresponding output corpus. Each element in the "
       "corpus is a string, and the output is transformed from the corresponding input using an "
       "ordered sequence of \"replace\" programs. You need to find the correctly constructed and "
       "ordered sequence of \"replace\" programs to transform the entire input corpus into the "
       "output corpus. Note that the programs can interact with each other in a way that reduces "
       "or increases the number of times they are applied on a given input based on where they "
       "are ordered in the sequence. This makes it very important to apply them in the correct "
       "order.\n\n";
  p += "The programs should be written using only the Python replace function. For example, for "
       "a program that replaces all occurrences of \"ab\" with \"bc\" it should be written as: "
       "replace('ab', 'bc')\n\n";
  p += "Here is an example of the full task:\n";
  p += "### Inputs \n";
  p += "[\"abc\", \"ebc\", \"aba\"]\n\n";
  p += "### Outputs\n";
  p += "[\"edc\", \"edc\", \"aba\"]\n\n";
  p += "### Program Sequence\n";
  p += "```python\n";
  p += "[\"replace('bc','dc')\", \"replace('ad','ed')\"]\n";
  p += "```\n\n";
  p += "While generating the program sequence, you need to abide by the following "
       "restrictions:\n";
  p += "1. Each program in the sequence should have the form replace(A, B), where A and B are "
       "both strings.\n";
  p += "2. Both argument strings A and B in replace(A, B) should have length ≤ " +
       std::to_string(s_max) + ". A must have length ≥ 1, while B may be empty (i.e., \"\").\n";
  p += "3. The maximum number of programs in a sequence is " + std::to_string(L_max) + ".\n";
  p += "4. You should only consider the Python replace function for specifying programs (each "
       "program is a Python replace function). You cannot use any other Python modules or "
       "functions.\n";
  p += "5. Strictly follow the markdown style convention while presenting your final program "
       "sequence, and make sure to enclose it in the ```python markdown style code block.\n\n";
  p += "Now, please generate the sequence of programs corresponding to the following input "
       "corpus and output corpus:\n\n";
  p += "### Inputs \n";
  p += render_string_list(instance.inputs) + "\n\n";
  p += "### Outputs\n";
  p += render_string_list(instance.outputs) + "\n\n";
  p += "### Program Sequence\n";
  return p;
}

std::string render_reorder_prompt(const ReorderInstance& instance) {
  static const std::string kTemplate =
      "You are solving a **program ordering puzzle**. Given input-output string pairs and a "
      "scrambled list of string replacement programs, your goal is to determine the correct "
      "execution order.\n"
      "\n"
      "## Background\n"
      "\n"
      "Each program performs a Python string replacement:\n"
      "replace(\"A\", \"B\") replaces all occurrences of \"A\" with \"B\".\n"
      "\n"
      "**Why order matters:**\n"
      "- **Feeding:** One program creates substrings that another program can match.\n"
      "  Example: replace(\"a\",\"bc\") followed by replace(\"bc\",\"x\").\n"
      "- **Bleeding:** One program removes substrings that another program would have "
      "matched.\n"
      "  Example: replace(\"ab\",\"x\") followed by replace(\"a\",\"y\").\n"
      "\n"
      "## Your Task\n"
      "\n"
      "**Inputs:** {inputs}\n"
      "\n"
      "**Outputs:** {outputs}\n"
      "\n"
      "**Scrambled Programs** (indices 0 to {n_minus_1}):\n"
      "{programs_formatted}\n"
      "\n"
      "Find the ordering [i0, i1, ..., i_{n_minus_1}] such that applying programs in that order "
      "transforms each input to its corresponding output.\n"
      "\n"
      "## Approach\n"
      "\n"
      "1. Trace through what each program does\n"
      "2. Identify potential feeding/bleeding interactions\n"
      "3. Reason about which programs must come before others\n"
      "4. Verify your ordering produces the expected outputs\n"
      "\n"
      "## Output Format\n"
      "\n"
      "Provide your final answer as a JSON array of indices:\n"
      "\n"
      "```json\n"
      "[i0, i1, i2, ...]\n"
      "```\n"
      "\n"
      "Your ordering must be a permutation of [0, 1, ..., {n_minus_1}].\n";

  std::string programs;
  for (std::size_t k = 0; k < instance.scrambled.size(); ++k) {
    if (k) programs += "\n";
    programs += std::to_string(k) + ": " + replace_call(instance.scrambled[k], '"', ", ");
  }
  const std::size_t m = instance.scrambled.size();
  std::string p = kTemplate;
  // Programs go in last so rule text can never be mistaken for a placeholder.
  substitute_all(p, "{inputs}", render_string_list(instance.inputs));
  substitute_all(p, "{outputs}", render_string_list(instance.outputs));
  substitute_all(p, "{n_minus_1}", m ? std::to_string(m - 1) : std::string("-1"));
  substitute_all(p, "{programs_formatted}", programs);
  return p;
}

std::string prompt_hash(std::string_view prompt) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : prompt) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- config ---------------------------------------------------------------

void SolverConfig::validate() const {
  if (endpoint_url.empty()) throw ValidationError("solver: endpoint_url must be non-empty");
  if (model_id.empty()) throw ValidationError("solver: model_id must be non-empty");
  if (sampling_budget < 1) throw ValidationError("solver: sampling_budget must be >= 1");
  if (max_in_flight < 1) throw ValidationError("solver: max_in_flight must be >= 1");
  if (max_tokens < 1) throw ValidationError("solver: max_tokens must be >= 1");
  if (temperature && !(*temperature >= 0.0))
    throw ValidationError("solver: temperature must be >= 0");
  if (top_p && !(*top_p > 0.0 && *top_p <= 1.0))
    throw ValidationError("solver: top_p must be in (0, 1]");
  if (api_key_env.empty()) throw ValidationError("solver: api_key_env must be non-empty");
}

Json to_json(const SolverConfig& c) {
  Json j;
  j["endpoint_url"] = c.endpoint_url;
  j["model_id"] = c.model_id;
  j["temperature"] = c.temperature ? Json(*c.temperature) : Json(nullptr);
  j["top_p"] = c.top_p ? Json(*c.top_p) : Json(nullptr);
  j["max_tokens"] = c.max_tokens;
  j["reasoning_effort"] = c.reasoning_effort ? Json(*c.reasoning_effort) : Json(nullptr);
  j["sampling_budget"] = c.sampling_budget;
  j["max_in_flight"] = c.max_in_flight;
  j["timeout_ms"] = c.timeout_ms;
  j["retry_count"] = c.retry_count;
  j["backoff_ms"] = c.backoff_ms;
  j["api_key_env"] = c.api_key_env;
  j["early_stop"] = c.early_stop;
  return j;
}

SolverConfig solver_config_from_json(const Json& j, SolverConfig c) {
  const std::string where = "solver";
  if (!j.is_object()) throw ValidationError("solver: expected an object");
  io::reject_unknown_keys(j,
                          {"endpoint_url", "model_id", "temperature", "top_p", "max_tokens",
                           "reasoning_effort", "sampling_budget", "max_in_flight", "timeout_ms",
                           "retry_count", "backoff_ms", "api_key_env", "early_stop"},
                          where);
  auto opt_double = [&](const char* key, std::optional<double>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null())
      out.reset();
    else
      out = field<double>(j, key, where);
  };
  if (j.contains("endpoint_url")) c.endpoint_url = field<std::string>(j, "endpoint_url", where);
  if (j.contains("model_id")) c.model_id = field<std::string>(j, "model_id", where);
  opt_double("temperature", c.temperature);
  opt_double("top_p", c.top_p);
  if (j.contains("max_tokens")) c.max_tokens = field<std::size_t>(j, "max_tokens", where);
  if (j.contains("reasoning_effort")) {
    if (j.at("reasoning_effort").is_null())
      c.reasoning_effort.reset();
    else
      c.reasoning_effort = field<std::string>(j, "reasoning_effort", where);
  }
  if (j.contains("sampling_budget"))
    c.sampling_budget = field<std::size_t>(j, "sampling_budget", where);
  if (j.contains("max_in_flight")) c.max_in_flight = field<std::size_t>(j, "max_in_flight", where);
  if (j.contains("timeout_ms")) c.timeout_ms = field<std::size_t>(j, "timeout_ms", where);
  if (j.contains("retry_count")) c.retry_count = field<std::size_t>(j, "retry_count", where);
  if (j.contains("backoff_ms")) c.backoff_ms = field<std::size_t>(j, "backoff_ms", where);
  if (j.contains("api_key_env")) c.api_key_env = field<std::string>(j, "api_key_env", where);
  if (j.contains("early_stop")) c.early_stop = field<bool>(j, "early_stop", where);
  c.validate();
  return c;
}

// ---- transport ------------------------------------------------------------

HttpReply HttpChatBackend::post(const RequestContext&, const std::string& url,
                                const std::string& body, const std::string& api_key) {
  HttpReply reply;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    reply.error = "endpoint_url has no scheme: " + url;
    return reply;
  }
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  const auto sec = static_cast<time_t>(timeout_ms_ / 1000);
  const auto usec = static_cast<time_t>((timeout_ms_ % 1000) * 1000);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    reply.error = httplib::to_string(res.error());
    return reply;
  }
  reply.status = res->status;
  reply.body = res->body;
  return reply;
}

HttpReply MockChatBackend::post(const RequestContext& ctx, const std::string&,
                                const std::string& body, const std::string&) {
  Json request = Json::parse(body);
  {
    std::lock_guard lock(mu_);
    ++calls_;
    requests_.push_back(request);
  }
  const MockReply r = responder_(ctx, request);
  HttpReply reply;
  reply.status = r.status;
  if (r.raw_body) {
    reply.body = *r.raw_body;
  } else {
    Json env;
    env["object"] = "chat.completion";
    env["choices"] = Json::array(
        {{{"index", 0},
          {"message", {{"role", "assistant"}, {"content", r.content}}},
          {"finish_reason", r.finish_reason}}});
    const std::size_t completion = text::length(r.content);
    env["usage"] = {{"prompt_tokens", 0},
                    {"completion_tokens", completion},
                    {"total_tokens", completion}};
    reply.body = io::dump(env, -1);
  }
  return reply;
}

std::size_t MockChatBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::vector<Json> MockChatBackend::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

MockChatBackend::Responder table_responder(std::map<std::string, std::vector<std::string>> texts) {
  return [texts = std::move(texts)](const RequestContext& ctx, const Json&) {
    MockReply r;
    const auto it = texts.find(ctx.instance_id);
    if (it != texts.end() && !it->second.empty())
      r.content = it->second[ctx.attempt_index % it->second.size()];
    return r;
  };
}

namespace {

bool transient(int status) {
  return status == 0 || status == 408 || status == 429 || (status >= 500 && status <= 599);
}

std::string snippet(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

ChatResult parse_envelope(const std::string& body, int status) {
  Json env;
  try {
    env = Json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed response envelope: ") + e.what() +
                             "; body: " + snippet(body),
                         status);
  }
  auto bad = [&](const std::string& why) {
    return TransportError("malformed response envelope: " + why + "; body: " + snippet(body),
                          status);
  };
  if (!env.is_object() || !env.contains("choices") || !env["choices"].is_array())
    throw bad("missing choices array");
  if (env["choices"].empty()) throw bad("empty choices array");
  const Json& choice = env["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object())
    throw bad("first choice has no message");
  const Json& msg = choice["message"];
  ChatResult out;
  if (msg.contains("content") && !msg["content"].is_null()) {
    if (!msg["content"].is_string()) throw bad("message content is not a string");
    out.content = msg["content"].get<std::string>();
  }
  if (choice.contains("finish_reason") && choice["finish_reason"].is_string())
    out.finish_reason = choice["finish_reason"].get<std::string>();
  if (env.contains("usage") && env["usage"].is_object()) {
    const Json& u = env["usage"];
    auto take = [&](const char* key) -> std::size_t {
      return u.contains(key) && u[key].is_number_unsigned() ? u[key].get<std::size_t>() : 0;
    };
    out.usage = {take("prompt_tokens"), take("completion_tokens"), take("total_tokens")};
  }
  return out;
}

}  // namespace

ChatResult chat_send(const std::string& prompt, const SolverConfig& config, ChatBackend& backend,
                     const RequestContext& ctx) {
  Json body;
  body["model"] = config.model_id;
  body["messages"] = Json::array({{{"role", "user"}, {"content", prompt}}});
  if (config.temperature) body["temperature"] = *config.temperature;
  if (config.top_p) body["top_p"] = *config.top_p;
  body["max_tokens"] = config.max_tokens;
  if (config.reasoning_effort) body["reasoning_effort"] = *config.reasoning_effort;
  const std::string payload = io::dump(body, -1);

  std::string api_key;
  if (const char* v = std::getenv(config.api_key_env.c_str())) api_key = v;

  for (std::size_t attempt = 0;; ++attempt) {
    const HttpReply reply = backend.post(ctx, config.endpoint_url, payload, api_key);
    if (reply.status >= 200 && reply.status < 300) {
      ChatResult out = parse_envelope(reply.body, reply.status);
      out.retries = attempt;
      return out;
    }
    const std::string detail =
        config.endpoint_url + " [" + ctx.instance_id + "#" + std::to_string(ctx.attempt_index) +
        "] status " + std::to_string(reply.status) +
        (reply.error.empty() ? "" : " (" + reply.error + ")") +
        (reply.body.empty() ? "" : ": " + snippet(reply.body));
    if (reply.status == 401 || reply.status == 403)
      throw TransportError("authentication failed: " + detail + " (credential from $" +
                               config.api_key_env + ")",
                           reply.status);
    if (!transient(reply.status)) throw TransportError("request rejected: " + detail, reply.status);
    if (attempt >= config.retry_count)
      throw TransportError("retries exhausted after " + std::to_string(attempt + 1) +
                               " tries: " + detail,
                           reply.status);
    const std::size_t shift = std::min<std::size_t>(attempt, 20);
    std::this_thread::sleep_for(std::chrono::milliseconds(config.backoff_ms << shift));
  }
}

// ---- attempts -------------------------------------------------------------

namespace {

const char* task_name(TaskKind t) { return t == TaskKind::Pbe ? "pbe" : "reorder"; }

TaskKind parse_task(const std::string& s, const std::string& where) {
  if (s == "pbe") return TaskKind::Pbe;
  if (s == "reorder") return TaskKind::Reorder;
  throw ValidationError(where + ": unknown task '" + s + "'");
}

AttemptLog base_log(const std::string& id, std::size_t attempt_index, TaskKind task,
                    const std::string& prompt, const ChatResult* result,
                    const std::string& error) {
  AttemptLog log;
  log.instance_id = id;
  log.attempt_index = attempt_index;
  log.task = task;
  log.prompt_hash = prompt_hash(prompt);
  log.error = error;
  if (result) {
    log.raw_text = result->content;
    log.finish_reason = result->finish_reason;
    log.token_usage = result->usage;
    log.retries = result->retries;
  }
  return log;
}

}  // namespace

Json to_json(const AttemptLog& log) {
  Json j;
  j["instance_id"] = log.instance_id;
  j["attempt_index"] = log.attempt_index;
  j["task"] = task_name(log.task);
  j["prompt_hash"] = log.prompt_hash;
  j["raw_text"] = log.raw_text;
  j["finish_reason"] = log.finish_reason;
  j["token_usage"] = {{"prompt", log.token_usage.prompt},
                      {"completion", log.token_usage.completion},
                      {"total", log.token_usage.total}};
  j["retries"] = log.retries;
  j["error"] = log.error;
  j["extracted"] = log.extracted;
  j["eval"] = log.eval ? io::to_json(*log.eval) : Json(nullptr);
  j["eval_first"] = log.eval_first ? io::to_json(*log.eval_first) : Json(nullptr);
  j["permutation"] = log.permutation ? Json(*log.permutation) : Json(nullptr);
  j["reorder_correct"] = log.reorder_correct ? Json(*log.reorder_correct) : Json(nullptr);
  return j;
}

AttemptLog attempt_from_json(const Json& j) {
  const std::string where = "attempt";
  io::reject_unknown_keys(j,
                          {"instance_id", "attempt_index", "task", "prompt_hash", "raw_text",
                           "finish_reason", "token_usage", "retries", "error", "extracted",
                           "eval", "eval_first", "permutation", "reorder_correct"},
                          where);
  AttemptLog log;
  log.instance_id = field<std::string>(j, "instance_id", where);
  log.attempt_index = field<std::size_t>(j, "attempt_index", where);
  log.task = parse_task(field<std::string>(j, "task", where), where);
  log.prompt_hash = field<std::string>(j, "prompt_hash", where);
  log.raw_text = field<std::string>(j, "raw_text", where);
  log.finish_reason = field<std::string>(j, "finish_reason", where);
  const Json& u = j.at("token_usage");
  io::reject_unknown_keys(u, {"prompt", "completion", "total"}, where + ".token_usage");
  log.token_usage = {field<std::size_t>(u, "prompt", where),
                     field<std::size_t>(u, "completion", where),
                     field<std::size_t>(u, "total", where)};
  log.retries = field<std::size_t>(j, "retries", where);
  log.error = field<std::string>(j, "error", where);
  log.extracted = field<bool>(j, "extracted", where);
  if (j.contains("eval") && !j["eval"].is_null()) log.eval = io::eval_record_from_json(j["eval"]);
  if (j.contains("eval_first") && !j["eval_first"].is_null())
    log.eval_first = io::eval_record_from_json(j["eval_first"]);
  if (j.contains("permutation") && !j["permutation"].is_null())
    log.permutation = field<Permutation>(j, "permutation", where);
  if (j.contains("reorder_correct") && !j["reorder_correct"].is_null())
    log.reorder_correct = field<bool>(j, "reorder_correct", where);
  return log;
}

AttemptLog score_pbe_attempt(const PbeInstance& instance, const EvalSettings& settings,
                             std::size_t attempt_index, const std::string& prompt,
                             const ChatResult* result, const std::string& error) {
  AttemptLog log = base_log(instance.id, attempt_index, TaskKind::Pbe, prompt, result, error);
  log.extracted = !extract_pbe_prediction(log.raw_text).is_null;
  log.eval = score_pbe_text(instance, log.raw_text, settings, BlockChoice::Last, attempt_index);
  log.eval_first =
      score_pbe_text(instance, log.raw_text, settings, BlockChoice::First, attempt_index);
  return log;
}

AttemptLog score_reorder_attempt(const ReorderInstance& instance, std::size_t attempt_index,
                                 const std::string& prompt, const ChatResult* result,
                                 const std::string& error) {
  AttemptLog log =
      base_log(instance.source_id, attempt_index, TaskKind::Reorder, prompt, result, error);
  log.permutation = extract_permutation(log.raw_text, instance.scrambled.size());
  log.extracted = log.permutation.has_value();
  log.reorder_correct = evaluate_reorder(instance, log.permutation);
  return log;
}

std::size_t select_pbe_attempt(const std::vector<AttemptLog>& logs) {
  if (logs.empty()) throw PreconditionError("select_pbe_attempt: no attempts");
  for (std::size_t k = 0; k < logs.size(); ++k)
    if (logs[k].eval && logs[k].eval->pass) return k;
  std::size_t best = logs.size();
  for (std::size_t k = 0; k < logs.size(); ++k) {
    if (!logs[k].eval) continue;
    if (best == logs.size() || logs[k].eval->edit_sim > logs[best].eval->edit_sim) best = k;
  }
  return best == logs.size() ? 0 : best;
}

std::size_t select_reorder_attempt(const std::vector<AttemptLog>& logs) {
  if (logs.empty()) throw PreconditionError("select_reorder_attempt: no attempts");
  for (std::size_t k = 0; k < logs.size(); ++k)
    if (logs[k].reorder_correct.value_or(false)) return k;
  for (std::size_t k = 0; k < logs.size(); ++k)
    if (logs[k].permutation) return k;
  return 0;
}

namespace {

AttemptLog run_pbe_attempt(const PbeInstance& inst, const std::string& prompt,
                           const SolverConfig& config, ChatBackend& backend,
                           const EvalSettings& settings, std::size_t a) {
  try {
    const ChatResult r = chat_send(prompt, config, backend, {inst.id, a});
    return score_pbe_attempt(inst, settings, a, prompt, &r, "");
  } catch (const TransportError& e) {
    return score_pbe_attempt(inst, settings, a, prompt, nullptr, e.what());
  }
}

AttemptLog run_reorder_attempt(const ReorderInstance& inst, const std::string& prompt,
                               const SolverConfig& config, ChatBackend& backend, std::size_t a) {
  try {
    const ChatResult r = chat_send(prompt, config, backend, {inst.source_id, a});
    return score_reorder_attempt(inst, a, prompt, &r, "");
  } catch (const TransportError& e) {
    return score_reorder_attempt(inst, a, prompt, nullptr, e.what());
  }
}

bool attempt_passed(const AttemptLog& log) {
  return log.task == TaskKind::Pbe ? (log.eval && log.eval->pass)
                                   : log.reorder_correct.value_or(false);
}

// Runs `attempt(i, a)` for every instance i and attempt a < K on up to
// max_in_flight threads. With early_stop each instance is one sequential job
// so later attempts can be skipped.
template <typename Attempt>
std::vector<AttemptLog> run_pool(std::size_t n_instances, const SolverConfig& config,
                                 AttemptWriter* writer, Attempt attempt) {
  config.validate();
  const std::size_t K = config.sampling_budget;
  std::vector<std::vector<std::optional<AttemptLog>>> slots(
      n_instances, std::vector<std::optional<AttemptLog>>(K));
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < n_instances; ++i) {
    if (config.early_stop) {
      jobs.emplace_back(i, K);
    } else {
      for (std::size_t a = 0; a < K; ++a) jobs.emplace_back(i, a);
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto record = [&](std::size_t i, std::size_t a, AttemptLog log) {
    if (writer) writer->append(log);
    slots[i][a] = std::move(log);
  };
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      {
        std::lock_guard lock(err_mu);
        if (first_error) return;
      }
      const auto [i, a] = jobs[idx];
      try {
        if (a < K) {
          record(i, a, attempt(i, a));
        } else {
          for (std::size_t b = 0; b < K; ++b) {
            AttemptLog log = attempt(i, b);
            const bool done = attempt_passed(log);
            record(i, b, std::move(log));
            if (done) break;
          }
        }
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::min(config.max_in_flight, jobs.size());
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<AttemptLog> out;
  for (auto& per : slots)
    for (auto& s : per)
      if (s) out.push_back(std::move(*s));
  return out;
}

}  // namespace

SolveResult solve_with_budget(const PbeInstance& instance, const SolverConfig& config,
                              ChatBackend& backend, const EvalSettings& settings) {
  if (config.sampling_budget == 0) throw PreconditionError("solve_with_budget: K must be >= 1");
  const std::string prompt = render_pbe_prompt(instance, settings.s_max, settings.L_max);
  SolveResult out;
  for (std::size_t a = 0; a < config.sampling_budget; ++a) {
    out.logs.push_back(run_pbe_attempt(instance, prompt, config, backend, settings, a));
    if (config.early_stop && attempt_passed(out.logs.back())) break;
  }
  out.selected = select_pbe_attempt(out.logs);
  return out;
}

SolveResult solve_with_budget(const ReorderInstance& instance, const SolverConfig& config,
                              ChatBackend& backend) {
  if (config.sampling_budget == 0) throw PreconditionError("solve_with_budget: K must be >= 1");
  const std::string prompt = render_reorder_prompt(instance);
  SolveResult out;
  for (std::size_t a = 0; a < config.sampling_budget; ++a) {
    out.logs.push_back(run_reorder_attempt(instance, prompt, config, backend, a));
    if (config.early_stop && attempt_passed(out.logs.back())) break;
  }
  out.selected = select_reorder_attempt(out.logs);
  return out;
}

std::vector<AttemptLog> solve_dataset(std::span<const PbeInstance> instances,
                                      const SolverConfig& config, ChatBackend& backend,
                                      const EvalSettings& settings, AttemptWriter* writer) {
  std::vector<std::string> prompts;
  prompts.reserve(instances.size());
  for (const auto& inst : instances)
    prompts.push_back(render_pbe_prompt(inst, settings.s_max, settings.L_max));
  return run_pool(instances.size(), config, writer, [&](std::size_t i, std::size_t a) {
    return run_pbe_attempt(instances[i], prompts[i], config, backend, settings, a);
  });
}

std::vector<AttemptLog> solve_dataset(std::span<const ReorderInstance> instances,
                                      const SolverConfig& config, ChatBackend& backend,
                                      AttemptWriter* writer) {
  std::vector<std::string> prompts;
  prompts.reserve(instances.size());
  for (const auto& inst : instances) prompts.push_back(render_reorder_prompt(inst));
  return run_pool(instances.size(), config, writer, [&](std::size_t i, std::size_t a) {
    return run_reorder_attempt(instances[i], prompts[i], config, backend, a);
  });
}

AttemptWriter::AttemptWriter(const std::filesystem::path& path, bool truncate)
    : out_(path, truncate ? std::ios::out | std::ios::trunc : std::ios::out | std::ios::app) {
  if (!out_) throw Error("cannot open attempt log " + path.string());
}

void AttemptWriter::append(const AttemptLog& log) {
  const std::string line = io::dump(to_json(log), -1);
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error("write to attempt log failed");
}

void persist_attempts(const std::filesystem::path& path, const std::vector<AttemptLog>& logs) {
  AttemptWriter w(path, true);
  for (const auto& log : logs) w.append(log);
}

std::vector<AttemptLog> load_attempts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open attempt log " + path.string());
  std::vector<AttemptLog> logs;
  std::set<std::pair<std::string, std::size_t>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      AttemptLog log = attempt_from_json(Json::parse(line));
      if (!seen.emplace(log.instance_id, log.attempt_index).second)
        throw ValidationError("duplicate attempt " + log.instance_id + "#" +
                              std::to_string(log.attempt_index));
      logs.push_back(std::move(log));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return logs;
}

// ---- run summaries --------------------------------------------------------

namespace {

template <typename Inst, typename IdOf>
std::map<std::string, std::vector<const AttemptLog*>> group_logs(
    std::span<const Inst> instances, const std::vector<AttemptLog>& logs, TaskKind task,
    IdOf id_of) {
  std::set<std::string> known;
  for (const auto& inst : instances) known.insert(id_of(inst));
  std::map<std::string, std::vector<const AttemptLog*>> by_id;
  for (const auto& log : logs) {
    if (log.task != task)
      throw ValidationError("attempt " + log.instance_id + "#" +
                            std::to_string(log.attempt_index) + " is a " +
                            task_name(log.task) + " attempt");
    if (!known.count(log.instance_id))
      throw ValidationError("attempt for unknown instance " + log.instance_id);
    by_id[log.instance_id].push_back(&log);
  }
  for (auto& [id, v] : by_id)
    std::sort(v.begin(), v.end(), [](const AttemptLog* a, const AttemptLog* b) {
      return a->attempt_index < b->attempt_index;
    });
  if (by_id.empty()) throw ValidationError("no attempts to summarize");
  return by_id;
}

}  // namespace

PbeRunSummary summarize_pbe_run(std::span<const PbeInstance> instances,
                                const std::vector<AttemptLog>& logs,
                                const EvalSettings& settings) {
  const auto by_id = group_logs(instances, logs, TaskKind::Pbe,
                                [](const PbeInstance& i) { return i.id; });
  PbeRunSummary out;
  std::map<std::size_t, std::pair<double, std::size_t>> pak;  // k -> (sum, instances)
  for (const auto& inst : instances) {
    const auto it = by_id.find(inst.id);
    if (it == by_id.end()) continue;
    std::vector<AttemptLog> rescored;
    for (const AttemptLog* log : it->second) {
      AttemptLog r = *log;
      r.eval = score_pbe_text(inst, r.raw_text, settings, BlockChoice::Last, r.attempt_index);
      r.eval_first =
          score_pbe_text(inst, r.raw_text, settings, BlockChoice::First, r.attempt_index);
      rescored.push_back(std::move(r));
    }
    const std::size_t sel = select_pbe_attempt(rescored);
    out.selected_last.push_back(*rescored[sel].eval);
    out.selected_first.push_back(*rescored[sel].eval_first);
    const std::size_t n = rescored.size();
    const auto c = static_cast<std::size_t>(std::count_if(
        rescored.begin(), rescored.end(), [](const AttemptLog& l) { return l.eval->pass; }));
    for (std::size_t k = 1; k <= n; ++k) {
      pak[k].first += pass_at_k_estimate(n, c, k);
      ++pak[k].second;
    }
  }
  out.metrics_last = aggregate_pbe(out.selected_last);
  out.metrics_first = aggregate_pbe(out.selected_first);
  for (const auto& [k, v] : pak) out.pass_at_k[k] = v.first / static_cast<double>(v.second);
  return out;
}

ReorderRunSummary summarize_reorder_run(std::span<const ReorderInstance> instances,
                                        const std::vector<AttemptLog>& logs) {
  const auto by_id = group_logs(instances, logs, TaskKind::Reorder,
                                [](const ReorderInstance& i) { return i.source_id; });
  ReorderRunSummary out;
  for (const auto& inst : instances) {
    const auto it = by_id.find(inst.source_id);
    if (it == by_id.end()) continue;
    std::vector<AttemptLog> rescored;
    for (const AttemptLog* log : it->second) {
      AttemptLog r = *log;
      r.permutation = extract_permutation(r.raw_text, inst.scrambled.size());
      r.extracted = r.permutation.has_value();
      r.reorder_correct = evaluate_reorder(inst, r.permutation);
      rescored.push_back(std::move(r));
    }
    const std::size_t sel = select_reorder_attempt(rescored);
    out.selected.push_back({inst.source_id, inst.is_unique,
                            rescored[sel].reorder_correct.value_or(false),
                            inst.scrambled.size()});
  }
  out.aggregate = aggregate_reorder(out.selected);
  return out;
}

}  // namespace pbekit
