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

// Prompt rendering, the chat-completion client, sampling-budget search, and
// append-only attempt logs.

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbekit/evaluator.hpp"
#include "pbekit/io.hpp"

namespace pbekit {

// ---- prompts --------------------------------------------------------------

// ["abc", "ebc", "aba"]
std::string render_string_list(const StringVector& v);

// Python literal with the given quote character.
std::string python_quote(std::string_view s, char quote);

// ```python block holding ["replace('A','B')", ...].
std::string render_cascade_block(const Cascade& cascade);

std::string render_pbe_prompt(const PbeInstance& instance, std::size_t s_max,
                              std::size_t L_max);
std::string render_reorder_prompt(const ReorderInstance& instance);

// FNV-1a 64 over the prompt bytes, as 16 hex digits.
std::string prompt_hash(std::string_view prompt);

// ---- transport ------------------------------------------------------------

struct SolverConfig {
  std::string endpoint_url = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model_id = "model";
  // Omitted from the request body when unset.
  std::optional<double> temperature = 0.7;
  std::optional<double> top_p = 0.95;
  std::size_t max_tokens = 8192;
  std::optional<std::string> reasoning_effort;
  std::size_t sampling_budget = 1;
  std::size_t max_in_flight = 4;
  std::size_t timeout_ms = 600000;
  std::size_t retry_count = 3;
  // Base delay; attempt r waits backoff_ms * 2^r.
  std::size_t backoff_ms = 500;
  std::string api_key_env = "OPENAI_API_KEY";
  bool early_stop = false;

  void validate() const;
};

io::Json to_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const io::Json& j, SolverConfig base = {});

// Identifies an attempt; real transports ignore it, mocks key off it.
struct RequestContext {
  std::string instance_id;
  std::size_t attempt_index = 0;
};

struct HttpReply {
  // 0 when the request never produced an HTTP status (DNS, refused, ...).
  int status = 0;
  std::string body;
  std::string error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Must be safe to call concurrently.
  virtual HttpReply post(const RequestContext& ctx, const std::string& url,
                         const std::string& body, const std::string& api_key) = 0;
};

// POSTs over http:// or https:// using cpp-httplib.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(std::size_t timeout_ms) : timeout_ms_(timeout_ms) {}
  HttpReply post(const RequestContext& ctx, const std::string& url, const std::string& body,
                 const std::string& api_key) override;

 private:
  std::size_t timeout_ms_;
};

struct MockReply {
  int status = 200;
  std::string content;
  std::string finish_reason = "stop";
  // Replace the envelope with this raw body (for malformed-envelope tests).
  std::optional<std::string> raw_body;
};

// In-process backend. The responder sees the request context and the parsed
// request body and returns what the "server" answers.
class MockChatBackend : public ChatBackend {
 public:
  using Responder = std::function<MockReply(const RequestContext&, const io::Json&)>;
  explicit MockChatBackend(Responder responder) : responder_(std::move(responder)) {}

  HttpReply post(const RequestContext& ctx, const std::string& url, const std::string& body,
                 const std::string& api_key) override;

  std::size_t calls() const;
  std::vector<io::Json> requests() const;

 private:
  Responder responder_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
  std::vector<io::Json> requests_;
};

// Answers attempt a of instance id with texts[id][a % size]; ids without an
// entry get empty content.
MockChatBackend::Responder table_responder(std::map<std::string, std::vector<std::string>> texts);

struct TokenUsage {
  std::size_t prompt = 0;
  std::size_t completion = 0;
  std::size_t total = 0;

  bool operator==(const TokenUsage&) const = default;
};

struct ChatResult {
  std::string content;
  std::string finish_reason;
  TokenUsage usage;
  std::size_t retries = 0;
};

// One chat-completion request with retry on transient failures (no status,
// 408, 429, 5xx). Throws TransportError on auth failure, other 4xx,
// exhausted retries, or a malformed envelope.
ChatResult chat_send(const std::string& prompt, const SolverConfig& config,
                     ChatBackend& backend, const RequestContext& ctx = {});

// ---- attempts -------------------------------------------------------------

enum class TaskKind { Pbe, Reorder };

struct AttemptLog {
  std::string instance_id;
  std::size_t attempt_index = 0;
  TaskKind task = TaskKind::Pbe;
  std::string prompt_hash;
  std::string raw_text;
  std::string finish_reason;
  TokenUsage token_usage;
  std::size_t retries = 0;
  // Transport failure message; the attempt is then scored as null.
  std::string error;
  bool extracted = false;
  // PBE: last-block (headline) and first-block scores.
  std::optional<EvalRecord> eval;
  std::optional<EvalRecord> eval_first;
  // Reorder: extracted permutation and its correctness.
  std::optional<Permutation> permutation;
  std::optional<bool> reorder_correct;
};

io::Json to_json(const AttemptLog& log);
AttemptLog attempt_from_json(const io::Json& j);

// Scores a response (or transport failure) into an attempt log.
AttemptLog score_pbe_attempt(const PbeInstance& instance, const EvalSettings& settings,
                             std::size_t attempt_index, const std::string& prompt,
                             const ChatResult* result, const std::string& error);
AttemptLog score_reorder_attempt(const ReorderInstance& instance, std::size_t attempt_index,
                                 const std::string& prompt, const ChatResult* result,
                                 const std::string& error);

// Index into logs of the selected attempt: first passing, else highest
// edit similarity with ties to the lowest attempt index.
std::size_t select_pbe_attempt(const std::vector<AttemptLog>& logs);
// First correct, else first non-null, else the first attempt.
std::size_t select_reorder_attempt(const std::vector<AttemptLog>& logs);

struct SolveResult {
  std::size_t selected = 0;
  std::vector<AttemptLog> logs;
};

SolveResult solve_with_budget(const PbeInstance& instance, const SolverConfig& config,
                              ChatBackend& backend, const EvalSettings& settings);
SolveResult solve_with_budget(const ReorderInstance& instance, const SolverConfig& config,
                              ChatBackend& backend);

// Serializes appends from many workers into one JSONL file.
class AttemptWriter {
 public:
  explicit AttemptWriter(const std::filesystem::path& path, bool truncate = true);
  void append(const AttemptLog& log);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

// Runs every instance with up to config.max_in_flight concurrent requests.
// Returned logs are ordered by (instance order, attempt index) regardless of
// completion order; the writer, if given, sees them as they complete.
std::vector<AttemptLog> solve_dataset(std::span<const PbeInstance> instances,
                                      const SolverConfig& config, ChatBackend& backend,
                                      const EvalSettings& settings,
                                      AttemptWriter* writer = nullptr);
std::vector<AttemptLog> solve_dataset(std::span<const ReorderInstance> instances,
                                      const SolverConfig& config, ChatBackend& backend,
                                      AttemptWriter* writer = nullptr);

void persist_attempts(const std::filesystem::path& path, const std::vector<AttemptLog>& logs);
// Throws ValidationError "<path>:<line>: ..." on the first corrupt line.
std::vector<AttemptLog> load_attempts(const std::filesystem::path& path);

// ---- run summaries --------------------------------------------------------

struct PbeRunSummary {
  // Selected attempt per instance that has logs, in dataset order.
  std::vector<EvalRecord> selected_last;
  std::vector<EvalRecord> selected_first;
  AggregateMetrics metrics_last;
  AggregateMetrics metrics_first;
  // pass@k for k = 1..K averaged over instances, keyed by k.
  std::map<std::size_t, double> pass_at_k;
};

// Re-scores every log's raw text against its instance (replay), then selects
// and aggregates. Logs for unknown instances are a ValidationError.
PbeRunSummary summarize_pbe_run(std::span<const PbeInstance> instances,
                                const std::vector<AttemptLog>& logs,
                                const EvalSettings& settings);

struct ReorderRunSummary {
  std::vector<ReorderOutcome> selected;
  ReorderAggregate aggregate;
};

ReorderRunSummary summarize_reorder_run(std::span<const ReorderInstance> instances,
                                        const std::vector<AttemptLog>& logs);

}  // namespace pbekit
