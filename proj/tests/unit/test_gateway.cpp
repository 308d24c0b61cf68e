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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pbekit/errors.hpp"
#include "pbekit/gateway.hpp"
#include "pbekit/relations.hpp"

using namespace pbekit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PbeInstance make_instance(const std::string& id, StringVector inputs, Cascade c) {
  PbeInstance inst;
  inst.id = id;
  inst.outputs = apply_cascade(c, inputs);
  inst.inputs = std::move(inputs);
  auto cls = classify_bfcc(c);
  inst.category = cls.category;
  inst.fb_edges = cls.edges;
  inst.cascade = std::move(c);
  return inst;
}

PbeInstance worked() {
  return make_instance("w", {"abc", "ebc", "aba"}, {{"bc", "dc"}, {"ad", "ed"}});
}

SolverConfig fast_config(std::size_t K) {
  SolverConfig c;
  c.sampling_budget = K;
  c.backoff_ms = 0;
  c.retry_count = 3;
  c.api_key_env = "PBEKIT_TEST_UNSET_KEY";
  return c;
}

const EvalSettings kSettings{3, 5, "a"};

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("pbekit_gateway_" + name);
}

class CapturingBackend : public ChatBackend {
 public:
  HttpReply post(const RequestContext&, const std::string& url, const std::string& body,
                 const std::string& api_key) override {
    last_url = url;
    last_body = body;
    last_key = api_key;
    return {200, R"({"choices":[{"message":{"content":"hi"},"finish_reason":"stop"}]})", ""};
  }
  std::string last_url, last_body, last_key;
};

}  // namespace

TEST_CASE("string list rendering") {
  CHECK(render_string_list({"abc", "ebc", "aba"}) == R"(["abc", "ebc", "aba"])");
  CHECK(render_string_list({}) == "[]");
  CHECK(render_string_list({"a\"b"}) == R"(["a\"b"])");
}

TEST_CASE("pbe prompt matches the golden file") {
  PbeInstance inst;
  inst.inputs = {"wcw", "hwwgdb", "xuuiib"};
  inst.outputs = {"wwaw", "hwwgdb", "xuuiib"};
  CHECK(render_pbe_prompt(inst, 3, 5) == slurp(fs::path(PBEKIT_FIXTURE_DIR) / "pbe_prompt.txt"));
  const std::string four = render_pbe_prompt(inst, 4, 7);
  CHECK(four.find("should have length ≤ 4.") != std::string::npos);
  CHECK(four.find("in a sequence is 7.") != std::string::npos);
  CHECK(render_pbe_prompt(inst, 3, 5) == render_pbe_prompt(inst, 3, 5));
}

TEST_CASE("reorder prompt matches the golden file") {
  ReorderInstance r;
  r.inputs = {"abc", "ebc", "aba"};
  r.outputs = {"edc", "edc", "aba"};
  r.scrambled = {{"ad", "ed"}, {"x", ""}, {"bc", "dc"}};
  const std::string p = render_reorder_prompt(r);
  CHECK(p == slurp(fs::path(PBEKIT_FIXTURE_DIR) / "reorder_prompt.txt"));
  CHECK(p.find("indices 0 to 2") != std::string::npos);
  CHECK(p.find("One program creates substrings that another program can match.") !=
        std::string::npos);
  CHECK(p.find("One program removes substrings that another program would have matched.") !=
        std::string::npos);
}

TEST_CASE("prompt hash") {
  CHECK(prompt_hash("") == "cbf29ce484222325");
  CHECK(prompt_hash("a") == "af63dc4c8601ec8c");
}

TEST_CASE("solver config validation and json") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.sampling_budget = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.top_p = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.temperature = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.max_in_flight = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);

  c = {};
  c.reasoning_effort = "high";
  c.temperature.reset();
  const auto back = solver_config_from_json(to_json(c));
  CHECK(back.reasoning_effort == std::optional<std::string>("high"));
  CHECK_FALSE(back.temperature.has_value());
  CHECK_THROWS_AS(solver_config_from_json(io::Json{{"api_key", "x"}}), ValidationError);
}

TEST_CASE("chat_send request body and credential source") {
  ::setenv("PBEKIT_TEST_KEY", "sekrit", 1);
  CapturingBackend b;
  SolverConfig c = fast_config(1);
  c.api_key_env = "PBEKIT_TEST_KEY";
  c.model_id = "m1";
  const auto r = chat_send("hello", c, b);
  CHECK(r.content == "hi");
  CHECK(r.finish_reason == "stop");
  CHECK(b.last_key == "sekrit");
  CHECK(b.last_url == c.endpoint_url);
  const auto body = io::Json::parse(b.last_body);
  CHECK(body["model"] == "m1");
  REQUIRE(body["messages"].size() == 1);
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] == "hello");
  CHECK(body["temperature"] == 0.7);
  CHECK(body["top_p"] == 0.95);
  CHECK(body["max_tokens"] == c.max_tokens);
  CHECK_FALSE(body.contains("reasoning_effort"));
  c.reasoning_effort = "low";
  chat_send("hello", c, b);
  CHECK(io::Json::parse(b.last_body)["reasoning_effort"] == "low");
  ::unsetenv("PBEKIT_TEST_KEY");
}

TEST_CASE("chat_send retries transient failures") {
  int calls = 0;
  MockChatBackend b([&](const RequestContext&, const io::Json&) {
    MockReply r;
    if (++calls <= 2) r.status = 503;
    r.content = "ok";
    return r;
  });
  const auto r = chat_send("p", fast_config(1), b);
  CHECK(r.content == "ok");
  CHECK(r.retries == 2);
  CHECK(b.calls() == 3);
}

TEST_CASE("chat_send failures") {
  MockChatBackend auth([](const RequestContext&, const io::Json&) { return MockReply{401}; });
  CHECK_THROWS_AS(chat_send("p", fast_config(1), auth), TransportError);
  CHECK(auth.calls() == 1);

  MockChatBackend down([](const RequestContext&, const io::Json&) { return MockReply{500}; });
  try {
    chat_send("p", fast_config(1), down);
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.status() == 500);
    CHECK(std::string(e.what()).find("retries exhausted") != std::string::npos);
  }
  CHECK(down.calls() == 4);

  MockChatBackend junk([](const RequestContext&, const io::Json&) {
    MockReply r;
    r.raw_body = "{\"nope\": 1}";
    return r;
  });
  CHECK_THROWS_AS(chat_send("p", fast_config(1), junk), TransportError);
  CHECK(junk.calls() == 1);
}

TEST_CASE("empty content is a null attempt") {
  MockChatBackend b(table_responder({}));
  const auto res = solve_with_budget(worked(), fast_config(1), b, kSettings);
  REQUIRE(res.logs.size() == 1);
  CHECK_FALSE(res.logs[0].extracted);
  REQUIRE(res.logs[0].eval.has_value());
  CHECK(res.logs[0].eval->is_null);
  CHECK(res.logs[0].eval->edit_sim == 0.0);
  CHECK(res.selected == 0);
}

TEST_CASE("transport failures become null attempts") {
  MockChatBackend b([](const RequestContext&, const io::Json&) { return MockReply{403}; });
  const auto res = solve_with_budget(worked(), fast_config(2), b, kSettings);
  REQUIRE(res.logs.size() == 2);
  CHECK_FALSE(res.logs[0].error.empty());
  CHECK(res.logs[0].eval->is_null);
}

TEST_CASE("budgeted search selection") {
  const auto inst = worked();
  const std::string good = render_cascade_block(inst.cascade);
  MockChatBackend b(table_responder({{"w", {"", "nothing", good, "", good}}}));
  auto res = solve_with_budget(inst, fast_config(5), b, kSettings);
  CHECK(res.logs.size() == 5);
  CHECK(res.selected == 2);
  for (std::size_t a = 0; a < 5; ++a) CHECK(res.logs[a].attempt_index == a);

  SolverConfig early = fast_config(5);
  early.early_stop = true;
  res = solve_with_budget(inst, early, b, kSettings);
  CHECK(res.logs.size() == 3);
  CHECK(res.selected == 2);

  CHECK_THROWS_AS(solve_with_budget(inst, fast_config(0), b, kSettings), PreconditionError);
  res = solve_with_budget(inst, fast_config(1), b, kSettings);
  CHECK(res.selected == 0);
}

TEST_CASE("failing attempts select by edit similarity") {
  std::vector<AttemptLog> logs(3);
  const double sims[] = {0.2, 0.8, 0.5};
  for (std::size_t k = 0; k < 3; ++k) {
    logs[k].attempt_index = k;
    logs[k].eval = EvalRecord{};
    logs[k].eval->edit_sim = sims[k];
  }
  CHECK(select_pbe_attempt(logs) == 1);
  logs[2].eval->edit_sim = 0.8;
  CHECK(select_pbe_attempt(logs) == 1);
  logs[2].eval->pass = true;
  logs[2].eval->edit_sim = 1.0;
  CHECK(select_pbe_attempt(logs) == 2);
}

TEST_CASE("reorder selection") {
  ReorderInstance r;
  r.source_id = "r";
  r.inputs = {"abc", "ebc", "aba"};
  r.scrambled = {{"ad", "ed"}, {"bc", "dc"}};
  r.outputs = {"edc", "edc", "aba"};
  r.gt_order = {1, 0};
  MockChatBackend b(table_responder(
      {{"r", {"no", "```json\n[0, 1]\n```", "```json\n[1, 0]\n```"}}}));
  auto res = solve_with_budget(r, fast_config(3), b);
  CHECK(res.selected == 2);
  CHECK(res.logs[2].reorder_correct == std::optional<bool>(true));
  res = solve_with_budget(r, fast_config(2), b);
  CHECK(res.selected == 1);
  CHECK(res.logs[1].permutation == std::optional<Permutation>({0, 1}));
}

TEST_CASE("attempt logs round-trip through JSONL") {
  const auto inst = worked();
  MockChatBackend b(table_responder({{"w", {render_cascade_block(inst.cascade), "junk"}}}));
  const auto res = solve_with_budget(inst, fast_config(2), b, kSettings);
  const auto path = temp_file("roundtrip.jsonl");
  persist_attempts(path, res.logs);
  const auto back = load_attempts(path);
  REQUIRE(back.size() == res.logs.size());
  for (std::size_t k = 0; k < back.size(); ++k)
    CHECK(io::dump(to_json(back[k])) == io::dump(to_json(res.logs[k])));
  fs::remove(path);
}

TEST_CASE("corrupt attempt log names the line") {
  const auto inst = worked();
  MockChatBackend b(table_responder({{"w", {"x"}}}));
  const auto res = solve_with_budget(inst, fast_config(2), b, kSettings);
  const auto path = temp_file("truncated.jsonl");
  persist_attempts(path, res.logs);
  {
    std::ofstream out(path, std::ios::app);
    out << io::dump(to_json(res.logs[0]), -1).substr(0, 40);
  }
  try {
    load_attempts(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  persist_attempts(path, {res.logs[0], res.logs[0]});
  CHECK_THROWS_AS(load_attempts(path), ValidationError);
  fs::remove(path);
}

TEST_CASE("dataset runs are ordered and replay exactly") {
  std::vector<PbeInstance> insts;
  std::map<std::string, std::vector<std::string>> table;
  for (int k = 0; k < 6; ++k) {
    auto inst = make_instance("i" + std::to_string(k), {"abc", "ebc", "aba"},
                              {{"bc", "dc"}, {"ad", "e" + std::string(1, char('a' + k))}});
    table[inst.id] = {"", k % 2 ? render_cascade_block(inst.cascade) : "none", "```python\n[\"replace('a','b')\"]\n```"};
    insts.push_back(std::move(inst));
  }
  MockChatBackend b(table_responder(table));
  SolverConfig c = fast_config(3);
  c.max_in_flight = 4;
  const auto path = temp_file("run.jsonl");
  std::vector<AttemptLog> logs;
  {
    AttemptWriter w(path);
    logs = solve_dataset(insts, c, b, kSettings, &w);
  }
  REQUIRE(logs.size() == 18);
  for (std::size_t k = 0; k < logs.size(); ++k) {
    CHECK(logs[k].instance_id == insts[k / 3].id);
    CHECK(logs[k].attempt_index == k % 3);
  }
  const auto loaded = load_attempts(path);
  CHECK(loaded.size() == 18);
  const auto live = summarize_pbe_run(insts, logs, kSettings);
  const auto replay = summarize_pbe_run(insts, loaded, kSettings);
  CHECK(live.metrics_last == replay.metrics_last);
  CHECK(live.metrics_first == replay.metrics_first);
  CHECK(live.pass_at_k == replay.pass_at_k);
  CHECK(live.metrics_last.pass_at_1 == 0.5);
  CHECK(live.pass_at_k.at(1) == doctest::Approx(0.5 / 3.0));
  fs::remove(path);

  std::vector<AttemptLog> stray = logs;
  stray[0].instance_id = "ghost";
  CHECK_THROWS_AS(summarize_pbe_run(insts, stray, kSettings), ValidationError);
}

TEST_CASE("http backend reports unreachable endpoints as status 0") {
  HttpChatBackend http(200);
  const auto r = http.post({}, "http://127.0.0.1:9/v1/chat/completions", "{}", "");
  CHECK(r.status == 0);
  CHECK_FALSE(r.error.empty());
  const auto bad = http.post({}, "no-scheme", "{}", "");
  CHECK(bad.status == 0);
}
