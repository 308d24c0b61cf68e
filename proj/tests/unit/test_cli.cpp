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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pbekit/cli.hpp"
#include "pbekit/io.hpp"

using pbekit::io::Json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = pbekit::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path dir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "pbekit_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string path(const std::string& name) { return (dir() / name).string(); }

void write(const std::string& name, const std::string& text) {
  std::ofstream(path(name)) << text;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({"gen"}).code == 1);
  CHECK(run({"gen", "--seed", "x"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("config validation") {
  write("bad.json", R"({"generator": {"n": 3}, "extra": 1})");
  auto r = run({"gen", "--seed", "1", "--config", path("bad.json")});
  CHECK(r.code == 1);
  CHECK(r.err.find("extra") != std::string::npos);
  write("bad2.json", R"({"generator": {"l_min": 9}})");
  CHECK(run({"gen", "--seed", "1", "--config", path("bad2.json")}).code == 1);
  write("bad3.json", R"({"solver": {"sampling_budget": 0}})");
  CHECK(run({"gen", "--seed", "1", "--config", path("bad3.json")}).code == 1);
}

TEST_CASE("gen is byte-reproducible and eval scores ground truth") {
  write("cfg.json", R"({"generator": {"D": 32}})");
  REQUIRE(run({"gen", "--seed", "3", "--config", path("cfg.json"), "-o", path("a.json")}).code == 0);
  REQUIRE(run({"gen", "--seed", "3", "--config", path("cfg.json"), "-o", path("b.json")}).code == 0);
  CHECK(slurp(path("a.json")) == slurp(path("b.json")));
  const Json ds = Json::parse(slurp(path("a.json")));
  CHECK(ds["instances"].size() == 32);

  auto r = run({"eval", "--dataset", path("a.json"), "--ground-truth"});
  REQUIRE(r.code == 0);
  const Json m = Json::parse(r.out);
  CHECK(m["metrics"]["pass_at_1"] == 1.0);
  CHECK(m["metrics"]["edit_sim"] == 1.0);
  CHECK(m["metrics"]["valid_rate"] == 1.0);

  r = run({"stats", "--dataset", path("a.json")});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["kl_nats"] == 0.0);

  r = run({"report", "--dataset", path("a.json"), "--ground-truth"});
  REQUIRE(r.code == 0);
  const Json rep = Json::parse(r.out);
  CHECK(rep.contains("breakdowns"));
  CHECK(rep["selected"].size() == 32);
}

TEST_CASE("mock solve, replay, and reorder pipeline") {
  REQUIRE(run({"gen", "--seed", "4", "--size", "16", "-o", path("d.json")}).code == 0);
  auto r = run({"solve", "--dataset", path("d.json"), "--backend", "mock-gt", "-k", "2",
                "--attempts", path("d.jsonl")});
  REQUIRE(r.code == 0);
  const Json live = Json::parse(r.out);
  CHECK(live["attempts"] == 32);
  CHECK(live["metrics"]["pass_at_1"] == 1.0);
  r = run({"eval", "--dataset", path("d.json"), "--attempts", path("d.jsonl")});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["metrics"] == live["metrics"]);

  REQUIRE(run({"perm", "--dataset", path("d.json"), "-o", path("p.json")}).code == 0);
  r = run({"eval-reorder", "--perm-dataset", path("p.json"), "--ground-truth"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["aggregate"]["acc"] == 1.0);
  r = run({"solve-reorder", "--perm-dataset", path("p.json"), "--backend", "mock-null",
           "--attempts", path("p.jsonl")});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["aggregate"]["acc"] == 0.0);
}

TEST_CASE("predictions file and errors") {
  REQUIRE(run({"gen", "--seed", "5", "--size", "16", "-o", path("e.json")}).code == 0);
  const Json ds = Json::parse(slurp(path("e.json")));
  const std::string id = ds["instances"][0]["id"];
  write("pred.json", Json{{id, "no code"}}.dump());
  auto r = run({"eval", "--dataset", path("e.json"), "--predictions", path("pred.json")});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["metrics"]["count"] == 1);
  CHECK(Json::parse(r.out)["metrics"]["nulls"] == 1);
  write("pred2.json", R"({"nope": "x"})");
  CHECK(run({"eval", "--dataset", path("e.json"), "--predictions", path("pred2.json")}).code == 1);
  CHECK(run({"eval", "--dataset", path("missing.json"), "--ground-truth"}).code == 2);
  CHECK(run({"solve", "--dataset", path("e.json"), "--backend", "smoke-signals", "--attempts",
             path("x.jsonl")})
            .code == 1);
}

TEST_CASE("verify-relations requires a seed and reports") {
  CHECK(run({"verify-relations", "--pairs", "10"}).code == 1);
  const auto r = run({"verify-relations", "--seed", "1", "--pairs", "200"});
  const Json j = Json::parse(r.out);
  CHECK(j["pairs"] == 200);
  CHECK(r.code == (j["clean"].get<bool>() ? 0 : 1));
}
