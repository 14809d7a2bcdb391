// Copyright 2026 The dare Authors
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

#include "dare/external_generator.h"

#include <gtest/gtest.h>

#include <fstream>

#include "dare/augment.h"
#include "dare/error.h"
#include "dare/synthetic.h"
#include "test_util.h"

namespace dare {
namespace {

using json = nlohmann::json;
using testing::schema_of;

ExternalGenerator::Options stub(const std::string& mode, const std::string& extra = "") {
  ExternalGenerator::Options options;
  options.command = std::string(DARE_STUB_GENERATOR) + " " + mode + extra;
  options.timeout = std::chrono::seconds(20);
  return options;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ProtocolError& e) {
    return e.what();
  }
  return "";
}

Dataset two_class_task() {
  return make_fixture(TemplateGrammar::multiclass({"a", "b"}),
                      {{15, 25, 80}, {5, 5, 20}, {5, 5, 20}}, 11);
}

std::vector<TokenSequence> text_of(const std::vector<RelationInstance>& split) {
  std::vector<TokenSequence> out;
  for (const auto& x : split) out.push_back(x.tokens);
  return out;
}

TEST(ExternalGenerator, HandshakeAndCannedLoopback) {
  ExternalGenerator g(stub("canned"));
  EXPECT_EQ(g.hello().at("protocol"), "dare-gen/1");
  g.fit_base({{"a", "b"}});
  const auto id = g.adapt("rel", {{"ENTITY_A", "x", "ENTITY_B"}});
  EXPECT_EQ(id, "canned-rel");
  GeneratorParams p;
  const auto samples = g.sample(id, 2, p);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0], (TokenSequence{"the", "ENTITY_A", "canned", "sample", "binds", "the",
                                       "ENTITY_B", "today"}));
  EXPECT_DOUBLE_EQ(g.log_likelihood(id, {{"x"}}), -1.5);
}

TEST(ExternalGenerator, RequestsCarryEveryProtocolField) {
  testing::TempDir dir;
  const auto log = (dir / "transcript.jsonl").string();
  {
    ExternalGenerator g(stub("canned", " " + log));
    GeneratorParams p;
    p.temperature = 0.8;
    p.top_k = 7;
    p.max_tokens = 33;
    p.seed = 99;
    g.fit_base({{"x"}});
    g.sample(g.adapt("r", {{"y"}}), 4, p);
    g.log_likelihood("canned-r", {{"z"}});
  }
  std::ifstream in(log);
  std::vector<json> requests;
  for (std::string line; std::getline(in, line);) requests.push_back(json::parse(line));
  ASSERT_EQ(requests.size(), 5u);
  EXPECT_EQ(requests[0], json({{"op", "hello"}}));
  EXPECT_EQ(requests[1], json({{"op", "fit_base"}, {"corpus", {{"x"}}}}));
  EXPECT_EQ(requests[2], json({{"op", "adapt"}, {"class", "r"}, {"corpus", {{"y"}}}}));
  EXPECT_EQ(requests[3], json({{"op", "sample"},
                               {"adapter_id", "canned-r"},
                               {"n", 4},
                               {"temperature", 0.8},
                               {"top_k", 7},
                               {"max_tokens", 33},
                               {"seed", 99}}));
  EXPECT_EQ(requests[4],
            json({{"op", "loglik"}, {"adapter_id", "canned-r"}, {"corpus", {{"z"}}}}));
}

TEST(ExternalGenerator, FilterRejectsMasklessSamplesAndRetries) {
  const auto schema = schema_of({"r"});
  Dataset d;
  d.schema = schema;
  d.train = {testing::make_instance("a", "ENTITY_A binds ENTITY_B", "r", schema),
             testing::make_instance("b", "ENTITY_A and ENTITY_B", "r", schema)};
  ExternalGenerator g(stub("nomask"));
  g.fit_base(text_of(d.train));
  const SyntheticPool pool = build_pool(d, g, GeneratorParams{}, 1.0);
  EXPECT_EQ(pool.per_class.at("r").size(), 2u);
  EXPECT_EQ(pool.info.at("r").rejected_mask, 2u);
  EXPECT_EQ(pool.info.at("r").attempts, 4u);
}

TEST(ExternalGenerator, ExitMidSessionNamesRequest) {
  ExternalGenerator g(stub("die:sample"));
  const auto id = g.adapt("r", {{"x"}});
  const auto message = error_of([&] { g.sample(id, 1, {}); });
  EXPECT_NE(message.find("exited during 'sample'"), std::string::npos) << message;
  // The session stays closed afterwards.
  EXPECT_NE(error_of([&] { g.adapt("r", {{"x"}}); }).find("'adapt'"), std::string::npos);
}

TEST(ExternalGenerator, MalformedResponseIsEchoed) {
  ExternalGenerator g(stub("garbage:adapt"));
  const auto message = error_of([&] { g.adapt("r", {{"x"}}); });
  EXPECT_NE(message.find("malformed response to 'adapt'"), std::string::npos) << message;
  EXPECT_NE(message.find("this is not json"), std::string::npos) << message;
}

TEST(ExternalGenerator, ErrorReplyIsEchoed) {
  ExternalGenerator g(stub("fail:adapt"));
  const auto message = error_of([&] { g.adapt("r", {{"x"}}); });
  EXPECT_NE(message.find("stub refused adapt"), std::string::npos) << message;
}

TEST(ExternalGenerator, TimeoutNamesRequest) {
  auto options = stub("slow:sample");
  options.timeout = std::chrono::milliseconds(300);
  ExternalGenerator g(options);
  const auto start = std::chrono::steady_clock::now();
  const auto message = error_of([&] { g.sample("x", 1, {}); });
  EXPECT_NE(message.find("timed out waiting for 'sample'"), std::string::npos) << message;
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}

TEST(ExternalGenerator, WrongProtocolVersionRejected) {
  const auto message = error_of([] { ExternalGenerator g(stub("badhello")); });
  EXPECT_NE(message.find("unsupported protocol"), std::string::npos) << message;
}

TEST(ExternalGenerator, SpawnFailureSurfaces) {
  ExternalGenerator::Options options;
  options.command = "/nonexistent/generator-binary";
  options.timeout = std::chrono::seconds(5);
  EXPECT_THROW(ExternalGenerator g(options), ProtocolError);
  options.command = "";
  EXPECT_THROW(ExternalGenerator g(options), ProtocolError);
}

TEST(ExternalGenerator, NoVanillaResetAfterFit) {
  ExternalGenerator g(stub("canned"));
  EXPECT_NO_THROW(g.reset_base({{"x"}}));
  g.fit_base({{"x"}});
  EXPECT_THROW(g.reset_base({{"x"}}), ProtocolError);
}

TEST(ExternalGenerator, BuiltinServerMatchesInProcessPool) {
  const Dataset d = two_class_task();
  GeneratorParams params;
  params.seed = 5;

  BuiltinGenerator local;
  local.fit_base(text_of(d.train));
  const SyntheticPool expected = build_pool(d, local, params, 3.0);

  ExternalGenerator remote(stub("builtin"));
  remote.fit_base(text_of(d.train));
  const SyntheticPool got = build_pool(d, remote, params, 3.0);

  EXPECT_EQ(got.digest(), expected.digest());
  EXPECT_EQ(got.size(), expected.size());
  const auto id = got.info.at("a").adapter_id;
  EXPECT_NEAR(remote.log_likelihood(id, text_of(d.test)),
              local.log_likelihood(id, text_of(d.test)), 1e-9);
}

TEST(ExternalGenerator, GoldenTranscript) {
  std::ifstream in(std::string(DARE_TEST_DATA) + "/dare-gen-1.golden.jsonl");
  ASSERT_TRUE(in);
  std::vector<json> entries;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) entries.push_back(json::parse(line));
  ASSERT_FALSE(entries.empty());
  EXPECT_EQ(entries.front().at("request"), json({{"op", "hello"}}));

  ExternalGenerator g(stub("builtin"));
  std::map<std::string, std::string> adapter_ids;  // golden id -> live id
  for (size_t i = 1; i < entries.size(); ++i) {
    json request = entries[i].at("request");
    const json& golden = entries[i].at("response");
    if (request.contains("adapter_id")) {
      auto it = adapter_ids.find(request["adapter_id"]);
      if (it != adapter_ids.end()) request["adapter_id"] = it->second;
    }
    const std::string op = request.at("op");
    SCOPED_TRACE("entry " + std::to_string(i) + " op " + op);
    if (!golden.at("ok").get<bool>()) {
      const auto message = error_of([&] { g.request(request); });
      EXPECT_FALSE(message.empty());
      EXPECT_NE(message.find(golden.at("error").get<std::string>()), std::string::npos)
          << message;
      continue;
    }
    const json reply = g.request(request);
    EXPECT_TRUE(reply.at("ok").get<bool>());
    if (op == "adapt") {
      ASSERT_TRUE(reply.at("adapter_id").is_string());
      adapter_ids[golden.at("adapter_id")] = reply.at("adapter_id");
    } else if (op == "sample") {
      const auto& samples = reply.at("samples");
      ASSERT_TRUE(samples.is_array());
      EXPECT_EQ(samples.size(), request.at("n").get<size_t>());
      for (const auto& s : samples) {
        ASSERT_TRUE(s.is_array());
        EXPECT_LE(s.size(), request.at("max_tokens").get<size_t>());
        for (const auto& t : s) EXPECT_TRUE(t.is_string());
      }
      if (request.at("top_k") == 1) {
        EXPECT_EQ(samples, golden.at("samples"));
      }
    } else if (op == "loglik") {
      EXPECT_NEAR(reply.at("value").get<double>(), golden.at("value").get<double>(), 1e-9);
    } else {
      EXPECT_EQ(reply, golden);
    }
  }
}

}  // namespace
}  // namespace dare
