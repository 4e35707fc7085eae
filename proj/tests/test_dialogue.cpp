// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <fstream>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "mock_server.hpp"
#include "percept/dialogue.hpp"
#include "percept/http.hpp"
#include "support.hpp"

using namespace percept;
using namespace percept::testing;
using nlohmann::json;

namespace {

DialogueTurn turn(Speaker s, std::string text, const AttributeProfile& p, std::uint64_t seed = 1) {
  DialogueTurn t;
  t.speaker = s;
  t.transcript = std::move(text);
  t.caption = generate_caption(p, InstructionBank::builtin(), seed);
  return t;
}

const AttributeProfile kSadMale{Gender::male, Emotion::sad, Level::low, Level::low, Level::low};
const AttributeProfile kHappyFemale{Gender::female, Emotion::happy, Level::high, Level::high, Level::high};

std::string completion(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

ChatConfig fast_config(const std::string& endpoint, int retries) {
  ChatConfig c;
  c.endpoint = endpoint;
  c.retries = retries;
  c.timeout_s = 2.0;
  c.initial_backoff = std::chrono::milliseconds(1);
  return c;
}

Prompt simple_prompt() { return {"system", "user"}; }

}  // namespace

TEST_CASE("caption prompt lists every turn with its caption") {
  const std::vector<DialogueTurn> h{turn(Speaker::A, "I lost my keys.", kSadMale),
                                    turn(Speaker::B, "Oh no!", kHappyFemale)};
  const Prompt p = build_prompt_with_captions(h);
  CHECK(p.system == PromptTemplates::builtin().system_with_captions);
  CHECK(p.user.find(std::string(kHistoryHeader)) == 0);
  CHECK(p.user.find("A (" + h[0].caption->text + "): I lost my keys.") != std::string::npos);
  CHECK(p.user.find("B (" + h[1].caption->text + "): Oh no!") != std::string::npos);
  CHECK(p.user.find("Reply as speaker A") != std::string::npos);
  CHECK(p.user.find("{next_speaker}") == std::string::npos);
  CHECK(p.text() == p.system + "\n\n" + p.user);
}

TEST_CASE("caption-free prompt hides style") {
  const std::vector<DialogueTurn> h{turn(Speaker::A, "I lost my\nkeys.", kSadMale)};
  const Prompt p = build_prompt_without_captions(h);
  CHECK(p.user.find("A: I lost my keys.") != std::string::npos);
  CHECK(p.user.find(h[0].caption->text) == std::string::npos);
  CHECK(p.user.find("Reply as speaker B") != std::string::npos);
  CHECK(p.user.find("CAPTION") == std::string::npos);
}

TEST_CASE("prompt preconditions and truncation") {
  CHECK(error_code_of([] { build_prompt_with_captions({}); }) == Errc::invalid_argument);
  DialogueTurn bare;
  bare.transcript = "hi";
  const std::vector<DialogueTurn> h{bare};
  CHECK(error_code_of([&] { build_prompt_with_captions(h); }) == Errc::invalid_argument);
  CHECK_NOTHROW(build_prompt_without_captions(h));

  std::vector<DialogueTurn> long_history;
  for (int i = 0; i < 20; ++i) {
    long_history.push_back(turn(i % 2 ? Speaker::B : Speaker::A, "line " + std::to_string(i), kSadMale));
  }
  PromptOptions opt;
  opt.max_turns = 4;
  const Prompt p = build_prompt_with_captions(long_history, opt);
  CHECK(p.user.find("line 15") == std::string::npos);
  CHECK(p.user.find("line 16") != std::string::npos);
  CHECK(p.user.find("line 19") != std::string::npos);
}

TEST_CASE("prompt templates load from JSON with builtin defaults") {
  TempDir dir("prompts");
  {
    std::ofstream out(dir / "p.json");
    out << R"({"system_with_captions": "custom system"})";
  }
  const PromptTemplates t = PromptTemplates::load(dir / "p.json");
  CHECK(t.system_with_captions == "custom system");
  CHECK(t.instruction_with_captions == PromptTemplates::builtin().instruction_with_captions);
  {
    std::ofstream out(dir / "bad.json");
    out << "{nope";
  }
  CHECK(error_code_of([&] { PromptTemplates::load(dir / "bad.json"); }) == Errc::parse);
  CHECK(error_code_of([&] { PromptTemplates::load(dir / "missing.json"); }) == Errc::io);
}

TEST_CASE("strict reply parsing") {
  const ParsedReply r = parse_response("CONTENT: Hello there.\nCAPTION: She says it happily.");
  CHECK(r.content == "Hello there.");
  CHECK(r.caption == "She says it happily.");
  const ParsedReply swapped = parse_response("caption: He speaks slowly.\n\ncontent: Fine,\nthanks.");
  CHECK(swapped.content == "Fine, thanks.");
  CHECK(swapped.caption == "He speaks slowly.");
  CHECK(parse_response("**CONTENT:** Hi\n**CAPTION:** She speaks.").content == "Hi");
  CHECK(error_code_of([] { parse_response("Sure, sounds fun!"); }) == Errc::parse);
  CHECK(error_code_of([] { parse_response("CONTENT: only content"); }) == Errc::parse);
  CHECK(error_code_of([] { parse_response("CONTENT:\nCAPTION: x"); }) == Errc::parse);
  try {
    parse_response("garbage reply");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("garbage reply") != std::string::npos);
  }
}

TEST_CASE("lenient content parsing") {
  CHECK(parse_content("CONTENT: Hi there") == "Hi there");
  CHECK(parse_content("Just words\nover lines") == "Just words over lines");
  CHECK(error_code_of([] { parse_content("  "); }) == Errc::parse);
}

TEST_CASE("empathetic mirror keeps style and swaps gender") {
  CHECK(empathetic_mirror(kSadMale, Gender::female) ==
        AttributeProfile{Gender::female, Emotion::sad, Level::low, Level::low, Level::low});
}

TEST_CASE("mock chat mirrors the last caption") {
  const MockChatBackend mock;
  const std::vector<DialogueTurn> h{turn(Speaker::A, "Hi.", kHappyFemale), turn(Speaker::B, "I failed.", kSadMale)};
  const Prompt p = build_prompt_with_captions(h);
  const std::string raw = mock.complete(p);
  CHECK(raw == mock.complete(p));
  const ParsedReply r = parse_response(raw);
  // Speaker A replies, in A's own (female) voice, mirroring B's sad style.
  CHECK(classify_caption(r.caption) == AttributeProfile{Gender::female, Emotion::sad, Level::low, Level::low, Level::low});

  const std::string plain = mock.complete(build_prompt_without_captions(h));
  CHECK_NOTHROW(parse_content(plain));
  CHECK(plain.find("CAPTION") == std::string::npos);

  MockChatBackend broken;
  broken.add_malformed_marker("I failed.");
  CHECK(error_code_of([&] { parse_response(broken.complete(p)); }) == Errc::parse);
  CHECK(MockChatBackend::canned("CONTENT: x").complete(p) == "CONTENT: x");
}

TEST_CASE("plan_response modes") {
  const MockChatBackend mock;
  PlanContext ctx;
  ctx.backend = &mock;
  const std::vector<DialogueTurn> h{turn(Speaker::A, "I won!", kHappyFemale)};

  const ResponsePlan with = plan_response(h, ResponseMode::with_captions, ctx, 3);
  CHECK(with.attributes == AttributeProfile{Gender::female, Emotion::happy, Level::high, Level::high, Level::high});
  CHECK(VoiceTable::builtin().at(with.voice_id).gender() == Gender::female);
  CHECK(classify_caption(with.response_caption) == with.attributes);

  const ResponsePlan without = plan_response(h, ResponseMode::without_captions, ctx, 3);
  CHECK(without.attributes.emotion == Emotion::neutral);
  CHECK(without.attributes.pitch == Level::neutral);
  CHECK(without.attributes.gender == VoiceTable::builtin().at(without.voice_id).gender());
  CHECK(classify_caption(without.response_caption) == without.attributes);

  std::set<std::string> drawn;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const ResponsePlan r = plan_response(h, ResponseMode::random_attributes, ctx, s);
    CHECK(r.content == with.content);
    CHECK(classify_caption(r.response_caption) == r.attributes);
    drawn.insert(r.attributes.to_string());
  }
  CHECK(drawn.size() > 20);
  // Pure function of the seed.
  CHECK(plan_response(h, ResponseMode::random_attributes, ctx, 9).attributes ==
        plan_response(h, ResponseMode::random_attributes, ctx, 9).attributes);

  PlanContext none;
  CHECK(error_code_of([&] { plan_response(h, ResponseMode::with_captions, none, 1); }) == Errc::invalid_argument);
  CHECK(error_code_of([&] { plan_response({}, ResponseMode::with_captions, ctx, 1); }) == Errc::invalid_argument);
  MockChatBackend broken;
  broken.add_malformed_marker("I won!");
  ctx.backend = &broken;
  CHECK(error_code_of([&] { plan_response(h, ResponseMode::with_captions, ctx, 1); }) == Errc::parse);
}

TEST_CASE("LLM caption classifier reads JSON labels") {
  const MockChatBackend mock;
  const LlmCaptionClassifier cls(mock);
  const std::string caption = generate_caption(kSadMale, InstructionBank::builtin(), 4).text;
  CHECK(cls.classify(caption) == kSadMale);
  CHECK(error_code_of([&] { cls.classify(""); }) == Errc::invalid_argument);
  const auto canned = MockChatBackend::canned("no json here");
  CHECK(error_code_of([&] { LlmCaptionClassifier(canned).classify("x"); }) == Errc::malformed_response);
}

TEST_CASE("URL parsing") {
  const http::Url u = http::parse_url("https://api.example.com:8443/v1/chat/completions");
  CHECK(u.scheme_host_port == "https://api.example.com:8443");
  CHECK(u.path == "/v1/chat/completions");
  CHECK(http::parse_url("http://localhost").path == "/");
  CHECK(error_code_of([] { http::parse_url("ftp://x/y"); }) == Errc::invalid_argument);
}

TEST_CASE("chat client retries transient failures") {
  std::atomic<int> calls{0};
  json seen;
  std::string auth;
  LocalServer srv([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      const int n = ++calls;
      if (n <= 2) {
        res.status = 500;
        return;
      }
      seen = json::parse(req.body);
      auth = req.get_header_value("Authorization");
      res.set_content(completion("CONTENT: hi\nCAPTION: She speaks."), "application/json");
    });
  });
  ChatConfig cfg = fast_config(srv.url("/v1/chat/completions"), 2);
  cfg.api_key = "k123";
  const std::string reply = chat({"sys", "usr"}, cfg);
  CHECK(reply == "CONTENT: hi\nCAPTION: She speaks.");
  CHECK(calls == 3);
  CHECK(seen["model"] == cfg.model);
  CHECK(seen["messages"][0]["role"] == "system");
  CHECK(seen["messages"][0]["content"] == "sys");
  CHECK(seen["messages"][1]["role"] == "user");
  CHECK(seen["messages"][1]["content"] == "usr");
  CHECK(seen["temperature"] == doctest::Approx(cfg.temperature));
  CHECK(auth == "Bearer k123");
}

TEST_CASE("chat client gives up after the retry budget") {
  std::atomic<int> calls{0};
  LocalServer srv([&](httplib::Server& s) {
    s.Post("/c", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 503;
    });
    s.Post("/busy", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 429;
    });
    s.Post("/bad", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 400;
    });
    s.Post("/junk", [](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
  });
  CHECK(error_code_of([&] { chat(simple_prompt(), fast_config(srv.url("/c"), 1)); }) == Errc::http_status);
  CHECK(calls == 2);
  calls = 0;
  CHECK(error_code_of([&] { chat(simple_prompt(), fast_config(srv.url("/busy"), 2)); }) == Errc::http_status);
  CHECK(calls == 3);
  calls = 0;
  // Client errors other than 429 are not retried.
  CHECK(error_code_of([&] { chat(simple_prompt(), fast_config(srv.url("/bad"), 3)); }) == Errc::http_status);
  CHECK(calls == 1);
  CHECK(error_code_of([&] { chat(simple_prompt(), fast_config(srv.url("/junk"), 0)); }) == Errc::malformed_response);
}

TEST_CASE("unreachable endpoint is a network error") {
  const std::string url = "http://127.0.0.1:" + std::to_string(closed_port()) + "/v1";
  CHECK(error_code_of([&] { chat(simple_prompt(), fast_config(url, 0)); }) == Errc::network);
  CHECK(error_code_of([&] { chat(simple_prompt(), fast_config("", 0)); }) == Errc::invalid_argument);
  CHECK(error_code_of([&] { chat(simple_prompt(), fast_config(url, -1)); }) == Errc::invalid_argument);
}
