// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/gateway.hpp"

#include <httplib.h>

#include <atomic>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "percept/error.hpp"
#include "percept/http.hpp"
#include "percept/random.hpp"

namespace percept {

namespace {

using nlohmann::json;

std::string now_iso() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json profile_json(const AttributeProfile& p) {
  json j = json::object();
  for (Factor f : kAllFactors) j[std::string(to_string(f))] = p.label(f);
  return j;
}

AttributeProfile profile_from_json(const json& j) {
  std::string text;
  for (Factor f : kAllFactors) {
    if (!text.empty()) text += ',';
    text += j.at(std::string(to_string(f))).get<std::string>();
  }
  return parse_profile(text);
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view message, std::string_view detail = {}) {
  json body = {{"error", message}};
  if (!detail.empty()) body["detail"] = detail;
  send_json(res, status, body);
}

bool is_backend_failure(Errc code) {
  return code == Errc::network || code == Errc::http_status || code == Errc::malformed_response ||
         code == Errc::decode;
}

}  // namespace

struct Gateway::Impl {
  GatewayConfig config;
  mutable std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::uint64_t next_id = 1;
  std::mutex log_mutex;
  std::unique_ptr<httplib::Server> owned_server;
  std::thread server_thread;

  explicit Impl(GatewayConfig c) : config(std::move(c)) {
    if (config.chat == nullptr || config.tts == nullptr) {
      throw Error(Errc::invalid_argument, "gateway needs chat and TTS backends");
    }
    config.calibration.validate();
    if (config.log_path) replay(*config.log_path);
  }

  // ---- persistence ----

  json turn_json(const SessionTurn& t, const std::string& session_id, std::size_t index,
                 bool with_audio) const {
    json j = {{"index", index},
              {"speaker", to_string(t.turn.speaker)},
              {"role", t.agent ? "agent" : "user"},
              {"transcript", t.turn.transcript}};
    if (t.turn.caption) {
      j["caption"] = t.turn.caption->text;
      j["instruction_id"] = t.turn.caption->instruction_id;
      j["profile"] = profile_json(t.turn.caption->profile);
    }
    if (!t.voice_id.empty()) j["voice_id"] = t.voice_id;
    if (!t.wav.empty()) {
      j["audio_url"] = "/sessions/" + session_id + "/audio/" + std::to_string(index);
      if (with_audio) {
        j["audio_wav_base64"] = httplib::detail::base64_encode(t.wav);
      }
    }
    return j;
  }

  json session_json(const Session& s) const {
    json history = json::array();
    for (std::size_t i = 0; i < s.history.size(); ++i) history.push_back(turn_json(s.history[i], s.id, i, false));
    return {{"session_id", s.id},
            {"created_at", s.created_at},
            {"config", {{"mode", to_string(s.mode)}, {"seed", s.seed}}},
            {"history", history}};
  }

  void log(const json& event) {
    if (!config.log_path) return;
    std::lock_guard lock(log_mutex);
    std::ofstream out(*config.log_path, std::ios::app);
    if (!out) throw Error(Errc::io, "cannot append to session log " + config.log_path->string());
    out << event.dump() << '\n';
  }

  static std::string base64_decode(const std::string& in) {
    static const std::string chars = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    int val = 0, bits = -8;
    for (unsigned char c : in) {
      const auto pos = chars.find(static_cast<char>(c));
      if (pos == std::string::npos) break;
      val = (val << 6) + static_cast<int>(pos);
      bits += 6;
      if (bits >= 0) {
        out.push_back(static_cast<char>((val >> bits) & 0xFF));
        bits -= 8;
      }
    }
    return out;
  }

  void replay(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return;  // fresh log
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const json e = json::parse(line);
        const std::string id = e.at("session_id").get<std::string>();
        const std::string kind = e.at("event").get<std::string>();
        if (kind == "create") {
          auto s = std::make_shared<Session>();
          s->id = id;
          s->created_at = e.at("created_at").get<std::string>();
          s->mode = parse_mode(e.at("mode").get<std::string>()).value();
          s->seed = e.at("seed").get<std::uint64_t>();
          sessions[id] = s;
          next_id = std::max(next_id, e.value("serial", std::uint64_t{0}) + 1);
        } else if (kind == "turn") {
          auto& s = sessions.at(id);
          const json& t = e.at("turn");
          SessionTurn st;
          st.agent = t.at("role").get<std::string>() == "agent";
          st.turn.speaker = parse_speaker(t.at("speaker").get<std::string>()).value();
          st.turn.transcript = t.at("transcript").get<std::string>();
          if (t.contains("caption")) {
            st.turn.caption = Caption{t.at("caption").get<std::string>(),
                                      t.value("instruction_id", ""), profile_from_json(t.at("profile"))};
          }
          st.voice_id = t.value("voice_id", "");
          if (t.contains("audio_wav_base64")) st.wav = base64_decode(t.at("audio_wav_base64").get<std::string>());
          s->history.push_back(std::move(st));
        }
      } catch (const std::exception& ex) {
        throw Error(Errc::parse, "session log line " + std::to_string(line_no) + ": " + ex.what());
      }
    }
  }

  // ---- operations ----

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    auto s = std::make_shared<Session>();
    s->mode = config.default_mode;
    s->seed = config.seed;
    if (!req.body.empty()) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception&) {
        return send_error(res, 400, "config overrides must be a JSON object");
      }
      if (!body.is_object()) return send_error(res, 400, "config overrides must be a JSON object");
      for (const auto& [key, value] : body.items()) {
        if (key == "mode") {
          const auto m = value.is_string() ? parse_mode(value.get<std::string>()) : std::nullopt;
          if (!m) return send_error(res, 400, "unknown mode");
          s->mode = *m;
        } else if (key == "seed") {
          if (!value.is_number_unsigned()) return send_error(res, 400, "seed must be a non-negative integer");
          s->seed = value.get<std::uint64_t>();
        } else {
          return send_error(res, 400, "unknown override '" + key + "'");
        }
      }
    }
    s->created_at = now_iso();
    std::uint64_t serial = 0;
    {
      std::unique_lock lock(sessions_mutex);
      serial = next_id++;
      char buf[32];
      std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(serial));
      s->id = buf;
      sessions[s->id] = s;
    }
    log({{"event", "create"}, {"session_id", s->id}, {"serial", serial}, {"created_at", s->created_at},
         {"mode", to_string(s->mode)}, {"seed", s->seed}});
    send_json(res, 201, session_json(*s));
  }

  void get(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.path_params.at("id"));
    if (!s) return send_error(res, 404, "unknown session");
    std::lock_guard lock(s->mutex);
    send_json(res, 200, session_json(*s));
  }

  void append(Session& s, SessionTurn turn) {
    const std::size_t index = s.history.size();
    log({{"event", "turn"}, {"session_id", s.id}, {"turn", turn_json(turn, s.id, index, true)}});
    s.history.push_back(std::move(turn));
  }

  void post_turn(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.path_params.at("id"));
    if (!s) return send_error(res, 404, "unknown session");

    std::string transcript;
    if (req.has_file("transcript")) transcript = req.get_file_value("transcript").content;
    else if (req.has_param("transcript")) transcript = req.get_param_value("transcript");
    const bool has_audio = req.has_file("audio") && !req.get_file_value("audio").content.empty();
    if (!has_audio && transcript.find_first_not_of(" \t\r\n") == std::string::npos) {
      return send_error(res, 422, "turn needs audio or a transcript");
    }
    std::optional<AudioClip> clip;
    std::string wav;
    if (has_audio) {
      wav = req.get_file_value("audio").content;
      try {
        clip = decode_wav(std::span(reinterpret_cast<const unsigned char*>(wav.data()), wav.size()));
      } catch (const Error& e) {
        return send_error(res, 400, "audio is not a decodable WAV", e.what());
      }
    }

    std::lock_guard lock(s->mutex);
    const std::size_t index = s->history.size();
    const std::uint64_t seed = derive_seed(s->seed, s->id + "/turn/" + std::to_string(index));
    Caption caption;
    try {
      if (clip) {
        const CaptionContext ctx{&config.calibration, config.bank, config.prosody};
        caption = caption_turn_or(*clip, transcript, ctx, std::nullopt, seed, config.fallback);
      } else {
        caption = generate_caption(config.fallback, *config.bank, seed);
      }
    } catch (const Error& e) {
      return send_error(res, e.code() == Errc::insufficient_data ? 400 : 500, "captioning failed", e.what());
    }
    SessionTurn turn;
    turn.turn.speaker = Speaker::A;
    turn.turn.transcript = transcript;
    turn.turn.caption = caption;
    turn.wav = std::move(wav);
    append(*s, std::move(turn));
    send_json(res, 200, {{"index", index},
                         {"caption", caption.text},
                         {"instruction_id", caption.instruction_id},
                         {"profile", profile_json(caption.profile)}});
  }

  void respond(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.path_params.at("id"));
    if (!s) return send_error(res, 404, "unknown session");
    std::lock_guard lock(s->mutex);
    ResponseMode mode = s->mode;
    if (req.has_param("mode")) {
      const auto m = parse_mode(req.get_param_value("mode"));
      if (!m) return send_error(res, 400, "unknown mode '" + req.get_param_value("mode") + "'");
      mode = *m;
    }
    if (s->history.empty()) return send_error(res, 409, "session has no turns to respond to");

    std::vector<DialogueTurn> history;
    history.reserve(s->history.size());
    for (const auto& t : s->history) history.push_back(t.turn);
    PlanContext ctx;
    ctx.backend = config.chat;
    ctx.classifier = config.classifier;
    ctx.voices = config.voices;
    ctx.bank = config.bank;
    const std::size_t index = s->history.size();
    ResponsePlan plan;
    std::string wav;
    try {
      plan = plan_response(history, mode, ctx, derive_seed(s->seed, s->id + "/respond/" + std::to_string(index)));
      const AudioClip audio = synthesize(plan, *config.voices, *config.tts);
      const auto bytes = encode_wav(audio);
      wav.assign(bytes.begin(), bytes.end());
    } catch (const Error& e) {
      if (is_backend_failure(e.code())) return send_error(res, 502, "backend failure", e.what());
      return send_error(res, 500, "response failed", e.what());
    }

    SessionTurn turn;
    turn.agent = true;
    turn.turn.speaker = other(s->history.back().turn.speaker);
    turn.turn.transcript = plan.content;
    turn.turn.caption = Caption{plan.response_caption, "", plan.attributes};
    turn.voice_id = plan.voice_id;
    turn.wav = wav;
    append(*s, std::move(turn));
    send_json(res, 200, {{"index", index},
                         {"mode", to_string(mode)},
                         {"content", plan.content},
                         {"response_caption", plan.response_caption},
                         {"attributes", profile_json(plan.attributes)},
                         {"voice_id", plan.voice_id},
                         {"audio_url", "/sessions/" + s->id + "/audio/" + std::to_string(index)},
                         {"audio_wav_base64", httplib::detail::base64_encode(wav)}});
  }

  void audio(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.path_params.at("id"));
    if (!s) return send_error(res, 404, "unknown session");
    const std::string& idx_text = req.path_params.at("index");
    std::size_t idx = 0;
    const auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
    std::lock_guard lock(s->mutex);
    if (ec != std::errc{} || ptr != idx_text.data() + idx_text.size() || idx >= s->history.size() ||
        s->history[idx].wav.empty()) {
      return send_error(res, 404, "no audio for that turn");
    }
    res.status = 200;
    res.set_content(s->history[idx].wav, "audio/wav");
  }

  json probe(const std::string& backend, const std::string& url) const {
    if (backend == "mock") return true;
    if (url.empty()) return nullptr;
    return http::get_once(url, 2.0).status != 0;
  }

  void health(httplib::Response& res) const {
    const std::string llm = config.chat->name();
    const std::string tts = config.tts->name();
    send_json(res, 200, {{"status", "ok"},
                         {"version", kVersion},
                         {"backends", {{"llm", llm}, {"tts", tts}}},
                         {"reachable", {{"llm", probe(llm, config.llm_probe_url)},
                                        {"tts", probe(tts, config.tts_probe_url)}}}});
  }
};

Gateway::Gateway(GatewayConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Gateway::~Gateway() { stop(); }

void Gateway::mount(httplib::Server& server) {
  Impl* impl = impl_.get();
  const auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const std::exception& e) {
        send_error(res, 500, "internal error", e.what());
      }
    };
  };
  server.Post("/sessions", guarded([impl](const auto& req, auto& res) { impl->create(req, res); }));
  server.Get("/sessions/:id", guarded([impl](const auto& req, auto& res) { impl->get(req, res); }));
  server.Post("/sessions/:id/turns", guarded([impl](const auto& req, auto& res) { impl->post_turn(req, res); }));
  server.Post("/sessions/:id/respond", guarded([impl](const auto& req, auto& res) { impl->respond(req, res); }));
  server.Get("/sessions/:id/audio/:index", guarded([impl](const auto& req, auto& res) { impl->audio(req, res); }));
  server.Get("/health", guarded([impl](const auto&, auto& res) { impl->health(res); }));
  if (impl->config.static_dir) {
    if (!server.set_mount_point("/", impl->config.static_dir->string())) {
      throw Error(Errc::not_found, "static directory not found: " + impl->config.static_dir->string());
    }
  }
}

bool Gateway::listen(const std::string& bind) {
  const auto [host, port] = parse_bind(bind);
  impl_->owned_server = std::make_unique<httplib::Server>();
  mount(*impl_->owned_server);
  return impl_->owned_server->listen(host, port);
}

int Gateway::start_background(const std::string& host) {
  impl_->owned_server = std::make_unique<httplib::Server>();
  mount(*impl_->owned_server);
  const int port = impl_->owned_server->bind_to_any_port(host);
  if (port <= 0) throw Error(Errc::io, "cannot bind gateway on " + host);
  impl_->server_thread = std::thread([srv = impl_->owned_server.get()] { srv->listen_after_bind(); });
  impl_->owned_server->wait_until_ready();
  return port;
}

void Gateway::stop() {
  if (!impl_ || !impl_->owned_server) return;
  impl_->owned_server->stop();
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

std::size_t Gateway::session_count() const {
  std::shared_lock lock(impl_->sessions_mutex);
  return impl_->sessions.size();
}

std::pair<std::string, int> parse_bind(std::string_view bind) {
  if (bind.empty()) throw Error(Errc::invalid_argument, "empty bind address");
  const auto colon = bind.rfind(':');
  if (colon == std::string_view::npos) return {std::string(bind), 8080};
  const std::string_view port_text = bind.substr(colon + 1);
  int port = 0;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw Error(Errc::invalid_argument, "bad port in bind address '" + std::string(bind) + "'");
  }
  std::string host(bind.substr(0, colon));
  if (host.empty()) host = "0.0.0.0";
  return {host, port};
}

std::string bind_from_env() {
  const char* e = std::getenv("PERCEPT_BIND");
  return e && *e ? e : "127.0.0.1:8080";
}

}  // namespace percept
