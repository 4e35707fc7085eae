// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "percept/error.hpp"
#include "percept/gateway.hpp"
#include "percept/harness.hpp"

namespace fs = std::filesystem;
using namespace percept;

namespace {

struct Shared {
  std::string voices_path;
  std::string instructions_path;
  std::string lexicon_path;
  std::string calibration_path;
  std::string prompts_path;
  std::string llm = "mock";
  std::string tts = "mock";
  std::uint64_t seed = 7;
  int threads = 0;
};

// Backends and tables live here so the raw pointers in configs stay valid.
struct Runtime {
  VoiceTable voices = VoiceTable::builtin();
  InstructionBank bank = InstructionBank::builtin();
  Lexicon lexicon = Lexicon::builtin();
  PromptTemplates prompts = PromptTemplates::builtin();
  std::unique_ptr<ChatBackend> chat;
  std::unique_ptr<TtsBackend> tts;
  std::unique_ptr<CaptionClassifier> classifier;
  Calibration calibration;

  explicit Runtime(const Shared& s) {
    if (!s.voices_path.empty()) voices = VoiceTable::load(s.voices_path);
    if (!s.instructions_path.empty()) bank = InstructionBank::load(s.instructions_path);
    if (!s.lexicon_path.empty()) lexicon = Lexicon::load(s.lexicon_path);
    if (!s.prompts_path.empty()) prompts = PromptTemplates::load(s.prompts_path);
    if (s.llm == "remote") {
      auto cfg = ChatConfig::from_env();
      cfg.validate();
      chat = std::make_unique<RemoteChatBackend>(cfg);
    } else {
      chat = std::make_unique<MockChatBackend>();
    }
    if (s.tts == "remote") {
      tts = std::make_unique<RemoteTtsBackend>(TtsConfig::from_env());
    } else {
      tts = std::make_unique<MockTtsBackend>();
    }
    classifier = std::make_unique<LexiconClassifier>(lexicon);
    if (!s.calibration_path.empty()) {
      std::ifstream in(s.calibration_path);
      if (!in) throw Error(Errc::io, "cannot open calibration " + s.calibration_path);
      std::stringstream ss;
      ss << in.rdbuf();
      calibration = calibration_from_json(ss.str());
    } else {
      calibration = reference_calibration(voices, *tts);
    }
  }
};

void add_shared(CLI::App* cmd, Shared& s) {
  cmd->add_option("--voices", s.voices_path, "Voice table (voice_id TAB base_f0_hz TAB backend)");
  cmd->add_option("--instructions", s.instructions_path, "Caption instruction templates");
  cmd->add_option("--lexicon", s.lexicon_path, "Caption lexicon");
  cmd->add_option("--calibration", s.calibration_path, "Calibration JSON (default: measured on the voices)");
  cmd->add_option("--prompts", s.prompts_path, "Prompt templates JSON");
  cmd->add_option("--llm", s.llm, "Chat backend")->check(CLI::IsMember({"mock", "remote"}));
  cmd->add_option("--tts", s.tts, "Speech backend")->check(CLI::IsMember({"mock", "remote"}));
  cmd->add_option("--seed", s.seed, "Run seed");
  cmd->add_option("--threads", s.threads, "Worker threads (0 = all cores)");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  out << text;
}

RunConfig run_config(const Shared& s, Runtime& rt) {
  RunConfig cfg;
  cfg.seed = s.seed;
  cfg.voices = &rt.voices;
  cfg.bank = &rt.bank;
  cfg.calibration = rt.calibration;
  cfg.prompt.templates = &rt.prompts;
  cfg.threads = s.threads;
  return cfg;
}

void emit(const std::vector<MetricsReport>& reports, const std::string& format, const std::string& report_path,
          const std::string& out_dir, const std::vector<const RunResult*>& results) {
  const ReportFormat fmt = format == "markdown" ? ReportFormat::markdown : ReportFormat::csv;
  for (const auto& r : reports) r.validate();
  if (!out_dir.empty()) {
    emit_report(reports, ReportFormat::csv, fs::path(out_dir) / "report.csv");
    emit_report(reports, ReportFormat::markdown, fs::path(out_dir) / "report.md");
    for (const RunResult* r : results) {
      write_text(fs::path(out_dir) / ("dialogues_" + r->report.label + ".csv"), format_dialogues(r->dialogues));
    }
  }
  if (!report_path.empty()) {
    emit_report(reports, fmt, report_path);
  } else {
    std::cout << format_report(reports, fmt);
  }
  for (const RunResult* r : results) {
    for (const auto& d : r->dialogues) {
      if (!d.ok) std::cerr << "warning: " << r->report.label << '/' << d.dialogue_id << ": " << d.error << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perceptive spoken-dialogue pipeline"};
  app.require_subcommand(1);
  Shared shared;

  // caption
  auto* caption = app.add_subcommand("caption", "Caption the speaking style of a WAV file");
  std::string caption_wav, caption_transcript, caption_emotion;
  caption->add_option("wav", caption_wav, "Input WAV")->required();
  caption->add_option("--transcript", caption_transcript, "Transcript (enables the speed slot)");
  caption->add_option("--emotion", caption_emotion, "Emotion label from an external recogniser");
  add_shared(caption, shared);

  // respond
  auto* respond = app.add_subcommand("respond", "Run the response pipeline over a manifest");
  std::string manifest_path, mode_text = "with_captions", truth_path, out_dir, report_path, format = "csv";
  respond->add_option("manifest", manifest_path, "Dialogue manifest")->required();
  respond->add_option("--mode", mode_text, "with_captions | without_captions | random_attributes | all");
  respond->add_option("--truth", truth_path, "Truth table (dialogue_id TAB profile)");
  respond->add_option("--out", out_dir, "Directory for audio, per-dialogue CSV and reports");
  respond->add_option("--report", report_path, "Report file (default: stdout)");
  respond->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "markdown"}));
  add_shared(respond, shared);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Single-factor ablation over a manifest");
  ablate->add_option("manifest", manifest_path, "Dialogue manifest")->required();
  ablate->add_option("--truth", truth_path, "Truth table (dialogue_id TAB profile)");
  ablate->add_option("--out", out_dir, "Directory for audio, per-dialogue CSV and reports");
  ablate->add_option("--report", report_path, "Report file (default: stdout)");
  ablate->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "markdown"}));
  add_shared(ablate, shared);

  // eval-ffe
  auto* eval = app.add_subcommand("eval-ffe", "F0 frame error between two WAV files");
  std::string ref_wav, cand_wav;
  bool pitch_only = false;
  eval->add_option("reference", ref_wav, "Reference WAV")->required();
  eval->add_option("candidate", cand_wav, "Candidate WAV")->required();
  eval->add_flag("--pitch-only", pitch_only, "Ignore voicing-decision mismatches");

  // synth
  auto* synth = app.add_subcommand("synth", "Render text in a speaking style");
  std::string synth_text, synth_profile, synth_voice, synth_out = "synth.wav";
  synth->add_option("--text", synth_text, "Text to speak")->required();
  synth->add_option("--profile", synth_profile, "gender,emotion,pitch,speed,energy")->required();
  synth->add_option("--voice", synth_voice, "Voice id")->required();
  synth->add_option("--out", synth_out, "Output WAV");
  add_shared(synth, shared);

  // serve
  auto* serve = app.add_subcommand("serve", "Start the HTTP gateway");
  std::string bind, log_path, static_dir;
  serve->add_option("--bind", bind, "host:port (default: PERCEPT_BIND or 127.0.0.1:8080)");
  serve->add_option("--log", log_path, "Session log (JSON lines, replayed on start)");
  serve->add_option("--static", static_dir, "Console bundle directory");
  add_shared(serve, shared);

  // calibrate
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Measure level terciles from a directory of WAVs");
  std::string cal_dir, cal_out;
  double gender_threshold = 165.0;
  calibrate_cmd->add_option("dir", cal_dir, "Directory of WAVs with optional .txt transcripts")->required();
  calibrate_cmd->add_option("--out", cal_out, "Output JSON (default: stdout)");
  calibrate_cmd->add_option("--gender-threshold", gender_threshold, "Mean-F0 split between voices (Hz)");

  // make-corpus
  auto* corpus_cmd = app.add_subcommand("make-corpus", "Write a synthetic evaluation corpus");
  std::string corpus_dir;
  SyntheticCorpusOptions corpus_opts;
  corpus_cmd->add_option("dir", corpus_dir, "Output directory")->required();
  corpus_cmd->add_option("--dialogues", corpus_opts.dialogues, "Number of dialogues");
  corpus_cmd->add_option("--corpus-seed", corpus_opts.seed, "Corpus seed");
  corpus_cmd->add_option("--voices", shared.voices_path, "Voice table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*caption) {
      Runtime rt(shared);
      const AudioClip clip = load_audio(caption_wav);
      std::optional<Emotion> hint;
      if (!caption_emotion.empty()) {
        hint = parse_emotion(caption_emotion);
        if (!hint) throw Error(Errc::invalid_argument, "unknown emotion '" + caption_emotion + "'");
      }
      const CaptionContext ctx{&rt.calibration, &rt.bank, {}};
      const Caption c = caption_turn(clip, caption_transcript, ctx, hint, shared.seed);
      std::cout << c.text << '\n' << c.profile.to_string() << '\n';
    } else if (*respond) {
      Runtime rt(shared);
      RunConfig cfg = run_config(shared, rt);
      TruthTable truth;
      if (!truth_path.empty()) {
        truth = load_truth(truth_path);
        cfg.truth = &truth;
      }
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
      }
      const DialogueManifest manifest = load_manifest(manifest_path);
      std::vector<ResponseMode> modes;
      if (mode_text == "all") {
        modes = {ResponseMode::with_captions, ResponseMode::without_captions, ResponseMode::random_attributes};
      } else if (auto m = parse_mode(mode_text)) {
        modes = {*m};
      } else {
        std::cerr << "error: unknown mode '" << mode_text << "'\n\n" << respond->help();
        return 1;
      }
      const Backends backends{rt.chat.get(), rt.tts.get(), rt.classifier.get(), nullptr};
      std::vector<RunResult> results;
      for (ResponseMode m : modes) {
        cfg.mode = m;
        if (!out_dir.empty()) cfg.output_dir = fs::path(out_dir) / std::string(to_string(m));
        results.push_back(run_pipeline(manifest, cfg, backends));
      }
      std::vector<MetricsReport> reports;
      std::vector<const RunResult*> ptrs;
      for (const auto& r : results) {
        reports.push_back(r.report);
        ptrs.push_back(&r);
      }
      emit(reports, format, report_path, out_dir, ptrs);
    } else if (*ablate) {
      Runtime rt(shared);
      RunConfig cfg = run_config(shared, rt);
      TruthTable truth;
      if (!truth_path.empty()) {
        truth = load_truth(truth_path);
        cfg.truth = &truth;
      }
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        cfg.output_dir = out_dir;
      }
      const DialogueManifest manifest = load_manifest(manifest_path);
      const Backends backends{rt.chat.get(), rt.tts.get(), rt.classifier.get(), nullptr};
      const auto results = run_factor_ablation(manifest, cfg, backends);
      std::vector<MetricsReport> reports;
      std::vector<const RunResult*> ptrs;
      for (const auto& r : results) {
        reports.push_back(r.report);
        ptrs.push_back(&r);
      }
      emit(reports, format, report_path, out_dir, ptrs);
    } else if (*eval) {
      const AudioClip ref = load_audio(ref_wav);
      AudioClip cand = load_audio(cand_wav);
      if (cand.sample_rate() != ref.sample_rate()) cand = resample(cand, ref.sample_rate());
      FfeOptions opts;
      opts.voicing_errors = !pitch_only;
      const double v = ffe(extract_prosody(ref, ""), extract_prosody(cand, ""), opts);
      std::printf("%.4f\n", v);
    } else if (*synth) {
      VoiceTable voices = shared.voices_path.empty() ? VoiceTable::builtin() : VoiceTable::load(shared.voices_path);
      std::unique_ptr<TtsBackend> tts;
      if (shared.tts == "remote") tts = std::make_unique<RemoteTtsBackend>(TtsConfig::from_env());
      else tts = std::make_unique<MockTtsBackend>();
      ResponsePlan plan;
      plan.content = synth_text;
      plan.attributes = parse_profile(synth_profile);
      plan.voice_id = synth_voice;
      const AudioClip audio = synthesize(plan, voices, *tts);
      save_audio(audio, synth_out);
      std::printf("%s %.3f s\n", synth_out.c_str(), audio.duration_s());
    } else if (*serve) {
      Runtime rt(shared);
      GatewayConfig cfg;
      cfg.chat = rt.chat.get();
      cfg.tts = rt.tts.get();
      cfg.classifier = rt.classifier.get();
      cfg.voices = &rt.voices;
      cfg.bank = &rt.bank;
      cfg.calibration = rt.calibration;
      cfg.seed = shared.seed;
      if (!log_path.empty()) cfg.log_path = log_path;
      if (!static_dir.empty()) cfg.static_dir = static_dir;
      if (shared.llm == "remote") cfg.llm_probe_url = ChatConfig::from_env().endpoint;
      if (shared.tts == "remote") cfg.tts_probe_url = TtsConfig::from_env().endpoint;
      Gateway gateway(cfg);
      const std::string where = bind.empty() ? bind_from_env() : bind;
      std::cerr << "listening on " << where << '\n';
      if (!gateway.listen(where)) throw Error(Errc::io, "cannot listen on " + where);
    } else if (*calibrate_cmd) {
      std::vector<fs::path> wavs;
      for (const auto& entry : fs::directory_iterator(cal_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav") wavs.push_back(entry.path());
      }
      std::sort(wavs.begin(), wavs.end());
      std::vector<ProsodyTrack> tracks;
      for (const auto& w : wavs) {
        fs::path txt = w;
        txt.replace_extension(".txt");
        const std::string transcript = fs::exists(txt) ? read_file(txt) : std::string();
        tracks.push_back(extract_prosody(load_audio(w), transcript));
      }
      const std::string json = calibration_to_json(calibrate(tracks, gender_threshold)) + "\n";
      if (cal_out.empty()) std::cout << json;
      else write_text(cal_out, json);
    } else if (*corpus_cmd) {
      const VoiceTable voices = shared.voices_path.empty() ? VoiceTable::builtin() : VoiceTable::load(shared.voices_path);
      const auto corpus = generate_synthetic_corpus(corpus_opts, voices, corpus_dir);
      std::printf("%zu dialogues written to %s\n", corpus.manifest.dialogues.size(), corpus_dir.c_str());
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
