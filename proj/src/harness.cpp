// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "percept/error.hpp"
#include "percept/random.hpp"

namespace percept {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.emplace_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

struct RawTurn {
  std::size_t line = 0;
  std::string dialogue_id;
  long index = 0;
  std::string speaker;
  std::string transcript;
  std::string audio;
  std::string emotion;
};

RawTurn parse_record(std::string_view line, std::size_t line_no) {
  const auto fail = [&](const std::string& why) {
    return Error(Errc::parse, "manifest line " + std::to_string(line_no) + ": " + why);
  };
  RawTurn t;
  t.line = line_no;
  std::string index_text;
  if (line.front() == '{') {
    json j;
    try {
      j = json::parse(line);
      t.dialogue_id = j.value("dialogue_id", "");
      if (j.contains("turn_index")) {
        index_text = j["turn_index"].is_number() ? std::to_string(j["turn_index"].get<long>())
                                                 : j["turn_index"].get<std::string>();
      }
      t.speaker = j.value("speaker", "");
      t.transcript = j.value("transcript", "");
      t.audio = j.value("audio_path", "");
      t.emotion = j.value("emotion", "");
    } catch (const json::exception& e) {
      throw fail(std::string("invalid JSON record: ") + e.what());
    }
  } else {
    const auto cols = split_tabs(line);
    if (cols.size() > 6) throw fail("too many fields");
    if (cols.size() < 4) throw fail("record missing transcript (need at least 4 tab-separated fields)");
    t.dialogue_id = cols[0];
    index_text = cols[1];
    t.speaker = cols[2];
    t.transcript = cols[3];
    if (cols.size() > 4) t.audio = cols[4];
    if (cols.size() > 5) t.emotion = cols[5];
  }
  t.dialogue_id = std::string(trim(t.dialogue_id));
  t.speaker = std::string(trim(t.speaker));
  t.transcript = std::string(trim(t.transcript));
  t.audio = std::string(trim(t.audio));
  t.emotion = std::string(trim(t.emotion));
  index_text = std::string(trim(index_text));
  if (t.dialogue_id.empty()) throw fail("missing dialogue_id");
  const auto [ptr, ec] = std::from_chars(index_text.data(), index_text.data() + index_text.size(), t.index);
  if (index_text.empty() || ec != std::errc{} || ptr != index_text.data() + index_text.size()) {
    throw fail("turn_index must be an integer");
  }
  if (t.speaker.empty()) throw fail("missing speaker");
  if (t.transcript.empty()) throw fail("record missing transcript");
  if (!t.emotion.empty() && !parse_emotion(t.emotion)) throw fail("unknown emotion '" + t.emotion + "'");
  return t;
}

bool readable(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return static_cast<bool>(in);
}

// Sentences used by the synthetic corpus. Every line has at least six words.
const std::array<std::vector<std::string_view>, 7>& utterance_bank() {
  static const std::array<std::vector<std::string_view>, 7> bank{{
      {"I went to the store this morning and bought some bread",
       "We should probably talk about the schedule for next week",
       "The meeting moved to the other room down the hall"},
      {"I finally got the job I applied for last month",
       "My sister is coming to visit us this weekend",
       "We won the game last night in the final minute"},
      {"My old dog passed away yesterday after a long illness",
       "I did not get into the program I wanted",
       "Nobody came to my birthday party this year at all"},
      {"Someone scratched my car in the parking lot again today",
       "They cancelled my flight without telling me anything at all",
       "He took credit for my work in front of everyone"},
      {"You will never guess who I just ran into downtown",
       "The package I ordered last year just showed up today",
       "They announced the office is closing for the whole month"},
      {"I heard strange noises outside my window last night again",
       "The doctor wants to run a few more tests on me",
       "I have to give a speech in front of the whole school"},
      {"There was a hair in my soup at the restaurant",
       "The fridge at work smells like something died in there",
       "He chewed with his mouth open through the whole dinner"},
  }};
  return bank;
}

const std::array<std::vector<std::string_view>, 7>& reply_reference_bank() {
  static const std::array<std::vector<std::string_view>, 7> bank{{
      {"Okay I understand let me know what you need", "Right that makes sense to me thanks"},
      {"That is wonderful news I am so happy for you", "Oh that sounds great tell me all about it"},
      {"I am so sorry to hear that are you okay", "That sounds really hard I am here for you"},
      {"That is not fair at all I would be upset too", "I can see why you are angry about that"},
      {"Wow really I did not see that coming at all", "No way that is such a big surprise"},
      {"That sounds scary but we will figure it out together", "Try not to worry I am sure it will be fine"},
      {"Ugh that sounds really awful and gross", "That is so unpleasant I am sorry you saw that"},
  }};
  return bank;
}

constexpr std::string_view kCalibrationSentence =
    "we recorded this calibration sentence to measure how the voice sounds";

DialogueTurn fallback_caption_turn(const DialogueTurn& turn, const RunConfig& config, std::uint64_t seed) {
  DialogueTurn out = turn;
  AttributeProfile p = config.fallback;
  if (turn.emotion_truth) p.emotion = *turn.emotion_truth;
  out.caption = generate_caption(p, *config.bank, seed);
  return out;
}

struct Prepared {
  std::vector<DialogueTurn> history;
  std::optional<DialogueTurn> reference;
  ResponsePlan plan;
};

Prepared prepare(const ManifestDialogue& d, const RunConfig& config, const Backends& backends,
                 ResponseMode mode) {
  if (d.turns.empty()) throw Error(Errc::invalid_argument, "dialogue has no turns");
  Prepared p;
  const std::size_t history_len = d.turns.size() >= 2 ? d.turns.size() - 1 : d.turns.size();
  p.history.assign(d.turns.begin(), d.turns.begin() + static_cast<long>(history_len));
  if (d.turns.size() >= 2) p.reference = d.turns.back();

  if (mode != ResponseMode::without_captions) {
    const CaptionContext ctx{&config.calibration, config.bank, config.prosody};
    for (std::size_t k = 0; k < p.history.size(); ++k) {
      auto& turn = p.history[k];
      const std::uint64_t seed = derive_seed(config.seed, d.id + "/caption/" + std::to_string(k));
      if (!turn.audio_ref) {
        turn = fallback_caption_turn(turn, config, seed);
        continue;
      }
      const AudioClip clip = load_audio(*turn.audio_ref);
      turn.caption = caption_turn_or(clip, turn.transcript, ctx, turn.emotion_truth, seed, config.fallback);
    }
  }
  PlanContext plan_ctx;
  plan_ctx.backend = backends.chat;
  plan_ctx.classifier = backends.classifier;
  plan_ctx.voices = config.voices;
  plan_ctx.bank = config.bank;
  plan_ctx.prompt = config.prompt;
  p.plan = plan_response(p.history, mode, plan_ctx, derive_seed(config.seed, d.id + "/respond"));
  return p;
}

void score(DialogueOutcome& out, const Prepared& prep, const ResponsePlan& plan,
           const RunConfig& config, const Backends& backends, const std::string& audio_subdir) {
  out.plan = plan;
  for (const auto& t : prep.history) {
    if (t.caption) out.history_captions.push_back(t.caption->text);
  }
  const AudioClip audio = synthesize(plan, *config.voices, *backends.tts);
  if (config.output_dir) {
    const fs::path dir = *config.output_dir / "audio" / audio_subdir;
    fs::create_directories(dir);
    out.audio_path = dir / (out.dialogue_id + ".wav");
    save_audio(audio, *out.audio_path);
  }
  const ProsodyTrack track = extract_prosody(audio, plan.content, config.prosody);
  out.recovered = bin_profile(track, config.calibration, plan.attributes.emotion);

  std::optional<ProsodyTrack> ref_track;
  if (prep.reference && prep.reference->audio_ref) {
    AudioClip ref = load_audio(*prep.reference->audio_ref);
    if (ref.sample_rate() != audio.sample_rate()) ref = resample(ref, audio.sample_rate());
    ref_track = extract_prosody(ref, prep.reference->transcript, config.prosody);
  }

  const auto truth_row = config.truth ? config.truth->find(out.dialogue_id) : TruthTable::const_iterator{};
  if (config.truth && truth_row != config.truth->end()) {
    out.truth = truth_row->second;
    out.scored.assign(kScoredFactors.begin(), kScoredFactors.end());
  } else if (prep.reference) {
    AttributeProfile truth;
    if (ref_track) {
      truth = bin_profile(*ref_track, config.calibration, prep.reference->emotion_truth);
      out.scored = {Factor::pitch, Factor::speed, Factor::energy};
    }
    if (prep.reference->emotion_truth) {
      truth.emotion = *prep.reference->emotion_truth;
      out.scored.insert(out.scored.begin(), Factor::emotion);
    }
    if (!out.scored.empty()) out.truth = truth;
  }

  if (prep.reference) {
    static const TokenF1Similarity token_f1;
    const SimilarityBackend& sim = backends.similarity ? *backends.similarity : token_f1;
    out.content_similarity = sim.similarity(plan.content, prep.reference->transcript);
  }
  if (ref_track) {
    out.ffe = ffe_counts(*ref_track, track, config.ffe);
    out.duration_warning = std::abs(track.duration_s - ref_track->duration_s) > 0.1 * ref_track->duration_s;
  }
  out.ok = true;
}

int thread_count(const RunConfig& config) {
  return config.threads > 0 ? config.threads : omp_get_max_threads();
}

void check_backends(const Backends& b) {
  if (b.chat == nullptr || b.tts == nullptr) {
    throw Error(Errc::invalid_argument, "run needs chat and TTS backends");
  }
}

AttributeProfile pin_except(const AttributeProfile& p, std::optional<Factor> keep) {
  if (!keep) return p;
  AttributeProfile out;
  out.gender = p.gender;
  if (*keep == Factor::emotion) out.emotion = p.emotion;
  if (*keep == Factor::pitch) out.pitch = p.pitch;
  if (*keep == Factor::speed) out.speed = p.speed;
  if (*keep == Factor::energy) out.energy = p.energy;
  return out;
}

}  // namespace

DialogueManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open manifest " + path.string());
  const fs::path base = path.parent_path();

  DialogueManifest manifest;
  manifest.source_tag = path.filename().string();
  std::map<std::string, std::size_t> index_of;
  std::vector<std::vector<RawTurn>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    RawTurn turn = parse_record(line.front() == '{' ? t : std::string_view(line), line_no);
    auto [it, inserted] = index_of.emplace(turn.dialogue_id, raw.size());
    if (inserted) raw.emplace_back();
    raw[it->second].push_back(std::move(turn));
  }

  for (auto& turns : raw) {
    ManifestDialogue d;
    d.id = turns.front().dialogue_id;
    std::stable_sort(turns.begin(), turns.end(),
                     [](const RawTurn& a, const RawTurn& b) { return a.index < b.index; });
    std::vector<std::string> speakers;
    for (std::size_t i = 0; i < turns.size(); ++i) {
      const RawTurn& r = turns[i];
      const auto fail = [&](Errc code, const std::string& why) {
        return Error(code, "manifest line " + std::to_string(r.line) + ": " + why);
      };
      if (i > 0 && turns[i - 1].index == r.index) {
        throw fail(Errc::parse, "duplicate turn_index " + std::to_string(r.index) + " in dialogue " + d.id);
      }
      auto sp = std::find(speakers.begin(), speakers.end(), r.speaker);
      if (sp == speakers.end()) {
        if (speakers.size() == 2) {
          throw fail(Errc::parse, "dialogue " + d.id + " has more than two speakers");
        }
        speakers.push_back(r.speaker);
        sp = speakers.end() - 1;
      }
      DialogueTurn turn;
      turn.speaker = sp == speakers.begin() ? Speaker::A : Speaker::B;
      turn.transcript = r.transcript;
      if (!r.emotion.empty()) turn.emotion_truth = parse_emotion(r.emotion);
      if (!r.audio.empty()) {
        fs::path audio = r.audio;
        if (audio.is_relative()) audio = base / audio;
        if (!readable(audio)) throw fail(Errc::not_found, "audio file not readable: " + audio.string());
        turn.audio_ref = audio;
      }
      d.turns.push_back(std::move(turn));
    }
    manifest.dialogues.push_back(std::move(d));
  }
  return manifest;
}

void write_manifest(const DialogueManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write manifest " + path.string());
  const fs::path base = path.parent_path();
  out << "# dialogue_id\tturn_index\tspeaker\ttranscript\taudio_path\temotion\n";
  for (const auto& d : manifest.dialogues) {
    for (std::size_t i = 0; i < d.turns.size(); ++i) {
      const auto& t = d.turns[i];
      std::string audio;
      if (t.audio_ref) audio = t.audio_ref->lexically_relative(base.empty() ? fs::path(".") : base).generic_string();
      if (t.audio_ref && audio.empty()) audio = t.audio_ref->generic_string();
      out << d.id << '\t' << i << '\t' << to_string(t.speaker) << '\t' << t.transcript << '\t' << audio
          << '\t' << (t.emotion_truth ? to_string(*t.emotion_truth) : std::string_view()) << '\n';
    }
  }
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

TruthTable load_truth(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open truth table " + path.string());
  TruthTable truth;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(Errc::parse, "truth line " + std::to_string(line_no) + ": expected 'dialogue_id<TAB>profile'");
    }
    truth[std::string(trim(t.substr(0, tab)))] = parse_profile(trim(t.substr(tab + 1)));
  }
  return truth;
}

void write_truth(const TruthTable& truth, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write truth table " + path.string());
  out << "# dialogue_id\tgender,emotion,pitch,speed,energy\n";
  for (const auto& [id, p] : truth) out << id << '\t' << p.to_string() << '\n';
}

std::string calibration_to_json(const Calibration& cal) {
  const auto pair = [](const Terciles& t) { return json::array({t.t1, t.t2}); };
  json j = {{"gender_f0_threshold_hz", cal.gender_f0_threshold_hz},
            {"pitch_male_hz", pair(cal.pitch_male_hz)},
            {"pitch_female_hz", pair(cal.pitch_female_hz)},
            {"speed_wps", pair(cal.speed_wps)},
            {"energy_rms", pair(cal.energy_rms)}};
  return j.dump(2);
}

Calibration calibration_from_json(std::string_view text) {
  Calibration cal;
  try {
    const json j = json::parse(text);
    const auto pair = [&](const char* key) {
      const auto& a = j.at(key);
      return Terciles{a.at(0).get<double>(), a.at(1).get<double>()};
    };
    cal.gender_f0_threshold_hz = j.at("gender_f0_threshold_hz").get<double>();
    cal.pitch_male_hz = pair("pitch_male_hz");
    cal.pitch_female_hz = pair("pitch_female_hz");
    cal.speed_wps = pair("speed_wps");
    cal.energy_rms = pair("energy_rms");
  } catch (const json::exception& e) {
    throw Error(Errc::parse, "calibration JSON: " + std::string(e.what()));
  }
  cal.validate();
  return cal;
}

Calibration reference_calibration(const VoiceTable& voices, const TtsBackend& tts,
                                  const ProsodyConfig& prosody) {
  std::vector<ProsodyTrack> tracks;
  for (const auto& voice : voices.voices()) {
    const AudioClip base = tts.speak(kCalibrationSentence, voice);
    for (Level p : kAllLevels) {
      for (Level s : kAllLevels) {
        for (Level e : kAllLevels) {
          const AttributeProfile profile{voice.gender(), Emotion::neutral, p, s, e};
          const AudioClip clip = render_directive(base, directive_from_profile(profile));
          tracks.push_back(extract_prosody(clip, kCalibrationSentence, prosody));
        }
      }
    }
  }
  return calibrate(tracks);
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusOptions& options,
                                          const VoiceTable& voices, const fs::path& dir) {
  if (options.dialogues == 0) throw Error(Errc::invalid_argument, "corpus needs at least one dialogue");
  if (options.min_history == 0 || options.max_history < options.min_history) {
    throw Error(Errc::invalid_argument, "history length range is invalid");
  }
  const fs::path audio_dir = dir / "audio";
  fs::create_directories(audio_dir);
  const MockTtsBackend tts;

  SyntheticCorpus corpus;
  corpus.manifest.source_tag = "synthetic";
  corpus.manifest.dialogues.resize(options.dialogues);
  std::vector<AttributeProfile> truths(options.dialogues);
  const auto n = static_cast<long>(options.dialogues);

#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "syn%04ld", i);
    const std::string id = id_buf;
    SeededRng rng(derive_seed(options.seed, id));
    const auto& vs = voices.voices();
    const std::size_t a = rng.index(vs.size());
    const std::size_t b = vs.size() > 1 ? (a + 1 + rng.index(vs.size() - 1)) % vs.size() : a;
    const std::array<const VoiceSpec*, 2> voice_of{&vs[a], &vs[b]};
    const std::size_t history = options.min_history + rng.index(options.max_history - options.min_history + 1);

    ManifestDialogue d;
    d.id = id;
    AttributeProfile last;
    for (std::size_t k = 0; k <= history; ++k) {
      const bool is_reference = k == history;
      const auto speaker = k % 2 == 0 ? Speaker::A : Speaker::B;
      const VoiceSpec& voice = *voice_of[static_cast<std::size_t>(speaker)];
      AttributeProfile profile;
      std::string transcript;
      if (is_reference) {
        profile = empathetic_mirror(last, voice.gender());
        const auto& bank = reply_reference_bank()[static_cast<std::size_t>(profile.emotion)];
        transcript = bank[rng.index(bank.size())];
      } else {
        profile.gender = voice.gender();
        profile.emotion = kAllEmotions[rng.index(kAllEmotions.size())];
        profile.pitch = kAllLevels[rng.index(3)];
        profile.speed = kAllLevels[rng.index(3)];
        profile.energy = kAllLevels[rng.index(3)];
        const auto& bank = utterance_bank()[static_cast<std::size_t>(profile.emotion)];
        transcript = bank[rng.index(bank.size())];
      }
      const AudioClip clip = render_directive(tts.speak(transcript, voice), directive_from_profile(profile));
      const fs::path wav = audio_dir / (id + "_" + std::to_string(k) + ".wav");
      save_audio(clip, wav);

      DialogueTurn turn;
      turn.speaker = speaker;
      turn.transcript = transcript;
      turn.audio_ref = wav;
      turn.emotion_truth = profile.emotion;
      d.turns.push_back(std::move(turn));
      last = profile;
    }
    truths[static_cast<std::size_t>(i)] = last;
    corpus.manifest.dialogues[static_cast<std::size_t>(i)] = std::move(d);
  }
  for (std::size_t i = 0; i < truths.size(); ++i) {
    corpus.truth[corpus.manifest.dialogues[i].id] = truths[i];
  }
  write_manifest(corpus.manifest, dir / "manifest.tsv");
  write_truth(corpus.truth, dir / "truth.tsv");
  return corpus;
}

void MetricsReport::validate() const {
  const auto frac = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::invariant_violation, std::string(what) + " outside [0, 1]");
  };
  if (sample_count < 1) throw Error(Errc::invariant_violation, "report '" + label + "' has no scored samples");
  for (const auto& [f, v] : per_factor_accuracy) frac(v, "accuracy");
  if (overall_accuracy) frac(*overall_accuracy, "overall accuracy");
  if (content_similarity) frac(*content_similarity, "content similarity");
  if (ffe) frac(ffe->mean, "FFE");
  if (ffe_pooled) frac(*ffe_pooled, "pooled FFE");
}

MetricsReport aggregate(std::string label, const std::vector<DialogueOutcome>& outcomes) {
  MetricsReport r;
  r.label = std::move(label);
  std::map<Factor, std::pair<std::size_t, std::size_t>> hits;  // hits, total
  std::vector<double> sims, ffes;
  std::size_t ffe_err = 0, ffe_frames = 0;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++r.failed_count;
      continue;
    }
    ++r.sample_count;
    if (o.truth) {
      for (Factor f : o.scored) {
        auto& [h, total] = hits[f];
        ++total;
        if (o.recovered.index_of(f) == o.truth->index_of(f)) ++h;
      }
    }
    if (o.content_similarity) sims.push_back(*o.content_similarity);
    if (o.ffe) {
      ffes.push_back(o.ffe->fraction());
      ffe_err += o.ffe->errors;
      ffe_frames += o.ffe->frames;
    }
    if (o.duration_warning) ++r.duration_warnings;
  }
  if (!hits.empty()) {
    double sum = 0.0;
    for (const auto& [f, ht] : hits) {
      const double acc = static_cast<double>(ht.first) / static_cast<double>(ht.second);
      r.per_factor_accuracy[f] = acc;
      sum += acc;
    }
    r.overall_accuracy = sum / static_cast<double>(hits.size());
  }
  if (!sims.empty()) r.content_similarity = mean_std(sims).mean;
  if (!ffes.empty()) {
    r.ffe = mean_std(ffes);
    r.ffe_pooled = static_cast<double>(ffe_err) / static_cast<double>(ffe_frames);
  }
  return r;
}

RunResult run_pipeline(const DialogueManifest& manifest, const RunConfig& config,
                       const Backends& backends) {
  check_backends(backends);
  config.calibration.validate();
  RunResult result;
  result.dialogues.resize(manifest.dialogues.size());
  const auto n = static_cast<long>(manifest.dialogues.size());

#pragma omp parallel for schedule(dynamic) num_threads(thread_count(config))
  for (long i = 0; i < n; ++i) {
    const auto& d = manifest.dialogues[static_cast<std::size_t>(i)];
    DialogueOutcome& out = result.dialogues[static_cast<std::size_t>(i)];
    out.dialogue_id = d.id;
    try {
      const Prepared prep = prepare(d, config, backends, config.mode);
      score(out, prep, prep.plan, config, backends, "");
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  }
  std::stable_sort(result.dialogues.begin(), result.dialogues.end(),
                   [](const DialogueOutcome& a, const DialogueOutcome& b) { return a.dialogue_id < b.dialogue_id; });
  result.report = aggregate(std::string(to_string(config.mode)), result.dialogues);
  return result;
}

std::vector<RunResult> run_factor_ablation(const DialogueManifest& manifest,
                                           const RunConfig& config, const Backends& backends) {
  check_backends(backends);
  if (config.mode != ResponseMode::with_captions) {
    throw Error(Errc::invalid_argument, "factor ablation runs in with_captions mode");
  }
  config.calibration.validate();
  const std::array<std::pair<std::string, std::optional<Factor>>, 5> variants{{
      {"full", std::nullopt},
      {"emotion", Factor::emotion},
      {"speed", Factor::speed},
      {"energy", Factor::energy},
      {"pitch", Factor::pitch},
  }};
  std::vector<RunResult> results(variants.size());
  for (auto& r : results) r.dialogues.resize(manifest.dialogues.size());
  const auto n = static_cast<long>(manifest.dialogues.size());

#pragma omp parallel for schedule(dynamic) num_threads(thread_count(config))
  for (long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto& d = manifest.dialogues[idx];
    std::optional<Prepared> prep;
    std::string prep_error;
    try {
      prep = prepare(d, config, backends, ResponseMode::with_captions);
    } catch (const std::exception& e) {
      prep_error = e.what();
    }
    for (std::size_t v = 0; v < variants.size(); ++v) {
      DialogueOutcome& out = results[v].dialogues[idx];
      out.dialogue_id = d.id;
      if (!prep) {
        out.error = prep_error;
        continue;
      }
      try {
        ResponsePlan plan = prep->plan;
        plan.attributes = pin_except(plan.attributes, variants[v].second);
        score(out, *prep, plan, config, backends, variants[v].first);
      } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
      }
    }
  }
  for (std::size_t v = 0; v < variants.size(); ++v) {
    auto& dl = results[v].dialogues;
    std::stable_sort(dl.begin(), dl.end(),
                     [](const DialogueOutcome& a, const DialogueOutcome& b) { return a.dialogue_id < b.dialogue_id; });
    results[v].report = aggregate(variants[v].first, dl);
  }
  return results;
}

}  // namespace percept
