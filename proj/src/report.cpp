// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <sstream>

#include "percept/error.hpp"
#include "percept/harness.hpp"

namespace percept {

namespace {

constexpr std::array<std::string_view, 13> kColumns{
    "variant",     "sample_count", "failed",   "acc_emotion",        "acc_pitch",
    "acc_speed",   "acc_energy",   "acc_overall", "content_similarity", "ffe_mean",
    "ffe_std",     "ffe_pooled",   "duration_warnings"};

constexpr std::array<std::string_view, 12> kMarkdownHeaders{
    "variant",           "samples",           "failed",        "emotion acc (%)",
    "pitch acc (%)",     "speed acc (%)",     "energy acc (%)", "overall acc (%)",
    "content sim (%)",   "FFE (mean±std)",    "FFE pooled",    "duration warnings"};

constexpr std::string_view kNa = "n/a";
constexpr std::string_view kPlusMinus = "±";

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(std::optional<double> v) { return v ? fixed(*v * 100.0, 2) : std::string(kNa); }
std::string ffe_cell(std::optional<double> v) { return v ? fixed(*v, 4) : std::string(kNa); }

std::optional<double> factor_acc(const MetricsReport& r, Factor f) {
  const auto it = r.per_factor_accuracy.find(f);
  if (it == r.per_factor_accuracy.end()) return std::nullopt;
  return it->second;
}

ReportRow to_row(const MetricsReport& r) {
  ReportRow row;
  row["variant"] = r.label;
  row["sample_count"] = std::to_string(r.sample_count);
  row["failed"] = std::to_string(r.failed_count);
  row["acc_emotion"] = percent(factor_acc(r, Factor::emotion));
  row["acc_pitch"] = percent(factor_acc(r, Factor::pitch));
  row["acc_speed"] = percent(factor_acc(r, Factor::speed));
  row["acc_energy"] = percent(factor_acc(r, Factor::energy));
  row["acc_overall"] = percent(r.overall_accuracy);
  row["content_similarity"] = percent(r.content_similarity);
  row["ffe_mean"] = ffe_cell(r.ffe ? std::optional(r.ffe->mean) : std::nullopt);
  row["ffe_std"] = ffe_cell(r.ffe ? std::optional(r.ffe->std) : std::nullopt);
  row["ffe_pooled"] = ffe_cell(r.ffe_pooled);
  row["duration_warnings"] = std::to_string(r.duration_warnings);
  return row;
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trimmed(line).empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

std::string format_report(const std::vector<MetricsReport>& reports, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& r : reports) {
      const ReportRow row = to_row(r);
      for (std::size_t i = 0; i < kColumns.size(); ++i) {
        out << (i ? "," : "") << csv_escape(row.at(std::string(kColumns[i])));
      }
      out << '\n';
    }
    return out.str();
  }
  out << '|';
  for (auto h : kMarkdownHeaders) out << ' ' << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < kMarkdownHeaders.size(); ++i) out << (i == 0 ? "---|" : "---:|");
  out << '\n';
  for (const auto& r : reports) {
    ReportRow row = to_row(r);
    const std::string ffe = r.ffe ? row["ffe_mean"] + std::string(kPlusMinus) + row["ffe_std"] : std::string(kNa);
    out << "| " << row["variant"] << " | " << row["sample_count"] << " | " << row["failed"] << " | "
        << row["acc_emotion"] << " | " << row["acc_pitch"] << " | " << row["acc_speed"] << " | "
        << row["acc_energy"] << " | " << row["acc_overall"] << " | " << row["content_similarity"]
        << " | " << ffe << " | " << row["ffe_pooled"] << " | " << row["duration_warnings"] << " |\n";
  }
  return out.str();
}

void emit_report(const std::vector<MetricsReport>& reports, ReportFormat format,
                 const std::filesystem::path& path) {
  if (reports.empty()) throw Error(Errc::insufficient_data, "no report rows to emit");
  for (const auto& r : reports) r.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write report " + path.string());
  out << format_report(reports, format);
  out.flush();
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

std::string format_dialogues(const std::vector<DialogueOutcome>& outcomes) {
  std::ostringstream out;
  out << "dialogue_id,status,voice_id,response_attributes,recovered_attributes,truth_attributes,"
         "history_captions,response_caption,content,content_similarity,ffe,error\n";
  for (const auto& o : outcomes) {
    std::string captions;
    for (std::size_t i = 0; i < o.history_captions.size(); ++i) {
      captions += (i ? " | " : "") + o.history_captions[i];
    }
    out << csv_escape(o.dialogue_id) << ',' << (o.ok ? "ok" : "failed") << ','
        << csv_escape(o.ok ? o.plan.voice_id : "") << ','
        << csv_escape(o.ok ? o.plan.attributes.to_string() : "") << ','
        << csv_escape(o.ok ? o.recovered.to_string() : "") << ','
        << csv_escape(o.truth ? o.truth->to_string() : "") << ',' << csv_escape(captions) << ','
        << csv_escape(o.ok ? o.plan.response_caption : "") << ','
        << csv_escape(o.ok ? o.plan.content : "") << ','
        << (o.content_similarity ? fixed(*o.content_similarity, 4) : "") << ','
        << (o.ffe ? fixed(o.ffe->fraction(), 4) : "") << ',' << csv_escape(o.error) << '\n';
  }
  return out.str();
}

std::vector<ReportRow> parse_csv_report(std::string_view csv) {
  const auto lines = lines_of(csv);
  if (lines.empty()) throw Error(Errc::parse, "empty CSV report");
  const auto header = split_csv_line(lines[0]);
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size()) {
      throw Error(Errc::parse, "CSV report line " + std::to_string(i + 1) + " has " +
                                   std::to_string(cells.size()) + " cells, expected " +
                                   std::to_string(header.size()));
    }
    ReportRow row;
    for (std::size_t c = 0; c < header.size(); ++c) row[header[c]] = cells[c];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ReportRow> parse_markdown_report(std::string_view markdown) {
  std::vector<ReportRow> rows;
  const auto lines = lines_of(markdown);
  bool seen_header = false;
  for (const auto& line : lines) {
    const std::string t = trimmed(line);
    if (t.front() != '|') continue;
    std::vector<std::string> cells;
    std::size_t start = 1;
    while (true) {
      const auto bar = t.find('|', start);
      if (bar == std::string::npos) break;
      cells.push_back(trimmed(std::string_view(t).substr(start, bar - start)));
      start = bar + 1;
    }
    if (!seen_header) {
      seen_header = true;
      if (cells.size() != kMarkdownHeaders.size()) throw Error(Errc::parse, "unexpected markdown report header");
      continue;
    }
    if (!cells.empty() && cells[0].starts_with("---")) continue;
    if (cells.size() != kMarkdownHeaders.size()) throw Error(Errc::parse, "markdown report row has wrong cell count");
    ReportRow row;
    std::size_t c = 0;
    for (std::string_view key : {"variant", "sample_count", "failed", "acc_emotion", "acc_pitch",
                                 "acc_speed", "acc_energy", "acc_overall", "content_similarity"}) {
      row[std::string(key)] = cells[c++];
    }
    const std::string& ffe = cells[c++];
    if (const auto pm = ffe.find(kPlusMinus); pm != std::string::npos) {
      row["ffe_mean"] = ffe.substr(0, pm);
      row["ffe_std"] = ffe.substr(pm + kPlusMinus.size());
    } else {
      row["ffe_mean"] = ffe;
      row["ffe_std"] = ffe;
    }
    row["ffe_pooled"] = cells[c++];
    row["duration_warnings"] = cells[c++];
    rows.push_back(std::move(row));
  }
  if (!seen_header) throw Error(Errc::parse, "no markdown table found");
  return rows;
}

}  // namespace percept
