#include "lfqa/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "lfqa/error.hpp"

namespace lfqa {

ReportFormat parse_report_format(std::string_view name) {
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "csv") return ReportFormat::Csv;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown report format '{}'", name));
}

namespace {

std::string fixed4(std::optional<double> v) { return v ? fmt::format("{:.4f}", *v) : "n/a"; }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

std::optional<double> parse_value(const std::string& field, std::size_t line_no) {
  if (field == "n/a") return std::nullopt;
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::Parse, fmt::format("report line {}: '{}' is not a number", line_no, field));
  }
  return v;
}

}  // namespace

std::string render_report(const ResultsTable& table, ReportFormat format) {
  if (table.rows.empty()) fail(ErrorCode::InvalidArgument, "cannot render an empty results table");
  std::string out;
  if (format == ReportFormat::Markdown) {
    out += fmt::format("| {} |\n", fmt::join(kReportColumns, " | "));
    out += "|---|---|---|---|---|\n";
    for (const auto& r : table.rows) {
      out += fmt::format("| {} | {} | {} | {} | {} |\n", r.label, fixed4(r.bleu1), fixed4(r.rouge1),
                         fixed4(r.bertscore), fixed4(r.meteor));
    }
    if (!table.provenance.empty()) {
      out += "\n";
      for (const auto& [key, value] : table.provenance) out += fmt::format("- {}: {}\n", key, value);
    }
    return out;
  }
  out += fmt::format("{}\n", fmt::join(kReportColumns, ","));
  for (const auto& r : table.rows) {
    out += fmt::format("{},{},{},{},{}\n", csv_field(r.label), fixed4(r.bleu1), fixed4(r.rouge1),
                       fixed4(r.bertscore), fixed4(r.meteor));
  }
  for (const auto& [key, value] : table.provenance) out += fmt::format("# {}: {}\n", key, value);
  return out;
}

void emit_report(const ResultsTable& table, ReportFormat format, const std::filesystem::path& path) {
  const auto rendered = render_report(table, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << rendered;
  if (!out) fail(ErrorCode::Io, fmt::format("write failed for '{}'", path.string()));
}

ResultsTable parse_csv_report(std::string_view csv) {
  ResultsTable table;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body(line);
      body.remove_prefix(1);
      while (body.starts_with(' ')) body.remove_prefix(1);
      const auto colon = body.find(": ");
      if (colon == std::string_view::npos) {
        table.provenance.emplace_back(std::string(body), "");
      } else {
        table.provenance.emplace_back(std::string(body.substr(0, colon)),
                                      std::string(body.substr(colon + 2)));
      }
      continue;
    }
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      if (fields.size() != kReportColumns.size() ||
          !std::equal(fields.begin(), fields.end(), kReportColumns.begin())) {
        fail(ErrorCode::Parse, "report header must be Model,BLEU-1,ROUGE-1,BERTScore,METEOR");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != kReportColumns.size()) {
      fail(ErrorCode::Parse, fmt::format("report line {}: expected 5 fields", line_no));
    }
    ResultRow row;
    row.label = fields[0];
    const auto required = [&](const std::string& f) {
      auto v = parse_value(f, line_no);
      if (!v) fail(ErrorCode::Parse, fmt::format("report line {}: missing value", line_no));
      return *v;
    };
    row.bleu1 = required(fields[1]);
    row.rouge1 = required(fields[2]);
    row.bertscore = parse_value(fields[3], line_no);
    row.meteor = required(fields[4]);
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) fail(ErrorCode::Parse, "report has no header");
  return table;
}

ResultsTable read_csv_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open report '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_report(buf.str());
}

std::string comparison_key(std::string_view label) {
  const auto plus = label.rfind(" + ");
  return std::string(plus == std::string_view::npos ? label : label.substr(plus + 3));
}

namespace {

MetricDelta delta(std::optional<double> from, std::optional<double> to) {
  MetricDelta d{from, to, std::nullopt, std::nullopt};
  if (from && to) {
    d.absolute = *to - *from;
    if (*from != 0.0) d.percent = (*to - *from) / *from * 100.0;
  }
  return d;
}

}  // namespace

DeltaTable compare_runs(const ResultsTable& a, const ResultsTable& b) {
  // Same label set: pair rows by full label. Otherwise the runs are of
  // different models and rows pair by retrieval configuration.
  std::set<std::string> a_labels, b_labels;
  for (const auto& r : a.rows) a_labels.insert(r.label);
  for (const auto& r : b.rows) b_labels.insert(r.label);
  const bool by_label = a_labels == b_labels && a_labels.size() == a.rows.size();
  const auto key_of = [&](const std::string& label) { return by_label ? label : comparison_key(label); };

  std::map<std::string, const ResultRow*> b_rows;
  for (const auto& r : b.rows) {
    if (!b_rows.emplace(key_of(r.label), &r).second) {
      fail(ErrorCode::InvalidArgument, fmt::format("duplicate configuration '{}' in second table", r.label));
    }
  }
  if (a.rows.size() != b.rows.size()) {
    fail(ErrorCode::InvalidArgument, "tables have different numbers of rows");
  }
  DeltaTable out;
  for (const auto& ra : a.rows) {
    auto it = b_rows.find(key_of(ra.label));
    if (it == b_rows.end()) {
      fail(ErrorCode::InvalidArgument,
           fmt::format("no row matching '{}' in second table", ra.label));
    }
    const ResultRow& rb = *it->second;
    out.rows.push_back({it->first, ra.label, rb.label,
                        {delta(ra.bleu1, rb.bleu1), delta(ra.rouge1, rb.rouge1),
                         delta(ra.bertscore, rb.bertscore), delta(ra.meteor, rb.meteor)}});
  }
  return out;
}

std::string render_deltas(const DeltaTable& deltas, ReportFormat format) {
  const auto cell = [](const MetricDelta& d) {
    if (!d.absolute) return std::string("n/a");
    if (!d.percent) return fmt::format("{:+.4f}", *d.absolute);
    return fmt::format("{:+.4f} ({:+.1f}%)", *d.absolute, *d.percent);
  };
  std::string out;
  if (format == ReportFormat::Markdown) {
    out += "| Configuration | From | To | BLEU-1 | ROUGE-1 | BERTScore | METEOR |\n";
    out += "|---|---|---|---|---|---|---|\n";
    for (const auto& r : deltas.rows) {
      out += fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", r.key, r.label_a, r.label_b,
                         cell(r.metrics[0]), cell(r.metrics[1]), cell(r.metrics[2]), cell(r.metrics[3]));
    }
    return out;
  }
  out += "Configuration,From,To";
  for (auto name : {"BLEU-1", "ROUGE-1", "BERTScore", "METEOR"}) {
    out += fmt::format(",{0} abs,{0} pct", name);
  }
  out += '\n';
  const auto opt = [](std::optional<double> v) { return v ? fmt::format("{:.6f}", *v) : "n/a"; };
  for (const auto& r : deltas.rows) {
    out += fmt::format("{},{},{}", csv_field(r.key), csv_field(r.label_a), csv_field(r.label_b));
    for (const auto& m : r.metrics) out += fmt::format(",{},{}", opt(m.absolute), opt(m.percent));
    out += '\n';
  }
  return out;
}

}  // namespace lfqa
