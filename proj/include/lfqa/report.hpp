#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lfqa {

/// One configuration's corpus-level scores, in the column order of the
/// results table.
struct ResultRow {
  std::string label;
  double bleu1 = 0.0;
  double rouge1 = 0.0;
  std::optional<double> bertscore;
  double meteor = 0.0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  /// Ordered key/value lines emitted under the table.
  std::vector<std::pair<std::string, std::string>> provenance;
};

enum class ReportFormat { Markdown, Csv };
ReportFormat parse_report_format(std::string_view name);

inline constexpr std::array<std::string_view, 5> kReportColumns = {"Model", "BLEU-1", "ROUGE-1",
                                                                   "BERTScore", "METEOR"};

/// Fixed 4-decimal values; a missing BERTScore renders as "n/a".
std::string render_report(const ResultsTable& table, ReportFormat format);
void emit_report(const ResultsTable& table, ReportFormat format, const std::filesystem::path& path);

/// Reads the CSV produced by render_report. '#' lines carry provenance.
ResultsTable parse_csv_report(std::string_view csv);
ResultsTable read_csv_report(const std::filesystem::path& path);

/// Rows are matched on the configuration after the last " + " in the label
/// (the retrieval strategy), so "Base T5 + FAISS" pairs with
/// "Finetuned T5 + FAISS".
std::string comparison_key(std::string_view label);

struct MetricDelta {
  std::optional<double> from;
  std::optional<double> to;
  std::optional<double> absolute;
  /// Relative change in percent; empty when `from` is 0 or missing.
  std::optional<double> percent;
};

struct DeltaRow {
  std::string key;
  std::string label_a;
  std::string label_b;
  std::array<MetricDelta, 4> metrics;  // BLEU-1, ROUGE-1, BERTScore, METEOR
};

struct DeltaTable {
  std::vector<DeltaRow> rows;
};

DeltaTable compare_runs(const ResultsTable& a, const ResultsTable& b);
std::string render_deltas(const DeltaTable& deltas, ReportFormat format);

}  // namespace lfqa
