#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lfqa {

/// One question-answer record; the unit of retrieval.
struct QaPair {
  std::string id;
  std::string question;
  std::string answer;
  std::string source;

  bool operator==(const QaPair&) const = default;
};

/// Text a stub or exported embedding is computed from.
enum class TextUnit { QuestionAnswer, Question };

/// "question answer" joined with a single space; the default text unit for
/// embeddings and for the re-rankers' document text.
std::string qa_text(const QaPair& pair);
std::string unit_text(const QaPair& pair, TextUnit unit);

struct IngestOptions {
  /// Malformed lines are fatal instead of skipped with a warning.
  bool strict = false;
};

struct IngestResult {
  std::vector<QaPair> pairs;
  std::vector<std::string> warnings;
};

IngestResult ingest_jsonl(const std::filesystem::path& path, const IngestOptions& options = {});
void write_jsonl(const std::vector<QaPair>& pairs, const std::filesystem::path& path);

using AbbreviationTable = std::map<std::string, std::string, std::less<>>;

/// Two-column TSV: term<TAB>expansion. Blank lines and lines starting with
/// '#' are ignored.
AbbreviationTable load_abbreviations(const std::filesystem::path& path);

/// NFC, control characters removed, whitespace runs collapsed to one space,
/// trimmed, then whole-token abbreviation expansion. Leading and trailing
/// punctuation of a token does not prevent a match ("(MI)" matches "MI").
std::string clean_text(std::string_view raw, const AbbreviationTable& abbreviations = {});

/// Cleans question and answer of every pair; pairs left with an empty field
/// are dropped and reported in `warnings`.
std::vector<QaPair> clean_corpus(const std::vector<QaPair>& pairs,
                                 const AbbreviationTable& abbreviations,
                                 std::vector<std::string>* warnings = nullptr);

enum class Partition { Train, Validation, Test };
std::string_view partition_name(Partition p);
Partition parse_partition(std::string_view name);

struct SplitRatios {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct SplitAssignment {
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
  SplitRatios ratios;

  const std::vector<std::string>& ids(Partition p) const;
};

/// Sizes are floor(N*train), floor(N*validation) and the remainder. Ids are
/// sorted before a seeded Fisher-Yates shuffle, so the result depends only on
/// the id set, the ratios and the seed.
SplitAssignment split_corpus(const std::vector<QaPair>& pairs, const SplitRatios& ratios,
                             std::uint64_t seed);

/// Split-size arithmetic, exposed for reporting.
std::array<std::size_t, 3> split_sizes(std::size_t count, const SplitRatios& ratios);

/// JSONL of {"id": ..., "partition": "train"|"validation"|"test"}, in
/// train, validation, test order.
void write_split_manifest(const SplitAssignment& split, const std::filesystem::path& path);
std::map<std::string, Partition> read_split_manifest(const std::filesystem::path& path);

struct CorpusStats {
  std::size_t pair_count = 0;
  double mean_question_tokens = 0.0;
  double mean_answer_tokens = 0.0;
  std::map<std::string, std::size_t> per_source;
};

CorpusStats corpus_stats(const std::vector<QaPair>& pairs);

}  // namespace lfqa
