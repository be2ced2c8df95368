#include "lfqa/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include <fmt/format.h>
#include "json.hpp"

#include "lfqa/error.hpp"
#include "lfqa/hashing.hpp"
#include "lfqa/text.hpp"

namespace lfqa {

using nlohmann::json;

std::string qa_text(const QaPair& pair) { return pair.question + " " + pair.answer; }

std::string unit_text(const QaPair& pair, TextUnit unit) {
  return unit == TextUnit::Question ? pair.question : qa_text(pair);
}

namespace {

std::string field_as_string(const json& record, const char* key, bool required) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) {
    if (required) throw std::invalid_argument(fmt::format("missing field '{}'", key));
    return {};
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return it->dump();
  throw std::invalid_argument(fmt::format("field '{}' is not a string", key));
}

}  // namespace

IngestResult ingest_jsonl(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open corpus file '{}'", path.string()));

  IngestResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    QaPair pair;
    try {
      json record = json::parse(line);
      if (!record.is_object()) throw std::invalid_argument("record is not a JSON object");
      pair.id = field_as_string(record, "id", true);
      pair.question = field_as_string(record, "question", true);
      pair.answer = field_as_string(record, "answer", true);
      pair.source = field_as_string(record, "source", false);
      if (pair.id.empty()) throw std::invalid_argument("empty id");
    } catch (const std::exception& e) {
      auto message = fmt::format("{}:{}: malformed record: {}", path.string(), line_no, e.what());
      if (options.strict) fail(ErrorCode::Parse, message);
      result.warnings.push_back(std::move(message));
      continue;
    }
    if (!seen.insert(pair.id).second) {
      fail(ErrorCode::DuplicateId,
           fmt::format("{}:{}: duplicate id '{}'", path.string(), line_no, pair.id));
    }
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

void write_jsonl(const std::vector<QaPair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  for (const auto& p : pairs) {
    json record = {{"id", p.id}, {"question", p.question}, {"answer", p.answer}};
    if (!p.source.empty()) record["source"] = p.source;
    out << record.dump() << '\n';
  }
  if (!out) fail(ErrorCode::Io, fmt::format("write failed for '{}'", path.string()));
}

AbbreviationTable load_abbreviations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open abbreviation table '{}'", path.string()));
  AbbreviationTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorCode::Parse,
           fmt::format("{}:{}: expected 'term<TAB>expansion'", path.string(), line_no));
    }
    auto term = clean_text(std::string_view(line).substr(0, tab));
    auto expansion = clean_text(std::string_view(line).substr(tab + 1));
    if (term.empty() || expansion.empty()) {
      fail(ErrorCode::Parse, fmt::format("{}:{}: empty term or expansion", path.string(), line_no));
    }
    table.insert_or_assign(std::move(term), std::move(expansion));
  }
  return table;
}

namespace {

std::string expand_token(const std::string& token, const AbbreviationTable& abbreviations) {
  const std::u32string cps = text::decode_utf8(token);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && text::is_punct_or_symbol(cps[begin])) ++begin;
  while (end > begin && text::is_punct_or_symbol(cps[end - 1])) --end;
  if (begin == end) return token;
  const std::string core = text::encode_utf8(std::u32string_view(cps).substr(begin, end - begin));
  auto it = abbreviations.find(core);
  if (it == abbreviations.end()) return token;
  return text::encode_utf8(std::u32string_view(cps).substr(0, begin)) + it->second +
         text::encode_utf8(std::u32string_view(cps).substr(end));
}

}  // namespace

std::string clean_text(std::string_view raw, const AbbreviationTable& abbreviations) {
  const std::u32string cps = text::decode_utf8(text::nfc(raw));
  std::string collapsed;
  collapsed.reserve(raw.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (text::is_space(cp)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (text::is_control(cp)) continue;
    if (pending_space) {
      collapsed.push_back(' ');
      pending_space = false;
    }
    text::append_utf8(collapsed, cp);
  }
  if (abbreviations.empty()) return collapsed;

  auto tokens = text::split_whitespace(collapsed);
  for (auto& token : tokens) token = expand_token(token, abbreviations);
  return text::join(tokens, " ");
}

std::vector<QaPair> clean_corpus(const std::vector<QaPair>& pairs,
                                 const AbbreviationTable& abbreviations,
                                 std::vector<std::string>* warnings) {
  std::vector<QaPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    QaPair cleaned{p.id, clean_text(p.question, abbreviations), clean_text(p.answer, abbreviations),
                   p.source};
    if (cleaned.question.empty() || cleaned.answer.empty()) {
      if (warnings) {
        warnings->push_back(
            fmt::format("record '{}' dropped: empty question or answer after cleaning", p.id));
      }
      continue;
    }
    out.push_back(std::move(cleaned));
  }
  return out;
}

std::string_view partition_name(Partition p) {
  switch (p) {
    case Partition::Train: return "train";
    case Partition::Validation: return "validation";
    case Partition::Test: return "test";
  }
  return "test";
}

Partition parse_partition(std::string_view name) {
  if (name == "train") return Partition::Train;
  if (name == "validation" || name == "val") return Partition::Validation;
  if (name == "test") return Partition::Test;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown partition '{}'", name));
}

const std::vector<std::string>& SplitAssignment::ids(Partition p) const {
  switch (p) {
    case Partition::Train: return train_ids;
    case Partition::Validation: return validation_ids;
    case Partition::Test: return test_ids;
  }
  return test_ids;
}

std::array<std::size_t, 3> split_sizes(std::size_t count, const SplitRatios& ratios) {
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0)) {
    fail(ErrorCode::InvalidArgument, "split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "split ratios must sum to 1");
  }
  // The small nudge keeps products such as 100 * 0.7 (69.99999...) from
  // flooring one below the exact decimal result.
  const auto floor_of = [count](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(count) * r + 1e-7));
  };
  const std::size_t train = std::min(count, floor_of(ratios.train));
  const std::size_t validation = std::min(count - train, floor_of(ratios.validation));
  return {train, validation, count - train - validation};
}

SplitAssignment split_corpus(const std::vector<QaPair>& pairs, const SplitRatios& ratios,
                             std::uint64_t seed) {
  if (pairs.empty()) fail(ErrorCode::InvalidArgument, "cannot split an empty corpus");
  const auto sizes = split_sizes(pairs.size(), ratios);

  std::vector<std::string> ids;
  ids.reserve(pairs.size());
  for (const auto& p : pairs) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    fail(ErrorCode::DuplicateId, "corpus contains duplicate ids");
  }

  PortableRng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(ids[i - 1], ids[j]);
  }

  SplitAssignment split;
  split.seed = seed;
  split.ratios = ratios;
  auto it = ids.begin();
  split.train_ids.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  split.validation_ids.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  split.test_ids.assign(it, ids.end());
  return split;
}

void write_split_manifest(const SplitAssignment& split, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  for (Partition p : {Partition::Train, Partition::Validation, Partition::Test}) {
    for (const auto& id : split.ids(p)) {
      out << json{{"id", id}, {"partition", partition_name(p)}}.dump() << '\n';
    }
  }
  if (!out) fail(ErrorCode::Io, fmt::format("write failed for '{}'", path.string()));
}

std::map<std::string, Partition> read_split_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open split manifest '{}'", path.string()));
  std::map<std::string, Partition> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json record = json::parse(line);
      auto id = record.at("id").get<std::string>();
      auto partition = parse_partition(record.at("partition").get<std::string>());
      if (!out.emplace(std::move(id), partition).second) {
        fail(ErrorCode::DuplicateId, fmt::format("{}:{}: duplicate id", path.string(), line_no));
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::Parse, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

CorpusStats corpus_stats(const std::vector<QaPair>& pairs) {
  CorpusStats stats;
  stats.pair_count = pairs.size();
  if (pairs.empty()) return stats;
  std::size_t q_tokens = 0;
  std::size_t a_tokens = 0;
  for (const auto& p : pairs) {
    q_tokens += text::count_whitespace_tokens(p.question);
    a_tokens += text::count_whitespace_tokens(p.answer);
    ++stats.per_source[p.source];
  }
  stats.mean_question_tokens = static_cast<double>(q_tokens) / static_cast<double>(pairs.size());
  stats.mean_answer_tokens = static_cast<double>(a_tokens) / static_cast<double>(pairs.size());
  return stats;
}

}  // namespace lfqa
