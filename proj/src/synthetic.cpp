#include "lfqa/synthetic.hpp"

#include <array>
#include <set>
#include <string_view>

#include <fmt/format.h>

#include "lfqa/hashing.hpp"

namespace lfqa {

namespace {

constexpr std::array<std::string_view, 96> kVocabulary = {
    "aspirin",     "insulin",    "statin",      "metformin",  "warfarin",   "heparin",
    "diabetes",    "hypertension", "asthma",    "sepsis",     "anemia",     "stroke",
    "infarction",  "arrhythmia", "fibrosis",    "carcinoma",  "lymphoma",   "nephropathy",
    "retinopathy", "neuropathy", "dose",        "therapy",    "trial",      "cohort",
    "patients",    "children",   "adults",      "elderly",    "women",      "men",
    "risk",        "outcome",    "mortality",   "survival",   "relapse",    "remission",
    "treatment",   "screening",  "diagnosis",   "prognosis",  "biomarker",  "gene",
    "protein",     "receptor",   "enzyme",      "hormone",    "antibody",   "vaccine",
    "infection",   "virus",      "bacteria",    "resistance", "exposure",   "smoking",
    "obesity",     "exercise",   "diet",        "sleep",      "pain",       "fever",
    "blood",       "pressure",   "glucose",     "cholesterol", "kidney",    "liver",
    "heart",       "lung",       "brain",       "bone",       "skin",       "muscle",
    "increase",    "decrease",   "reduce",      "improve",    "associated", "effective",
    "chronic",     "acute",      "severe",      "mild",       "early",      "late",
    "daily",       "weekly",     "oral",        "intravenous", "randomized", "placebo",
    "surgery",     "imaging",    "symptoms",    "quality",    "life",       "care",
};

std::string_view pick(PortableRng& rng) { return kVocabulary[rng.below(kVocabulary.size())]; }

std::string words(PortableRng& rng, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += pick(rng);
  }
  return out;
}

}  // namespace

std::vector<QaPair> synthetic_corpus(std::size_t count, std::uint64_t seed) {
  PortableRng rng(mix64(seed));
  std::set<std::string> questions;
  std::vector<QaPair> out;
  out.reserve(count);
  static constexpr std::array<std::string_view, 4> kSources = {"pubmedqa", "medquad", "meddialog",
                                                               "synthetic"};
  while (out.size() < count) {
    std::string question = fmt::format("does {} {} {} in {} {}?", pick(rng), pick(rng), pick(rng),
                                       pick(rng), pick(rng));
    if (!questions.insert(question).second) continue;
    const std::size_t answer_len = 8 + rng.below(20);
    std::string answer = words(rng, answer_len) + ".";
    answer[0] = static_cast<char>(answer[0] - 'a' + 'A');
    out.push_back({fmt::format("qa{:05d}", out.size()), std::move(question), std::move(answer),
                   std::string(kSources[rng.below(kSources.size())])});
  }
  return out;
}

}  // namespace lfqa
