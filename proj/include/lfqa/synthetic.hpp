#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lfqa/corpus.hpp"

namespace lfqa {

/// Deterministic corpus of `count` QA pairs with distinct questions, drawn
/// from a small clinical vocabulary. Used for demos and tests.
std::vector<QaPair> synthetic_corpus(std::size_t count, std::uint64_t seed);

}  // namespace lfqa
