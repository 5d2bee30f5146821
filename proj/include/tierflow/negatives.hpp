#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tierflow/interactions.hpp"
#include "tierflow/rng.hpp"

namespace tierflow {

/// Draws `count` distinct (compound, protein) pairs outside `excluded` by
/// uniform rejection sampling over the full grid.
///
/// Throws DataError when fewer than `count` pairs remain in the complement.
std::vector<LabeledPair> sample_negatives(std::span<const std::string> compounds,
                                          std::span<const std::string> proteins,
                                          const PairSet& excluded, std::size_t count,
                                          RngStream& rng);

}  // namespace tierflow
