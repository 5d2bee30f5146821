#include "tierflow/negatives.hpp"

#include <set>

#include "tierflow/error.hpp"

namespace tierflow {

std::vector<LabeledPair> sample_negatives(std::span<const std::string> compounds,
                                          std::span<const std::string> proteins,
                                          const PairSet& excluded, std::size_t count,
                                          RngStream& rng) {
  // Only exclusions that fall on the grid shrink the complement.
  const std::set<std::string> compound_set(compounds.begin(), compounds.end());
  const std::set<std::string> protein_set(proteins.begin(), proteins.end());
  if (compound_set.size() != compounds.size() || protein_set.size() != proteins.size()) {
    throw DataError("sample_negatives: duplicate entity ids");
  }
  std::size_t on_grid = 0;
  for (const auto& [c, p] : excluded) {
    if (compound_set.count(c) && protein_set.count(p)) ++on_grid;
  }
  const std::size_t grid = compounds.size() * proteins.size();
  const std::size_t complement = grid - on_grid;
  if (count > complement) {
    throw DataError("sample_negatives: requested " + std::to_string(count) +
                    " negatives but only " + std::to_string(complement) +
                    " non-positive pairs exist");
  }

  std::vector<LabeledPair> out;
  out.reserve(count);
  PairSet drawn;
  while (out.size() < count) {
    const auto& c = compounds[rng.below(compounds.size())];
    const auto& p = proteins[rng.below(proteins.size())];
    PairKey key{c, p};
    if (excluded.count(key) || drawn.count(key)) continue;
    drawn.insert(key);
    out.push_back(LabeledPair::negative(c, p));
  }
  return out;
}

}  // namespace tierflow
