#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tierflow/bitvector.hpp"
#include "tierflow/interactions.hpp"

namespace tierflow {

/// Real-valued feature vectors keyed by entity id, all of one width.
///
/// TSV format: `id<TAB>v1,v2,...` with 17 significant digits, sorted by id.
class LatentStore {
 public:
  explicit LatentStore(std::size_t width);

  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Throws DataError on an empty or duplicate id or a width mismatch.
  void insert(std::string id, std::vector<double> values);

  bool contains(const std::string& id) const { return entries_.count(id) != 0; }
  /// Throws DataError naming the id when absent.
  const std::vector<double>& at(const std::string& id) const;
  const std::map<std::string, std::vector<double>>& entries() const noexcept { return entries_; }
  std::vector<std::string> ids() const;

  bool operator==(const LatentStore&) const = default;

 private:
  std::size_t width_;
  std::map<std::string, std::vector<double>> entries_;
};

/// Bits as 0.0 / 1.0 features, for training directly on raw vectors.
LatentStore latents_from_bits(const BitVectorStore& bits);

LatentStore parse_latents(std::string_view text, const std::string& source = "<memory>");
std::string latents_to_text(const LatentStore& store);
LatentStore load_latents(const std::filesystem::path& path);
void save_latents(const LatentStore& store, const std::filesystem::path& path);

struct FeatureRow {
  std::vector<double> values;
  double label = 0.0;
};

/// [protein features ‖ compound features] and the pair's label.
FeatureRow make_features(const LabeledPair& pair, const LatentStore& compound_latents,
                         const LatentStore& protein_latents);

/// Writes the same concatenation into a preallocated row.
void write_features(std::span<double> row, const LabeledPair& pair,
                    const LatentStore& compound_latents, const LatentStore& protein_latents);

}  // namespace tierflow
