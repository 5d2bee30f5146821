#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tierflow {

using BitVector = std::vector<std::uint8_t>;

/// Fixed-width binary feature vectors keyed by entity id.
///
/// File format: first line `#width=<int>`, then `id<TAB><0/1 string>` per
/// line, LF endings. Entries are kept sorted by id.
class BitVectorStore {
 public:
  explicit BitVectorStore(std::size_t width);

  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Throws DataError on an empty id, duplicate id, wrong width or non-binary entry.
  void insert(std::string id, BitVector bits);

  bool contains(const std::string& id) const { return entries_.count(id) != 0; }
  const BitVector& at(const std::string& id) const;
  const std::map<std::string, BitVector>& entries() const noexcept { return entries_; }
  std::vector<std::string> ids() const;

  bool operator==(const BitVectorStore&) const = default;

 private:
  std::size_t width_;
  std::map<std::string, BitVector> entries_;
};

BitVectorStore parse_bitvectors(std::string_view text, const std::string& source = "<memory>");
std::string bitvectors_to_text(const BitVectorStore& store);

BitVectorStore load_bitvectors(const std::filesystem::path& path);
void save_bitvectors(const BitVectorStore& store, const std::filesystem::path& path);

}  // namespace tierflow
