#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace tierflow {

inline constexpr int kMinScore = 0;
inline constexpr int kMaxScore = 1000;

/// (compound_id, protein_id)
using PairKey = std::pair<std::string, std::string>;

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const noexcept {
    const std::size_t a = std::hash<std::string>{}(k.first);
    const std::size_t b = std::hash<std::string>{}(k.second);
    return a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  }
};

using PairSet = std::unordered_set<PairKey, PairKeyHash>;

struct InteractionRecord {
  std::string compound_id;
  std::string protein_id;
  int score = 0;

  bool operator==(const InteractionRecord&) const = default;
};

/// Positive interaction records with unique (compound, protein) pairs, in
/// insertion order.
class InteractionTable {
 public:
  InteractionTable() = default;

  /// Throws DataError on an out-of-range score, empty id or duplicate pair.
  void add(InteractionRecord record);

  const std::vector<InteractionRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  bool contains(const std::string& compound, const std::string& protein) const;
  const PairSet& pairs() const noexcept { return pairs_; }

  bool operator==(const InteractionTable& other) const { return records_ == other.records_; }

 private:
  std::vector<InteractionRecord> records_;
  PairSet pairs_;
};

/// Half-open confidence interval [lo, hi) with 0 <= lo < hi <= 1000.
struct TierSpec {
  int lo = 0;
  int hi = kMaxScore;

  /// Throws ConfigError when the bounds are invalid.
  static TierSpec make(int lo, int hi);

  bool contains(int score) const noexcept { return lo <= score && score < hi; }
  bool overlaps(const TierSpec& other) const noexcept { return lo < other.hi && other.lo < hi; }
  std::string label() const;

  bool operator==(const TierSpec&) const = default;
};

/// Records with lo <= score < hi, original order kept.
InteractionTable tier_filter(const InteractionTable& table, TierSpec tier);

/// Score cutoff for percentile p in [0, 100).
///
/// With scores sorted ascending as s[0..n-1], returns s[floor(p * n / 100)]:
/// the largest score s such that at least (100 - p)% of records score >= s.
/// Throws DataError on an empty table, std::invalid_argument on p outside [0, 100).
int percentile_cutoff(const InteractionTable& table, double percentile);

/// Training/validation example. Negatives never carry a score.
struct LabeledPair {
  std::string compound_id;
  std::string protein_id;
  int label = 0;
  std::optional<int> score;

  static LabeledPair positive(const InteractionRecord& rec) {
    return {rec.compound_id, rec.protein_id, 1, rec.score};
  }
  static LabeledPair negative(std::string compound, std::string protein) {
    return {std::move(compound), std::move(protein), 0, std::nullopt};
  }

  bool operator==(const LabeledPair&) const = default;
};

// Interaction TSV: compound_id<TAB>protein_id<TAB>score, no header.
InteractionTable parse_interactions(std::string_view text, const std::string& source = "<memory>");
std::string interactions_to_text(const InteractionTable& table);
InteractionTable load_interactions(const std::filesystem::path& path);
void save_interactions(const InteractionTable& table, const std::filesystem::path& path);

}  // namespace tierflow
