#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tierflow/bitvector.hpp"
#include "tierflow/interactions.hpp"

namespace tierflow {

struct SynthTier {
  TierSpec tier;
  std::size_t positives = 0;
  double flip_rate = 0.0;
};

/// Desk-scale stand-in for a confidence-scored interaction database.
///
/// Entities get random bit vectors. A hidden rule links `rule_links` random
/// (compound bit, protein bit) positions; a pair truly interacts when at least
/// `rule_threshold` linked positions are set on both sides. Each tier then
/// receives `positives` records of which round(flip_rate * positives) are
/// drawn from true non-interactions.
struct SynthConfig {
  std::size_t n_compounds = 0;
  std::size_t n_proteins = 0;
  std::size_t compound_bits = 0;
  std::size_t protein_bits = 0;
  double bit_density = 0.5;
  std::size_t rule_links = 8;
  std::size_t rule_threshold = 4;
  std::vector<SynthTier> tiers;
  SynthTier validation;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

SynthConfig synth_config_from_json(const nlohmann::json& doc);
nlohmann::json synth_config_to_json(const SynthConfig& config);

class GroundTruthRule {
 public:
  GroundTruthRule(std::vector<std::pair<std::size_t, std::size_t>> links, std::size_t threshold)
      : links_(std::move(links)), threshold_(threshold) {}

  std::size_t overlap(const BitVector& compound, const BitVector& protein) const;
  bool interacts(const BitVector& compound, const BitVector& protein) const {
    return overlap(compound, protein) >= threshold_;
  }

  const std::vector<std::pair<std::size_t, std::size_t>>& links() const noexcept { return links_; }
  std::size_t threshold() const noexcept { return threshold_; }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> links_;
  std::size_t threshold_;
};

struct OracleRecord {
  std::string compound_id;
  std::string protein_id;
  int true_label = 0;

  bool operator==(const OracleRecord&) const = default;
};

struct SynthDataset {
  BitVectorStore compounds;
  BitVectorStore proteins;
  InteractionTable interactions;
  std::vector<OracleRecord> oracle;  // one entry per interaction record, same order
  GroundTruthRule rule;
};

/// Throws ConfigError on invalid configs and DataError when the grid holds too
/// few true (or false) pairs for the requested counts.
SynthDataset synth_generate(const SynthConfig& config);

// oracle.tsv: compound_id<TAB>protein_id<TAB>true_label
std::string oracle_to_text(const std::vector<OracleRecord>& oracle);
std::vector<OracleRecord> parse_oracle(std::string_view text, const std::string& source = "<memory>");

}  // namespace tierflow
