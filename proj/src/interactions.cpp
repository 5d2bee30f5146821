#include "tierflow/interactions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tierflow/error.hpp"
#include "tierflow/io.hpp"

namespace tierflow {

void InteractionTable::add(InteractionRecord record) {
  if (record.compound_id.empty() || record.protein_id.empty()) {
    throw DataError("interaction record with empty id");
  }
  if (record.score < kMinScore || record.score > kMaxScore) {
    throw DataError("score " + std::to_string(record.score) + " for (" + record.compound_id +
                    ", " + record.protein_id + ") outside [0, 1000]");
  }
  if (!pairs_.emplace(record.compound_id, record.protein_id).second) {
    throw DataError("duplicate interaction (" + record.compound_id + ", " + record.protein_id +
                    ")");
  }
  records_.push_back(std::move(record));
}

bool InteractionTable::contains(const std::string& compound, const std::string& protein) const {
  return pairs_.count(PairKey{compound, protein}) != 0;
}

TierSpec TierSpec::make(int lo, int hi) {
  if (lo < kMinScore || hi > kMaxScore || lo >= hi) {
    throw ConfigError("invalid tier [" + std::to_string(lo) + "," + std::to_string(hi) +
                      "): need 0 <= lo < hi <= 1000");
  }
  return TierSpec{lo, hi};
}

std::string TierSpec::label() const {
  return "[" + std::to_string(lo) + "," + std::to_string(hi) + ")";
}

InteractionTable tier_filter(const InteractionTable& table, TierSpec tier) {
  InteractionTable out;
  for (const auto& rec : table.records()) {
    if (tier.contains(rec.score)) out.add(rec);
  }
  return out;
}

int percentile_cutoff(const InteractionTable& table, double percentile) {
  if (!(percentile >= 0.0 && percentile < 100.0)) {
    throw std::invalid_argument("percentile must lie in [0, 100)");
  }
  if (table.empty()) throw DataError("percentile_cutoff: empty table");
  std::vector<int> scores;
  scores.reserve(table.size());
  for (const auto& rec : table.records()) scores.push_back(rec.score);
  const auto n = scores.size();
  auto index = static_cast<std::size_t>(std::floor(percentile * static_cast<double>(n) / 100.0));
  index = std::min(index, n - 1);
  std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(index),
                   scores.end());
  return scores[index];
}

InteractionTable parse_interactions(std::string_view text, const std::string& source) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  InteractionTable table;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 3) {
      throw ParseError(source, line_no, "expected 'compound<TAB>protein<TAB>score'");
    }
    long long score = 0;
    if (!parse_int(fields[2], score)) {
      throw ParseError(source, line_no, "score '" + std::string(fields[2]) + "' is not an integer");
    }
    if (score < kMinScore || score > kMaxScore) {
      throw ParseError(source, line_no, "score " + std::to_string(score) + " outside [0, 1000]");
    }
    try {
      table.add({std::string(fields[0]), std::string(fields[1]), static_cast<int>(score)});
    } catch (const DataError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return table;
}

std::string interactions_to_text(const InteractionTable& table) {
  std::string out;
  for (const auto& rec : table.records()) {
    out += rec.compound_id;
    out += '\t';
    out += rec.protein_id;
    out += '\t';
    out += std::to_string(rec.score);
    out += '\n';
  }
  return out;
}

InteractionTable load_interactions(const std::filesystem::path& path) {
  return parse_interactions(read_text_file(path), path.string());
}

void save_interactions(const InteractionTable& table, const std::filesystem::path& path) {
  write_text_file(path, interactions_to_text(table));
}

}  // namespace tierflow
