#include "tierflow/synth.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "tierflow/error.hpp"
#include "tierflow/io.hpp"
#include "tierflow/rng.hpp"

namespace tierflow {

namespace {

std::string entity_id(char prefix, std::size_t index, std::size_t total) {
  const auto digits = std::to_string(total).size();
  return fmt::format("{}{:0{}}", prefix, index, digits);
}

BitVector random_bits(std::size_t width, double density, RngStream& rng) {
  BitVector bits(width);
  for (auto& b : bits) b = rng.uniform() < density ? 1 : 0;
  return bits;
}

std::size_t flip_count(const SynthTier& t) {
  return static_cast<std::size_t>(std::llround(t.flip_rate * static_cast<double>(t.positives)));
}

SynthTier tier_from_json(const nlohmann::json& doc, const std::string& where) {
  SynthTier t;
  const auto& bounds = doc.at("tier");
  if (!bounds.is_array() || bounds.size() != 2) {
    throw ConfigError(where + ".tier must be [lo, hi]");
  }
  t.tier = TierSpec::make(bounds[0].get<int>(), bounds[1].get<int>());
  t.positives = doc.at("positives").get<std::size_t>();
  t.flip_rate = doc.value("flip_rate", 0.0);
  return t;
}

nlohmann::json tier_to_json(const SynthTier& t) {
  return {{"tier", {t.tier.lo, t.tier.hi}}, {"positives", t.positives}, {"flip_rate", t.flip_rate}};
}

}  // namespace

void SynthConfig::validate() const {
  if (n_compounds == 0) throw ConfigError("synth.n_compounds must be positive");
  if (n_proteins == 0) throw ConfigError("synth.n_proteins must be positive");
  if (compound_bits == 0) throw ConfigError("synth.compound_bits must be positive");
  if (protein_bits == 0) throw ConfigError("synth.protein_bits must be positive");
  if (!(bit_density > 0.0 && bit_density < 1.0)) {
    throw ConfigError("synth.bit_density must lie in (0, 1)");
  }
  if (rule_links == 0) throw ConfigError("synth.rule_links must be positive");
  if (rule_links > compound_bits * protein_bits) {
    throw ConfigError("synth.rule_links exceeds the number of distinct bit pairs");
  }
  if (rule_threshold == 0 || rule_threshold > rule_links) {
    throw ConfigError("synth.rule_threshold must lie in [1, rule_links]");
  }
  if (tiers.empty()) throw ConfigError("synth.tiers must not be empty");
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    const auto& t = tiers[i];
    if (!(t.flip_rate >= 0.0 && t.flip_rate <= 1.0)) {
      throw ConfigError(fmt::format("synth.tiers[{}].flip_rate must lie in [0, 1]", i));
    }
    if (t.positives == 0) throw ConfigError(fmt::format("synth.tiers[{}].positives must be positive", i));
    for (std::size_t j = 0; j < i; ++j) {
      if (t.tier.overlaps(tiers[j].tier)) {
        throw ConfigError(fmt::format("synth.tiers[{}] {} overlaps synth.tiers[{}] {}", i,
                                      t.tier.label(), j, tiers[j].tier.label()));
      }
    }
    if (t.tier.overlaps(validation.tier)) {
      throw ConfigError(fmt::format("synth.tiers[{}] {} overlaps the validation tier {}", i,
                                    t.tier.label(), validation.tier.label()));
    }
  }
  if (validation.flip_rate != 0.0) throw ConfigError("synth.validation.flip_rate must be 0");
  if (validation.positives == 0) throw ConfigError("synth.validation.positives must be positive");
}

SynthConfig synth_config_from_json(const nlohmann::json& doc) {
  SynthConfig c;
  try {
    c.n_compounds = doc.at("n_compounds").get<std::size_t>();
    c.n_proteins = doc.at("n_proteins").get<std::size_t>();
    c.compound_bits = doc.at("compound_bits").get<std::size_t>();
    c.protein_bits = doc.at("protein_bits").get<std::size_t>();
    c.bit_density = doc.value("bit_density", c.bit_density);
    c.rule_links = doc.value("rule_links", c.rule_links);
    c.rule_threshold = doc.value("rule_threshold", c.rule_threshold);
    c.seed = doc.value("seed", std::uint64_t{0});
    const auto& tiers = doc.at("tiers");
    for (std::size_t i = 0; i < tiers.size(); ++i) {
      c.tiers.push_back(tier_from_json(tiers[i], fmt::format("synth.tiers[{}]", i)));
    }
    c.validation = tier_from_json(doc.at("validation"), "synth.validation");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json synth_config_to_json(const SynthConfig& c) {
  nlohmann::json tiers = nlohmann::json::array();
  for (const auto& t : c.tiers) tiers.push_back(tier_to_json(t));
  return {{"n_compounds", c.n_compounds},     {"n_proteins", c.n_proteins},
          {"compound_bits", c.compound_bits}, {"protein_bits", c.protein_bits},
          {"bit_density", c.bit_density},     {"rule_links", c.rule_links},
          {"rule_threshold", c.rule_threshold}, {"seed", c.seed},
          {"tiers", tiers},                   {"validation", tier_to_json(c.validation)}};
}

std::size_t GroundTruthRule::overlap(const BitVector& compound, const BitVector& protein) const {
  std::size_t n = 0;
  for (const auto& [ci, pi] : links_) n += (compound[ci] & protein[pi]);
  return n;
}

SynthDataset synth_generate(const SynthConfig& config) {
  config.validate();
  RngStream master(config.seed);
  auto bit_rng = master.derive("synth.bits");
  auto rule_rng = master.derive("synth.rule");
  auto pick_rng = master.derive("synth.pick");
  auto score_rng = master.derive("synth.scores");

  BitVectorStore compounds(config.compound_bits);
  BitVectorStore proteins(config.protein_bits);
  std::vector<std::string> compound_ids;
  std::vector<std::string> protein_ids;
  for (std::size_t i = 0; i < config.n_compounds; ++i) {
    compound_ids.push_back(entity_id('C', i, config.n_compounds));
    compounds.insert(compound_ids.back(),
                     random_bits(config.compound_bits, config.bit_density, bit_rng));
  }
  for (std::size_t i = 0; i < config.n_proteins; ++i) {
    protein_ids.push_back(entity_id('P', i, config.n_proteins));
    proteins.insert(protein_ids.back(),
                    random_bits(config.protein_bits, config.bit_density, bit_rng));
  }

  std::set<std::pair<std::size_t, std::size_t>> link_set;
  std::vector<std::pair<std::size_t, std::size_t>> links;
  while (links.size() < config.rule_links) {
    std::pair<std::size_t, std::size_t> link{rule_rng.below(config.compound_bits),
                                             rule_rng.below(config.protein_bits)};
    if (link_set.insert(link).second) links.push_back(link);
  }
  GroundTruthRule rule(std::move(links), config.rule_threshold);

  // Partition the whole grid by the hidden rule, then deal records out of
  // shuffled pools so no pair is used twice.
  using Cell = std::pair<std::uint32_t, std::uint32_t>;
  std::vector<Cell> true_pairs;
  std::vector<Cell> false_pairs;
  for (std::size_t c = 0; c < config.n_compounds; ++c) {
    const auto& cb = compounds.at(compound_ids[c]);
    for (std::size_t p = 0; p < config.n_proteins; ++p) {
      const Cell cell{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(p)};
      if (rule.interacts(cb, proteins.at(protein_ids[p]))) {
        true_pairs.push_back(cell);
      } else {
        false_pairs.push_back(cell);
      }
    }
  }
  pick_rng.shuffle(true_pairs.begin(), true_pairs.end());
  pick_rng.shuffle(false_pairs.begin(), false_pairs.end());

  std::vector<SynthTier> all_tiers = config.tiers;
  all_tiers.push_back(config.validation);
  std::size_t need_true = 0;
  std::size_t need_false = 0;
  for (const auto& t : all_tiers) {
    need_false += flip_count(t);
    need_true += t.positives - flip_count(t);
  }
  if (need_true > true_pairs.size()) {
    throw DataError(fmt::format("synth: tiers need {} true interactions but the grid holds {}",
                                need_true, true_pairs.size()));
  }
  if (need_false > false_pairs.size()) {
    throw DataError(fmt::format("synth: tiers need {} false positives but the grid holds {}",
                                need_false, false_pairs.size()));
  }

  struct Pending {
    Cell cell;
    int score;
    int truth;
  };
  std::vector<Pending> pending;
  std::size_t next_true = 0;
  std::size_t next_false = 0;
  for (const auto& t : all_tiers) {
    const std::size_t flips = flip_count(t);
    const auto span = static_cast<std::uint64_t>(t.tier.hi - t.tier.lo);
    for (std::size_t k = 0; k < t.positives; ++k) {
      const bool flipped = k < flips;
      const Cell cell = flipped ? false_pairs[next_false++] : true_pairs[next_true++];
      const int score = t.tier.lo + static_cast<int>(score_rng.below(span));
      pending.push_back({cell, score, flipped ? 0 : 1});
    }
  }
  pick_rng.shuffle(pending.begin(), pending.end());

  SynthDataset out{std::move(compounds), std::move(proteins), {}, {}, std::move(rule)};
  out.oracle.reserve(pending.size());
  for (const auto& rec : pending) {
    const auto& c = compound_ids[rec.cell.first];
    const auto& p = protein_ids[rec.cell.second];
    out.interactions.add({c, p, rec.score});
    out.oracle.push_back({c, p, rec.truth});
  }
  return out;
}

std::string oracle_to_text(const std::vector<OracleRecord>& oracle) {
  std::string out;
  for (const auto& r : oracle) {
    out += r.compound_id + '\t' + r.protein_id + '\t' + std::to_string(r.true_label) + '\n';
  }
  return out;
}

std::vector<OracleRecord> parse_oracle(std::string_view text, const std::string& source) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::vector<OracleRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto f = split(lines[i], '\t');
    long long label = 0;
    if (f.size() != 3 || !parse_int(f[2], label) || (label != 0 && label != 1)) {
      throw ParseError(source, i + 1, "expected 'compound<TAB>protein<TAB>0|1'");
    }
    out.push_back({std::string(f[0]), std::string(f[1]), static_cast<int>(label)});
  }
  return out;
}

}  // namespace tierflow
