#include <algorithm>
#include <map>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_helpers.hpp"
#include "tierflow/error.hpp"
#include "tierflow/features.hpp"
#include "tierflow/interactions.hpp"
#include "tierflow/negatives.hpp"
#include "tierflow/synth.hpp"

using namespace tierflow;

namespace {

InteractionTable table_of(const std::vector<int>& scores) {
  InteractionTable t;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    t.add({"C" + std::to_string(i), "P" + std::to_string(i % 7), scores[i]});
  }
  return t;
}

std::vector<int> scores_of(const InteractionTable& t) {
  std::vector<int> out;
  for (const auto& r : t.records()) out.push_back(r.score);
  return out;
}

InteractionTable random_table(RngStream& rng, std::size_t n) {
  std::vector<int> s(n);
  for (auto& v : s) v = static_cast<int>(rng.below(1001));
  return table_of(s);
}

}  // namespace

TEST(BitVectors, RoundTripThroughFile) {
  BitVectorStore store(4);
  store.insert("b", {1, 0, 0, 1});
  store.insert("a", {0, 0, 0, 0});
  store.insert("c", {1, 1, 1, 1});
  const auto path = fixtures::temp_dir("bits") / "x.bits";
  save_bitvectors(store, path);
  EXPECT_EQ(load_bitvectors(path), store);
}

TEST(BitVectors, ErrorsNameTheLine) {
  try {
    parse_bitvectors("#width=4\na\t0101\nb\t01011\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_bitvectors("#width=2\na\t01\nb\t0x\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_bitvectors("#width=2\na\t01\na\t11\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_bitvectors("a\t01\n"), DataError);
}

TEST(BitVectors, HeaderOnlyGivesEmptyStore) {
  const auto store = parse_bitvectors("#width=9\n");
  EXPECT_TRUE(store.empty());
  EXPECT_EQ(store.width(), 9u);
}

TEST(Interactions, ParseRoundTripAndErrors) {
  const auto t = parse_interactions("C1\tP1\t319\nC2\tP1\t1000\n");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(parse_interactions(interactions_to_text(t)), t);
  EXPECT_THROW(parse_interactions("C1\tP1\t1001\n"), ParseError);
  EXPECT_THROW(parse_interactions("C1\tP1\tx\n"), ParseError);
  EXPECT_THROW(parse_interactions("C1\tP1\t5\nC1\tP1\t6\n"), ParseError);
  EXPECT_THROW(parse_interactions("C1\tP1\n"), ParseError);
}

TEST(Tiers, InvalidBoundsAreConfigErrors) {
  EXPECT_THROW(TierSpec::make(500, 500), ConfigError);
  EXPECT_THROW(TierSpec::make(-1, 10), ConfigError);
  EXPECT_THROW(TierSpec::make(0, 1001), ConfigError);
  EXPECT_EQ(TierSpec::make(700, 900).label(), "[700,900)");
}

TEST(TierFilter, HalfOpenMembership) {
  const auto t = table_of({319, 389, 700, 900, 950});
  EXPECT_EQ(scores_of(tier_filter(t, TierSpec::make(700, 900))), std::vector<int>{700});
  EXPECT_EQ(tier_filter(t, TierSpec::make(0, 1000)), t);
  EXPECT_TRUE(tier_filter(t, TierSpec::make(1, 300)).empty());
}

TEST(TierFilter, AdjacentTiersPartitionTheirUnion) {
  RngStream rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_table(rng, 1 + rng.below(10000));
    int cuts[3] = {static_cast<int>(rng.below(1000)), static_cast<int>(rng.below(1000)),
                   static_cast<int>(rng.below(1000))};
    std::sort(cuts, cuts + 3);
    if (cuts[0] == cuts[1] || cuts[1] == cuts[2]) continue;
    const auto lo = tier_filter(t, TierSpec::make(cuts[0], cuts[1]));
    const auto hi = tier_filter(t, TierSpec::make(cuts[1], cuts[2]));
    const auto all = tier_filter(t, TierSpec::make(cuts[0], cuts[2]));
    ASSERT_EQ(lo.size() + hi.size(), all.size());
    PairSet merged = lo.pairs();
    for (const auto& p : hi.pairs()) ASSERT_TRUE(merged.insert(p).second);
    ASSERT_EQ(merged, all.pairs());
  }
}

TEST(Percentile, UniformScoresMatchSortedOracle) {
  std::vector<int> s(100);
  for (int i = 0; i < 100; ++i) s[i] = 100 - i;
  EXPECT_EQ(percentile_cutoff(table_of(s), 50), oracle::sorted_percentile(s, 50));
  EXPECT_EQ(percentile_cutoff(table_of(s), 50), 51);
}

TEST(Percentile, SingleRecordAndErrors) {
  EXPECT_EQ(percentile_cutoff(table_of({412}), 0), 412);
  EXPECT_THROW(percentile_cutoff(InteractionTable{}, 10), DataError);
  EXPECT_THROW(percentile_cutoff(table_of({1}), 100), std::invalid_argument);
  EXPECT_THROW(percentile_cutoff(table_of({1}), -1), std::invalid_argument);
}

TEST(Percentile, ReproducesTheReferenceCutoffMapping) {
  // 1000 scores shaped so the 82nd/90th/98th percentiles land on 319/389/700.
  std::vector<int> s;
  for (int i = 0; i < 820; ++i) s.push_back(i * 319 / 820);
  for (int i = 0; i < 80; ++i) s.push_back(319 + i * 70 / 80);
  for (int i = 0; i < 80; ++i) s.push_back(389 + i * 311 / 80);
  for (int i = 0; i < 20; ++i) s.push_back(700 + i * 15);
  const auto t = table_of(s);
  EXPECT_EQ(percentile_cutoff(t, 82), 319);
  EXPECT_EQ(percentile_cutoff(t, 90), 389);
  EXPECT_EQ(percentile_cutoff(t, 98), 700);
  // At least (100 - p)% of records score at or above the cutoff.
  for (double p : {82.0, 90.0, 98.0}) {
    const int cut = percentile_cutoff(t, p);
    const auto above = std::count_if(s.begin(), s.end(), [&](int v) { return v >= cut; });
    EXPECT_GE(static_cast<double>(above), (100.0 - p) / 100.0 * 1000.0);
  }
}

TEST(Percentile, AgreesWithOracleOnRandomTables) {
  RngStream rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto t = random_table(rng, 1 + rng.below(300));
    const double p = rng.uniform() * 100.0;
    ASSERT_EQ(percentile_cutoff(t, p), oracle::sorted_percentile(scores_of(t), p)) << p;
  }
}

TEST(Negatives, TwoByTwoComplementIsExhausted) {
  const std::vector<std::string> c{"c1", "c2"}, p{"p1", "p2"};
  const PairSet pos{{"c1", "p1"}, {"c2", "p2"}};
  RngStream rng(4);
  const auto neg = sample_negatives(c, p, pos, 2, rng);
  std::set<PairKey> got;
  for (const auto& n : neg) {
    EXPECT_EQ(n.label, 0);
    EXPECT_FALSE(n.score.has_value());
    got.insert({n.compound_id, n.protein_id});
  }
  EXPECT_EQ(got, (std::set<PairKey>{{"c1", "p2"}, {"c2", "p1"}}));
  EXPECT_THROW(sample_negatives(c, p, pos, 3, rng), DataError);
}

TEST(Negatives, FullGridExcludedIsAnError) {
  const std::vector<std::string> c{"c1"}, p{"p1"};
  RngStream rng(4);
  EXPECT_THROW(sample_negatives(c, p, PairSet{{"c1", "p1"}}, 1, rng), DataError);
}

TEST(Negatives, DeterministicDistinctAndDisjoint) {
  std::vector<std::string> c, p;
  for (int i = 0; i < 20; ++i) {
    c.push_back("c" + std::to_string(i));
    p.push_back("p" + std::to_string(i));
  }
  PairSet pos;
  for (int i = 0; i < 20; ++i) pos.insert({c[i], p[(i * 7) % 20]});
  pos.insert({"elsewhere", "p0"});  // off-grid exclusions do not shrink the complement
  RngStream a(5), b(5);
  const auto na = sample_negatives(c, p, pos, 380, a);
  EXPECT_EQ(na, sample_negatives(c, p, pos, 380, b));
  PairSet seen;
  for (const auto& n : na) {
    const PairKey k{n.compound_id, n.protein_id};
    EXPECT_EQ(pos.count(k), 0u);
    EXPECT_TRUE(seen.insert(k).second);
  }
}

TEST(Negatives, UniformOverComplement) {
  std::vector<std::string> c, p;
  for (int i = 0; i < 10; ++i) {
    c.push_back("c" + std::to_string(i));
    p.push_back("p" + std::to_string(i));
  }
  PairSet pos;
  for (int i = 0; i < 10; ++i) pos.insert({c[i], p[i]});
  std::map<PairKey, std::size_t> counts;
  RngStream rng(6);
  for (int draw = 0; draw < 100000; ++draw) {
    const auto n = sample_negatives(c, p, pos, 1, rng);
    ++counts[{n[0].compound_id, n[0].protein_id}];
  }
  ASSERT_EQ(counts.size(), 90u);
  std::vector<std::size_t> observed;
  for (const auto& [k, v] : counts) observed.push_back(v);
  const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  const double critical = boost::math::quantile(boost::math::complement(dist, 0.01));
  EXPECT_LT(oracle::chi_square_uniform(observed), critical);
}

TEST(Features, ProteinFirstConcatenation) {
  LatentStore comp(1), prot(2);
  comp.insert("c", {3.0});
  prot.insert("p", {1.0, 2.0});
  const auto row = make_features(LabeledPair::negative("c", "p"), comp, prot);
  EXPECT_EQ(row.values, (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_EQ(row.label, 0.0);
  try {
    make_features(LabeledPair::negative("ghost", "p"), comp, prot);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(Features, PresetWidthsGiveOneNinetyTwo) {
  LatentStore comp(64), prot(128);
  comp.insert("c", std::vector<double>(64, 0.1));
  prot.insert("p", std::vector<double>(128, 0.2));
  const auto row = make_features(LabeledPair::positive({"c", "p", 950}), comp, prot);
  EXPECT_EQ(row.values.size(), 192u);
  EXPECT_EQ(row.label, 1.0);
}

TEST(Latents, TextRoundTripIsExact) {
  LatentStore s(3);
  s.insert("x", {0.1, -1e-300, 1.0 / 3.0});
  s.insert("y", {0.0, 5.5, -2.25});
  EXPECT_EQ(parse_latents(latents_to_text(s)), s);
}

TEST(Synth, CountsFlipsAndValidationPurity) {
  const auto config = fixtures::small_synth();
  const auto ds = synth_generate(config);
  ASSERT_EQ(ds.oracle.size(), ds.interactions.size());
  for (std::size_t i = 0; i < ds.oracle.size(); ++i) {
    const auto& rec = ds.interactions.records()[i];
    ASSERT_EQ(ds.oracle[i].compound_id, rec.compound_id);
    // The oracle agrees with the emitted rule on the emitted bits.
    ASSERT_EQ(ds.oracle[i].true_label,
              ds.rule.interacts(ds.compounds.at(rec.compound_id), ds.proteins.at(rec.protein_id)) ? 1 : 0);
  }
  auto tiers = config.tiers;
  tiers.push_back(config.validation);
  for (const auto& t : tiers) {
    std::size_t n = 0, false_pos = 0;
    for (std::size_t i = 0; i < ds.oracle.size(); ++i) {
      if (!t.tier.contains(ds.interactions.records()[i].score)) continue;
      ++n;
      false_pos += ds.oracle[i].true_label == 0;
    }
    EXPECT_EQ(n, t.positives) << t.tier.label();
    EXPECT_EQ(false_pos, static_cast<std::size_t>(std::llround(t.flip_rate * t.positives)));
  }
}

TEST(Synth, NoFlipsMeansAllTrue) {
  auto config = fixtures::small_synth();
  for (auto& t : config.tiers) t.flip_rate = 0.0;
  const auto ds = synth_generate(config);
  for (const auto& o : ds.oracle) ASSERT_EQ(o.true_label, 1);
}

TEST(Synth, DeterministicAndValidated) {
  const auto a = synth_generate(fixtures::small_synth(3));
  const auto b = synth_generate(fixtures::small_synth(3));
  EXPECT_EQ(a.interactions, b.interactions);
  EXPECT_EQ(a.compounds, b.compounds);
  auto overlap = fixtures::small_synth();
  overlap.tiers[1].tier = TierSpec::make(600, 900);
  EXPECT_THROW(synth_generate(overlap), ConfigError);
  auto noisy_val = fixtures::small_synth();
  noisy_val.validation.flip_rate = 0.1;
  EXPECT_THROW(synth_generate(noisy_val), ConfigError);
  auto too_many = fixtures::small_synth();
  too_many.tiers[0].positives = 100000;
  EXPECT_THROW(synth_generate(too_many), DataError);
}

TEST(Synth, JsonAndOracleRoundTrip) {
  const auto config = fixtures::small_synth(11);
  const auto back = synth_config_from_json(synth_config_to_json(config));
  EXPECT_EQ(synth_config_to_json(back), synth_config_to_json(config));
  const auto ds = synth_generate(config);
  EXPECT_EQ(parse_oracle(oracle_to_text(ds.oracle)), ds.oracle);
}
