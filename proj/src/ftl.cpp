#include "tierflow/ftl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tierflow/error.hpp"
#include "tierflow/loss.hpp"
#include "tierflow/negatives.hpp"

namespace tierflow {

namespace {

constexpr std::size_t kEvalChunk = 4096;

struct FeatureRefs {
  const std::vector<double>* protein;
  const std::vector<double>* compound;
};

FeatureRefs lookup(const LabeledPair& pair, const DataContext& data) {
  return {&data.protein_features.at(pair.protein_id), &data.compound_features.at(pair.compound_id)};
}

void fill_row(std::span<double> row, const FeatureRefs& refs) {
  std::copy(refs.protein->begin(), refs.protein->end(), row.begin());
  std::copy(refs.compound->begin(), refs.compound->end(),
            row.begin() + static_cast<std::ptrdiff_t>(refs.protein->size()));
}

std::vector<FeatureRefs> resolve(std::span<const LabeledPair> pairs, const DataContext& data) {
  std::vector<FeatureRefs> refs;
  refs.reserve(pairs.size());
  for (const auto& p : pairs) refs.push_back(lookup(p, data));
  return refs;
}

class Trainer {
 public:
  Trainer(const TrainSchedule& schedule, const DataContext& data,
          std::span<const EpochRef> requests, TrainingObserver* observer)
      : schedule_(schedule),
        settings_(schedule.settings),
        data_(data),
        requests_(requests.begin(), requests.end()),
        observer_(observer),
        master_(settings_.seed) {}

  FtlResult run() {
    schedule_.validate();
    if (data_.feature_width() == 0) throw DataError("train: no features");

    auto init_rng = master_.derive("init");
    DenseNetwork net = init_network(settings_.layer_sizes, data_.feature_width(),
                                    classifier_activations(settings_.layer_sizes.size()), init_rng);
    const AdamConfig adam_config{settings_.learning_rate};
    AdamState adam = AdamState::for_network(net, adam_config);

    validation_ = build_validation_set(data_, settings_);
    if (observer_) observer_->on_validation_set(validation_);
    validation_refs_ = resolve(validation_, data_);
    validation_labels_.clear();
    for (const auto& p : validation_) validation_labels_.push_back(p.label);

    excluded_ = data_.interactions.pairs();
    for (const auto& p : validation_) excluded_.emplace(p.compound_id, p.protein_id);
    compound_ids_ = data_.compound_features.ids();
    protein_ids_ = data_.protein_features.ids();

    FtlResult result{net, {}, {}};
    for (std::size_t k = 0; k < schedule_.steps.size(); ++k) {
      const std::size_t step = k + 1;
      if (k > 0 && settings_.reset_optimizer_between_steps) {
        adam = AdamState::for_network(net, adam_config);
      }
      run_step(step, schedule_.steps[k], net, adam, result);
    }
    result.network = std::move(net);
    return result;
  }

 private:
  void capture(const DenseNetwork& net, EpochRef at, bool always, FtlResult& result) const {
    const bool requested = std::find(requests_.begin(), requests_.end(), at) != requests_.end();
    if (!always && !requested) return;
    for (const auto& s : result.snapshots) {
      if (s.tag == snapshot_tag(at)) return;
    }
    result.snapshots.push_back(WeightSnapshot::capture(net, snapshot_tag(at)));
  }

  void run_step(std::size_t step, const TrainStep& spec, DenseNetwork& net, AdamState& adam,
                FtlResult& result) {
    const auto positives = tier_filter(data_.interactions, spec.tier);
    if (positives.empty()) {
      throw DataError(fmt::format("step {}: tier {} holds no positive records", step,
                                  spec.tier.label()));
    }
    std::vector<LabeledPair> examples;
    examples.reserve(positives.size() * 2);
    for (const auto& rec : positives.records()) examples.push_back(LabeledPair::positive(rec));
    auto neg_rng = master_.derive("step-negatives", step);
    for (auto& n : sample_negatives(compound_ids_, protein_ids_, excluded_, positives.size(), neg_rng)) {
      examples.push_back(std::move(n));
    }
    if (observer_) observer_->on_step_data(step, examples);
    spdlog::info("step {}: tier {} with {} positives, {} epochs", step, spec.tier.label(),
                 positives.size(), spec.epochs);

    const auto refs = resolve(examples, data_);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    auto shuffle_rng = master_.derive("step-shuffle", step);

    capture(net, {step, 0}, true, result);
    const std::size_t width = data_.feature_width();
    const std::size_t batch_size = settings_.batch_size;
    std::vector<const LabeledPair*> batch_pairs;
    for (std::size_t epoch = 1; epoch <= spec.epochs; ++epoch) {
      shuffle_rng.shuffle(order.begin(), order.end());
      double loss_sum = 0.0;
      std::size_t correct = 0;
      for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t len = std::min(batch_size, order.size() - start);
        Tensor2 x(len, width);
        std::vector<double> y(len);
        batch_pairs.clear();
        for (std::size_t r = 0; r < len; ++r) {
          const std::size_t i = order[start + r];
          fill_row(x.row(r), refs[i]);
          y[r] = examples[i].label;
          batch_pairs.push_back(&examples[i]);
        }
        if (observer_) observer_->on_batch(step, epoch, batch_pairs);
        const auto trace = forward(net, x);
        const auto bce = bce_loss(trace.output(), y);
        for (std::size_t r = 0; r < len; ++r) {
          if ((trace.output()(r, 0) >= 0.5 ? 1.0 : 0.0) == y[r]) ++correct;
        }
        loss_sum += bce.loss * static_cast<double>(len);
        const auto grads = backward(net, trace, bce.gradient);
        adam_step(adam, net, grads);
      }
      const double train_loss = loss_sum / static_cast<double>(order.size());
      const double train_acc =
          100.0 * static_cast<double>(correct) / static_cast<double>(order.size());
      const auto val = evaluate_validation(net);
      if (!std::isfinite(train_loss) || !std::isfinite(val.loss)) {
        throw NumericError(fmt::format("non-finite loss at step {} epoch {}", step, epoch));
      }
      result.log.append({step, epoch, Split::Train, train_loss, train_acc});
      result.log.append({step, epoch, Split::Validation, val.loss, val.accuracy});
      spdlog::debug("step {} epoch {}: train {:.6g}/{:.3f}% val {:.6g}/{:.3f}%", step, epoch,
                    train_loss, train_acc, val.loss, val.accuracy);
      capture(net, {step, epoch}, epoch == spec.epochs, result);
    }
  }

  Evaluation evaluate_validation(const DenseNetwork& net) const {
    return evaluate_refs(net, validation_refs_, validation_labels_, data_.feature_width());
  }

 public:
  static Evaluation evaluate_refs(const DenseNetwork& net, std::span<const FeatureRefs> refs,
                                  std::span<const double> labels, std::size_t width) {
    if (refs.empty()) throw DataError("evaluate: empty example set");
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < refs.size(); start += kEvalChunk) {
      const std::size_t len = std::min(kEvalChunk, refs.size() - start);
      Tensor2 x(len, width);
      for (std::size_t r = 0; r < len; ++r) fill_row(x.row(r), refs[start + r]);
      const auto trace = forward(net, x);
      const auto y = labels.subspan(start, len);
      loss_sum += bce_loss(trace.output(), y).loss * static_cast<double>(len);
      for (std::size_t r = 0; r < len; ++r) {
        if ((trace.output()(r, 0) >= 0.5 ? 1.0 : 0.0) == y[r]) ++correct;
      }
    }
    const auto n = static_cast<double>(refs.size());
    return {loss_sum / n, 100.0 * static_cast<double>(correct) / n};
  }

 private:
  const TrainSchedule& schedule_;
  const TrainSettings& settings_;
  const DataContext& data_;
  std::vector<EpochRef> requests_;
  TrainingObserver* observer_;
  RngStream master_;

  std::vector<LabeledPair> validation_;
  std::vector<FeatureRefs> validation_refs_;
  std::vector<double> validation_labels_;
  PairSet excluded_;
  std::vector<std::string> compound_ids_;
  std::vector<std::string> protein_ids_;
};

}  // namespace

void TrainSchedule::validate() const {
  if (steps.empty()) throw ConfigError("schedule has no steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].epochs == 0) {
      throw ConfigError(fmt::format("step {} must train for at least one epoch", i + 1));
    }
    if (steps[i].tier.overlaps(settings.validation_tier)) {
      throw ConfigError(fmt::format("step {} tier {} overlaps the validation tier {}", i + 1,
                                    steps[i].tier.label(), settings.validation_tier.label()));
    }
  }
  if (settings.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(settings.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (settings.layer_sizes.empty() || settings.layer_sizes.back() != 1) {
    throw ConfigError("layer_sizes must end in a single output unit");
  }
  for (auto w : settings.layer_sizes) {
    if (w == 0) throw ConfigError("layer_sizes entries must be positive");
  }
}

std::string_view to_string(Split split) noexcept {
  return split == Split::Train ? "train" : "validation";
}

void MetricsLog::append(const MetricRecord& record) {
  if (!keys_.emplace(record.step, record.epoch, static_cast<int>(record.split)).second) {
    throw std::logic_error(fmt::format("duplicate metrics record step {} epoch {} {}", record.step,
                                       record.epoch, to_string(record.split)));
  }
  records_.push_back(record);
}

BestValidation MetricsLog::best_validation() const {
  std::optional<BestValidation> best;
  for (const auto& r : records_) {
    if (r.split != Split::Validation) continue;
    const EpochRef at{r.step, r.epoch};
    if (!best) {
      best = BestValidation{r.loss, at, r.accuracy, at};
      continue;
    }
    if (r.loss < best->loss) {
      best->loss = r.loss;
      best->loss_at = at;
    }
    if (r.accuracy > best->accuracy) {
      best->accuracy = r.accuracy;
      best->accuracy_at = at;
    }
  }
  if (!best) throw std::logic_error("best_validation: no validation records");
  return *best;
}

std::string snapshot_tag(EpochRef at) { return fmt::format("step{}_epoch{}", at.step, at.epoch); }

const WeightSnapshot& FtlResult::snapshot(EpochRef at) const {
  const auto tag = snapshot_tag(at);
  for (const auto& s : snapshots) {
    if (s.tag == tag) return s;
  }
  throw std::out_of_range("no snapshot tagged " + tag);
}

std::vector<LabeledPair> build_validation_set(const DataContext& data, const TrainSettings& settings) {
  const auto positives = tier_filter(data.interactions, settings.validation_tier);
  if (positives.empty()) {
    throw DataError("validation tier " + settings.validation_tier.label() +
                    " holds no positive records");
  }
  std::vector<LabeledPair> pairs;
  pairs.reserve(positives.size() * 2);
  for (const auto& rec : positives.records()) pairs.push_back(LabeledPair::positive(rec));
  auto rng = RngStream(settings.seed).derive("validation-negatives");
  const auto compounds = data.compound_features.ids();
  const auto proteins = data.protein_features.ids();
  for (auto& n :
       sample_negatives(compounds, proteins, data.interactions.pairs(), positives.size(), rng)) {
    pairs.push_back(std::move(n));
  }
  return pairs;
}

FtlResult train_ftl(const TrainSchedule& schedule, const DataContext& data,
                    std::span<const EpochRef> snapshot_requests, TrainingObserver* observer) {
  return Trainer(schedule, data, snapshot_requests, observer).run();
}

FtlResult train_single(TierSpec tier, std::size_t epochs, const DataContext& data,
                       const TrainSettings& settings, std::span<const EpochRef> snapshot_requests,
                       TrainingObserver* observer) {
  if (tier_filter(data.interactions, tier).empty()) {
    throw DataError("train_single: tier " + tier.label() + " holds no positive records");
  }
  const TrainSchedule schedule{{TrainStep{tier, epochs}}, settings};
  return Trainer(schedule, data, snapshot_requests, observer).run();
}

Evaluation evaluate(const DenseNetwork& net, std::span<const LabeledPair> pairs,
                    const DataContext& data) {
  if (pairs.empty()) throw DataError("evaluate: empty example set");
  const auto refs = resolve(pairs, data);
  std::vector<double> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) labels.push_back(p.label);
  return Trainer::evaluate_refs(net, refs, labels, data.feature_width());
}

}  // namespace tierflow
