#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flusig/corpus.hpp"

namespace flusig {

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;

  long long total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

// Positive class is the target. Zero denominators yield 0.
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Metrics metrics_from(const ConfusionCounts& c);

std::pair<ConfusionCounts, Metrics> prf1(std::span<const Polarity> pred,
                                         std::span<const Polarity> gold);

// Stratified fold assignment: each class is shuffled (seeded) and dealt
// round-robin, so per-class fold sizes differ by at most one. Requires
// k >= 2 and k <= the minority class size so every fold sees both classes.
std::vector<int> stratified_folds(std::span<const Polarity> labels, int k, std::uint64_t seed);

struct CvResult {
  ConfusionCounts pooled;          // micro-average over pooled predictions
  Metrics pooled_metrics;
  std::vector<ConfusionCounts> fold_counts;
  std::vector<Metrics> fold_metrics;
};

// trainer(train_indices) returns a predictor over item indices; the model
// (and any vocabulary) must be rebuilt inside the trainer from the training
// indices only — test items never leak in.
using CvTrainer =
    std::function<std::function<Polarity(std::size_t)>(std::span<const std::size_t>)>;

CvResult cross_validate(std::span<const Polarity> labels, int k, std::uint64_t seed,
                        const CvTrainer& trainer);

struct AgreementResult {
  double observed = 0.0;   // pA: fraction of exact matches
  double expected = 0.0;   // pE: sum over labels of the marginal product
  double kappa = 0.0;
  std::size_t n = 0;
};

// Two-annotator Cohen's kappa over an arbitrary label alphabet.
AgreementResult cohens_kappa(std::span<const std::string> a1, std::span<const std::string> a2);

// kappa = (pA - pE) / (1 - pE); the given-value path for when only the
// agreement fractions are known.
double kappa_from(double observed, double expected);

// Inclusive character-length interval.
struct LengthBin {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

struct LengthBinRates {
  LengthBin bin;
  ConfusionCounts counts;
  std::optional<double> fp_rate;  // fp / (fp + tn); unset when no negatives in bin
  std::optional<double> fn_rate;  // fn / (fn + tp); unset when no positives in bin
};

// Five bins spanning 34..144 characters.
std::vector<LengthBin> default_length_bins();

std::vector<LengthBinRates> error_by_length(std::span<const Polarity> preds,
                                            std::span<const Polarity> golds,
                                            std::span<const std::string> texts,
                                            std::span<const LengthBin> bins);

}  // namespace flusig
