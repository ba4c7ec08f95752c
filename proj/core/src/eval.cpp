#include "flusig/eval.hpp"

#include <algorithm>
#include <map>

#include "flusig/error.hpp"
#include "flusig/rng.hpp"
#include "flusig/tokenize.hpp"

namespace flusig {

Metrics metrics_from(const ConfusionCounts& c) {
  Metrics m;
  m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
  return m;
}

std::pair<ConfusionCounts, Metrics> prf1(std::span<const Polarity> pred,
                                         std::span<const Polarity> gold) {
  if (pred.size() != gold.size()) {
    throw validation_error("prediction/gold length mismatch (" + std::to_string(pred.size()) +
                           " vs " + std::to_string(gold.size()) + ")");
  }
  if (pred.empty()) throw validation_error("cannot score an empty prediction sequence");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == Polarity::positive;
    const bool g = gold[i] == Polarity::positive;
    if (p && g) {
      ++c.tp;
    } else if (p && !g) {
      ++c.fp;
    } else if (!p && g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return {c, metrics_from(c)};
}

std::vector<int> stratified_folds(std::span<const Polarity> labels, int k, std::uint64_t seed) {
  if (k < 2) throw validation_error("fold count must be >= 2");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == Polarity::positive ? pos : neg).push_back(i);
  }
  const std::size_t minority = std::min(pos.size(), neg.size());
  if (static_cast<std::size_t>(k) > minority) {
    throw validation_error("infeasible stratification: " + std::to_string(k) +
                           " folds but minority class has only " + std::to_string(minority) +
                           " items");
  }
  std::vector<int> fold_of(labels.size(), 0);
  Rng rng(seed);
  // One round-robin cursor across both classes: per-class fold sizes differ
  // by at most one, and so do the fold totals.
  std::size_t cursor = 0;
  for (std::vector<std::size_t>* cls : {&pos, &neg}) {
    rng.shuffle(*cls);
    for (std::size_t idx : *cls) {
      fold_of[idx] = static_cast<int>(cursor % static_cast<std::size_t>(k));
      ++cursor;
    }
  }
  return fold_of;
}

CvResult cross_validate(std::span<const Polarity> labels, int k, std::uint64_t seed,
                        const CvTrainer& trainer) {
  const std::vector<int> fold_of = stratified_folds(labels, k, seed);
  CvResult result;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (fold_of[i] == fold ? test_idx : train_idx).push_back(i);
    }
    const auto predictor = trainer(train_idx);
    ConfusionCounts c;
    for (std::size_t i : test_idx) {
      const bool p = predictor(i) == Polarity::positive;
      const bool g = labels[i] == Polarity::positive;
      if (p && g) {
        ++c.tp;
      } else if (p && !g) {
        ++c.fp;
      } else if (!p && g) {
        ++c.fn;
      } else {
        ++c.tn;
      }
    }
    result.fold_counts.push_back(c);
    result.fold_metrics.push_back(metrics_from(c));
    result.pooled += c;
  }
  result.pooled_metrics = metrics_from(result.pooled);
  return result;
}

AgreementResult cohens_kappa(std::span<const std::string> a1, std::span<const std::string> a2) {
  if (a1.size() != a2.size()) throw validation_error("annotation sequences differ in length");
  if (a1.empty()) throw validation_error("cannot compute agreement on empty annotations");
  const double n = static_cast<double>(a1.size());
  std::size_t matches = 0;
  std::map<std::string, std::size_t> m1;
  std::map<std::string, std::size_t> m2;
  for (std::size_t i = 0; i < a1.size(); ++i) {
    if (a1[i] == a2[i]) ++matches;
    ++m1[a1[i]];
    ++m2[a2[i]];
  }
  AgreementResult r;
  r.n = a1.size();
  r.observed = static_cast<double>(matches) / n;
  for (const auto& [label, count1] : m1) {
    const auto it = m2.find(label);
    if (it != m2.end()) {
      r.expected += (static_cast<double>(count1) / n) * (static_cast<double>(it->second) / n);
    }
  }
  if (r.expected >= 1.0) {
    // Both marginals degenerate on one label; only possible with pA = 1.
    r.kappa = 1.0;
  } else {
    r.kappa = kappa_from(r.observed, r.expected);
  }
  return r;
}

double kappa_from(double observed, double expected) {
  if (observed < 0.0 || observed > 1.0) throw validation_error("pA must be in [0, 1]");
  if (expected < 0.0 || expected >= 1.0) throw validation_error("pE must be in [0, 1)");
  return (observed - expected) / (1.0 - expected);
}

std::vector<LengthBin> default_length_bins() {
  return {{34, 56}, {57, 78}, {79, 100}, {101, 121}, {122, 144}};
}

std::vector<LengthBinRates> error_by_length(std::span<const Polarity> preds,
                                            std::span<const Polarity> golds,
                                            std::span<const std::string> texts,
                                            std::span<const LengthBin> bins) {
  if (preds.size() != golds.size() || preds.size() != texts.size()) {
    throw validation_error("error_by_length inputs differ in length");
  }
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].lo > bins[i].hi) throw validation_error("bin lo > hi");
    for (std::size_t j = i + 1; j < bins.size(); ++j) {
      if (bins[i].lo <= bins[j].hi && bins[j].lo <= bins[i].hi) {
        throw validation_error("length bins overlap");
      }
    }
  }
  std::vector<LengthBinRates> out(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) out[b].bin = bins[b];
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::size_t len = text_length(texts[i]);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      if (len < bins[b].lo || len > bins[b].hi) continue;
      ConfusionCounts& c = out[b].counts;
      const bool p = preds[i] == Polarity::positive;
      const bool g = golds[i] == Polarity::positive;
      if (p && g) {
        ++c.tp;
      } else if (p && !g) {
        ++c.fp;
      } else if (!p && g) {
        ++c.fn;
      } else {
        ++c.tn;
      }
      break;
    }
  }
  for (LengthBinRates& r : out) {
    if (r.counts.fp + r.counts.tn > 0) {
      r.fp_rate = static_cast<double>(r.counts.fp) / static_cast<double>(r.counts.fp + r.counts.tn);
    }
    if (r.counts.fn + r.counts.tp > 0) {
      r.fn_rate = static_cast<double>(r.counts.fn) / static_cast<double>(r.counts.fn + r.counts.tp);
    }
  }
  return out;
}

}  // namespace flusig
