#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "flusig/classify.hpp"
#include "flusig/error.hpp"
#include "flusig/eval.hpp"
#include "flusig/rng.hpp"

namespace flusig {

std::size_t symmetric_difference_size(const FeatureVector& a, const FeatureVector& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t diff = 0;
  while (i < a.active.size() && j < b.active.size()) {
    if (a.active[i] == b.active[j]) {
      ++i;
      ++j;
    } else if (a.active[i] < b.active[j]) {
      ++diff;
      ++i;
    } else {
      ++diff;
      ++j;
    }
  }
  return diff + (a.active.size() - i) + (b.active.size() - j);
}

double rbf_kernel(const FeatureVector& a, const FeatureVector& b, double gamma) {
  return std::exp(-gamma * static_cast<double>(symmetric_difference_size(a, b)));
}

namespace {

// Kernel access with an optional precomputed Gram matrix. Everything at
// undersampled-corpus scale fits; larger sets fall back to on-the-fly
// evaluation over the sparse vectors.
class KernelCache {
 public:
  KernelCache(const std::vector<FeatureVector>& x, double gamma) : x_(x), gamma_(gamma) {
    const std::size_t n = x.size();
    if (n > 0 && n <= 2048) {
      gram_.resize(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        gram_[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
          const double k = rbf_kernel(x[i], x[j], gamma_);
          gram_[i * n + j] = k;
          gram_[j * n + i] = k;
        }
      }
    }
  }

  double at(std::size_t i, std::size_t j) const {
    if (!gram_.empty()) return gram_[i * x_.size() + j];
    return rbf_kernel(x_[i], x_[j], gamma_);
  }

 private:
  const std::vector<FeatureVector>& x_;
  double gamma_;
  std::vector<double> gram_;
};

// SMO working state with a full error cache: E_i = f(x_i) - y_i is kept
// current across pair updates, so partner search costs O(1) per candidate.
struct Problem {
  const std::vector<FeatureVector>& x;
  std::vector<double> y;  // +1 / -1
  KernelCache kernel;
  std::vector<double> alpha;
  std::vector<double> err;  // f(x_i) - y_i under the current alpha, bias
  double bias = 0.0;
  double c;

  void init() {
    alpha.assign(x.size(), 0.0);
    err.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) err[i] = -y[i];
  }

  double dual_objective() const {
    double obj = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[i] <= 0.0) continue;
      obj += alpha[i];
      for (std::size_t j = 0; j < alpha.size(); ++j) {
        if (alpha[j] <= 0.0) continue;
        obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * kernel.at(i, j);
      }
    }
    return obj;
  }

  // KKT residual of item i: positive when the point violates its condition.
  double violation(std::size_t i) const {
    const double r = y[i] * err[i];
    if (alpha[i] < c && r < 0.0) return -r;
    if (alpha[i] > 0.0 && r > 0.0) return r;
    return 0.0;
  }

  double max_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) worst = std::max(worst, violation(i));
    return worst;
  }

  // Joint optimization of the (i, j) pair. Returns true when alphas moved.
  // Index order is canonicalized so the arithmetic path does not depend on
  // which element of the pair was nominated first.
  bool take_step(std::size_t i, std::size_t j) {
    if (i == j) return false;
    if (i > j) std::swap(i, j);
    const double e_i = err[i];
    const double e_j = err[j];
    const double a_i_old = alpha[i];
    const double a_j_old = alpha[j];
    double lo = 0.0;
    double hi = 0.0;
    if (y[i] != y[j]) {
      lo = std::max(0.0, a_j_old - a_i_old);
      hi = std::min(c, c + a_j_old - a_i_old);
    } else {
      lo = std::max(0.0, a_i_old + a_j_old - c);
      hi = std::min(c, a_i_old + a_j_old);
    }
    if (lo >= hi) return false;
    const double eta = kernel.at(i, i) + kernel.at(j, j) - 2.0 * kernel.at(i, j);
    if (eta <= 0.0) return false;  // identical points under the kernel
    double a_j = a_j_old + y[j] * (e_i - e_j) / eta;
    a_j = std::clamp(a_j, lo, hi);
    if (std::abs(a_j - a_j_old) < 1e-8) return false;
    const double a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j);
    const double d_i = a_i - a_i_old;
    const double d_j = a_j - a_j_old;
    const double b1 =
        bias - e_i - y[i] * d_i * kernel.at(i, i) - y[j] * d_j * kernel.at(i, j);
    const double b2 =
        bias - e_j - y[i] * d_i * kernel.at(i, j) - y[j] * d_j * kernel.at(j, j);
    double b_new = 0.0;
    if (a_i > 0.0 && a_i < c) {
      b_new = b1;
    } else if (a_j > 0.0 && a_j < c) {
      b_new = b2;
    } else {
      b_new = (b1 + b2) / 2.0;
    }
    const double d_b = b_new - bias;
    alpha[i] = a_i;
    alpha[j] = a_j;
    bias = b_new;
    for (std::size_t k = 0; k < err.size(); ++k) {
      err[k] += y[i] * d_i * kernel.at(i, k) + y[j] * d_j * kernel.at(j, k) + d_b;
    }
    return true;
  }

  // The pair realizing the optimality gap: the sets below are the indices
  // whose margin condition lower- respectively upper-bounds the admissible
  // bias; g_i = y_i - f0(x_i). At an optimum max g over the lower set is
  // within 2*tolerance of min g over the upper set.
  struct ViolatingPair {
    std::size_t low = 0;
    std::size_t up = 0;
    double gap = 0.0;  // b_low - b_up
    double b_mid = 0.0;
  };

  ViolatingPair maximal_violating_pair() const {
    ViolatingPair p;
    double b_low = -std::numeric_limits<double>::infinity();
    double b_up = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      const double g = y[i] - (err[i] + y[i] - bias);
      if (((y[i] > 0.0 && alpha[i] < c) || (y[i] < 0.0 && alpha[i] > 0.0)) && g > b_low) {
        b_low = g;
        p.low = i;
      }
      if (((y[i] > 0.0 && alpha[i] > 0.0) || (y[i] < 0.0 && alpha[i] < c)) && g < b_up) {
        b_up = g;
        p.up = i;
      }
    }
    p.gap = b_low - b_up;
    if (std::isfinite(b_low) && std::isfinite(b_up)) {
      p.b_mid = (b_low + b_up) / 2.0;
    } else {
      p.b_mid = bias;
    }
    return p;
  }

  void set_bias(double target) {
    const double shift = target - bias;
    if (shift != 0.0) {
      bias = target;
      for (double& e : err) e += shift;
    }
  }

  // Fallback partner search when the maximal pair cannot move.
  bool scan_partners(std::size_t i, Rng& rng) {
    const std::size_t n = alpha.size();
    const std::size_t start = rng.below(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (take_step(i, (start + k) % n)) return true;
    }
    return false;
  }
};

}  // namespace

SVMModel train_svm(const Dataset& data, double c, double gamma, std::uint64_t seed,
                   SmoTrace* trace) {
  if (c <= 0.0 || gamma <= 0.0) throw validation_error("c and gamma must be positive");
  if (data.vectors.size() != data.labels.size() || data.vectors.empty()) {
    throw validation_error("dataset vectors/labels mismatch or empty");
  }
  const std::size_t n = data.vectors.size();
  Problem prob{data.vectors, {}, KernelCache(data.vectors, gamma), {}, {}, 0.0, c};
  prob.y.resize(n);
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (data.vectors[i].dimension != data.dimension) {
      throw validation_error("vector dimension mismatch in dataset");
    }
    const bool pos = data.labels[i] == Polarity::positive;
    prob.y[i] = pos ? 1.0 : -1.0;
    (pos ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw validation_error("training data must contain both polarities");
  prob.init();

  // Each round optimizes the maximal violating pair; the bias-free gap
  // b_low - b_up measures optimality, so the loop cannot be fooled by a
  // stale bias estimate. Per-point KKT violations are half the gap once the
  // bias is centred.
  Rng rng(seed);
  int stagnant = 0;
  int sweeps = 0;
  bool converged = false;
  const long long max_rounds = 200000 + 500ll * static_cast<long long>(n);
  for (long long round = 0; round < max_rounds && stagnant < kSmoMaxStagnantSweeps; ++round) {
    ++sweeps;
    const Problem::ViolatingPair pair = prob.maximal_violating_pair();
    if (pair.gap < 2.0 * kSmoTolerance) {
      converged = true;
      if (trace != nullptr) trace->sweep_objectives.push_back(prob.dual_objective());
      break;
    }
    bool moved = prob.take_step(pair.low, pair.up);
    if (!moved) moved = prob.scan_partners(pair.low, rng);
    if (!moved) moved = prob.scan_partners(pair.up, rng);
    if (trace != nullptr) trace->sweep_objectives.push_back(prob.dual_objective());
    stagnant = moved ? 0 : stagnant + 1;
  }
  prob.set_bias(prob.maximal_violating_pair().b_mid);
  const double max_violation = prob.max_violation();
  converged = converged || max_violation < kSmoTolerance;
  if (trace != nullptr) {
    trace->sweeps = sweeps;
    trace->converged = converged;
    trace->max_violation = max_violation;
  }

  SVMModel model;
  model.dimension = data.dimension;
  model.c = c;
  model.gamma = gamma;
  model.bias = prob.bias;
  for (std::size_t i = 0; i < n; ++i) {
    if (prob.alpha[i] > 0.0) {
      model.support_vectors.push_back(data.vectors[i]);
      model.alpha.push_back(prob.alpha[i]);
      model.sv_label.push_back(prob.y[i] > 0.0 ? 1 : -1);
    }
  }
  return model;
}

Prediction predict_svm(const SVMModel& model, const FeatureVector& v) {
  if (v.dimension != model.dimension) {
    throw validation_error("feature vector dimension " + std::to_string(v.dimension) +
                           " does not match model dimension " + std::to_string(model.dimension));
  }
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    f += model.alpha[i] * static_cast<double>(model.sv_label[i]) *
         rbf_kernel(model.support_vectors[i], v, model.gamma);
  }
  Prediction out;
  out.score = f;
  out.polarity = f > 0.0 ? Polarity::positive : Polarity::negative;
  return out;
}

std::vector<double> default_c_grid() { return {0.1, 1.0, 10.0, 100.0}; }
std::vector<double> default_gamma_grid() { return {0.001, 0.01, 0.1, 1.0}; }

GridChoice grid_search(const Dataset& data, std::span<const double> c_grid,
                       std::span<const double> gamma_grid, int folds, std::uint64_t seed) {
  if (c_grid.empty() || gamma_grid.empty()) throw validation_error("empty parameter grid");
  if (folds < 2) throw validation_error("grid search needs >= 2 folds");

  // One fold assignment shared by every cell keeps the comparison fair and
  // the result deterministic.
  const std::vector<int> fold_of = stratified_folds(data.labels, folds, mix_seed(seed, 0x666f6c64));

  std::vector<double> cs(c_grid.begin(), c_grid.end());
  std::vector<double> gs(gamma_grid.begin(), gamma_grid.end());
  std::sort(cs.begin(), cs.end());
  std::sort(gs.begin(), gs.end());

  GridChoice best;
  bool have_best = false;
  for (double c : cs) {
    for (double gamma : gs) {
      // Seed keyed by the cell parameters, not its position: a cell trains
      // identically no matter what grid it sits in.
      char cell_tag[80];
      std::snprintf(cell_tag, sizeof(cell_tag), "%.17g|%.17g", c, gamma);
      const std::uint64_t cell = fnv1a(cell_tag);
      double f1_sum = 0.0;
      for (int fold = 0; fold < folds; ++fold) {
        Dataset train;
        train.category = data.category;
        train.dimension = data.dimension;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < data.vectors.size(); ++i) {
          if (fold_of[i] == fold) {
            test_idx.push_back(i);
          } else {
            train.vectors.push_back(data.vectors[i]);
            train.labels.push_back(data.labels[i]);
          }
        }
        const SVMModel model =
            train_svm(train, c, gamma, mix_seed(seed, cell + static_cast<std::uint64_t>(fold)));
        std::vector<Polarity> pred;
        std::vector<Polarity> gold;
        pred.reserve(test_idx.size());
        for (std::size_t i : test_idx) {
          pred.push_back(predict_svm(model, data.vectors[i]).polarity);
          gold.push_back(data.labels[i]);
        }
        f1_sum += prf1(pred, gold).second.f1;
      }
      const double mean_f1 = f1_sum / static_cast<double>(folds);
      if (!have_best || mean_f1 > best.mean_f1) {
        best = GridChoice{c, gamma, mean_f1};
        have_best = true;
      }
    }
  }
  return best;
}

Dataset undersample(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    (data.labels[i] == Polarity::positive ? pos : neg).push_back(i);
  }
  if (pos.size() > neg.size()) {
    throw validation_error("undersampling expects positives <= negatives (" +
                           std::to_string(pos.size()) + " vs " + std::to_string(neg.size()) + ")");
  }
  Rng rng(seed);
  rng.shuffle(neg);
  std::vector<bool> keep(data.labels.size(), false);
  for (std::size_t i : pos) keep[i] = true;
  for (std::size_t k = 0; k < pos.size(); ++k) keep[neg[k]] = true;
  Dataset out;
  out.category = data.category;
  out.dimension = data.dimension;
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    if (keep[i]) {
      out.vectors.push_back(data.vectors[i]);
      out.labels.push_back(data.labels[i]);
    }
  }
  return out;
}

}  // namespace flusig
