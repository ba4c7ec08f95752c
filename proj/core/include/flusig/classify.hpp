#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "flusig/corpus.hpp"
#include "flusig/features.hpp"

namespace flusig {

// One category's binary training/evaluation data.
struct Dataset {
  std::vector<FeatureVector> vectors;
  std::vector<Polarity> labels;
  Category category = Category::A;
  std::uint32_t dimension = 0;
};

struct Prediction {
  Polarity polarity = Polarity::negative;
  double score = 0.0;  // NB: log-odds positive vs negative; SVM: decision value
};

// Bernoulli Naive Bayes over binary features, add-one smoothed:
// P(f=1|c) = (count(f=1,c) + 1) / (count(c) + 2).
struct NBModel {
  std::uint32_t dimension = 0;
  double log_prior_pos = 0.0;
  double log_prior_neg = 0.0;
  std::vector<double> log_p1_pos;
  std::vector<double> log_p0_pos;
  std::vector<double> log_p1_neg;
  std::vector<double> log_p0_neg;
  std::uint64_t vocab_hash = 0;

  // Sum of log P(f=0|c) over all features, fixed summation order so
  // save/load reproduces scores bit-for-bit.
  double base_pos = 0.0;
  double base_neg = 0.0;
  void rebuild_base();
};

NBModel train_nb(const Dataset& data);

// Ties (log-odds exactly 0) predict negative so zero-evidence messages do
// not inflate surveillance counts.
Prediction predict_nb(const NBModel& model, const FeatureVector& v);

// Soft-margin SVM with RBF kernel, trained by simplified two-violator SMO.
struct SVMModel {
  std::uint32_t dimension = 0;
  double c = 1.0;
  double gamma = 1.0;
  double bias = 0.0;
  std::vector<FeatureVector> support_vectors;
  std::vector<double> alpha;  // 0 < alpha_i <= c
  std::vector<int> sv_label;  // +1 / -1
  std::uint64_t vocab_hash = 0;
};

struct SmoTrace {
  std::vector<double> sweep_objectives;  // dual objective after each sweep
  int sweeps = 0;
  double max_violation = 0.0;  // KKT residual at termination
  bool converged = false;      // all violations < tolerance (vs. stagnation cap)
};

inline constexpr double kSmoTolerance = 1e-3;
inline constexpr int kSmoMaxStagnantSweeps = 100;

SVMModel train_svm(const Dataset& data, double c, double gamma, std::uint64_t seed,
                   SmoTrace* trace = nullptr);

Prediction predict_svm(const SVMModel& model, const FeatureVector& v);

// For binary vectors ||x - z||^2 is the symmetric-difference size of the
// active sets, so the kernel needs no dense arithmetic.
std::size_t symmetric_difference_size(const FeatureVector& a, const FeatureVector& b);
double rbf_kernel(const FeatureVector& a, const FeatureVector& b, double gamma);

struct GridChoice {
  double c = 0.0;
  double gamma = 0.0;
  double mean_f1 = 0.0;  // mean of per-fold F1 on the inner CV
};

std::vector<double> default_c_grid();      // 0.1, 1, 10, 100
std::vector<double> default_gamma_grid();  // 0.001, 0.01, 0.1, 1
inline constexpr int kDefaultInnerFolds = 3;

// Inner stratified cross-validation per cell; ties go to smaller c, then
// smaller gamma.
GridChoice grid_search(const Dataset& data, std::span<const double> c_grid,
                       std::span<const double> gamma_grid, int folds, std::uint64_t seed);

// Keeps every positive, samples negatives without replacement down to the
// positive count. Output preserves dataset order.
Dataset undersample(const Dataset& data, std::uint64_t seed);

enum class ClassifierKind : std::uint8_t { nb, svm };
std::optional<ClassifierKind> classifier_kind_from(std::string_view name);
std::string_view classifier_kind_name(ClassifierKind kind);

using AnyModel = std::variant<NBModel, SVMModel>;

Prediction predict(const AnyModel& model, const FeatureVector& v);
std::uint64_t model_vocab_hash(const AnyModel& model);

// Text dump with full-precision coefficients; load + predict reproduces
// save-time predictions bit-for-bit.
void save_model(std::ostream& out, const AnyModel& model);
AnyModel load_model(std::istream& in);

}  // namespace flusig
