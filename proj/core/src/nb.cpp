#include <cmath>

#include "flusig/classify.hpp"
#include "flusig/error.hpp"

namespace flusig {

void NBModel::rebuild_base() {
  base_pos = 0.0;
  base_neg = 0.0;
  for (std::uint32_t f = 0; f < dimension; ++f) base_pos += log_p0_pos[f];
  for (std::uint32_t f = 0; f < dimension; ++f) base_neg += log_p0_neg[f];
}

NBModel train_nb(const Dataset& data) {
  if (data.vectors.size() != data.labels.size() || data.vectors.empty()) {
    throw validation_error("dataset vectors/labels mismatch or empty");
  }
  long long n_pos = 0;
  for (Polarity p : data.labels) {
    if (p == Polarity::positive) ++n_pos;
  }
  const long long n = static_cast<long long>(data.labels.size());
  const long long n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw validation_error("training data must contain both polarities");
  }

  NBModel model;
  model.dimension = data.dimension;
  model.log_prior_pos = std::log(static_cast<double>(n_pos) / static_cast<double>(n));
  model.log_prior_neg = std::log(static_cast<double>(n_neg) / static_cast<double>(n));

  std::vector<long long> on_pos(data.dimension, 0);
  std::vector<long long> on_neg(data.dimension, 0);
  for (std::size_t i = 0; i < data.vectors.size(); ++i) {
    if (data.vectors[i].dimension != data.dimension) {
      throw validation_error("vector dimension mismatch in dataset");
    }
    std::vector<long long>& on = data.labels[i] == Polarity::positive ? on_pos : on_neg;
    for (std::uint32_t f : data.vectors[i].active) ++on[f];
  }

  model.log_p1_pos.resize(data.dimension);
  model.log_p0_pos.resize(data.dimension);
  model.log_p1_neg.resize(data.dimension);
  model.log_p0_neg.resize(data.dimension);
  const double denom_pos = static_cast<double>(n_pos) + 2.0;
  const double denom_neg = static_cast<double>(n_neg) + 2.0;
  for (std::uint32_t f = 0; f < data.dimension; ++f) {
    model.log_p1_pos[f] = std::log((static_cast<double>(on_pos[f]) + 1.0) / denom_pos);
    model.log_p0_pos[f] =
        std::log((static_cast<double>(n_pos - on_pos[f]) + 1.0) / denom_pos);
    model.log_p1_neg[f] = std::log((static_cast<double>(on_neg[f]) + 1.0) / denom_neg);
    model.log_p0_neg[f] =
        std::log((static_cast<double>(n_neg - on_neg[f]) + 1.0) / denom_neg);
  }
  model.rebuild_base();
  return model;
}

Prediction predict_nb(const NBModel& model, const FeatureVector& v) {
  if (v.dimension != model.dimension) {
    throw validation_error("feature vector dimension " + std::to_string(v.dimension) +
                           " does not match model dimension " + std::to_string(model.dimension));
  }
  double score_pos = model.log_prior_pos + model.base_pos;
  double score_neg = model.log_prior_neg + model.base_neg;
  for (std::uint32_t f : v.active) {
    score_pos += model.log_p1_pos[f] - model.log_p0_pos[f];
    score_neg += model.log_p1_neg[f] - model.log_p0_neg[f];
  }
  const double log_odds = score_pos - score_neg;
  Prediction out;
  out.score = log_odds;
  out.polarity = log_odds > 0.0 ? Polarity::positive : Polarity::negative;
  return out;
}

}  // namespace flusig
