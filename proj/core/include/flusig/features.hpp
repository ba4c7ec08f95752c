#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "flusig/corpus.hpp"
#include "flusig/rulelang.hpp"

namespace flusig {

// The four supported settings: uni, uni+rules, uni+bi, uni+bi+rules.
// Unigrams are always on. Features are binary presence, not counts.
struct FeatureConfig {
  bool use_unigrams = true;
  bool use_bigrams = false;
  bool use_rules = false;

  std::string label() const;
  bool operator==(const FeatureConfig&) const = default;
};

std::optional<FeatureConfig> feature_config_from(std::string_view label);

// Indexed feature space: grams first, rule names appended after, indices
// dense from 0 in first-occurrence order. Built from training data only;
// immutable afterwards.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(FeatureConfig config, std::vector<std::string> grams,
             std::vector<std::string> rule_names);

  const FeatureConfig& config() const { return config_; }
  const std::vector<std::string>& grams() const { return grams_; }
  const std::vector<std::string>& rule_names() const { return rule_names_; }
  std::uint32_t dimension() const {
    return static_cast<std::uint32_t>(grams_.size() + rule_names_.size());
  }
  std::optional<std::uint32_t> gram_index(std::string_view gram) const;

 private:
  FeatureConfig config_;
  std::vector<std::string> grams_;
  std::vector<std::string> rule_names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Sparse binary vector: sorted unique active indices.
struct FeatureVector {
  std::vector<std::uint32_t> active;
  std::uint32_t dimension = 0;
};

// n = 1 returns the tokens; n = 2 returns adjacent pairs joined by a space.
std::vector<std::string> ngrams(std::span<const std::string> tokens, int n);

// Grams occurring in >= min_df training messages enter the vocabulary, in
// first-occurrence order; rule names follow when the config enables them.
Vocabulary build_vocab(std::span<const Message> train, const FeatureConfig& config,
                       const RuleBook& book, std::size_t min_df = 1);
Vocabulary build_vocab(std::span<const Message* const> train, const FeatureConfig& config,
                       const RuleBook& book, std::size_t min_df = 1);

FeatureVector vectorize(const Message& msg, const Vocabulary& vocab, const RuleBook& book);

// One "index<TAB>kind<TAB>name" line per feature, preceded by config lines.
void save_vocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary load_vocabulary(std::istream& in);

// FNV-1a over the canonical dump; models store it so a mismatched
// vocabulary/model pair is caught at load time.
std::uint64_t vocab_hash(const Vocabulary& vocab);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace flusig
