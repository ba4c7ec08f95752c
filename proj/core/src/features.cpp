#include "flusig/features.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "flusig/error.hpp"

namespace flusig {

std::string FeatureConfig::label() const {
  std::string out = "uni";
  if (use_bigrams) out += "+bi";
  if (use_rules) out += "+rules";
  return out;
}

std::optional<FeatureConfig> feature_config_from(std::string_view label) {
  FeatureConfig c;
  if (label == "uni") return c;
  if (label == "uni+rules") {
    c.use_rules = true;
    return c;
  }
  if (label == "uni+bi") {
    c.use_bigrams = true;
    return c;
  }
  if (label == "uni+bi+rules") {
    c.use_bigrams = true;
    c.use_rules = true;
    return c;
  }
  return std::nullopt;
}

Vocabulary::Vocabulary(FeatureConfig config, std::vector<std::string> grams,
                       std::vector<std::string> rule_names)
    : config_(config), grams_(std::move(grams)), rule_names_(std::move(rule_names)) {
  index_.reserve(grams_.size());
  for (std::uint32_t i = 0; i < grams_.size(); ++i) {
    index_.emplace(grams_[i], i);
  }
}

std::optional<std::uint32_t> Vocabulary::gram_index(std::string_view gram) const {
  const auto it = index_.find(std::string(gram));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ngrams(std::span<const std::string> tokens, int n) {
  if (n != 1 && n != 2) throw validation_error("ngrams supports n = 1 or 2");
  if (n == 1) return {tokens.begin(), tokens.end()};
  std::vector<std::string> out;
  if (tokens.size() < 2) return out;
  out.reserve(tokens.size() - 1);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    out.push_back(tokens[i] + ' ' + tokens[i + 1]);
  }
  return out;
}

namespace {

void collect_grams(const Message& msg, const FeatureConfig& config, std::vector<std::string>& out) {
  out = ngrams(msg.tokens, 1);
  if (config.use_bigrams) {
    std::vector<std::string> bi = ngrams(msg.tokens, 2);
    out.insert(out.end(), std::make_move_iterator(bi.begin()), std::make_move_iterator(bi.end()));
  }
}

Vocabulary build_vocab_impl(std::span<const Message* const> train, const FeatureConfig& config,
                            const RuleBook& book, std::size_t min_df) {
  if (train.empty()) throw validation_error("cannot build a vocabulary from an empty training set");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> doc_freq;      // messages containing the gram
  std::unordered_map<std::string, std::size_t> last_message;  // first-occurrence order kept
  std::vector<std::string> grams;
  for (std::size_t m = 0; m < train.size(); ++m) {
    collect_grams(*train[m], config, grams);
    for (std::string& g : grams) {
      auto [seen_it, first_ever] = last_message.try_emplace(g, m + 1);
      if (!first_ever && seen_it->second == m + 1) continue;  // already counted this message
      seen_it->second = m + 1;
      if (first_ever) order.push_back(g);
      ++doc_freq[g];
    }
  }
  std::vector<std::string> kept;
  kept.reserve(order.size());
  for (std::string& g : order) {
    if (doc_freq[g] >= min_df) kept.push_back(std::move(g));
  }
  std::vector<std::string> rule_names;
  if (config.use_rules) {
    rule_names.reserve(book.rules.size());
    for (const Rule& r : book.rules) rule_names.push_back(r.name);
  }
  return Vocabulary(config, std::move(kept), std::move(rule_names));
}

}  // namespace

Vocabulary build_vocab(std::span<const Message> train, const FeatureConfig& config,
                       const RuleBook& book, std::size_t min_df) {
  std::vector<const Message*> ptrs;
  ptrs.reserve(train.size());
  for (const Message& m : train) ptrs.push_back(&m);
  return build_vocab_impl(ptrs, config, book, min_df);
}

Vocabulary build_vocab(std::span<const Message* const> train, const FeatureConfig& config,
                       const RuleBook& book, std::size_t min_df) {
  return build_vocab_impl(train, config, book, min_df);
}

FeatureVector vectorize(const Message& msg, const Vocabulary& vocab, const RuleBook& book) {
  FeatureVector v;
  v.dimension = vocab.dimension();
  std::vector<std::string> grams;
  collect_grams(msg, vocab.config(), grams);
  for (const std::string& g : grams) {
    const auto idx = vocab.gram_index(g);
    if (idx.has_value()) v.active.push_back(*idx);
  }
  if (vocab.config().use_rules && !vocab.rule_names().empty()) {
    const std::uint32_t base = static_cast<std::uint32_t>(vocab.grams().size());
    for (std::uint32_t i = 0; i < vocab.rule_names().size(); ++i) {
      const Rule* rule = book.find_rule(vocab.rule_names()[i]);
      if (rule == nullptr) {
        throw validation_error("vocabulary rule '" + vocab.rule_names()[i] +
                               "' is not in the rulebook");
      }
      if (match_rule(*rule, msg.tokens, book)) v.active.push_back(base + i);
    }
  }
  std::sort(v.active.begin(), v.active.end());
  v.active.erase(std::unique(v.active.begin(), v.active.end()), v.active.end());
  return v;
}

void save_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  out << "features\t" << vocab.config().label() << '\n';
  std::uint32_t idx = 0;
  for (const std::string& g : vocab.grams()) {
    out << idx++ << "\tgram\t" << g << '\n';
  }
  for (const std::string& r : vocab.rule_names()) {
    out << idx++ << "\trule\t" << r << '\n';
  }
}

Vocabulary load_vocabulary(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<FeatureConfig> config;
  std::vector<std::string> grams;
  std::vector<std::string> rule_names;
  std::uint32_t expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos) throw parse_error("expected tab-separated fields", line_no);
    const std::string first = line.substr(0, t1);
    if (first == "features") {
      config = feature_config_from(line.substr(t1 + 1));
      if (!config.has_value()) throw parse_error("unknown feature config", line_no);
      continue;
    }
    if (t2 == std::string::npos) throw parse_error("expected index, kind, name", line_no);
    std::uint32_t idx = 0;
    try {
      idx = static_cast<std::uint32_t>(std::stoul(first));
    } catch (const std::exception&) {
      throw parse_error("bad feature index \"" + first + "\"", line_no);
    }
    if (idx != expected) {
      throw parse_error("feature indices must be dense from 0 (expected " +
                            std::to_string(expected) + ")",
                        line_no);
    }
    ++expected;
    const std::string kind = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string name = line.substr(t2 + 1);
    if (kind == "gram") {
      if (!rule_names.empty()) throw parse_error("gram features must precede rule features", line_no);
      grams.push_back(name);
    } else if (kind == "rule") {
      rule_names.push_back(name);
    } else {
      throw parse_error("unknown feature kind \"" + kind + "\"", line_no);
    }
  }
  if (!config.has_value()) throw validation_error("vocabulary file missing 'features' line");
  return Vocabulary(*config, std::move(grams), std::move(rule_names));
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t vocab_hash(const Vocabulary& vocab) {
  std::ostringstream dump;
  save_vocabulary(dump, vocab);
  return fnv1a(dump.str());
}

}  // namespace flusig
