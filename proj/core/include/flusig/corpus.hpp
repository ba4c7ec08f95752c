#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flusig {

// The five message classes: avoidance behaviour, increased sanitation,
// pharmaceutical intervention, wearing a mask, self-reported diagnosis.
enum class Category : std::uint8_t { A = 0, I = 1, P = 2, W = 3, S = 4 };

inline constexpr std::size_t kNumCategories = 5;
inline constexpr std::array<Category, kNumCategories> kAllCategories{
    Category::A, Category::I, Category::P, Category::W, Category::S};

char category_letter(Category c);
std::optional<Category> category_from_letter(char letter);

enum class Polarity : std::uint8_t { negative = 0, positive = 1 };

// One micro-blog post. `tokens` starts empty and is filled by tokenize();
// everything downstream of the tokenizer works on `tokens`, not `text`.
struct Message {
  std::string id;
  std::chrono::sys_seconds timestamp{};
  std::string text;
  std::vector<std::string> tokens;
};

// Texts longer than this are legal but unusual for the intended sources;
// callers may warn (see overlong_count).
inline constexpr std::size_t kSoftTextLimit = 140;

// Per-message annotations: at most one polarity per category, any number of
// categories may be labelled (messages can belong to several).
class LabelSet {
 public:
  void set(Category c, Polarity p) { slots_[static_cast<std::size_t>(c)] = p; }
  void clear(Category c) { slots_[static_cast<std::size_t>(c)].reset(); }
  std::optional<Polarity> get(Category c) const { return slots_[static_cast<std::size_t>(c)]; }
  bool labeled(Category c) const { return slots_[static_cast<std::size_t>(c)].has_value(); }
  bool positive(Category c) const {
    const auto& s = slots_[static_cast<std::size_t>(c)];
    return s.has_value() && *s == Polarity::positive;
  }
  bool empty() const {
    for (const auto& s : slots_) {
      if (s.has_value()) return false;
    }
    return true;
  }
  bool operator==(const LabelSet&) const = default;

 private:
  std::array<std::optional<Polarity>, kNumCategories> slots_{};
};

struct AnnotatedMessage {
  Message message;
  LabelSet labels;
};

// Per-category corpus statistics. Lengths are in Unicode code points and the
// standard deviation uses the population (divide-by-n) formula so fixtures
// are deterministic.
struct CategoryStats {
  long long positives = 0;
  long long negatives = 0;
  long long total() const { return positives + negatives; }
  double mean_length = 0.0;
  double sd_length = 0.0;
  std::optional<double> pn_ratio;  // positives / negatives; unset when negatives == 0
};

using ClassStats = std::array<CategoryStats, kNumCategories>;

enum class CorpusFormat : std::uint8_t { jsonl, tsv };

std::optional<CorpusFormat> corpus_format_from(std::string_view name);
std::string_view corpus_format_name(CorpusFormat f);

// Streaming record reader. Lines starting with '#' and blank lines are
// skipped (report files embed provenance comments that way). Calls
// fn(record, raw_line, line_number) in input order. Duplicate ids raise.
void for_each_record(
    std::istream& in, CorpusFormat format,
    const std::function<void(AnnotatedMessage&&, const std::string&, std::size_t)>& fn);

std::vector<AnnotatedMessage> parse_corpus(std::istream& in, CorpusFormat format);

void write_record(std::ostream& out, const AnnotatedMessage& msg, CorpusFormat format);
void write_corpus(std::ostream& out, std::span<const AnnotatedMessage> msgs, CorpusFormat format);

// Number of messages whose text exceeds the soft length limit.
std::size_t overlong_count(std::span<const AnnotatedMessage> msgs);

// Duplicate key: lowercased, whitespace-collapsed text. Exact-match only;
// near-duplicates (retweet variants) pass through.
std::string normalized_text(std::string_view text);

// Keeps the first occurrence of each normalized text, preserving order.
std::vector<AnnotatedMessage> dedupe(std::vector<AnnotatedMessage> msgs);

ClassStats class_stats(std::span<const AnnotatedMessage> msgs);

// ISO-8601 UTC, e.g. "2009-11-15T12:03:00Z". Date-only strings get 00:00:00.
std::chrono::sys_seconds parse_timestamp(std::string_view text);
std::string format_timestamp(std::chrono::sys_seconds t);

}  // namespace flusig
