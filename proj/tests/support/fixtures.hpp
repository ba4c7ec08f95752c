#pragma once

// Shared test fixtures: the 16-message annotated sample, the 2009-10 season
// weekly counts with their laboratory baseline, and deterministic synthetic
// corpora for classifier checks.

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "flusig/corpus.hpp"
#include "flusig/rng.hpp"
#include "flusig/tokenize.hpp"

namespace fixtures {

struct SampleMessage {
  const char* id;
  const char* text;
  const char* marks;  // five +/- flags in category order A, I, P, W, S
};

// Sixteen annotated example messages; e11 is the one with no topical keyword.
inline constexpr std::array<SampleMessage, 16> kSampleMessages{{
    {"e1", "home this weekend? i've been off work all week with the flu", "+---+"},
    {"e2", "there is alot more to preparing for Swine Flu than just washing your hands", "-----"},
    {"e3", "everyone wash your hands.. no one wants swine flu", "-+---"},
    {"e4", "awl u need to go get to the doc so u dnt past da swine flu", "-----"},
    {"e5", "it's 2:10pm, I have flu and I'm still wearing my pajama", "----+"},
    {"e6", "I have the flu. I had a normal flu shot", "--+-+"},
    {"e7", "This guy has a nasty cough! Thank god he's sitting far away from me - the swine flu travels",
     "+----"},
    {"e8", "I'm sick too... cold or flu, I don't know... I couldn't go to work today...", "+---+"},
    {"e9", "Trivia for tonight has been cancelled due to flu bug", "+----"},
    {"e10", "Feel like I've washed my hands a 1000 times Gotta loveworkin during cold & flu season",
     "-+---"},
    {"e11", "overhyped public scare. I want to remove this mask", "---+-"},
    {"e12", "i don't know. she just keeps getting sick, but it's not the flu. i hate keeping her off school",
     "-----"},
    {"e13", "i feel terrible, don't want to be at work, wish id never had the h1n1 jab", "--+--"},
    {"e14", "Some cleaning products were especially made to kill the H1N1 ...", "-----"},
    {"e15", "She has a surgical mask on in the movies I'm nervous hope it's not h1n1", "-----"},
    {"e16", "regretting not getting a flu shot this year", "-----"},
}};

inline flusig::AnnotatedMessage make_sample(const SampleMessage& s, int day_offset) {
  flusig::AnnotatedMessage m;
  m.message.id = s.id;
  m.message.text = s.text;
  m.message.timestamp =
      flusig::parse_timestamp("2010-03-01T12:00:00Z") + std::chrono::days{day_offset};
  m.message.tokens = flusig::tokenize(m.message.text);
  for (std::size_t c = 0; c < flusig::kNumCategories; ++c) {
    m.labels.set(flusig::kAllCategories[c],
                 s.marks[c] == '+' ? flusig::Polarity::positive : flusig::Polarity::negative);
  }
  return m;
}

inline std::vector<flusig::AnnotatedMessage> sample_corpus() {
  std::vector<flusig::AnnotatedMessage> out;
  int day = 0;
  for (const SampleMessage& s : kSampleMessages) out.push_back(make_sample(s, day++));
  return out;
}

// 2009-10 season, weeks 2009-46 .. 2010-05. Per-week positives by category
// alongside laboratory-confirmed cases.
inline constexpr int kSeasonWeeks = 12;
inline constexpr std::array<const char*, kSeasonWeeks> kSeasonWeekIds{
    "2009-46", "2009-47", "2009-48", "2009-49", "2009-50", "2009-51",
    "2009-52", "2010-01", "2010-02", "2010-03", "2010-04", "2010-05"};
inline constexpr std::array<long long, kSeasonWeeks> kSeasonA{49, 32, 24, 35, 35, 21,
                                                              19, 25, 25, 29, 29, 29};
inline constexpr std::array<long long, kSeasonWeeks> kSeasonS{48, 72, 49, 41, 39, 35,
                                                              26, 32, 32, 31, 20, 23};
inline constexpr std::array<long long, kSeasonWeeks> kSeasonI{22, 30, 9, 10, 10, 12,
                                                              4,  6,  5, 7,  7,  6};
inline constexpr std::array<long long, kSeasonWeeks> kSeasonP{222, 258, 181, 199, 154, 150,
                                                              37,  63,  81,  73,  62,  46};
inline constexpr std::array<long long, kSeasonWeeks> kSeasonLab{2715, 1408, 997, 610, 480, 251,
                                                                285,  266,  261, 317, 268, 290};

// Published per-class counts the ratio fixture reproduces.
struct ClassRow {
  flusig::Category category;
  long long positives;
  long long negatives;
};
inline constexpr std::array<ClassRow, 5> kClassCounts{{
    {flusig::Category::A, 251, 632},
    {flusig::Category::I, 37, 43},
    {flusig::Category::P, 499, 974},
    {flusig::Category::W, 32, 230},
    {flusig::Category::S, 741, 1873},
}};

// One message labelled for exactly one category; texts vary so length stats
// are non-degenerate.
inline std::vector<flusig::AnnotatedMessage> class_count_corpus() {
  std::vector<flusig::AnnotatedMessage> out;
  int n = 0;
  flusig::Rng rng(7);
  for (const ClassRow& row : kClassCounts) {
    for (long long i = 0; i < row.positives + row.negatives; ++i) {
      flusig::AnnotatedMessage m;
      m.message.id = "c" + std::to_string(n);
      m.message.text = "message number " + std::to_string(n) + " ";
      const std::size_t extra = rng.below(60);
      m.message.text.append(extra, 'x');
      m.message.timestamp = flusig::parse_timestamp("2010-03-01T00:00:00Z");
      m.labels.set(row.category,
                   i < row.positives ? flusig::Polarity::positive : flusig::Polarity::negative);
      out.push_back(std::move(m));
      ++n;
    }
  }
  return out;
}

// ------------------------------------------------------ synthetic corpora ---

inline const char* kFillerWords[] = {"going",   "to",    "the",   "store", "later", "watching",
                                     "a",       "movie", "with",  "my",    "dog",   "today",
                                     "weather", "is",    "nice",  "out",   "here",  "coffee",
                                     "before",  "work",  "again", "this",  "week",  "really",
                                     "good",    "music", "on",    "radio", "now"};
inline constexpr std::size_t kNumFiller = sizeof(kFillerWords) / sizeof(kFillerWords[0]);

inline std::string filler_sentence(flusig::Rng& rng, std::size_t min_words,
                                   std::size_t max_words) {
  const std::size_t n = min_words + rng.below(max_words - min_words + 1);
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    if (!text.empty()) text += ' ';
    text += kFillerWords[rng.below(kNumFiller)];
  }
  return text;
}

inline flusig::AnnotatedMessage synth_message(const std::string& id, const std::string& text,
                                              int day, bool positive) {
  flusig::AnnotatedMessage m;
  m.message.id = id;
  m.message.text = text;
  m.message.timestamp =
      flusig::parse_timestamp("2009-11-15T09:00:00Z") + std::chrono::days{day};
  m.message.tokens = flusig::tokenize(m.message.text);
  m.labels.set(flusig::Category::S,
               positive ? flusig::Polarity::positive : flusig::Polarity::negative);
  return m;
}

// Cleanly separable: every positive carries the token "fever" plus one more
// marker; negatives never carry a marker.
inline std::vector<flusig::AnnotatedMessage> separable_corpus(std::size_t n_per_class = 100,
                                                              std::uint64_t seed = 11) {
  flusig::Rng rng(seed);
  const char* extra_markers[] = {"chills", "aching", "shivery"};
  std::vector<flusig::AnnotatedMessage> out;
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const bool positive = i % 2 == 0;
    std::string text = filler_sentence(rng, 4, 9);
    if (positive) {
      text += " fever ";
      text += extra_markers[rng.below(3)];
    }
    out.push_back(synth_message("sep" + std::to_string(i), text,
                                static_cast<int>(rng.below(70)), positive));
  }
  return out;
}

// Heavily imbalanced (1:8) and noisy: markers appear in most positives but
// also leak into some negatives, and some positives carry none.
inline std::vector<flusig::AnnotatedMessage> imbalanced_corpus(std::size_t n_pos = 60,
                                                               std::uint64_t seed = 23) {
  flusig::Rng rng(seed);
  std::vector<flusig::AnnotatedMessage> out;
  const std::size_t n_neg = 8 * n_pos;
  for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
    const bool positive = i < n_pos;
    std::string text = filler_sentence(rng, 5, 10);
    const double roll = rng.unit();
    if (positive) {
      if (roll < 0.55) {
        text += " fever";
      } else if (roll < 0.80) {
        text += " chills";
      }  // ~20% of positives look like noise
    } else {
      if (roll < 0.06) {
        text += " fever";
      } else if (roll < 0.10) {
        text += " chills";
      }
    }
    out.push_back(synth_message("imb" + std::to_string(i), text,
                                static_cast<int>(rng.below(70)), positive));
  }
  // Interleave so class order carries no signal.
  flusig::Rng order(seed + 1);
  order.shuffle(out);
  return out;
}

inline std::string corpus_to_jsonl(const std::vector<flusig::AnnotatedMessage>& msgs) {
  std::ostringstream out;
  flusig::write_corpus(out, msgs, flusig::CorpusFormat::jsonl);
  return out.str();
}

}  // namespace fixtures
