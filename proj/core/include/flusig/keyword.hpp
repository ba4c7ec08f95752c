#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flusig/corpus.hpp"

namespace flusig {

// One stage-1 pattern. A suffix pattern ("*flu") matches any token ending in
// its stem — this catches "swineflu" and hashtag-stripped "flu" without
// hitting substrings like "fluent". A phrase matches a contiguous run of
// normalized tokens, so "swine-flu" and "Swine Flu" both hit.
struct KeywordPattern {
  enum class Kind : std::uint8_t { suffix, phrase };
  Kind kind = Kind::phrase;
  std::string stem;                 // suffix patterns
  std::vector<std::string> tokens;  // phrase patterns
};

struct KeywordBag {
  std::vector<KeywordPattern> entries;
};

// The built-in topical bag: *flu, influenza, H1N1, H5N1, swine flu,
// pandemic, bird flu.
KeywordBag default_keywords();

// One pattern per line; '*' prefix marks a suffix pattern; '#' starts a
// comment. Patterns are normalized the same way message text is.
KeywordBag load_keywords(std::istream& in);

bool stage1_match(std::span<const std::string> tokens, const KeywordBag& bag);
bool stage1_match(const Message& msg, const KeywordBag& bag);

// Order-preserving subset of messages whose tokens hit the bag.
std::vector<Message> filter_corpus(std::span<const Message> msgs, const KeywordBag& bag);

}  // namespace flusig
