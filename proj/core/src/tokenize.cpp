#include "flusig/tokenize.hpp"

#include <cctype>

namespace flusig {
namespace {

bool is_space_byte(unsigned char c) { return std::isspace(c) != 0; }

bool is_word_byte(unsigned char c) {
  // Multi-byte UTF-8 sequences pass through as word characters.
  return std::isalnum(c) != 0 || c >= 0x80;
}

char lower_ascii(unsigned char c) { return static_cast<char>(std::tolower(c)); }

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower_ascii(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

bool is_url_chunk(std::string_view chunk) {
  return starts_with_ci(chunk, "http://") || starts_with_ci(chunk, "https://") ||
         starts_with_ci(chunk, "www.");
}

// Replaces U+2019 (right single quotation mark) with '\'' so the apostrophe
// rule sees it.
std::string fold_curly_apostrophes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xe2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99) {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

void flush(std::string& current, std::vector<std::string>& out) {
  if (!current.empty()) {
    out.push_back(current);
    current.clear();
  }
}

void split_words(std::string_view piece, std::vector<std::string>& out) {
  std::string current;
  for (std::size_t i = 0; i < piece.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(piece[i]);
    if (is_word_byte(c)) {
      current.push_back(lower_ascii(c));
    } else if (c == '\'' && !current.empty() && i + 1 < piece.size() &&
               is_word_byte(static_cast<unsigned char>(piece[i + 1]))) {
      current.push_back('\'');
    } else {
      flush(current, out);
    }
  }
  flush(current, out);
}

void process_chunk(std::string_view chunk, std::vector<std::string>& out) {
  if (chunk.empty()) return;
  if (is_url_chunk(chunk)) {
    out.emplace_back(kUrlToken);
    return;
  }
  if (chunk[0] == '#') {
    split_words(chunk.substr(1), out);
    return;
  }
  if (chunk[0] == '@' && chunk.size() > 1 &&
      (std::isalnum(static_cast<unsigned char>(chunk[1])) != 0 || chunk[1] == '_')) {
    std::size_t end = 1;
    while (end < chunk.size() &&
           (std::isalnum(static_cast<unsigned char>(chunk[end])) != 0 || chunk[end] == '_')) {
      ++end;
    }
    out.emplace_back(kUserToken);
    split_words(chunk.substr(end), out);
    return;
  }
  split_words(chunk, out);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  const std::string folded = fold_curly_apostrophes(text);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < folded.size()) {
    while (i < folded.size() && is_space_byte(static_cast<unsigned char>(folded[i]))) ++i;
    std::size_t start = i;
    while (i < folded.size() && !is_space_byte(static_cast<unsigned char>(folded[i]))) ++i;
    if (i > start) process_chunk(std::string_view(folded).substr(start, i - start), out);
  }
  return out;
}

std::size_t text_length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xc0) != 0x80) ++n;
  }
  return n;
}

}  // namespace flusig
