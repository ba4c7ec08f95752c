#include "flusig/keyword.hpp"

#include <cctype>
#include <istream>

#include "flusig/error.hpp"
#include "flusig/tokenize.hpp"

namespace flusig {
namespace {

KeywordPattern suffix_pattern(std::string stem) {
  KeywordPattern p;
  p.kind = KeywordPattern::Kind::suffix;
  p.stem = std::move(stem);
  return p;
}

KeywordPattern phrase_pattern(std::vector<std::string> tokens) {
  KeywordPattern p;
  p.kind = KeywordPattern::Kind::phrase;
  p.tokens = std::move(tokens);
  return p;
}

bool phrase_at(std::span<const std::string> tokens, std::size_t start,
               const std::vector<std::string>& phrase) {
  if (start + phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    if (tokens[start + i] != phrase[i]) return false;
  }
  return true;
}

}  // namespace

KeywordBag default_keywords() {
  KeywordBag bag;
  bag.entries.push_back(suffix_pattern("flu"));
  bag.entries.push_back(phrase_pattern({"influenza"}));
  bag.entries.push_back(phrase_pattern({"h1n1"}));
  bag.entries.push_back(phrase_pattern({"h5n1"}));
  bag.entries.push_back(phrase_pattern({"swine", "flu"}));
  bag.entries.push_back(phrase_pattern({"pandemic"}));
  bag.entries.push_back(phrase_pattern({"bird", "flu"}));
  return bag;
}

KeywordBag load_keywords(std::istream& in) {
  KeywordBag bag;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::size_t b = 0;
    std::size_t e = line.size();
    while (b < e && std::isspace(static_cast<unsigned char>(line[b])) != 0) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1])) != 0) --e;
    if (b == e) continue;
    const std::string body = line.substr(b, e - b);
    if (body[0] == '*') {
      std::string stem;
      for (char c : body.substr(1)) {
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
          throw parse_error("suffix pattern cannot contain whitespace", line_no);
        }
        stem.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
      if (stem.empty()) throw parse_error("empty suffix stem", line_no);
      bag.entries.push_back(suffix_pattern(std::move(stem)));
    } else {
      std::vector<std::string> tokens = tokenize(body);
      if (tokens.empty()) throw parse_error("pattern has no tokens", line_no);
      bag.entries.push_back(phrase_pattern(std::move(tokens)));
    }
  }
  if (bag.entries.empty()) throw validation_error("keyword bag is empty");
  return bag;
}

bool stage1_match(std::span<const std::string> tokens, const KeywordBag& bag) {
  for (const KeywordPattern& p : bag.entries) {
    if (p.kind == KeywordPattern::Kind::suffix) {
      for (const std::string& t : tokens) {
        if (t.ends_with(p.stem)) return true;
      }
    } else {
      for (std::size_t s = 0; s + p.tokens.size() <= tokens.size(); ++s) {
        if (phrase_at(tokens, s, p.tokens)) return true;
      }
    }
  }
  return false;
}

bool stage1_match(const Message& msg, const KeywordBag& bag) {
  return stage1_match(msg.tokens, bag);
}

std::vector<Message> filter_corpus(std::span<const Message> msgs, const KeywordBag& bag) {
  std::vector<Message> out;
  for (const Message& m : msgs) {
    if (stage1_match(m, bag)) out.push_back(m);
  }
  return out;
}

}  // namespace flusig
