#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "flusig/corpus.hpp"

namespace flusig {

// Pattern rule language over normalized token streams.
//
// Rulebook grammar (line oriented, '#' starts a comment):
//
//   list NAME = word, word, ...
//   rule NAME cat C: element+ [unless @LIST within K before|after]*
//
// Elements are bare lowercase tokens (quoted "..." when they contain reserved
// characters), @NAME word-list references, and _{m,n} skips consuming between
// m and n arbitrary tokens (0 <= m <= n <= 20). A rule may not begin or end
// with a skip. Word lists double as the named entity classes (physicians,
// medicines, ...) and as pronoun/modal/negation/temporal helper sets.
//
// A rule matches iff some alignment of its elements onto the tokens succeeds
// in order and that alignment violates no guard; a guard vetoes an alignment
// when a member of its list occurs within `window` tokens before the matched
// span's start (or after its end). Any one surviving alignment suffices.

struct WordList {
  std::string name;
  std::vector<std::string> words;  // sorted, unique, lowercase
  bool contains(std::string_view token) const;
};

struct LiteralElement {
  std::string token;
  bool operator==(const LiteralElement&) const = default;
};
struct ListRefElement {
  std::string name;
  bool operator==(const ListRefElement&) const = default;
};
struct SkipElement {
  int min = 0;
  int max = 0;
  bool operator==(const SkipElement&) const = default;
};
using RuleElement = std::variant<LiteralElement, ListRefElement, SkipElement>;

inline constexpr int kMaxSkip = 20;

enum class GuardDirection : std::uint8_t { before, after };

struct Guard {
  std::string list;
  int window = 1;
  GuardDirection direction = GuardDirection::before;
  bool operator==(const Guard&) const = default;
};

struct Rule {
  std::string name;
  Category category = Category::A;
  std::vector<RuleElement> elements;
  std::vector<Guard> guards;
};

class RuleBook {
 public:
  std::vector<WordList> lists;
  std::vector<Rule> rules;

  const WordList* find_list(std::string_view name) const;
  const Rule* find_rule(std::string_view name) const;

  // Same word lists, rules restricted to one category. A category with no
  // rules (the corpus gave no reliable examples for sanitation) yields an
  // empty rule set and contributes zero rule features.
  RuleBook rules_for(Category c) const;

  void rebuild_index();

 private:
  std::unordered_map<std::string, std::size_t> list_index_;
};

RuleBook parse_rulebook(std::string_view text);
RuleBook load_rulebook(std::istream& in);

// Emits the grammar above; parse(serialize(book)) is structurally equal.
std::string serialize_rulebook(const RuleBook& book);

bool match_rule(const Rule& rule, std::span<const std::string> tokens, const RuleBook& book);

// Component r is 1 iff rule r matches, in declaration order.
std::vector<std::uint8_t> rule_features(const RuleBook& book, std::span<const std::string> tokens);

bool rulebooks_equal(const RuleBook& a, const RuleBook& b);

}  // namespace flusig
