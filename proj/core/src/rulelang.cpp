#include "flusig/rulelang.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <set>
#include <sstream>

#include "flusig/error.hpp"

namespace flusig {
namespace {

// ---------------------------------------------------------------- lexer ---

struct Lexeme {
  enum class Kind : std::uint8_t { word, quoted, list_ref, skip, equals, comma, colon };
  Kind kind;
  std::string text;  // word/quoted: token text; list_ref: list name
  int skip_min = 0;
  int skip_max = 0;
  std::size_t column = 0;  // 1-based
};

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_bare_char(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  if (std::isspace(u) != 0) return false;
  switch (c) {
    case '#':
    case '"':
    case ',':
    case ':':
    case '=':
    case '@':
      return false;
    default:
      return true;
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<Lexeme> lex_line(const std::string& line, std::size_t line_no) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    const std::size_t col = i + 1;
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      ++i;
      continue;
    }
    if (c == '#') break;
    if (c == '=') {
      out.push_back({Lexeme::Kind::equals, "=", 0, 0, col});
      ++i;
      continue;
    }
    if (c == ',') {
      out.push_back({Lexeme::Kind::comma, ",", 0, 0, col});
      ++i;
      continue;
    }
    if (c == ':') {
      out.push_back({Lexeme::Kind::colon, ":", 0, 0, col});
      ++i;
      continue;
    }
    if (c == '"') {
      const std::size_t end = line.find('"', i + 1);
      if (end == std::string::npos) throw parse_error("unterminated quoted literal", line_no, col);
      const std::string inner = line.substr(i + 1, end - i - 1);
      for (char q : inner) {
        if (std::isspace(static_cast<unsigned char>(q)) != 0) {
          throw parse_error("a quoted literal is a single token and cannot contain whitespace",
                            line_no, col);
        }
      }
      out.push_back({Lexeme::Kind::quoted, lower(inner), 0, 0, col});
      i = end + 1;
      continue;
    }
    if (c == '@') {
      std::size_t end = i + 1;
      while (end < line.size() && is_ident_char(line[end])) ++end;
      if (end == i + 1) throw parse_error("'@' must be followed by a list name", line_no, col);
      out.push_back({Lexeme::Kind::list_ref, line.substr(i + 1, end - i - 1), 0, 0, col});
      i = end;
      continue;
    }
    if (c == '_' && i + 1 < line.size() && line[i + 1] == '{') {
      std::size_t j = i + 2;
      auto read_int = [&](int& value) {
        std::size_t start = j;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j])) != 0) ++j;
        if (j == start) throw parse_error("malformed skip, expected _{m,n}", line_no, col);
        value = std::stoi(line.substr(start, j - start));
      };
      Lexeme skip{Lexeme::Kind::skip, "", 0, 0, col};
      read_int(skip.skip_min);
      if (j >= line.size() || line[j] != ',')
        throw parse_error("malformed skip, expected _{m,n}", line_no, col);
      ++j;
      read_int(skip.skip_max);
      if (j >= line.size() || line[j] != '}')
        throw parse_error("malformed skip, expected _{m,n}", line_no, col);
      out.push_back(skip);
      i = j + 1;
      continue;
    }
    if (is_bare_char(c)) {
      std::size_t end = i;
      while (end < line.size() && is_bare_char(line[end])) ++end;
      // case preserved: identifiers keep it, literal/list positions lowercase
      out.push_back({Lexeme::Kind::word, line.substr(i, end - i), 0, 0, col});
      i = end;
      continue;
    }
    throw parse_error(std::string("unexpected character '") + c + "'", line_no, col);
  }
  return out;
}

// --------------------------------------------------------------- parser ---

class Parser {
 public:
  RuleBook parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::vector<Lexeme> lex = lex_line(line, line_no);
      if (lex.empty()) continue;
      if (lex[0].kind != Lexeme::Kind::word) {
        throw parse_error("expected 'list' or 'rule'", line_no, lex[0].column);
      }
      if (lex[0].text == "list") {
        parse_list(lex, line_no);
      } else if (lex[0].text == "rule") {
        parse_rule(lex, line_no);
      } else {
        throw parse_error("expected 'list' or 'rule', got '" + lex[0].text + "'", line_no,
                          lex[0].column);
      }
    }
    resolve(line_no);
    book_.rebuild_index();
    return std::move(book_);
  }

 private:
  void parse_list(const std::vector<Lexeme>& lex, std::size_t line_no) {
    if (lex.size() < 2 || lex[1].kind != Lexeme::Kind::word) {
      throw parse_error("expected list name", line_no);
    }
    WordList list;
    list.name = lex[1].text;
    if (book_.find_list(list.name) != nullptr || pending_list_names_.count(list.name) > 0) {
      throw parse_error("duplicate list name '" + list.name + "'", line_no, lex[1].column);
    }
    if (lex.size() < 3 || lex[2].kind != Lexeme::Kind::equals) {
      throw parse_error("expected '=' after list name", line_no);
    }
    std::set<std::string> words;
    bool expect_word = true;
    for (std::size_t i = 3; i < lex.size(); ++i) {
      if (expect_word) {
        if (lex[i].kind != Lexeme::Kind::word && lex[i].kind != Lexeme::Kind::quoted) {
          throw parse_error("expected a word", line_no, lex[i].column);
        }
        if (lex[i].text.empty()) throw parse_error("empty word", line_no, lex[i].column);
        words.insert(lower(lex[i].text));
        expect_word = false;
      } else {
        if (lex[i].kind != Lexeme::Kind::comma) {
          throw parse_error("expected ',' between words", line_no, lex[i].column);
        }
        expect_word = true;
      }
    }
    if (expect_word || words.empty()) {
      throw parse_error("list '" + list.name + "' needs at least one word", line_no);
    }
    list.words.assign(words.begin(), words.end());
    pending_list_names_.insert(list.name);
    book_.lists.push_back(std::move(list));
  }

  void parse_rule(const std::vector<Lexeme>& lex, std::size_t line_no) {
    std::size_t i = 1;
    auto need = [&](const char* what) {
      if (i >= lex.size()) throw parse_error(std::string("expected ") + what, line_no);
    };
    need("rule name");
    if (lex[i].kind != Lexeme::Kind::word) {
      throw parse_error("expected rule name", line_no, lex[i].column);
    }
    Rule rule;
    rule.name = lex[i].text;
    for (const Rule& existing : book_.rules) {
      if (existing.name == rule.name) {
        throw parse_error("duplicate rule name '" + rule.name + "'", line_no, lex[i].column);
      }
    }
    ++i;
    need("'cat'");
    if (lex[i].kind != Lexeme::Kind::word || lex[i].text != "cat") {
      throw parse_error("expected 'cat'", line_no, lex[i].column);
    }
    ++i;
    need("category letter");
    const std::string cat_text = lex[i].text;
    const auto cat = cat_text.size() == 1
                         ? category_from_letter(static_cast<char>(
                               std::toupper(static_cast<unsigned char>(cat_text[0]))))
                         : std::nullopt;
    if (!cat.has_value()) {
      throw parse_error("category must be one of A, I, P, W, S", line_no, lex[i].column);
    }
    rule.category = *cat;
    ++i;
    need("':'");
    if (lex[i].kind != Lexeme::Kind::colon) {
      throw parse_error("expected ':' after category", line_no, lex[i].column);
    }
    ++i;
    // Elements until end of line or the 'unless' keyword.
    while (i < lex.size() && !(lex[i].kind == Lexeme::Kind::word && lex[i].text == "unless")) {
      const Lexeme& l = lex[i];
      switch (l.kind) {
        case Lexeme::Kind::word:
        case Lexeme::Kind::quoted:
          if (l.text.empty()) throw parse_error("empty literal", line_no, l.column);
          rule.elements.push_back(LiteralElement{lower(l.text)});
          break;
        case Lexeme::Kind::list_ref:
          rule.elements.push_back(ListRefElement{l.text});
          break;
        case Lexeme::Kind::skip:
          if (l.skip_min < 0 || l.skip_min > l.skip_max || l.skip_max > kMaxSkip) {
            throw parse_error("skip bounds must satisfy 0 <= m <= n <= " +
                                  std::to_string(kMaxSkip),
                              line_no, l.column);
          }
          rule.elements.push_back(SkipElement{l.skip_min, l.skip_max});
          break;
        default:
          throw parse_error("unexpected '" + l.text + "' in rule body", line_no, l.column);
      }
      ++i;
    }
    if (rule.elements.empty()) {
      throw parse_error("rule '" + rule.name + "' has no elements", line_no);
    }
    if (std::holds_alternative<SkipElement>(rule.elements.front()) ||
        std::holds_alternative<SkipElement>(rule.elements.back())) {
      throw parse_error("rule '" + rule.name + "' may not start or end with a skip", line_no);
    }
    // Guard clauses: unless @LIST within K before|after
    while (i < lex.size()) {
      if (!(lex[i].kind == Lexeme::Kind::word && lex[i].text == "unless")) {
        throw parse_error("expected 'unless'", line_no, lex[i].column);
      }
      ++i;
      need("'@LIST' in guard");
      if (lex[i].kind != Lexeme::Kind::list_ref) {
        throw parse_error("expected '@LIST' in guard", line_no, lex[i].column);
      }
      Guard guard;
      guard.list = lex[i].text;
      ++i;
      need("'within'");
      if (lex[i].kind != Lexeme::Kind::word || lex[i].text != "within") {
        throw parse_error("expected 'within'", line_no, lex[i].column);
      }
      ++i;
      need("guard window");
      if (lex[i].kind != Lexeme::Kind::word ||
          lex[i].text.find_first_not_of("0123456789") != std::string::npos) {
        throw parse_error("expected a window size", line_no, lex[i].column);
      }
      guard.window = std::stoi(lex[i].text);
      if (guard.window < 1) throw parse_error("guard window must be >= 1", line_no, lex[i].column);
      ++i;
      need("'before' or 'after'");
      if (lex[i].kind == Lexeme::Kind::word && lex[i].text == "before") {
        guard.direction = GuardDirection::before;
      } else if (lex[i].kind == Lexeme::Kind::word && lex[i].text == "after") {
        guard.direction = GuardDirection::after;
      } else {
        throw parse_error("expected 'before' or 'after'", line_no, lex[i].column);
      }
      ++i;
      rule.guards.push_back(std::move(guard));
    }
    rule_lines_[rule.name] = line_no;
    book_.rules.push_back(std::move(rule));
  }

  // Forward references are fine; resolution happens once the file is read.
  void resolve(std::size_t last_line) {
    book_.rebuild_index();
    for (const Rule& rule : book_.rules) {
      const std::size_t line = rule_lines_.count(rule.name) ? rule_lines_[rule.name] : last_line;
      for (const RuleElement& el : rule.elements) {
        if (const auto* ref = std::get_if<ListRefElement>(&el)) {
          if (book_.find_list(ref->name) == nullptr) {
            throw parse_error(
                "rule '" + rule.name + "' references undeclared list '@" + ref->name + "'", line);
          }
        }
      }
      for (const Guard& g : rule.guards) {
        if (book_.find_list(g.list) == nullptr) {
          throw parse_error(
              "rule '" + rule.name + "' guard references undeclared list '@" + g.list + "'", line);
        }
      }
    }
  }

  RuleBook book_;
  std::set<std::string> pending_list_names_;
  std::unordered_map<std::string, std::size_t> rule_lines_;
};

// -------------------------------------------------------------- matcher ---

// Memo shared across start positions of one match_rule call. Cells are
// stamped with the current start id so nothing needs clearing between starts.
struct MatchScratch {
  std::vector<std::uint32_t> stamp;  // (elements+1) x (tokens+1)
  std::uint32_t current = 0;
  std::size_t width = 0;

  void reset(std::size_t elems, std::size_t positions) {
    width = positions;
    stamp.assign(elems * positions, 0);
    current = 0;
  }
  bool seen(std::size_t elem, std::size_t pos) {
    std::uint32_t& cell = stamp[elem * width + pos];
    if (cell == current) return true;
    cell = current;
    return false;
  }
};

// Collects every end position (exclusive) reachable by matching
// elements[elem..] starting at token position pos.
void collect_ends(const Rule& rule, const RuleBook& book, std::span<const std::string> tokens,
                  std::size_t elem, std::size_t pos, MatchScratch& scratch,
                  std::vector<std::size_t>& ends) {
  if (scratch.seen(elem, pos)) return;
  if (elem == rule.elements.size()) {
    ends.push_back(pos);
    return;
  }
  const RuleElement& el = rule.elements[elem];
  if (const auto* lit = std::get_if<LiteralElement>(&el)) {
    if (pos < tokens.size() && tokens[pos] == lit->token) {
      collect_ends(rule, book, tokens, elem + 1, pos + 1, scratch, ends);
    }
    return;
  }
  if (const auto* ref = std::get_if<ListRefElement>(&el)) {
    const WordList* list = book.find_list(ref->name);
    if (list == nullptr) throw validation_error("unresolved list '@" + ref->name + "'");
    if (pos < tokens.size() && list->contains(tokens[pos])) {
      collect_ends(rule, book, tokens, elem + 1, pos + 1, scratch, ends);
    }
    return;
  }
  const auto& skip = std::get<SkipElement>(el);
  for (int width = skip.min; width <= skip.max; ++width) {
    const std::size_t next = pos + static_cast<std::size_t>(width);
    if (next > tokens.size()) break;
    collect_ends(rule, book, tokens, elem + 1, next, scratch, ends);
  }
}

bool guards_allow(const Rule& rule, const RuleBook& book, std::span<const std::string> tokens,
                  std::size_t span_start, std::size_t span_end) {
  for (const Guard& g : rule.guards) {
    const WordList* list = book.find_list(g.list);
    if (list == nullptr) throw validation_error("unresolved guard list '@" + g.list + "'");
    const std::size_t window = static_cast<std::size_t>(g.window);
    if (g.direction == GuardDirection::before) {
      const std::size_t from = span_start > window ? span_start - window : 0;
      for (std::size_t i = from; i < span_start; ++i) {
        if (list->contains(tokens[i])) return false;
      }
    } else {
      const std::size_t to = std::min(tokens.size(), span_end + window);
      for (std::size_t i = span_end; i < to; ++i) {
        if (list->contains(tokens[i])) return false;
      }
    }
  }
  return true;
}

}  // namespace

bool WordList::contains(std::string_view token) const {
  return std::binary_search(words.begin(), words.end(), token);
}

const WordList* RuleBook::find_list(std::string_view name) const {
  const auto it = list_index_.find(std::string(name));
  if (it != list_index_.end()) return &lists[it->second];
  // Index may be stale on hand-assembled books.
  for (const WordList& l : lists) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

const Rule* RuleBook::find_rule(std::string_view name) const {
  for (const Rule& r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

RuleBook RuleBook::rules_for(Category c) const {
  RuleBook out;
  out.lists = lists;
  for (const Rule& r : rules) {
    if (r.category == c) out.rules.push_back(r);
  }
  out.rebuild_index();
  return out;
}

void RuleBook::rebuild_index() {
  list_index_.clear();
  for (std::size_t i = 0; i < lists.size(); ++i) {
    std::sort(lists[i].words.begin(), lists[i].words.end());
    lists[i].words.erase(std::unique(lists[i].words.begin(), lists[i].words.end()),
                         lists[i].words.end());
    list_index_[lists[i].name] = i;
  }
}

RuleBook parse_rulebook(std::string_view text) { return Parser{}.parse(text); }

RuleBook load_rulebook(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rulebook(buf.str());
}

std::string serialize_rulebook(const RuleBook& book) {
  auto needs_quoting = [](const std::string& token) {
    for (char c : token) {
      if (!is_bare_char(c) || std::isupper(static_cast<unsigned char>(c)) != 0) return true;
    }
    return token.empty() || token == "unless" || token == "within" || token == "before" ||
           token == "after" || (token[0] == '_');
  };
  auto emit_token = [&](std::ostream& out, const std::string& token) {
    if (needs_quoting(token)) {
      out << '"' << token << '"';
    } else {
      out << token;
    }
  };
  std::ostringstream out;
  for (const WordList& list : book.lists) {
    out << "list " << list.name << " = ";
    for (std::size_t i = 0; i < list.words.size(); ++i) {
      if (i > 0) out << ", ";
      emit_token(out, list.words[i]);
    }
    out << '\n';
  }
  for (const Rule& rule : book.rules) {
    out << "rule " << rule.name << " cat " << category_letter(rule.category) << ":";
    for (const RuleElement& el : rule.elements) {
      out << ' ';
      if (const auto* lit = std::get_if<LiteralElement>(&el)) {
        emit_token(out, lit->token);
      } else if (const auto* ref = std::get_if<ListRefElement>(&el)) {
        out << '@' << ref->name;
      } else {
        const auto& skip = std::get<SkipElement>(el);
        out << "_{" << skip.min << ',' << skip.max << '}';
      }
    }
    for (const Guard& g : rule.guards) {
      out << " unless @" << g.list << " within " << g.window << ' '
          << (g.direction == GuardDirection::before ? "before" : "after");
    }
    out << '\n';
  }
  return out.str();
}

bool match_rule(const Rule& rule, std::span<const std::string> tokens, const RuleBook& book) {
  if (rule.elements.empty()) return false;
  MatchScratch scratch;
  scratch.reset(rule.elements.size() + 1, tokens.size() + 1);
  std::vector<std::size_t> ends;
  for (std::size_t start = 0; start < tokens.size(); ++start) {
    ++scratch.current;
    ends.clear();
    collect_ends(rule, book, tokens, 0, start, scratch, ends);
    for (std::size_t end : ends) {
      if (guards_allow(rule, book, tokens, start, end)) return true;
    }
  }
  return false;
}

std::vector<std::uint8_t> rule_features(const RuleBook& book, std::span<const std::string> tokens) {
  std::vector<std::uint8_t> out;
  out.reserve(book.rules.size());
  for (const Rule& rule : book.rules) {
    out.push_back(match_rule(rule, tokens, book) ? 1 : 0);
  }
  return out;
}

bool rulebooks_equal(const RuleBook& a, const RuleBook& b) {
  if (a.lists.size() != b.lists.size() || a.rules.size() != b.rules.size()) return false;
  for (std::size_t i = 0; i < a.lists.size(); ++i) {
    if (a.lists[i].name != b.lists[i].name || a.lists[i].words != b.lists[i].words) return false;
  }
  for (std::size_t i = 0; i < a.rules.size(); ++i) {
    const Rule& x = a.rules[i];
    const Rule& y = b.rules[i];
    if (x.name != y.name || x.category != y.category || x.elements != y.elements ||
        x.guards != y.guards) {
      return false;
    }
  }
  return true;
}

}  // namespace flusig
