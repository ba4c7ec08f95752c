#include "flusig/corpus.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "flusig/error.hpp"
#include "flusig/tokenize.hpp"
#include "json.hpp"

namespace flusig {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])) != 0) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])) != 0) --e;
  return s.substr(b, e - b);
}

Polarity parse_polarity_mark(std::string_view mark, std::size_t line) {
  if (mark == "+") return Polarity::positive;
  if (mark == "-") return Polarity::negative;
  throw parse_error("label must be \"+\" or \"-\", got \"" + std::string(mark) + "\"", line);
}

void validate_message(const Message& m, std::size_t line) {
  if (m.id.empty()) throw parse_error("empty id", line);
  if (trim(m.text).empty()) throw parse_error("text is empty", line);
}

AnnotatedMessage parse_jsonl_line(const std::string& text, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw parse_error(std::string("invalid JSON: ") + e.what(), line);
  }
  if (!j.is_object()) throw parse_error("record is not a JSON object", line);
  AnnotatedMessage out;
  if (!j.contains("id") || !j["id"].is_string()) throw parse_error("missing string field \"id\"", line);
  if (!j.contains("ts") || !j["ts"].is_string()) throw parse_error("missing string field \"ts\"", line);
  if (!j.contains("text") || !j["text"].is_string())
    throw parse_error("missing string field \"text\"", line);
  out.message.id = j["id"].get<std::string>();
  try {
    out.message.timestamp = parse_timestamp(j["ts"].get<std::string>());
  } catch (const error& e) {
    throw parse_error(e.what(), line);
  }
  out.message.text = j["text"].get<std::string>();
  if (j.contains("labels")) {
    const json& labels = j["labels"];
    if (!labels.is_object()) throw parse_error("\"labels\" must be an object", line);
    for (const auto& [key, value] : labels.items()) {
      if (key.size() != 1) throw parse_error("unknown category \"" + key + "\"", line);
      const auto cat = category_from_letter(key[0]);
      if (!cat) throw parse_error("unknown category \"" + key + "\"", line);
      if (!value.is_string()) throw parse_error("label for " + key + " must be a string", line);
      out.labels.set(*cat, parse_polarity_mark(value.get<std::string>(), line));
    }
  }
  validate_message(out.message, line);
  return out;
}

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

AnnotatedMessage parse_tsv_line(const std::string& text, std::size_t line) {
  const std::vector<std::string> fields = split_tabs(text);
  if (fields.size() != 3 && fields.size() != 3 + kNumCategories) {
    throw parse_error("expected 3 or 8 tab-separated fields, got " + std::to_string(fields.size()),
                      line);
  }
  AnnotatedMessage out;
  out.message.id = fields[0];
  try {
    out.message.timestamp = parse_timestamp(fields[1]);
  } catch (const error& e) {
    throw parse_error(e.what(), line);
  }
  out.message.text = fields[2];
  if (fields.size() == 3 + kNumCategories) {
    for (std::size_t i = 0; i < kNumCategories; ++i) {
      const std::string& mark = fields[3 + i];
      if (mark.empty()) continue;
      out.labels.set(kAllCategories[i], parse_polarity_mark(mark, line));
    }
  }
  validate_message(out.message, line);
  return out;
}

}  // namespace

char category_letter(Category c) {
  static constexpr char letters[kNumCategories] = {'A', 'I', 'P', 'W', 'S'};
  return letters[static_cast<std::size_t>(c)];
}

std::optional<Category> category_from_letter(char letter) {
  switch (letter) {
    case 'A': return Category::A;
    case 'I': return Category::I;
    case 'P': return Category::P;
    case 'W': return Category::W;
    case 'S': return Category::S;
    default: return std::nullopt;
  }
}

std::optional<CorpusFormat> corpus_format_from(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "tsv") return CorpusFormat::tsv;
  return std::nullopt;
}

std::string_view corpus_format_name(CorpusFormat f) {
  return f == CorpusFormat::jsonl ? "jsonl" : "tsv";
}

void for_each_record(
    std::istream& in, CorpusFormat format,
    const std::function<void(AnnotatedMessage&&, const std::string&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    AnnotatedMessage rec = format == CorpusFormat::jsonl ? parse_jsonl_line(line, line_no)
                                                         : parse_tsv_line(line, line_no);
    if (!seen_ids.insert(rec.message.id).second) {
      throw parse_error("duplicate id \"" + rec.message.id + "\"", line_no);
    }
    fn(std::move(rec), line, line_no);
  }
}

std::vector<AnnotatedMessage> parse_corpus(std::istream& in, CorpusFormat format) {
  std::vector<AnnotatedMessage> out;
  for_each_record(in, format,
                  [&out](AnnotatedMessage&& rec, const std::string&, std::size_t) {
                    out.push_back(std::move(rec));
                  });
  return out;
}

void write_record(std::ostream& out, const AnnotatedMessage& msg, CorpusFormat format) {
  if (format == CorpusFormat::jsonl) {
    json j;
    j["id"] = msg.message.id;
    j["ts"] = format_timestamp(msg.message.timestamp);
    j["text"] = msg.message.text;
    if (!msg.labels.empty()) {
      json labels = json::object();
      for (Category c : kAllCategories) {
        const auto p = msg.labels.get(c);
        if (p.has_value()) {
          labels[std::string(1, category_letter(c))] = *p == Polarity::positive ? "+" : "-";
        }
      }
      j["labels"] = labels;
    }
    out << j.dump() << '\n';
    return;
  }
  if (msg.message.id.find('\t') != std::string::npos ||
      msg.message.text.find('\t') != std::string::npos ||
      msg.message.text.find('\n') != std::string::npos) {
    throw validation_error("tsv output cannot hold tabs or newlines (id \"" + msg.message.id +
                           "\"); use jsonl");
  }
  out << msg.message.id << '\t' << format_timestamp(msg.message.timestamp) << '\t'
      << msg.message.text;
  for (Category c : kAllCategories) {
    const auto p = msg.labels.get(c);
    out << '\t' << (p.has_value() ? (*p == Polarity::positive ? "+" : "-") : "");
  }
  out << '\n';
}

void write_corpus(std::ostream& out, std::span<const AnnotatedMessage> msgs, CorpusFormat format) {
  for (const AnnotatedMessage& m : msgs) write_record(out, m, format);
}

std::size_t overlong_count(std::span<const AnnotatedMessage> msgs) {
  std::size_t n = 0;
  for (const AnnotatedMessage& m : msgs) {
    if (text_length(m.message.text) > kSoftTextLimit) ++n;
  }
  return n;
}

std::string normalized_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c) != 0) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<AnnotatedMessage> dedupe(std::vector<AnnotatedMessage> msgs) {
  std::unordered_set<std::string> seen;
  std::vector<AnnotatedMessage> out;
  out.reserve(msgs.size());
  for (AnnotatedMessage& m : msgs) {
    if (seen.insert(normalized_text(m.message.text)).second) {
      out.push_back(std::move(m));
    }
  }
  return out;
}

ClassStats class_stats(std::span<const AnnotatedMessage> msgs) {
  ClassStats stats{};
  std::array<double, kNumCategories> sum{};
  std::array<double, kNumCategories> sum_sq{};
  for (const AnnotatedMessage& m : msgs) {
    const double len = static_cast<double>(text_length(m.message.text));
    for (Category c : kAllCategories) {
      const auto p = m.labels.get(c);
      if (!p.has_value()) continue;
      const std::size_t i = static_cast<std::size_t>(c);
      if (*p == Polarity::positive) {
        ++stats[i].positives;
      } else {
        ++stats[i].negatives;
      }
      sum[i] += len;
      sum_sq[i] += len * len;
    }
  }
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    const long long n = stats[i].total();
    if (n > 0) {
      const double mean = sum[i] / static_cast<double>(n);
      stats[i].mean_length = mean;
      const double var = sum_sq[i] / static_cast<double>(n) - mean * mean;
      stats[i].sd_length = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    if (stats[i].negatives > 0) {
      stats[i].pn_ratio =
          static_cast<double>(stats[i].positives) / static_cast<double>(stats[i].negatives);
    }
  }
  return stats;
}

std::chrono::sys_seconds parse_timestamp(std::string_view text) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  const std::string s(text);
  int consumed = 0;
  bool ok = false;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &year, &month, &day, &consumed) == 3) {
    std::string_view rest = std::string_view(s).substr(static_cast<std::size_t>(consumed));
    if (rest.empty()) {
      ok = true;
    } else if (rest[0] == 'T' || rest[0] == ' ') {
      const std::string time_part(rest.substr(1));
      int time_consumed = 0;
      if (std::sscanf(time_part.c_str(), "%2d:%2d:%2d%n", &hour, &minute, &second,
                      &time_consumed) == 3) {
        std::string_view tz = std::string_view(time_part).substr(static_cast<std::size_t>(time_consumed));
        ok = tz.empty() || tz == "Z" || tz == "+00:00";
      }
    }
  }
  if (!ok) throw error("invalid timestamp \"" + s + "\" (expected ISO-8601 UTC)");
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) {
    throw error("invalid timestamp \"" + s + "\" (out-of-range field)");
  }
  return std::chrono::sys_days{ymd} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
         std::chrono::seconds{second};
}

std::string format_timestamp(std::chrono::sys_seconds t) {
  const std::chrono::sys_days days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{days};
  std::chrono::seconds rest = t - days;
  const int h = static_cast<int>(rest.count() / 3600);
  const int m = static_cast<int>(rest.count() % 3600 / 60);
  const int s = static_cast<int>(rest.count() % 60);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h, m, s);
  return buf;
}

}  // namespace flusig
