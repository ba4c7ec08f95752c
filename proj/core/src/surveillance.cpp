#include "flusig/surveillance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "flusig/error.hpp"

namespace flusig {
namespace {

using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::year_month_day;

// Sunday of the week containing the first Wednesday of January: the start
// of week 1 for that year.
sys_days week1_sunday(int year) {
  const sys_days jan1{year_month_day{std::chrono::year{year}, std::chrono::month{1},
                                     std::chrono::day{1}}};
  const unsigned wd = std::chrono::weekday{jan1}.c_encoding();  // 0 = Sunday
  const unsigned to_wednesday = (3 + 7 - wd) % 7;
  return jan1 + days{to_wednesday} - days{3};
}

// ----------------------------------------------------------- statistics ---

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = static_cast<double>(i + j) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

// Continued-fraction evaluation of the regularized incomplete beta function
// I_x(a, b) (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(trim(s.substr(start)));
      return out;
    }
    out.emplace_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

long long parse_count(const std::string& s, std::size_t line) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw parse_error("expected a non-negative count, got \"" + s + "\"", line);
  }
  return std::stoll(s);
}

}  // namespace

EpiWeek epiweek_of(year_month_day date) {
  const sys_days d{date};
  const unsigned wd = std::chrono::weekday{d}.c_encoding();
  const sys_days sunday = d - days{wd};
  const sys_days wednesday = sunday + days{3};
  const int year = static_cast<int>(year_month_day{wednesday}.year());
  const auto diff = wednesday - week1_sunday(year);
  return EpiWeek{year, static_cast<int>(diff.count() / 7) + 1};
}

EpiWeek epiweek_of(std::chrono::sys_seconds t) {
  return epiweek_of(year_month_day{std::chrono::floor<days>(t)});
}

int weeks_in_year(int year) {
  return static_cast<int>((week1_sunday(year + 1) - week1_sunday(year)).count() / 7);
}

EpiWeek next_week(EpiWeek w) {
  if (w.week < weeks_in_year(w.year)) return EpiWeek{w.year, w.week + 1};
  return EpiWeek{w.year + 1, 1};
}

std::string format_epiweek(EpiWeek w) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", w.year, w.week);
  return buf;
}

EpiWeek parse_epiweek(std::string_view text) {
  int year = 0;
  int week = 0;
  const std::string s(text);
  char extra = '\0';
  if (std::sscanf(s.c_str(), "%4d-%2d%c", &year, &week, &extra) != 2 || week < 1 ||
      week > weeks_in_year(year)) {
    throw error("invalid week \"" + s + "\" (expected YYYY-WW)");
  }
  return EpiWeek{year, week};
}

WeeklySeries aggregate_weekly(std::span<const AnnotatedMessage> msgs) {
  WeeklySeries series;
  if (msgs.empty()) return series;
  std::map<EpiWeek, std::array<long long, kNumCategories>> buckets;
  for (const AnnotatedMessage& m : msgs) {
    const EpiWeek wk = epiweek_of(m.message.timestamp);
    auto& row = buckets.try_emplace(wk).first->second;
    for (Category c : kAllCategories) {
      if (m.labels.positive(c)) ++row[static_cast<std::size_t>(c)];
    }
  }
  const EpiWeek first = buckets.begin()->first;
  const EpiWeek last = buckets.rbegin()->first;
  for (EpiWeek wk = first;; wk = next_week(wk)) {
    series.weeks.push_back(wk);
    const auto it = buckets.find(wk);
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      series.counts[c].push_back(it != buckets.end() ? it->second[c] : 0);
    }
    if (wk == last) break;
  }
  return series;
}

std::vector<long long> combine(const WeeklySeries& series, std::span<const Category> cats) {
  if (cats.empty()) throw validation_error("empty category set");
  std::vector<long long> out(series.weeks.size(), 0);
  for (Category c : cats) {
    const auto& row = series.counts[static_cast<std::size_t>(c)];
    if (row.size() != series.weeks.size()) {
      throw validation_error("series counts not aligned with weeks");
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += row[i];
  }
  return out;
}

std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw validation_error("spearman inputs differ in length");
  if (x.size() < 3) throw validation_error("spearman needs at least 3 pairs");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double spearman_pvalue(double rho, int n) {
  if (n < 4) throw validation_error("p-value needs n >= 4");
  if (std::abs(rho) > 1.0) throw validation_error("|rho| must be <= 1");
  if (std::abs(rho) == 1.0) return std::numeric_limits<double>::min();
  const double df = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  // Two-tailed: P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

std::vector<CorrelationResult> correlate(const WeeklySeries& series,
                                         std::span<const std::vector<Category>> sets) {
  if (!series.has_baseline()) throw validation_error("no baseline attached to the series");
  std::vector<CorrelationResult> out;
  for (const std::vector<Category>& cats : sets) {
    const std::vector<long long> combined = combine(series, cats);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < series.weeks.size(); ++i) {
      if (series.baseline[i].has_value()) {
        x.push_back(static_cast<double>(combined[i]));
        y.push_back(static_cast<double>(*series.baseline[i]));
      }
    }
    if (x.size() < 3) {
      throw validation_error("only " + std::to_string(x.size()) +
                             " weeks overlap the baseline; need at least 3");
    }
    CorrelationResult r;
    r.label = category_set_label(cats);
    r.n = static_cast<int>(x.size());
    r.rho = spearman_rho(x, y);
    if (r.rho.has_value() && r.n >= 4) r.p_value = spearman_pvalue(*r.rho, r.n);
    out.push_back(std::move(r));
  }
  return out;
}

WeeklySeries load_counts_csv(std::istream& in) {
  WeeklySeries series;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::vector<std::string> fields = split(t, ',');
    if (!header_seen) {
      if (fields != std::vector<std::string>{"week", "A", "I", "P", "W", "S"}) {
        throw parse_error("expected header week,A,I,P,W,S", line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 1 + kNumCategories) {
      throw parse_error("expected 6 comma-separated fields", line_no);
    }
    EpiWeek wk;
    try {
      wk = parse_epiweek(fields[0]);
    } catch (const error& e) {
      throw parse_error(e.what(), line_no);
    }
    if (!series.weeks.empty() && !(series.weeks.back() < wk)) {
      throw parse_error("weeks must be strictly increasing", line_no);
    }
    series.weeks.push_back(wk);
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      series.counts[c].push_back(parse_count(fields[1 + c], line_no));
    }
  }
  if (!header_seen) throw validation_error("counts csv is empty");
  return series;
}

void save_counts_csv(std::ostream& out, const WeeklySeries& series, std::string_view comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "week,A,I,P,W,S\n";
  for (std::size_t i = 0; i < series.weeks.size(); ++i) {
    out << format_epiweek(series.weeks[i]);
    for (std::size_t c = 0; c < kNumCategories; ++c) out << ',' << series.counts[c][i];
    out << '\n';
  }
}

void attach_baseline_csv(WeeklySeries& series, std::istream& in) {
  std::map<EpiWeek, long long> baseline;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::vector<std::string> fields = split(t, ',');
    if (!header_seen) {
      if (fields != std::vector<std::string>{"week", "count"}) {
        throw parse_error("expected header week,count", line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) throw parse_error("expected 2 comma-separated fields", line_no);
    EpiWeek wk;
    try {
      wk = parse_epiweek(fields[0]);
    } catch (const error& e) {
      throw parse_error(e.what(), line_no);
    }
    if (!baseline.emplace(wk, parse_count(fields[1], line_no)).second) {
      throw parse_error("duplicate week " + fields[0], line_no);
    }
  }
  if (!header_seen) throw validation_error("baseline csv is empty");
  series.baseline.assign(series.weeks.size(), std::nullopt);
  for (std::size_t i = 0; i < series.weeks.size(); ++i) {
    const auto it = baseline.find(series.weeks[i]);
    if (it != baseline.end()) series.baseline[i] = it->second;
  }
}

void save_correlation_tsv(std::ostream& out, std::span<const CorrelationResult> results,
                          std::string_view comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "label\trho\tp\tn\n";
  char buf[40];
  for (const CorrelationResult& r : results) {
    out << r.label << '\t';
    if (r.rho.has_value()) {
      std::snprintf(buf, sizeof(buf), "%.6f", *r.rho);
      out << buf;
    } else {
      out << "NA";
    }
    out << '\t';
    if (r.p_value.has_value()) {
      std::snprintf(buf, sizeof(buf), "%.6g", *r.p_value);
      out << buf;
    } else {
      out << "NA";
    }
    out << '\t' << r.n << '\n';
  }
}

std::vector<std::vector<Category>> parse_category_sets(std::string_view text) {
  std::vector<std::vector<Category>> sets;
  for (const std::string& part : split(text, ',')) {
    if (part.empty()) throw validation_error("empty category set in \"" + std::string(text) + "\"");
    std::vector<Category> cats;
    for (const std::string& letter : split(part, '+')) {
      if (letter.size() != 1) throw validation_error("bad category \"" + letter + "\"");
      const auto c = category_from_letter(letter[0]);
      if (!c.has_value()) throw validation_error("bad category \"" + letter + "\"");
      if (std::find(cats.begin(), cats.end(), *c) != cats.end()) {
        throw validation_error("category repeated in set \"" + part + "\"");
      }
      cats.push_back(*c);
    }
    sets.push_back(std::move(cats));
  }
  if (sets.empty()) throw validation_error("no category sets given");
  return sets;
}

std::vector<std::vector<Category>> default_category_sets() {
  return parse_category_sets("A,S,I,P,A+I+P,A+I+P+S");
}

std::string category_set_label(std::span<const Category> cats) {
  std::string label;
  for (Category c : cats) {
    if (!label.empty()) label += '+';
    label += category_letter(c);
  }
  return label;
}

}  // namespace flusig
