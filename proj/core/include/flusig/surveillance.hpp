#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flusig/corpus.hpp"

namespace flusig {

// Epidemiological week, Sunday through Saturday; week 1 is the first week
// with at least four days in January. Matches the numbering used by the
// laboratory surveillance baselines this module correlates against.
struct EpiWeek {
  int year = 0;
  int week = 0;
  auto operator<=>(const EpiWeek&) const = default;
};

EpiWeek epiweek_of(std::chrono::year_month_day date);
EpiWeek epiweek_of(std::chrono::sys_seconds t);
int weeks_in_year(int year);  // 52 or 53
EpiWeek next_week(EpiWeek w);

std::string format_epiweek(EpiWeek w);          // "2009-46"
EpiWeek parse_epiweek(std::string_view text);

// Per-week positive counts per category over a contiguous week range, plus
// an optional laboratory baseline aligned week-for-week.
struct WeeklySeries {
  std::vector<EpiWeek> weeks;  // strictly increasing
  std::array<std::vector<long long>, kNumCategories> counts;
  std::vector<std::optional<long long>> baseline;  // empty until attached

  bool has_baseline() const { return !baseline.empty(); }
};

// Buckets each message's positive categories into the week containing its
// timestamp. Weeks between the first and last message appear with zero
// counts.
WeeklySeries aggregate_weekly(std::span<const AnnotatedMessage> msgs);

// Element-wise sum of the named category rows.
std::vector<long long> combine(const WeeklySeries& series, std::span<const Category> cats);

// Average ranks for ties, then the Pearson correlation of the rank
// sequences. Returns nullopt when either input has zero rank variance.
std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y);

// Two-tailed p via t = rho * sqrt((n-2) / (1-rho^2)) against Student's t
// with n-2 degrees of freedom (regularized incomplete beta). |rho| = 1
// returns the smallest positive double rather than raising.
double spearman_pvalue(double rho, int n);

struct CorrelationResult {
  std::string label;              // e.g. "A+I+P"
  std::optional<double> rho;      // unset when a series is constant
  std::optional<double> p_value;  // unset when rho unset or n < 4
  int n = 0;                      // paired weeks used
};

// One result per category set, pairing combined counts with the baseline;
// weeks without baseline are dropped pairwise. Needs >= 3 paired weeks.
std::vector<CorrelationResult> correlate(const WeeklySeries& series,
                                         std::span<const std::vector<Category>> sets);

// CSV/TSV surfaces. Lines starting with '#' are skipped on load.
WeeklySeries load_counts_csv(std::istream& in);             // header: week,A,I,P,W,S
void save_counts_csv(std::ostream& out, const WeeklySeries& series,
                     std::string_view comment = {});
void attach_baseline_csv(WeeklySeries& series, std::istream& in);  // header: week,count
void save_correlation_tsv(std::ostream& out, std::span<const CorrelationResult> results,
                          std::string_view comment = {});

// "A,S,I,P,A+I+P,A+I+P+S" -> six category sets.
std::vector<std::vector<Category>> parse_category_sets(std::string_view text);
std::vector<std::vector<Category>> default_category_sets();
std::string category_set_label(std::span<const Category> cats);

}  // namespace flusig
