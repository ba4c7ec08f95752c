#include "flusig/surveillance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "flusig/error.hpp"
#include "flusig/rng.hpp"
#include "support/fixtures.hpp"

using namespace flusig;

namespace {

std::vector<double> to_doubles(std::span<const long long> v) {
  return {v.begin(), v.end()};
}

WeeklySeries season_series() {
  WeeklySeries s;
  for (int i = 0; i < fixtures::kSeasonWeeks; ++i) {
    s.weeks.push_back(parse_epiweek(fixtures::kSeasonWeekIds[i]));
    s.counts[static_cast<std::size_t>(Category::A)].push_back(fixtures::kSeasonA[i]);
    s.counts[static_cast<std::size_t>(Category::I)].push_back(fixtures::kSeasonI[i]);
    s.counts[static_cast<std::size_t>(Category::P)].push_back(fixtures::kSeasonP[i]);
    s.counts[static_cast<std::size_t>(Category::W)].push_back(0);
    s.counts[static_cast<std::size_t>(Category::S)].push_back(fixtures::kSeasonS[i]);
    s.baseline.push_back(fixtures::kSeasonLab[i]);
  }
  return s;
}

}  // namespace

TEST_CASE("epi weeks run Sunday through Saturday") {
  // 2009-11-15 was a Sunday and opens week 46 of 2009.
  CHECK(epiweek_of(parse_timestamp("2009-11-15")) == EpiWeek{2009, 46});
  CHECK(epiweek_of(parse_timestamp("2009-11-21T23:59:59Z")) == EpiWeek{2009, 46});
  CHECK(epiweek_of(parse_timestamp("2009-11-14")) == EpiWeek{2009, 45});
  // year boundary: Saturday 2010-01-02 still belongs to 2009's last week
  CHECK(epiweek_of(parse_timestamp("2010-01-02")) == EpiWeek{2009, 52});
  CHECK(epiweek_of(parse_timestamp("2010-01-03")) == EpiWeek{2010, 1});
  // a 53-week year: week 53 of 2008 runs through Saturday 2009-01-03
  CHECK(weeks_in_year(2008) == 53);
  CHECK(weeks_in_year(2009) == 52);
  CHECK(epiweek_of(parse_timestamp("2009-01-03")) == EpiWeek{2008, 53});
  CHECK(epiweek_of(parse_timestamp("2009-01-04")) == EpiWeek{2009, 1});
}

TEST_CASE("next_week rolls over year ends") {
  CHECK(next_week(EpiWeek{2009, 52}) == EpiWeek{2010, 1});
  CHECK(next_week(EpiWeek{2008, 53}) == EpiWeek{2009, 1});
  CHECK(next_week(EpiWeek{2009, 46}) == EpiWeek{2009, 47});
}

TEST_CASE("epi week formatting round-trips") {
  CHECK(format_epiweek(EpiWeek{2009, 7}) == "2009-07");
  CHECK(parse_epiweek("2009-46") == EpiWeek{2009, 46});
  CHECK_THROWS_AS(parse_epiweek("2009-54"), error);
  CHECK_THROWS_AS(parse_epiweek("w46"), error);
}

TEST_CASE("aggregate_weekly buckets positive categories by week") {
  std::vector<AnnotatedMessage> msgs(3);
  msgs[0].message = {"a", parse_timestamp("2009-11-16"), "x", {}};
  msgs[0].labels.set(Category::P, Polarity::positive);
  msgs[1].message = {"b", parse_timestamp("2009-11-17"), "x", {}};
  msgs[1].labels.set(Category::P, Polarity::positive);
  // multi-category positive increments both rows
  msgs[2].message = {"c", parse_timestamp("2009-11-30"), "x", {}};
  msgs[2].labels.set(Category::A, Polarity::positive);
  msgs[2].labels.set(Category::S, Polarity::positive);
  msgs[2].labels.set(Category::P, Polarity::negative);

  const WeeklySeries s = aggregate_weekly(msgs);
  REQUIRE(s.weeks.size() == 3);  // 46, 47 (empty), 48
  CHECK(s.weeks[0] == EpiWeek{2009, 46});
  CHECK(s.weeks[1] == EpiWeek{2009, 47});
  CHECK(s.weeks[2] == EpiWeek{2009, 48});
  CHECK(s.counts[static_cast<std::size_t>(Category::P)] ==
        std::vector<long long>{2, 0, 0});
  CHECK(s.counts[static_cast<std::size_t>(Category::A)] ==
        std::vector<long long>{0, 0, 1});
  CHECK(s.counts[static_cast<std::size_t>(Category::S)] ==
        std::vector<long long>{0, 0, 1});
  CHECK(aggregate_weekly({}).weeks.empty());
}

TEST_CASE("aggregate_weekly fills gaps across a year boundary") {
  std::vector<AnnotatedMessage> msgs(2);
  msgs[0].message = {"a", parse_timestamp("2009-12-28"), "x", {}};  // week 2009-52
  msgs[0].labels.set(Category::S, Polarity::positive);
  msgs[1].message = {"b", parse_timestamp("2010-01-12"), "x", {}};  // week 2010-02
  msgs[1].labels.set(Category::S, Polarity::positive);
  const WeeklySeries s = aggregate_weekly(msgs);
  REQUIRE(s.weeks.size() == 3);
  CHECK(s.weeks[0] == EpiWeek{2009, 52});
  CHECK(s.weeks[1] == EpiWeek{2010, 1});
  CHECK(s.weeks[2] == EpiWeek{2010, 2});
  CHECK(s.counts[static_cast<std::size_t>(Category::S)] == std::vector<long long>{1, 0, 1});
}

TEST_CASE("combine sums category rows element-wise") {
  const WeeklySeries s = season_series();
  const Category aip[] = {Category::A, Category::I, Category::P};
  const std::vector<long long> sum = combine(s, aip);
  CHECK(sum[0] == 49 + 22 + 222);  // week 46: 293
  CHECK(sum[6] == 19 + 4 + 37);    // week 52: 60
  // single-category set is the identity
  const Category only_a[] = {Category::A};
  CHECK(combine(s, only_a) ==
        std::vector<long long>(fixtures::kSeasonA.begin(), fixtures::kSeasonA.end()));
  const Category unknown_free[] = {Category::W};
  CHECK(combine(s, unknown_free) == std::vector<long long>(fixtures::kSeasonWeeks, 0));
}

TEST_CASE("spearman_rho matches the frozen season values") {
  const std::vector<double> lab = to_doubles(fixtures::kSeasonLab);
  // Exact rank-based values, verified independently: A = 93/sqrt(140*143),
  // I, P as below, A+I+P = 97/143.
  const auto a = spearman_rho(to_doubles(fixtures::kSeasonA), lab);
  REQUIRE(a.has_value());
  CHECK(*a == doctest::Approx(0.657280748).epsilon(1e-8));
  CHECK(*a == doctest::Approx(93.0 / std::sqrt(140.0 * 143.0)).epsilon(1e-12));

  const auto i = spearman_rho(to_doubles(fixtures::kSeasonI), lab);
  CHECK(*i == doctest::Approx(0.579972912).epsilon(1e-8));
  const auto p = spearman_rho(to_doubles(fixtures::kSeasonP), lab);
  CHECK(*p == doctest::Approx(0.671328671).epsilon(1e-8));
  CHECK(*p == doctest::Approx(96.0 / 143.0).epsilon(1e-12));
  const auto s = spearman_rho(to_doubles(fixtures::kSeasonS), lab);
  CHECK(*s == doctest::Approx(0.654992248).epsilon(1e-8));

  std::vector<double> aip(fixtures::kSeasonWeeks);
  for (int w = 0; w < fixtures::kSeasonWeeks; ++w) {
    aip[w] = static_cast<double>(fixtures::kSeasonA[w] + fixtures::kSeasonI[w] +
                                 fixtures::kSeasonP[w]);
  }
  const auto rho_aip = spearman_rho(aip, lab);
  CHECK(*rho_aip == doctest::Approx(97.0 / 143.0).epsilon(1e-12));
}

TEST_CASE("spearman_rho basics") {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> inc{10, 20, 30};
  const std::vector<double> dec{30, 20, 10};
  CHECK(*spearman_rho(x, inc) == doctest::Approx(1.0));
  CHECK(*spearman_rho(x, dec) == doctest::Approx(-1.0));
  const std::vector<double> flat{5, 5, 5};
  CHECK_FALSE(spearman_rho(x, flat).has_value());
  CHECK_THROWS_AS(spearman_rho(x, std::vector<double>{1, 2}), validation_error);
  CHECK_THROWS_AS(spearman_rho(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                  validation_error);
}

TEST_CASE("spearman_rho rank properties") {
  Rng rng(43);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 3 + rng.below(12);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(static_cast<double>(rng.below(8)));
      y.push_back(static_cast<double>(rng.below(8)));
    }
    const auto rho = spearman_rho(x, y);
    if (!rho.has_value()) continue;
    CHECK(std::abs(*rho) <= 1.0 + 1e-12);
    // symmetry
    CHECK(*spearman_rho(y, x) == doctest::Approx(*rho).epsilon(1e-12));
    // invariance under a strictly increasing transform
    std::vector<double> tx = x;
    for (double& v : tx) v = 3.0 * v * v * v + 7.0 * v + 2.0;  // monotone for v >= 0
    CHECK(*spearman_rho(tx, y) == doctest::Approx(*rho).epsilon(1e-12));
    // negating one input negates rho
    std::vector<double> neg = y;
    for (double& v : neg) v = -v;
    CHECK(*spearman_rho(x, neg) == doctest::Approx(-*rho).epsilon(1e-12));
  }
}

TEST_CASE("with no ties the d-squared formula agrees") {
  Rng rng(47);
  int used = 0;
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 4 + rng.below(10);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(rng.unit());
      y.push_back(rng.unit());
    }
    // continuous draws: ties have probability zero, but skip defensively
    auto has_ties = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return std::adjacent_find(v.begin(), v.end()) != v.end();
    };
    if (has_ties(x) || has_ties(y)) continue;
    ++used;
    auto ordinal_ranks = [](const std::vector<double>& v) {
      std::vector<std::size_t> order(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
      std::vector<double> rank(v.size());
      for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = static_cast<double>(pos + 1);
      return rank;
    };
    const std::vector<double> rx = ordinal_ranks(x);
    const std::vector<double> ry = ordinal_ranks(y);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    const double nn = static_cast<double>(n);
    const double classical = 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
    CHECK(*spearman_rho(x, y) == doctest::Approx(classical).epsilon(1e-12));
  }
  CHECK(used > 150);
}

TEST_CASE("spearman_pvalue reproduces the published season p-values") {
  CHECK(std::abs(spearman_pvalue(0.657280748, 12) - 0.020) < 0.003);
  CHECK(std::abs(spearman_pvalue(0.654992248, 12) - 0.021) < 0.003);
  CHECK(std::abs(spearman_pvalue(0.579972912, 12) - 0.048) < 0.003);
  CHECK(std::abs(spearman_pvalue(96.0 / 143.0, 12) - 0.017) < 0.003);
  // the combined A+I+P row: our two-tailed t value is ~0.015
  CHECK(spearman_pvalue(97.0 / 143.0, 12) == doctest::Approx(0.0153).epsilon(0.03));
}

TEST_CASE("spearman_pvalue behaviour") {
  CHECK(spearman_pvalue(0.0, 12) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spearman_pvalue(1.0, 12) == std::numeric_limits<double>::min());
  CHECK(spearman_pvalue(-1.0, 12) == std::numeric_limits<double>::min());
  CHECK_THROWS_AS(spearman_pvalue(0.5, 3), validation_error);
  CHECK_THROWS_AS(spearman_pvalue(1.5, 12), validation_error);
  // strictly decreasing in |rho| for fixed n; symmetric in sign
  double prev = 1.1;
  for (double rho = 0.0; rho < 0.999; rho += 0.01) {
    const double p = spearman_pvalue(rho, 12);
    CHECK(p < prev);
    CHECK(spearman_pvalue(-rho, 12) == doctest::Approx(p).epsilon(1e-12));
    prev = p;
  }
}

TEST_CASE("correlate produces one result per category set") {
  const WeeklySeries s = season_series();
  const auto sets = default_category_sets();
  const auto results = correlate(s, sets);
  REQUIRE(results.size() == 6);
  CHECK(results[0].label == "A");
  CHECK(results[4].label == "A+I+P");
  for (const auto& r : results) {
    CHECK(r.n == 12);
    REQUIRE(r.rho.has_value());
    REQUIRE(r.p_value.has_value());
  }
  CHECK(*results[0].rho == doctest::Approx(0.657280748).epsilon(1e-8));
  CHECK(*results[4].rho == doctest::Approx(97.0 / 143.0).epsilon(1e-12));
  // identical series correlate perfectly
  WeeklySeries self = s;
  self.baseline.clear();
  for (long long v : self.counts[static_cast<std::size_t>(Category::A)]) {
    self.baseline.push_back(v);
  }
  const std::vector<std::vector<Category>> just_a{{Category::A}};
  const auto r = correlate(self, just_a);
  CHECK(*r[0].rho == doctest::Approx(1.0));
}

TEST_CASE("correlate needs overlap and a baseline") {
  WeeklySeries s = season_series();
  const std::vector<std::vector<Category>> just_a{{Category::A}};
  // baseline on a single week only
  for (std::size_t i = 0; i < s.baseline.size(); ++i) {
    if (i != 3) s.baseline[i].reset();
  }
  CHECK_THROWS_AS(correlate(s, just_a), validation_error);
  WeeklySeries none = season_series();
  none.baseline.clear();
  CHECK_THROWS_AS(correlate(none, just_a), validation_error);
  // constant counts yield an undefined rho, not a crash
  WeeklySeries flat = season_series();
  const std::vector<std::vector<Category>> just_w{{Category::W}};
  const auto r = correlate(flat, just_w);
  CHECK_FALSE(r[0].rho.has_value());
  CHECK_FALSE(r[0].p_value.has_value());
}

TEST_CASE("counts csv round trip and baseline attachment") {
  const WeeklySeries s = season_series();
  std::ostringstream out;
  save_counts_csv(out, s, "seed=1");
  std::istringstream in(out.str());
  WeeklySeries loaded = load_counts_csv(in);
  REQUIRE(loaded.weeks == s.weeks);
  for (std::size_t c = 0; c < kNumCategories; ++c) CHECK(loaded.counts[c] == s.counts[c]);

  std::ostringstream base;
  base << "week,count\n";
  for (int i = 0; i < fixtures::kSeasonWeeks; ++i) {
    base << fixtures::kSeasonWeekIds[i] << ',' << fixtures::kSeasonLab[i] << '\n';
  }
  std::istringstream base_in(base.str());
  attach_baseline_csv(loaded, base_in);
  REQUIRE(loaded.has_baseline());
  for (std::size_t i = 0; i < loaded.weeks.size(); ++i) {
    REQUIRE(loaded.baseline[i].has_value());
    CHECK(*loaded.baseline[i] == fixtures::kSeasonLab[i]);
  }
}

TEST_CASE("csv loaders reject malformed input") {
  std::istringstream bad_header("wk,A,I,P,W,S\n");
  CHECK_THROWS_AS(load_counts_csv(bad_header), parse_error);
  std::istringstream bad_count("week,A,I,P,W,S\n2009-46,1,2,x,4,5\n");
  CHECK_THROWS_AS(load_counts_csv(bad_count), parse_error);
  std::istringstream unordered("week,A,I,P,W,S\n2009-47,1,2,3,4,5\n2009-46,1,2,3,4,5\n");
  CHECK_THROWS_AS(load_counts_csv(unordered), parse_error);
  std::istringstream empty("");
  CHECK_THROWS_AS(load_counts_csv(empty), validation_error);
  WeeklySeries s = season_series();
  std::istringstream dup("week,count\n2009-46,1\n2009-46,2\n");
  CHECK_THROWS_AS(attach_baseline_csv(s, dup), parse_error);
}

TEST_CASE("category set parsing") {
  const auto sets = parse_category_sets("A,S,A+I+P");
  REQUIRE(sets.size() == 3);
  CHECK(sets[2] == std::vector<Category>{Category::A, Category::I, Category::P});
  CHECK(category_set_label(sets[2]) == "A+I+P");
  CHECK_THROWS_AS(parse_category_sets("A,,B"), validation_error);
  CHECK_THROWS_AS(parse_category_sets("A+A"), validation_error);
  CHECK_THROWS_AS(parse_category_sets("X"), validation_error);
}
