#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "aethercast/error.hpp"
#include "aethercast/featsel.hpp"

using namespace aethercast;

namespace {

constexpr EpochSeconds kT0 = 1'672'531'200;

HourlyFrame frame_of(std::vector<std::string> names, std::vector<std::vector<double>> cols) {
  std::vector<EpochSeconds> ts(cols.front().size());
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = kT0 + static_cast<EpochSeconds>(i) * kSecondsPerHour;
  return HourlyFrame(ts, std::move(names), std::move(cols));
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double mi_of(const std::vector<double>& x, const std::vector<double>& y, std::size_t bins = 10) {
  return mutual_info(x, QuantileBins::fit(x, bins), y, QuantileBins::fit(y, bins));
}

/// Brute force evaluation of the greedy criterion with pairwise MI.
std::vector<std::string> oracle_mrmr(const HourlyFrame& f, const std::vector<std::string>& cands, std::size_t k) {
  auto col = [&](const std::string& n) {
    const auto c = f.column(n);
    return std::vector<double>(c.begin(), c.end());
  };
  const auto y = col("pm2_5");
  std::vector<std::string> chosen, left = cands;
  std::sort(left.begin(), left.end());
  while (chosen.size() < k) {
    double best = -1e300;
    std::string pick;
    for (const auto& c : left) {
      double score = mi_of(col(c), y);
      if (!chosen.empty()) {
        double red = 0.0;
        for (const auto& s : chosen) red += mi_of(col(c), col(s));
        score -= red / static_cast<double>(chosen.size());
      }
      if (score > best) {
        best = score;
        pick = c;
      }
    }
    chosen.push_back(pick);
    left.erase(std::find(left.begin(), left.end(), pick));
  }
  return chosen;
}

}  // namespace

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8.1};
  CHECK(std::abs(pearson(x, y) - oracle_pearson(x, y)) < 1e-12);
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> neg(x.size());
  std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
  CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pearson(x, neg) >= -1.0);
  const std::vector<double> flat{3, 3, 3, 3};
  try {
    pearson(x, flat);
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroVariance);
  }
}

TEST_CASE("mutual information estimates") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01;
  const std::size_t n = 10'000;
  std::vector<double> x(n), y(n), z(n);
  const double rho = 0.8;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = n01(rng);
    y[i] = rho * x[i] + std::sqrt(1 - rho * rho) * n01(rng);
    z[i] = n01(rng);
  }
  const double analytic = 0.5 * std::log(1.0 / (1.0 - rho * rho));
  CHECK(std::abs(analytic - 0.5108) < 1e-4);
  CHECK(std::abs(mi_of(x, y) - analytic) < 0.05);

  std::vector<double> shuffled = y;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(mi_of(x, shuffled) < 0.02);
  CHECK(mi_of(x, z) < 0.02);

  CHECK(mi_of(x, x) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(mi_of(x, y) == mi_of(y, x));

  std::vector<double> affine(n);
  std::transform(x.begin(), x.end(), affine.begin(), [](double v) { return 3.0 * v - 7.0; });
  CHECK(mi_of(affine, y) == doctest::Approx(mi_of(x, y)).epsilon(1e-12));
  CHECK(mi_of(x, y) >= 0.0);
}

TEST_CASE("quantile bins") {
  std::vector<double> v(100);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const auto b = QuantileBins::fit(v, 10);
  CHECK(b.bin_count() == 10);
  CHECK(std::is_sorted(b.edges().begin(), b.edges().end()));
  std::vector<int> counts(10);
  for (double x : v) ++counts[b.bin(x)];
  for (int c : counts) CHECK(c == 10);
  const std::vector<double> flat(50, 1.0);
  CHECK(QuantileBins::fit(flat, 10).bin_count() == 1);
}

TEST_CASE("mRMR selection") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  const std::size_t n = 3000;
  std::vector<double> y(n), a(n), a_dup(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = n01(rng);
    b[i] = n01(rng);
    c[i] = n01(rng);
    a_dup[i] = a[i];
    y[i] = 1.0 * a[i] + 0.7 * b[i] + 0.2 * c[i] + 0.3 * n01(rng);
  }
  const auto f = frame_of({"pm2_5", "a", "a_dup", "b", "c"}, {y, a, a_dup, b, c});
  const std::vector<std::string> cands{"a", "a_dup", "b", "c"};
  const auto d = Discretizer::fit(f, std::vector<std::string>{"pm2_5", "a", "a_dup", "b", "c"});

  const auto first = mrmr_select(f, "pm2_5", cands, 1, d);
  REQUIRE(first.size() == 1);
  CHECK(first[0] == "a");  // ties with a_dup broken lexicographically

  const auto all = mrmr_select(f, "pm2_5", cands, 4, d);
  auto sorted = all;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::string>{"a", "a_dup", "b", "c"});
  CHECK(all == oracle_mrmr(f, cands, 4));
  CHECK(all[1] == "b");
  CHECK(all.back() == "a_dup");

  const auto rep = relevance_report(f, "pm2_5", cands);
  CHECK(rep.ranking == all);
  double best_mi = -1;
  std::string argmax;
  for (const auto& e : rep.entries)
    if (e.mi > best_mi) {
      best_mi = e.mi;
      argmax = e.feature;
    }
  CHECK(argmax == first[0]);
  const auto csv = relevance_csv(rep);
  CHECK(csv.rfind("feature,pearson,mi,rank\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(relevance_report(f, "pm2_5", cands).ranking == rep.ranking);
}
