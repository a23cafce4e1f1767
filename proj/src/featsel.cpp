#include "aethercast/featsel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aethercast/error.hpp"
#include "aethercast/ingest.hpp"

namespace aethercast {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(Errc::LengthMismatch, "featsel: pearson on unequal lengths");
  if (x.size() < 2) fail(Errc::TooShort, "featsel: pearson needs at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) fail(Errc::ZeroVariance, "featsel: pearson of a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

QuantileBins QuantileBins::fit(std::span<const double> values, std::size_t bin_count) {
  if (bin_count == 0) fail(Errc::InvalidArgument, "featsel: bin count must be positive");
  QuantileBins out;
  if (values.empty()) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double last = static_cast<double>(sorted.size() - 1);
  for (std::size_t k = 1; k < bin_count; ++k) {
    const double h = last * static_cast<double>(k) / static_cast<double>(bin_count);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double q = lo + 1 < sorted.size() ? sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo])
                                            : sorted.back();
    // The top edge must leave the maximum inside the last bin.
    if (q >= sorted.back()) continue;
    if (out.edges_.empty() || q > out.edges_.back()) out.edges_.push_back(q);
  }
  return out;
}

std::size_t QuantileBins::bin(double v) const {
  return static_cast<std::size_t>(std::lower_bound(edges_.begin(), edges_.end(), v) - edges_.begin());
}

Discretizer Discretizer::fit(const HourlyFrame& train, std::span<const std::string> columns,
                             std::size_t bin_count) {
  Discretizer d;
  d.bin_count_ = bin_count;
  for (const auto& c : columns) d.bins_.emplace(c, QuantileBins::fit(train.column(c), bin_count));
  return d;
}

const QuantileBins& Discretizer::bins(const std::string& column) const {
  const auto it = bins_.find(column);
  if (it == bins_.end()) fail(Errc::MissingColumn, "featsel: discretizer has no column '" + column + "'");
  return it->second;
}

std::vector<std::size_t> Discretizer::codes(const std::string& column,
                                            std::span<const double> values) const {
  const auto& b = bins(column);
  std::vector<std::size_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = b.bin(values[i]);
  return out;
}

double mutual_info_codes(std::span<const std::size_t> x, std::size_t x_bins,
                         std::span<const std::size_t> y, std::size_t y_bins) {
  if (x.size() != y.size()) fail(Errc::LengthMismatch, "featsel: mutual_info on unequal lengths");
  if (x.empty()) return 0.0;
  std::vector<double> joint(x_bins * y_bins, 0.0), px(x_bins, 0.0), py(y_bins, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[x[i] * y_bins + y[i]] += 1.0;
    px[x[i]] += 1.0;
    py[y[i]] += 1.0;
  }
  const double n = static_cast<double>(x.size());
  // Summed in sorted order so swapping x and y gives a bit-identical result.
  std::vector<double> terms;
  for (std::size_t a = 0; a < x_bins; ++a) {
    for (std::size_t b = 0; b < y_bins; ++b) {
      const double c = joint[a * y_bins + b];
      if (c == 0.0) continue;
      terms.push_back((c / n) * std::log(c * n / (px[a] * py[b])));
    }
  }
  std::sort(terms.begin(), terms.end());
  double mi = 0.0;
  for (double t : terms) mi += t;
  return std::max(mi, 0.0);
}

double mutual_info(std::span<const double> x, const QuantileBins& bx, std::span<const double> y,
                   const QuantileBins& by) {
  if (x.size() != y.size()) fail(Errc::LengthMismatch, "featsel: mutual_info on unequal lengths");
  std::vector<std::size_t> cx(x.size()), cy(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    cx[i] = bx.bin(x[i]);
    cy[i] = by.bin(y[i]);
  }
  return mutual_info_codes(cx, bx.bin_count(), cy, by.bin_count());
}

std::vector<std::string> mrmr_select(const HourlyFrame& train, const std::string& target,
                                     std::span<const std::string> candidates, std::size_t k,
                                     const Discretizer& d) {
  std::vector<std::string> pool(candidates.begin(), candidates.end());
  if (std::find(pool.begin(), pool.end(), target) != pool.end())
    fail(Errc::InvalidArgument, "featsel: target '" + target + "' listed as a candidate");
  if (k > pool.size())
    fail(Errc::InvalidArgument, "featsel: k=" + std::to_string(k) + " exceeds " +
                                    std::to_string(pool.size()) + " candidates");
  std::sort(pool.begin(), pool.end());

  std::map<std::string, std::vector<std::size_t>> codes;
  codes.emplace(target, d.codes(target, train.column(target)));
  for (const auto& f : pool) codes.emplace(f, d.codes(f, train.column(f)));
  const auto mi = [&](const std::string& a, const std::string& b) {
    return mutual_info_codes(codes.at(a), d.bins(a).bin_count(), codes.at(b), d.bins(b).bin_count());
  };

  std::map<std::string, double> relevance;
  for (const auto& f : pool) relevance[f] = mi(f, target);
  std::map<std::string, double> redundancy_sum;

  std::vector<std::string> selected;
  while (selected.size() < k) {
    std::string best;
    double best_score = -std::numeric_limits<double>::infinity();
    // pool is sorted, so strict '>' keeps the lexicographically first on ties.
    for (const auto& f : pool) {
      if (std::find(selected.begin(), selected.end(), f) != selected.end()) continue;
      const double redundancy =
          selected.empty() ? 0.0 : redundancy_sum[f] / static_cast<double>(selected.size());
      const double score = relevance[f] - redundancy;
      if (score > best_score) {
        best_score = score;
        best = f;
      }
    }
    selected.push_back(best);
    for (const auto& f : pool) redundancy_sum[f] += mi(f, best);
  }
  return selected;
}

RelevanceReport relevance_report(const HourlyFrame& train, const std::string& target,
                                 std::span<const std::string> candidates, std::size_t bin_count) {
  std::vector<std::string> cols(candidates.begin(), candidates.end());
  cols.push_back(target);
  const Discretizer d = Discretizer::fit(train, cols, bin_count);
  RelevanceReport report;
  report.ranking = mrmr_select(train, target, candidates, candidates.size(), d);
  const auto y = train.column(target);
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    const auto& f = report.ranking[i];
    const auto x = train.column(f);
    double rho = 0.0;
    try {
      rho = pearson(x, y);
    } catch (const Error& e) {
      if (e.code() != Errc::ZeroVariance) throw;
    }
    report.entries.push_back({f, rho, mutual_info(x, d.bins(f), y, d.bins(target)), i + 1});
  }
  return report;
}

std::string relevance_csv(const RelevanceReport& report) {
  std::string out = "feature,pearson,mi,rank\n";
  for (const auto& e : report.entries)
    out += e.feature + "," + format_number(e.pearson) + "," + format_number(e.mi) + "," +
           std::to_string(e.rank) + "\n";
  return out;
}

}  // namespace aethercast
