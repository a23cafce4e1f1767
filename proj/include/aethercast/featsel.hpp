#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aethercast/series.hpp"

namespace aethercast {

/// Pearson correlation, clamped to [-1, 1]. Throws LengthMismatch,
/// TooShort, ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Equal-mass bins for one variable: interior cut points at the k/B
/// quantiles of the fitting sample, deduplicated.
class QuantileBins {
 public:
  QuantileBins() = default;
  static QuantileBins fit(std::span<const double> values, std::size_t bin_count);

  /// Index of the first bin whose upper cut point is >= v.
  std::size_t bin(double v) const;
  std::size_t bin_count() const noexcept { return edges_.size() + 1; }
  const std::vector<double>& edges() const noexcept { return edges_; }

 private:
  std::vector<double> edges_;
};

/// Per-column quantile bins fitted on training rows.
class Discretizer {
 public:
  Discretizer() = default;
  static Discretizer fit(const HourlyFrame& train, std::span<const std::string> columns,
                         std::size_t bin_count = 10);

  const QuantileBins& bins(const std::string& column) const;
  std::vector<std::size_t> codes(const std::string& column, std::span<const double> values) const;
  std::size_t bin_count() const noexcept { return bin_count_; }

 private:
  std::map<std::string, QuantileBins> bins_;
  std::size_t bin_count_ = 10;
};

/// Plug-in mutual information (nats) of two discrete code sequences.
double mutual_info_codes(std::span<const std::size_t> x, std::size_t x_bins,
                         std::span<const std::size_t> y, std::size_t y_bins);

/// I(X;Y) with each variable binned by its own fitted bins.
double mutual_info(std::span<const double> x, const QuantileBins& bx, std::span<const double> y,
                   const QuantileBins& by);

/// Greedy mRMR order over `candidates`: each step picks the argmax of
/// I(f;y) - mean_{s in S} I(f;s); ties go to the lexicographically smaller
/// name. Returns the first `k` picks.
std::vector<std::string> mrmr_select(const HourlyFrame& train, const std::string& target,
                                     std::span<const std::string> candidates, std::size_t k,
                                     const Discretizer& d);

struct RelevanceEntry {
  std::string feature;
  double pearson = 0.0;
  double mi = 0.0;
  std::size_t rank = 0;  // 1-based mRMR position
};

struct RelevanceReport {
  std::vector<RelevanceEntry> entries;  // in mRMR order
  std::vector<std::string> ranking;
};

RelevanceReport relevance_report(const HourlyFrame& train, const std::string& target,
                                 std::span<const std::string> candidates, std::size_t bin_count = 10);

/// `feature,pearson,mi,rank`
std::string relevance_csv(const RelevanceReport& report);

}  // namespace aethercast
