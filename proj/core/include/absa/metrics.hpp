#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absa/types.hpp"

namespace absa {

using ConfusionMatrix = std::array<std::array<std::size_t, kNumPolarities>, kNumPolarities>;

// All F1 values are fractions in [0, 1]; format_percent() renders them the
// way results tables do (percent, 2 decimals).
struct MetricsReport {
  double macro_f1 = 0.0;
  std::array<double, kNumPolarities> class_f1{};
  std::array<double, kNumPolarities> class_precision{};
  std::array<double, kNumPolarities> class_recall{};
  ConfusionMatrix confusion{};  // confusion[gold][predicted]
  std::size_t count = 0;
  std::optional<double> sa_macro_f1;
  std::optional<double> ma_macro_f1;
  std::optional<std::size_t> sa_count;
  std::optional<std::size_t> ma_count;
  std::optional<ConfusionMatrix> sa_confusion;
  std::optional<ConfusionMatrix> ma_confusion;
};

// Per-class F1 with 0 for empty denominators; macro = unweighted mean over
// the three classes. Throws on empty or mismatched input.
MetricsReport macro_f1(std::span<const Polarity> predictions, std::span<const Polarity> golds);

// Adds SA/MA slice metrics; `is_ma[i]` tells whether sample i is multi-aspect.
void add_sa_ma_slices(MetricsReport& report, std::span<const Polarity> predictions,
                      std::span<const Polarity> golds, const std::vector<bool>& is_ma);

// Closed form for a constant prediction of a class with `majority_count` of
// `total` test samples: F1 = 2c / (N + c), other classes 0, macro = F1 / 3.
double majority_macro_f1(std::size_t majority_count, std::size_t total);

std::string format_percent(double fraction);
// Human-readable table.
std::string format_report(const MetricsReport& report, const std::string& title);
// One-line JSON record.
std::string report_json(const MetricsReport& report, const std::string& name);

}  // namespace absa
