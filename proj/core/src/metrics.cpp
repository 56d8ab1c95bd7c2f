#include "absa/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "absa/error.hpp"

namespace absa {

MetricsReport macro_f1(std::span<const Polarity> predictions, std::span<const Polarity> golds) {
  if (predictions.size() != golds.size()) {
    throw InvalidArgument("macro_f1: " + std::to_string(predictions.size()) + " predictions vs " +
                          std::to_string(golds.size()) + " golds");
  }
  if (golds.empty()) throw InvalidArgument("macro_f1: empty input");
  MetricsReport r;
  r.count = golds.size();
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ++r.confusion[static_cast<std::size_t>(golds[i])][static_cast<std::size_t>(predictions[i])];
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumPolarities; ++c) {
    std::size_t predicted = 0, gold = 0;
    for (std::size_t k = 0; k < kNumPolarities; ++k) {
      predicted += r.confusion[k][c];
      gold += r.confusion[c][k];
    }
    const double tp = static_cast<double>(r.confusion[c][c]);
    const double p = predicted ? tp / static_cast<double>(predicted) : 0.0;
    const double rc = gold ? tp / static_cast<double>(gold) : 0.0;
    r.class_precision[c] = p;
    r.class_recall[c] = rc;
    r.class_f1[c] = p + rc > 0.0 ? 2.0 * p * rc / (p + rc) : 0.0;
    sum += r.class_f1[c];
  }
  r.macro_f1 = sum / static_cast<double>(kNumPolarities);
  return r;
}

void add_sa_ma_slices(MetricsReport& report, std::span<const Polarity> predictions,
                      std::span<const Polarity> golds, const std::vector<bool>& is_ma) {
  if (is_ma.size() != golds.size()) throw InvalidArgument("add_sa_ma_slices: size mismatch");
  std::vector<Polarity> sp, sg, mp, mg;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    (is_ma[i] ? mp : sp).push_back(predictions[i]);
    (is_ma[i] ? mg : sg).push_back(golds[i]);
  }
  report.sa_count = sg.size();
  report.ma_count = mg.size();
  if (!sg.empty()) {
    const auto sa = macro_f1(sp, sg);
    report.sa_macro_f1 = sa.macro_f1;
    report.sa_confusion = sa.confusion;
  }
  if (!mg.empty()) {
    const auto ma = macro_f1(mp, mg);
    report.ma_macro_f1 = ma.macro_f1;
    report.ma_confusion = ma.confusion;
  }
}

double majority_macro_f1(std::size_t majority_count, std::size_t total) {
  if (total == 0 || majority_count > total) {
    throw InvalidArgument("majority_macro_f1: need 0 <= c <= N, N > 0");
  }
  const double c = static_cast<double>(majority_count);
  return 2.0 * c / (static_cast<double>(total) + c) / static_cast<double>(kNumPolarities);
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

std::string format_report(const MetricsReport& r, const std::string& title) {
  std::ostringstream os;
  os << title << " (n=" << r.count << ")\n";
  os << "  macro F1     " << format_percent(r.macro_f1) << '\n';
  for (std::size_t c = 0; c < kNumPolarities; ++c) {
    const auto name = polarity_name(static_cast<Polarity>(c));
    os << "  " << name << std::string(13 - name.size(), ' ') << format_percent(r.class_f1[c])
       << '\n';
  }
  if (r.sa_macro_f1) os << "  SA macro F1  " << format_percent(*r.sa_macro_f1) << " (n=" << *r.sa_count << ")\n";
  if (r.ma_macro_f1) os << "  MA macro F1  " << format_percent(*r.ma_macro_f1) << " (n=" << *r.ma_count << ")\n";
  os << "  confusion (rows gold, cols predicted: pos neg neu)\n";
  for (const auto& row : r.confusion) {
    os << "   ";
    for (std::size_t v : row) os << ' ' << v;
    os << '\n';
  }
  return os.str();
}

std::string report_json(const MetricsReport& r, const std::string& name) {
  nlohmann::json j;
  j["name"] = name;
  j["count"] = r.count;
  j["macro_f1"] = std::round(10000.0 * r.macro_f1) / 100.0;
  for (std::size_t c = 0; c < kNumPolarities; ++c) {
    j["class_f1"][std::string(polarity_name(static_cast<Polarity>(c)))] =
        std::round(10000.0 * r.class_f1[c]) / 100.0;
  }
  j["confusion"] = r.confusion;
  if (r.sa_macro_f1) j["sa_macro_f1"] = std::round(10000.0 * *r.sa_macro_f1) / 100.0;
  if (r.ma_macro_f1) j["ma_macro_f1"] = std::round(10000.0 * *r.ma_macro_f1) / 100.0;
  if (r.sa_count) j["sa_count"] = *r.sa_count;
  if (r.ma_count) j["ma_count"] = *r.ma_count;
  return j.dump();
}

}  // namespace absa
