#include "htwb/evalmetric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace htwb {

DetectionOutcome detect(const Circuit& golden, const InfectedCircuit& infected,
                        std::span<const Pattern> vectors) {
  const Circuit& bad = infected.circuit;
  const std::size_t n_po = golden.primary_outputs().size();
  if (bad.primary_outputs().size() != n_po)
    throw Error("infected circuit has " + std::to_string(bad.primary_outputs().size()) +
                " outputs, golden has " + std::to_string(n_po));
  for (std::size_t p = 0; p < n_po; ++p) {
    if (golden.net_name(golden.primary_outputs()[p]) != bad.net_name(bad.primary_outputs()[p]))
      throw Error("output order mismatch between golden and infected circuit");
  }

  DetectionOutcome outcome;
  if (vectors.empty()) return outcome;

  const ValueTable good = evaluate(golden, vectors);
  const ValueTable evil = evaluate(bad, vectors);

  for (std::size_t p = 0; p < n_po && !outcome.output_diff; ++p) {
    const auto a = good.row(golden.primary_outputs()[p]);
    const auto b = evil.row(bad.primary_outputs()[p]);
    for (std::size_t w = 0; w < a.size(); ++w) {
      if (a[w] != b[w]) {
        outcome.output_diff = true;
        break;
      }
    }
  }

  // Trigger diagnostic on the golden values (tail bits are zero in both the
  // rows and the mask, so inverted literals stay clean).
  const std::size_t words = good.words_per_row();
  const std::size_t tail_bits = good.pattern_count() & 63;
  for (std::size_t w = 0; w < words && !outcome.trigger_fired; ++w) {
    std::uint64_t fire = w + 1 == words && tail_bits
                             ? (std::uint64_t{1} << tail_bits) - 1
                             : ~std::uint64_t{0};
    for (std::size_t k = 0; k < infected.spec.trigger_nets.size(); ++k) {
      const std::uint64_t col = good.row(infected.spec.trigger_nets[k])[w];
      fire &= infected.spec.trigger_values[k] ? col : ~col;
    }
    outcome.trigger_fired = fire != 0;
  }
  return outcome;
}

double DetectionReport::detection_rate() const {
  if (results.empty()) return 0.0;
  std::size_t hits = 0;
  for (const TrojanResult& r : results) hits += r.outcome.output_diff ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double DetectionReport::trigger_rate() const {
  if (results.empty()) return 0.0;
  std::size_t hits = 0;
  for (const TrojanResult& r : results) hits += r.outcome.trigger_fired ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

std::optional<double> DetectionReport::detection_rate_for_width(std::size_t width) const {
  std::size_t hits = 0, total = 0;
  for (const TrojanResult& r : results) {
    if (r.width != width) continue;
    ++total;
    hits += r.outcome.output_diff ? 1 : 0;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<std::size_t> DetectionReport::widths() const {
  std::vector<std::size_t> out;
  for (const TrojanResult& r : results)
    if (std::find(out.begin(), out.end(), r.width) == out.end()) out.push_back(r.width);
  std::sort(out.begin(), out.end());
  return out;
}

DetectionReport evaluate_corpus(const Circuit& golden, std::span<const InfectedCircuit> corpus,
                                std::span<const Pattern> vectors, std::string label) {
  DetectionReport report;
  report.circuit = golden.name();
  report.label = std::move(label);
  report.vector_count = vectors.size();
  report.results.reserve(corpus.size());
  for (const InfectedCircuit& inf : corpus) {
    report.results.push_back(
        {inf.spec.id, inf.spec.trigger_nets.size(), detect(golden, inf, vectors)});
  }
  return report;
}

double confidence_value(double false_positive, double false_negative, double alpha) {
  if (!(alpha > 0.0)) throw AlphaNonPositive(alpha);
  if (false_positive < 0.0 || false_positive > 1.0 || !std::isfinite(false_positive))
    throw ProbabilityOutOfRange("false_positive", false_positive);
  if (false_negative < 0.0 || false_negative > 1.0 || !std::isfinite(false_negative))
    throw ProbabilityOutOfRange("false_negative", false_negative);
  return (1.0 - false_positive) / (1.0 / alpha + false_negative);
}

double scenario_confidence(std::span<const DetectionReport> reports, double alpha) {
  if (reports.empty()) throw EmptyReports("no reports given");
  double miss = 0.0;
  for (const DetectionReport& r : reports) {
    if (r.results.empty()) throw EmptyReports("report '" + r.label + "' has no trojans");
    miss += 1.0 - r.detection_rate();
  }
  return confidence_value(0.0, miss / static_cast<double>(reports.size()), alpha);
}

std::string reports_to_json(std::span<const DetectionReport> reports, double alpha) {
  nlohmann::json out = nlohmann::json::array();
  for (const DetectionReport& r : reports) {
    nlohmann::json trojans = nlohmann::json::array();
    for (const TrojanResult& t : r.results) {
      trojans.push_back({{"id", t.id},
                         {"width", t.width},
                         {"trigger_fired", t.outcome.trigger_fired},
                         {"output_diff", t.outcome.output_diff}});
    }
    nlohmann::json per_width = nlohmann::json::object();
    for (const std::size_t w : r.widths()) {
      const double rate = *r.detection_rate_for_width(w);
      per_width[std::to_string(w)] = {{"detection_rate", rate},
                                      {"confidence", confidence_value(0.0, 1.0 - rate, alpha)}};
    }
    out.push_back({{"circuit", r.circuit},
                   {"label", r.label},
                   {"vector_count", r.vector_count},
                   {"detection_rate", r.detection_rate()},
                   {"trigger_rate", r.trigger_rate()},
                   {"per_width", per_width},
                   {"trojans", trojans}});
  }
  const nlohmann::json doc = {{"alpha", alpha}, {"reports", out}};
  return doc.dump(2);
}

std::string reports_to_csv(std::span<const DetectionReport> reports, double alpha) {
  if (reports.empty()) throw EmptyReports("no reports given");

  // Columns: (width, label) in width-major order; rows: circuits in first
  // appearance order. Cells hold detection percentages.
  std::vector<std::pair<std::size_t, std::string>> columns;
  std::vector<std::string> rows;
  for (const DetectionReport& r : reports) {
    for (const std::size_t w : r.widths()) {
      const std::pair<std::size_t, std::string> key{w, r.label};
      if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
    if (std::find(rows.begin(), rows.end(), r.circuit) == rows.end()) rows.push_back(r.circuit);
  }
  std::sort(columns.begin(), columns.end());

  const auto cell = [&](const std::string& circuit, const std::pair<std::size_t, std::string>& col)
      -> std::optional<double> {
    for (const DetectionReport& r : reports) {
      if (r.circuit != circuit || r.label != col.second) continue;
      if (const auto rate = r.detection_rate_for_width(col.first)) return rate;
    }
    return std::nullopt;
  };

  std::ostringstream out;
  out << "circuit";
  for (const auto& [w, label] : columns) out << "," << w << "-trigger " << label;
  out << "\n";

  char buf[32];
  for (const std::string& circuit : rows) {
    out << circuit;
    for (const auto& col : columns) {
      out << ",";
      if (const auto rate = cell(circuit, col)) {
        std::snprintf(buf, sizeof buf, "%.2f", *rate * 100.0);
        out << buf;
      }
    }
    out << "\n";
  }

  // Confidence row: per column, miss rate averaged over the circuits that
  // have a value in that column.
  out << "confidence";
  for (const auto& col : columns) {
    out << ",";
    double miss = 0.0;
    std::size_t count = 0;
    for (const std::string& circuit : rows) {
      if (const auto rate = cell(circuit, col)) {
        miss += 1.0 - *rate;
        ++count;
      }
    }
    if (count) {
      std::snprintf(buf, sizeof buf, "%.2f",
                    confidence_value(0.0, miss / static_cast<double>(count), alpha));
      out << buf;
    }
  }
  out << "\n";
  return out.str();
}

}  // namespace htwb
