#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "htwb/htgen.hpp"
#include "htwb/logicsim.hpp"

namespace htwb {

class AlphaNonPositive : public Error {
public:
  explicit AlphaNonPositive(double alpha)
      : Error("alpha must be positive, got " + std::to_string(alpha)) {}
};

class ProbabilityOutOfRange : public Error {
public:
  ProbabilityOutOfRange(const std::string& which, double value)
      : Error(which + " must lie in [0, 1], got " + std::to_string(value)) {}
};

class EmptyReports : public Error {
public:
  explicit EmptyReports(const std::string& detail)
      : Error("confidence needs at least one report: " + detail) {}
};

struct DetectionOutcome {
  /// Trigger condition held on at least one vector (diagnostic; evaluated on
  /// the golden circuit from the trojan's literals).
  bool trigger_fired = false;
  /// At least one vector produced differing primary outputs. This is the
  /// verdict: a trojan whose payload never reaches an output is not detected
  /// even if its trigger fired.
  bool output_diff = false;
};

/// Runs the vector set through the golden and the infected circuit and
/// compares outputs positionally (the infected circuit preserves output
/// names and order).
DetectionOutcome detect(const Circuit& golden, const InfectedCircuit& infected,
                        std::span<const Pattern> vectors);

struct TrojanResult {
  std::string id;
  std::size_t width = 0;
  DetectionOutcome outcome;
};

struct DetectionReport {
  std::string circuit;   // parent circuit name
  std::string label;     // which vector set was replayed
  std::size_t vector_count = 0;
  std::vector<TrojanResult> results;

  double detection_rate() const;  // fraction of trojans with output_diff
  double trigger_rate() const;
  std::optional<double> detection_rate_for_width(std::size_t width) const;
  std::vector<std::size_t> widths() const;  // ascending, distinct
};

DetectionReport evaluate_corpus(const Circuit& golden, std::span<const InfectedCircuit> corpus,
                                std::span<const Pattern> vectors, std::string label);

/// Confidence in a detection scheme with the given error rates:
///   confidence = (1 - false_positive) / (1/alpha + false_negative)
/// alpha caps the value: a perfect detector scores alpha, and for error
/// rates up to 0.5 the value never drops below 0.5*alpha/(1 + 0.5*alpha).
double confidence_value(double false_positive, double false_negative, double alpha);

/// Scenario-level confidence: false negatives average the miss rate
/// (1 - detection_rate) over the reports; structural comparison against a
/// golden model cannot produce false positives, so that rate is 0.
double scenario_confidence(std::span<const DetectionReport> reports, double alpha);

/// Full replay results as serialized JSON (per-trojan outcomes, per-width
/// rates and confidences).
std::string reports_to_json(std::span<const DetectionReport> reports, double alpha);

/// Grid layout: one row per circuit, one column per (trigger width, label)
/// pair with detection percentages, and a final confidence row aggregating
/// each column over the circuit rows.
std::string reports_to_csv(std::span<const DetectionReport> reports, double alpha);

}  // namespace htwb
