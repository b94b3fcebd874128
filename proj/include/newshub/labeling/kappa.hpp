#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "newshub/label.hpp"

namespace newshub::labeling {

inline constexpr double kKappaGate = 0.80;

struct AgreementReport {
  std::string annotator_a;
  std::string annotator_b;
  std::size_t n_items = 0;
  double p_o = 0.0;
  double p_e = 0.0;
  double kappa = 0.0;
  bool passes_gate = false;
};

// Cohen's kappa for two binary raters over the same items.
//   p_o = share of items with equal labels
//   p_e = Pa(1)Pb(1) + Pa(0)Pb(0)
//   kappa = (p_o - p_e) / (1 - p_e)
// Throws Error(Errc::input) on empty or mismatched inputs and
// Error(Errc::undefined_kappa) when p_e == 1 (both raters constant and equal).
AgreementReport cohen_kappa(std::span<const Label> a, std::span<const Label> b,
                            double gate = kKappaGate);

// A rater pair whose kappa is undefined; reported instead of a number.
struct UndefinedPair {
  std::string annotator_a;
  std::string annotator_b;
  std::size_t n_items = 0;
  double p_o = 0.0;
};

struct AgreementSummary {
  std::vector<AgreementReport> pairs;
  std::vector<UndefinedPair> undefined_pairs;
  // Over all doubly-reviewed records, first vs second reviewer slot.
  std::optional<AgreementReport> pooled;
  std::size_t unresolved_disagreements = 0;
};

enum class GateScope { pairwise, pooled, both };

struct GateOptions {
  double threshold = kKappaGate;
  // Pairs sharing fewer items are reported but never block export.
  std::size_t min_pair_items = 30;
  GateScope scope = GateScope::pairwise;
};

// Human-readable reasons the gate fails; empty when it passes.
std::vector<std::string> gate_failures(const AgreementSummary& summary, const GateOptions& options);

nlohmann::json to_json(const AgreementReport& r);
nlohmann::json to_json(const AgreementSummary& s);

}  // namespace newshub::labeling
