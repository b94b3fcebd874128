#include "newshub/labeling/kappa.hpp"

#include <cstdio>

#include "newshub/error.hpp"

namespace newshub::labeling {

AgreementReport cohen_kappa(std::span<const Label> a, std::span<const Label> b, double gate) {
  if (a.size() != b.size())
    throw Error(Errc::input, "rater label lists differ in length (" + std::to_string(a.size()) +
                                 " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) throw Error(Errc::input, "kappa needs at least one item");

  const std::size_t n = a.size();
  std::size_t agree = 0, a1 = 0, b1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    agree += a[i] == b[i];
    a1 += a[i] == Label::fake;
    b1 += b[i] == Label::fake;
  }
  const std::size_t a0 = n - a1, b0 = n - b1;
  // p_e == 1 exactly when both raters used one and the same label throughout.
  if ((a1 == n && b1 == n) || (a0 == n && b0 == n))
    throw Error(Errc::undefined_kappa,
                "kappa undefined: both raters assigned the same single label to all " +
                    std::to_string(n) + " items");

  const double nn = static_cast<double>(n);
  AgreementReport r;
  r.n_items = n;
  r.p_o = static_cast<double>(agree) / nn;
  // Integer products keep p_e exactly symmetric in the two raters.
  r.p_e = static_cast<double>(a1 * b1 + a0 * b0) / (nn * nn);
  r.kappa = (r.p_o - r.p_e) / (1.0 - r.p_e);
  r.passes_gate = r.kappa >= gate;
  return r;
}

std::vector<std::string> gate_failures(const AgreementSummary& summary, const GateOptions& options) {
  std::vector<std::string> out;
  auto describe = [&](const AgreementReport& r, const std::string& who) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: kappa %.4f < %.2f over %zu items", who.c_str(), r.kappa,
                  options.threshold, r.n_items);
    return std::string(buf);
  };
  if (options.scope != GateScope::pooled) {
    for (const auto& p : summary.pairs) {
      if (p.n_items >= options.min_pair_items && p.kappa < options.threshold)
        out.push_back(describe(p, p.annotator_a + "|" + p.annotator_b));
    }
  }
  if (options.scope != GateScope::pairwise && summary.pooled) {
    const auto& p = *summary.pooled;
    if (p.n_items >= options.min_pair_items && p.kappa < options.threshold)
      out.push_back(describe(p, "pooled"));
  }
  return out;
}

nlohmann::json to_json(const AgreementReport& r) {
  return {{"annotator_a", r.annotator_a}, {"annotator_b", r.annotator_b},
          {"n_items", r.n_items},         {"p_o", r.p_o},
          {"p_e", r.p_e},                 {"kappa", r.kappa},
          {"passes_gate", r.passes_gate}};
}

nlohmann::json to_json(const AgreementSummary& s) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : s.pairs) pairs.push_back(to_json(p));
  nlohmann::json undefined = nlohmann::json::array();
  for (const auto& u : s.undefined_pairs) {
    undefined.push_back({{"annotator_a", u.annotator_a},
                         {"annotator_b", u.annotator_b},
                         {"n_items", u.n_items},
                         {"p_o", u.p_o},
                         {"kappa", nullptr}});
  }
  return {{"pairs", pairs},
          {"undefined_pairs", undefined},
          {"pooled", s.pooled ? to_json(*s.pooled) : nlohmann::json(nullptr)},
          {"unresolved_disagreements", s.unresolved_disagreements}};
}

}  // namespace newshub::labeling
