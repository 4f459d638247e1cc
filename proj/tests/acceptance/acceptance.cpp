#include <chrono>
#include <iostream>
#include <map>
#include <string>

#include "hyperflow/cli/golden.hpp"
#include "support/fixtures.hpp"

namespace {

using hyperflow::cli::GoldenCheck;
using hyperflow::testing::SuiteResult;

struct Criterion {
  bool ok = true;
  std::string detail;

  void add(bool pass, const std::string& what) {
    if (!pass && ok) detail = what;
    ok = ok && pass;
  }
  void add(const SuiteResult& r, const std::string& what) {
    add(r.ok, what + ": " + r.detail);
  }
};

SuiteResult guarded(const std::function<SuiteResult()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    SuiteResult r;
    r.fail(e.what());
    return r;
  }
}

}  // namespace

int main() {
  namespace t = hyperflow::testing;
  std::map<int, Criterion> crit;
  for (int k = 1; k <= 8; ++k) crit[k];

  for (const GoldenCheck& c : hyperflow::cli::golden_checks(HYPERFLOW_CORPUS_DIR))
    crit[c.criterion].add(c.pass, c.name + (c.detail.empty() ? "" : " (" + c.detail + ")"));

  crit[4].add(guarded([] { return t::decomposition(500, 4); }), "decomposition of 500 random matrices");

  const auto start = std::chrono::steady_clock::now();
  crit[6].add(guarded([] { return t::order_laws(1000, 61); }), "(a) order laws");
  crit[6].add(guarded([] { return t::monotonicity(500, 62); }), "(b) monotonicity");
  crit[6].add(guarded([] { return t::measure_soundness(1000, 61); }), "(c) measure soundness");
  crit[6].add(guarded([] { return t::completeness(300, 64); }), "(d) completeness");
  crit[6].add(guarded([] { return t::maximal_discrimination(300, 64); }), "(e) maximal discrimination");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  crit[6].add(secs < 300, "property suites took " + std::to_string(secs) + " s");

  crit[7].add(guarded([] { return t::eval_vs_normal_form(200, 7); }), "eval vs normal form on 200 programs");

  const char* names[] = {"",
                         "three-box suite",
                         "general-choice example",
                         "P2/P4 refinement and attack",
                         "refinement-matrix decomposition",
                         "measures and their non-compositionality",
                         "property suites",
                         "program algebra",
                         "Three-Judges views"};
  bool all = true;
  for (const auto& [k, c] : crit) {
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << k << ": " << names[k];
    if (!c.ok) std::cout << " -- " << c.detail;
    std::cout << "\n";
    all = all && c.ok;
  }
  return all ? 0 : 1;
}
