#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qrd/valuation.hpp"

namespace qrd {

// A named game plus reference strategy profiles, built against the final
// (override-applied) spec so vertex indices match the caller's enumeration.
struct Scenario {
  std::string name;  // canonical form, e.g. "pd_variant_noisy(0.01,0.01,0.01)"
  RepeatedGameSpec spec;
  std::vector<std::pair<std::string, StrategyProfile>> references;
};

// Scenario library:
//   pd_standard                      rewards (2,2)/(0,3)/(3,0)/(1,1), perfect
//                                    monitoring, delta 0, recall 0;
//                                    references: all_d, grim (recall >= 1)
//   pd_variant_noisy(e1,e2,e3)       rewards (4,4)/(0,5)/(5,0)/(2,2); each
//                                    player sees a noisy binary signal {c,d}
//                                    of the opponent's action: after (C,C)
//                                    the joint signal is (c,c) with prob
//                                    1-e1-e2-e3, (c,d) e2, (d,c) e1, (d,d)
//                                    e3; other rows are accurate; delta 0.9,
//                                    recall 1; references: all_d, reference
//                                    (the one-recall trigger: C after empty,
//                                    (C,c), (D,d); D otherwise, recall = 1)
//   matching_pennies                 +/-1 zero-sum, perfect monitoring,
//                                    delta 0, recall 0; reference: uniform
// Overrides replace the scenario defaults before references are built.
// Errors: unknown name, malformed argument list, eps outside [0,1) or
// summing >= 1.
Scenario load_scenario(const std::string& text, const double* delta_override = nullptr,
                       const std::vector<int>* recall_override = nullptr);

// nullptr when absent
const StrategyProfile* find_reference(const Scenario& sc, const std::string& name);

}  // namespace qrd
