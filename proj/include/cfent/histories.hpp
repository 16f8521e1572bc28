// Copyright 2026 The cfent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Consistent-histories checks for projector chains D -> E_1 ... E_n -> F.
//
// For selections alpha, beta (one projector per event family) the
// decoherence functional is
//   d(alpha, beta) = Tr(C_alpha D C_beta^dagger F),  C = E_n^{.} ... E_1^{.},
// the chain is consistent when Re d vanishes off the diagonal, and the
// probability of a history is d(alpha, alpha) / Tr(D F).

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfent/born.hpp"
#include "cfent/protocols.hpp"
#include "cfent/qcore.hpp"

namespace cfent {

/// Off-diagonal decoherence below this counts as consistent.
inline constexpr double kConsistencyTol = 1e-10;

class InconsistentChainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

class HistoryChain {
  public:
    /// Throws std::invalid_argument if dimensions differ or `initial` /
    /// `final_event` are not projectors. Event families are validated by
    /// ProjectorFamily itself.
    HistoryChain(Operator initial, std::vector<ProjectorFamily> events, Operator final_event);

    const Operator &initial() const { return initial_; }
    const std::vector<ProjectorFamily> &events() const { return events_; }
    const Operator &final_event() const { return final_; }
    std::size_t dim() const { return initial_.dim(); }

  private:
    Operator initial_;
    std::vector<ProjectorFamily> events_;
    Operator final_;
};

/// One alternative index per event family, in time order.
struct HistorySelection {
    std::vector<std::size_t> choices;
};

/// Every selection of the chain, lexicographic in time order.
std::vector<HistorySelection> all_selections(const HistoryChain &chain);

Complex decoherence_functional(const HistoryChain &chain, const HistorySelection &alpha,
                               const HistorySelection &beta);

/// max |Re d(alpha, beta)| over distinct selections; 0 for a single history.
double consistency_defect(const HistoryChain &chain);

/// d(sel, sel) / Tr(D F). Throws InconsistentChainError when the chain fails
/// the consistency check and ZeroProbabilityError when Tr(D F) vanishes.
double history_probability(const HistoryChain &chain, const HistorySelection &sel);

/// Ancilla outcome of a final projector: +1/-1 for GHZ, a Bell label for the
/// factorable scenario.
Operator build_final_projector(const Scenario &scenario, int i, int j, const OutcomeLabel &ancilla_outcome,
                               const BlochDirection &theta1, const BlochDirection &theta2);

struct CertificateEntry {
    int i;
    int j;
    double tr_df;
    double defect;
    /// Probability per alternative of the intermediate event family.
    std::vector<std::pair<std::string, double>> probabilities;
};

struct CertificateReport {
    ScenarioKind scenario;
    OutcomeLabel ancilla_outcome;
    BlochDirection theta1;
    BlochDirection theta2;
    /// Name of the projector expected to carry probability 1.
    std::string designated;
    /// True when the designated projector is a maximally entangled Bell state.
    bool designated_entangled;
    bool degenerate;
    std::vector<CertificateEntry> entries;
    double max_defect;
    /// Largest |p - expected| over every entry (1 designated, 0 otherwise).
    double max_probability_error;
    bool pass;
};

/// Checks, for every final outcome (i, j) with Tr(D F) > kZeroProbability,
/// that the chain with an intermediate Bell-basis event on (1, 2) is
/// consistent and assigns probability 1 to the projector onto the pair state
/// the postselection singles out. When that state is not a Bell state (a
/// degenerate GHZ ancilla direction) the event family is {P, 1 - P} on it
/// and the report is marked degenerate and not passing.
CertificateReport counterfactual_certificate(const Scenario &scenario, const BlochDirection &theta1,
                                             const BlochDirection &theta2,
                                             std::optional<OutcomeLabel> ancilla_outcome = std::nullopt);

} // namespace cfent
