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

#include "cfent/histories.hpp"

#include <algorithm>
#include <cmath>

namespace cfent {

namespace {

CMatrix chain_product(const HistoryChain &chain, const HistorySelection &sel) {
    if (sel.choices.size() != chain.events().size()) {
        throw std::invalid_argument("selection needs one choice per event time");
    }
    CMatrix c = CMatrix::Identity(static_cast<Eigen::Index>(chain.dim()), static_cast<Eigen::Index>(chain.dim()));
    for (std::size_t t = 0; t < sel.choices.size(); ++t) {
        const ProjectorFamily &family = chain.events()[t];
        if (sel.choices[t] >= family.size()) {
            throw std::invalid_argument("selection index out of range");
        }
        c = family.projector(sel.choices[t]).matrix() * c;
    }
    return c;
}

double trace_df(const HistoryChain &chain) {
    return (chain.initial().matrix() * chain.final_event().matrix()).trace().real();
}

// Tr(A B) without forming the product.
Complex trace_of_product(const CMatrix &a, const CMatrix &b) {
    return (a.array() * b.transpose().array()).sum();
}

} // namespace

HistoryChain::HistoryChain(Operator initial, std::vector<ProjectorFamily> events, Operator final_event)
    : initial_(std::move(initial)), events_(std::move(events)), final_(std::move(final_event)) {
    if (initial_.dim() != final_.dim()) {
        throw std::invalid_argument("initial and final projectors differ in dimension");
    }
    for (const auto &family : events_) {
        if (family.dim() != initial_.dim()) {
            throw std::invalid_argument("event family dimension differs from the chain");
        }
    }
    if (!initial_.is_projector() || !final_.is_projector()) {
        throw std::invalid_argument("initial and final events must be projectors");
    }
}

std::vector<HistorySelection> all_selections(const HistoryChain &chain) {
    std::vector<HistorySelection> out{HistorySelection{}};
    for (const auto &family : chain.events()) {
        std::vector<HistorySelection> next;
        next.reserve(out.size() * family.size());
        for (const auto &prefix : out) {
            for (std::size_t k = 0; k < family.size(); ++k) {
                HistorySelection s = prefix;
                s.choices.push_back(k);
                next.push_back(std::move(s));
            }
        }
        out = std::move(next);
    }
    return out;
}

Complex decoherence_functional(const HistoryChain &chain, const HistorySelection &alpha,
                               const HistorySelection &beta) {
    const CMatrix ca = chain_product(chain, alpha);
    const CMatrix cb = chain_product(chain, beta);
    return (ca * chain.initial().matrix() * cb.adjoint() * chain.final_event().matrix()).trace();
}

double consistency_defect(const HistoryChain &chain) {
    const auto selections = all_selections(chain);
    std::vector<CMatrix> left;  // C_alpha D
    std::vector<CMatrix> right; // C_beta^dagger F
    left.reserve(selections.size());
    right.reserve(selections.size());
    for (const auto &sel : selections) {
        const CMatrix c = chain_product(chain, sel);
        left.push_back(c * chain.initial().matrix());
        right.push_back(c.adjoint() * chain.final_event().matrix());
    }
    // Re d(alpha, beta) = Re d(beta, alpha), so alpha < beta suffices.
    double defect = 0.0;
    for (std::size_t a = 0; a < selections.size(); ++a) {
        for (std::size_t b = a + 1; b < selections.size(); ++b) {
            defect = std::max(defect, std::abs(trace_of_product(left[a], right[b]).real()));
        }
    }
    return defect;
}

double history_probability(const HistoryChain &chain, const HistorySelection &sel) {
    const double denom = trace_df(chain);
    if (denom < kZeroProbability) {
        throw ZeroProbabilityError("Tr(D F) vanishes; the history has no conditional probability");
    }
    const double defect = consistency_defect(chain);
    if (!(defect < kConsistencyTol)) {
        throw InconsistentChainError("chain is inconsistent (defect " + std::to_string(defect) + ")");
    }
    return decoherence_functional(chain, sel, sel).real() / denom;
}

Operator build_final_projector(const Scenario &scenario, int i, int j, const OutcomeLabel &ancilla_outcome,
                               const BlochDirection &theta1, const BlochDirection &theta2) {
    const Operator p1 = projector(spin_state(theta1, i));
    const Operator p2 = projector(spin_state(theta2, j));
    if (scenario.kind == ScenarioKind::ghz) {
        const int *spin = std::get_if<int>(&ancilla_outcome);
        if (spin == nullptr) {
            throw std::invalid_argument("GHZ ancilla outcome must be +1 or -1");
        }
        return tensor(tensor(p1, p2), projector(spin_state(scenario.ancilla_direction, *spin)));
    }
    const BellLabel *bell = std::get_if<BellLabel>(&ancilla_outcome);
    if (bell == nullptr) {
        throw std::invalid_argument("factorable ancilla outcome must be a Bell label");
    }
    return tensor(tensor(p1, p2), projector(bell_state(*bell)));
}

CertificateReport counterfactual_certificate(const Scenario &scenario, const BlochDirection &theta1,
                                             const BlochDirection &theta2,
                                             std::optional<OutcomeLabel> ancilla_outcome) {
    const int n = scenario.num_particles();
    const OutcomeLabel anc = ancilla_outcome.value_or(
        scenario.kind == ScenarioKind::ghz ? OutcomeLabel{1} : OutcomeLabel{BellLabel::phi_plus});

    const StateVector pair = scenario.kind == ScenarioKind::ghz
                                 ? conditional_pair_state(scenario.ancilla_direction, std::get<int>(anc)).state
                                 : swap_outcome_state(std::get<BellLabel>(anc));

    CertificateReport report{scenario.kind, anc, theta1, theta2, {}, false, scenario.degenerate(), {}, 0.0, 0.0,
                             false};

    // Intermediate event family and the index of the designated alternative.
    std::optional<ProjectorFamily> events;
    std::vector<std::string> names;
    std::size_t designated = 0;
    for (BellLabel label : kBellLabels) {
        if (std::abs(fidelity(bell_state(label), pair) - 1.0) < kExactTol) {
            events = ProjectorFamily::bell(1, 2, n);
            designated = events->index_of(label);
            report.designated = std::string(to_string(label));
            report.designated_entangled = true;
        }
    }
    if (events) {
        for (BellLabel label : kBellLabels) {
            names.emplace_back(to_string(label));
        }
    } else {
        const int where[] = {1, 2};
        const Operator p = embed(projector(pair), where, n);
        events = ProjectorFamily({p, Operator::identity(p.dim()) - p}, {OutcomeLabel{1}, OutcomeLabel{-1}});
        names = {"pair_state", "complement"};
        report.designated = "pair_state";
        report.designated_entangled =
            partial_trace(DensityMatrix::from_pure(pair), {1}).purity() < 1.0 - kExactTol;
    }

    const Operator d = projector(scenario.initial_state());
    const auto selections = all_selections(HistoryChain(d, {*events}, Operator::identity(d.dim())));
    for (int i : {1, -1}) {
        for (int j : {1, -1}) {
            HistoryChain chain(d, {*events}, build_final_projector(scenario, i, j, anc, theta1, theta2));
            const double tr_df = (d.matrix() * chain.final_event().matrix()).trace().real();
            if (tr_df <= kZeroProbability) {
                continue;
            }
            CertificateEntry entry{i, j, tr_df, consistency_defect(chain), {}};
            for (std::size_t k = 0; k < selections.size(); ++k) {
                const double p = decoherence_functional(chain, selections[k], selections[k]).real() / tr_df;
                entry.probabilities.emplace_back(names[k], p);
                const double expected = k == designated ? 1.0 : 0.0;
                report.max_probability_error = std::max(report.max_probability_error, std::abs(p - expected));
            }
            report.max_defect = std::max(report.max_defect, entry.defect);
            report.entries.push_back(std::move(entry));
        }
    }
    report.pass = !report.entries.empty() && report.max_defect < kConsistencyTol &&
                  report.max_probability_error <= kConsistencyTol && report.designated_entangled &&
                  !report.degenerate;
    return report;
}

} // namespace cfent
