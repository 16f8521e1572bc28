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

#include "gtest/gtest.h"

#include "test_util.hpp"

using namespace cfent;
using cfent::testing::Gen;

namespace {

ProjectorFamily trivial_family(std::size_t dim) {
    return ProjectorFamily({Operator::identity(dim)}, {OutcomeLabel{1}});
}

HistoryChain random_chain(Gen &gen, int n, int times) {
    std::vector<ProjectorFamily> events;
    for (int t = 0; t < times; ++t) {
        const int particle = 1 + static_cast<int>(gen.uniform() * n) % n;
        events.push_back(ProjectorFamily::spin(gen.direction(), particle, n));
    }
    return {projector(gen.state(n)), std::move(events), projector(gen.state(n))};
}

} // namespace

TEST(HistoryChain, validates_inputs) {
    const Operator d = projector(StateVector::basis(1, 0));
    EXPECT_THROW(HistoryChain(d, {}, Operator::identity(4)), std::invalid_argument);
    EXPECT_THROW(HistoryChain(Operator(CMatrix::Identity(2, 2) * 0.5), {}, d), std::invalid_argument);
    EXPECT_THROW(HistoryChain(d, {ProjectorFamily::spin(BlochDirection::z(), 1, 2)}, d), std::invalid_argument);
}

TEST(DecoherenceFunctional, hermitian_and_sums_to_trace_df) {
    Gen gen(101);
    for (int trial = 0; trial < 30; ++trial) {
        const auto chain = random_chain(gen, 2, 1 + trial % 3);
        const auto sels = all_selections(chain);
        Complex total = 0.0;
        for (const auto &a : sels) {
            for (const auto &b : sels) {
                const Complex dab = decoherence_functional(chain, a, b);
                EXPECT_LT(std::abs(dab - std::conj(decoherence_functional(chain, b, a))), kExactTol);
                total += dab;
            }
            EXPECT_GE(decoherence_functional(chain, a, a).real(), -kExactTol);
        }
        const Complex tr_df = (chain.initial() * chain.final_event()).trace();
        EXPECT_LT(std::abs(total - tr_df), 1e-12);
    }
}

TEST(Consistency, commuting_events_are_consistent) {
    // Diagonal initial and final projectors with z-basis events never interfere.
    Gen gen(103);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 3;
        const auto d = projector(StateVector::basis(n, static_cast<std::size_t>(gen.uniform() * 8)));
        std::vector<ProjectorFamily> events;
        for (int p = 1; p <= n; ++p) {
            events.push_back(ProjectorFamily::spin(BlochDirection::z(), p, n));
        }
        HistoryChain chain(d, events, Operator::identity(8));
        EXPECT_EQ(consistency_defect(chain), 0.0);
        double sum = 0.0;
        for (const auto &sel : all_selections(chain)) {
            const double p = history_probability(chain, sel);
            EXPECT_TRUE(p == 0.0 || p == 1.0);
            sum += p;
        }
        EXPECT_NEAR(sum, 1.0, kExactTol);
    }
}

TEST(Consistency, interfering_chain_is_rejected) {
    // |0> -> {x+, x-} -> |0>: d(+,-) = <0|P-|0><0|P+|0> = 1/4.
    const Operator d = projector(StateVector::basis(1, 0));
    HistoryChain chain(d, {ProjectorFamily::spin(BlochDirection::x(), 1, 1)}, d);
    EXPECT_NEAR(consistency_defect(chain), 0.25, kExactTol);
    EXPECT_THROW(history_probability(chain, HistorySelection{{0}}), InconsistentChainError);
}

TEST(Consistency, vanishing_trace_df_is_rejected) {
    HistoryChain chain(projector(StateVector::basis(1, 0)), {ProjectorFamily::spin(BlochDirection::x(), 1, 1)},
                       projector(StateVector::basis(1, 1)));
    EXPECT_THROW(history_probability(chain, HistorySelection{{0}}), ZeroProbabilityError);
}

TEST(HistoryProbability, trivial_family_gives_one) {
    Gen gen(107);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = projector(gen.state(2));
        const auto f = projector(gen.state(2));
        HistoryChain chain(d, {trivial_family(4)}, f);
        EXPECT_NEAR(history_probability(chain, HistorySelection{{0}}), 1.0, 1e-10);
    }
}

TEST(FinalProjector, rank_one_and_trace_df) {
    const Operator d = projector(build_ghz());
    Gen gen(109);
    for (int trial = 0; trial < 20; ++trial) {
        const auto t1 = gen.direction();
        const auto t2 = gen.direction();
        double ghz_total = 0.0;
        double fac_total = 0.0;
        for (int i : {1, -1}) {
            for (int j : {1, -1}) {
                const auto f = build_final_projector(Scenario::ghz(), i, j, OutcomeLabel{1}, t1, t2);
                EXPECT_TRUE(f.is_projector());
                EXPECT_NEAR(f.trace().real(), 1.0, kExactTol);
                ghz_total += (d * f).trace().real();
                const auto g =
                    build_final_projector(Scenario::factorable(), i, j, OutcomeLabel{BellLabel::psi_plus}, t1, t2);
                fac_total += (projector(build_factorable()) * g).trace().real();
            }
        }
        // Summing over (i, j) leaves the ancilla outcome probability.
        EXPECT_NEAR(ghz_total, 0.5, kExactTol);
        EXPECT_NEAR(fac_total, 0.25, kExactTol);
    }
    // z,z with ancilla x+: |<up up +x|GHZ>|^2 = 1/4.
    const auto f = build_final_projector(Scenario::ghz(), 1, 1, OutcomeLabel{1}, BlochDirection::z(),
                                         BlochDirection::z());
    EXPECT_NEAR((d * f).trace().real(), 0.25, kExactTol);
    EXPECT_THROW(build_final_projector(Scenario::ghz(), 1, 1, OutcomeLabel{BellLabel::phi_plus}, BlochDirection::z(),
                                       BlochDirection::z()),
                 std::invalid_argument);
}

TEST(HistoryProbability, ghz_bell_event_is_certain) {
    Gen gen(113);
    const Operator d = projector(build_ghz());
    const auto bell = ProjectorFamily::bell(1, 2, 3);
    for (int trial = 0; trial < 25; ++trial) {
        const auto t1 = gen.direction();
        const auto t2 = gen.direction();
        for (int anc : {1, -1}) {
            const BellLabel expected = anc == 1 ? BellLabel::phi_plus : BellLabel::phi_minus;
            for (int i : {1, -1}) {
                for (int j : {1, -1}) {
                    HistoryChain chain(d, {bell}, build_final_projector(Scenario::ghz(), i, j, anc, t1, t2));
                    if ((d * chain.final_event()).trace().real() < 1e-9) {
                        continue;
                    }
                    EXPECT_LT(consistency_defect(chain), kConsistencyTol);
                    for (BellLabel label : kBellLabels) {
                        const double p = history_probability(chain, HistorySelection{{bell.index_of(label)}});
                        EXPECT_NEAR(p, label == expected ? 1.0 : 0.0, 1e-10);
                    }
                }
            }
        }
    }
}

TEST(HistoryProbability, factorable_bell_event_tracks_swap_outcome) {
    Gen gen(127);
    const Operator d = projector(build_factorable());
    const auto bell = ProjectorFamily::bell(1, 2, 4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto t1 = gen.direction();
        const auto t2 = gen.direction();
        for (BellLabel anc : kBellLabels) {
            for (int i : {1, -1}) {
                for (int j : {1, -1}) {
                    HistoryChain chain(d, {bell}, build_final_projector(Scenario::factorable(), i, j, anc, t1, t2));
                    if ((d * chain.final_event()).trace().real() < 1e-9) {
                        continue;
                    }
                    EXPECT_LT(consistency_defect(chain), kConsistencyTol);
                    for (BellLabel label : kBellLabels) {
                        const double p = history_probability(chain, HistorySelection{{bell.index_of(label)}});
                        EXPECT_NEAR(p, label == anc ? 1.0 : 0.0, 1e-10);
                    }
                }
            }
        }
    }
}

TEST(HistoryProbability, multi_event_chain_sums_to_one) {
    // Ancilla spin then Bell pair; only the branch matching F survives.
    const Operator d = projector(build_ghz());
    const auto anc = ProjectorFamily::spin(BlochDirection::x(), 3, 3);
    const auto bell = ProjectorFamily::bell(1, 2, 3);
    Gen gen(131);
    for (int trial = 0; trial < 10; ++trial) {
        HistoryChain chain(d, {anc, bell},
                           build_final_projector(Scenario::ghz(), 1, -1, OutcomeLabel{1}, gen.direction(),
                                                 gen.direction()));
        EXPECT_LT(consistency_defect(chain), kConsistencyTol);
        double sum = 0.0;
        for (const auto &sel : all_selections(chain)) {
            const double p = history_probability(chain, sel);
            EXPECT_GE(p, -1e-10);
            EXPECT_LE(p, 1.0 + 1e-10);
            sum += p;
            const bool designated = sel.choices[0] == anc.index_of(1) && sel.choices[1] == bell.index_of(BellLabel::phi_plus);
            EXPECT_NEAR(p, designated ? 1.0 : 0.0, 1e-10);
        }
        EXPECT_NEAR(sum, 1.0, 1e-10);
    }
}

TEST(HistoryProbability, matches_born_rule_conditionals) {
    // With F acting only on the ancilla, history probabilities are the Born
    // probabilities of the pair measurement given the ancilla outcome.
    Gen gen(137);
    const auto bell = ProjectorFamily::bell(1, 2, 3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dir = gen.direction();
        const auto anc_family = ProjectorFamily::spin(dir, 3, 3);
        for (int outcome : {1, -1}) {
            const auto collapsed = collapse(build_ghz(), anc_family, anc_family.index_of(outcome));
            const auto born = outcome_probabilities(collapsed, bell);
            HistoryChain chain(projector(build_ghz()), {bell}, anc_family.projector(anc_family.index_of(outcome)));
            EXPECT_LT(consistency_defect(chain), kConsistencyTol);
            for (std::size_t k = 0; k < bell.size(); ++k) {
                EXPECT_NEAR(history_probability(chain, HistorySelection{{k}}), born[k], 1e-10);
            }
        }
    }
}

TEST(Certificate, ghz_and_factorable_pass) {
    Gen gen(139);
    for (int trial = 0; trial < 5; ++trial) {
        const auto t1 = trial == 0 ? BlochDirection::z() : gen.direction();
        const auto t2 = trial == 0 ? BlochDirection::z() : gen.direction();
        auto ghz = counterfactual_certificate(Scenario::ghz(), t1, t2);
        EXPECT_TRUE(ghz.pass);
        EXPECT_EQ(ghz.designated, "phi_plus");
        EXPECT_LT(ghz.max_defect, kConsistencyTol);
        EXPECT_LE(ghz.max_probability_error, 1e-10);
        EXPECT_FALSE(ghz.entries.empty());
        auto minus = counterfactual_certificate(Scenario::ghz(), t1, t2, OutcomeLabel{-1});
        EXPECT_TRUE(minus.pass);
        EXPECT_EQ(minus.designated, "phi_minus");
        for (BellLabel label : kBellLabels) {
            auto fac = counterfactual_certificate(Scenario::factorable(), t1, t2, OutcomeLabel{label});
            EXPECT_TRUE(fac.pass) << to_string(label);
            EXPECT_EQ(fac.designated, to_string(label));
            for (const auto &entry : fac.entries) {
                EXPECT_EQ(entry.probabilities.size(), 4u);
            }
        }
    }
}

TEST(Certificate, degenerate_direction_is_not_certified) {
    auto report = counterfactual_certificate(Scenario::ghz(BlochDirection::z()), BlochDirection::x(),
                                             BlochDirection::x());
    EXPECT_TRUE(report.degenerate);
    EXPECT_FALSE(report.designated_entangled);
    EXPECT_EQ(report.designated, "pair_state");
    EXPECT_FALSE(report.pass);
    // The product pair state itself is still consistently certain.
    EXPECT_LT(report.max_defect, kConsistencyTol);
}

TEST(Certificate, partially_entangled_branch_uses_pair_family) {
    auto report = counterfactual_certificate(Scenario::ghz(BlochDirection(0.6, 0.4)), BlochDirection::x(),
                                             BlochDirection::z());
    EXPECT_FALSE(report.degenerate);
    EXPECT_TRUE(report.designated_entangled);
    EXPECT_EQ(report.designated, "pair_state");
    EXPECT_LT(report.max_defect, kConsistencyTol);
    EXPECT_LE(report.max_probability_error, 1e-10);
    EXPECT_TRUE(report.pass);
}
