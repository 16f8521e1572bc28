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

// The two counterfactual-entanglement scenarios end to end: preparation,
// early local measurements on particles 1 and 2, a delayed ancilla
// measurement, partitioning of the records by ancilla outcome and the
// statistics of each subensemble.
//
// GHZ scenario: particles 1, 2 and ancilla 3 in (|000> + |111>)/sqrt2, the
// ancilla measured along a chosen spin direction.
// Factorable scenario: pairs (1,3) and (2,4) each in phi_plus, the ancilla
// pair (3,4) measured in the Bell basis.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfent/born.hpp"
#include "cfent/qcore.hpp"

namespace cfent {

/// |sin theta3| below this makes the GHZ ancilla direction degenerate (z).
inline constexpr double kDegenerateSin = 1e-9;

enum class ScenarioKind { ghz, factorable };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario(std::string_view name);

struct Scenario {
    ScenarioKind kind = ScenarioKind::ghz;
    /// Spin axis of the ancilla measurement; used by the GHZ scenario only.
    BlochDirection ancilla_direction = BlochDirection::x();

    static Scenario ghz(const BlochDirection &ancilla = BlochDirection::x()) {
        return {ScenarioKind::ghz, ancilla};
    }
    static Scenario factorable() { return {ScenarioKind::factorable, BlochDirection::x()}; }

    int num_particles() const { return kind == ScenarioKind::ghz ? 3 : 4; }
    StateVector initial_state() const;
    ProjectorFamily ancilla_family() const;
    bool degenerate() const;
};

/// Local measurement directions for particles 1 and 2 in one trial.
struct SettingPair {
    BlochDirection a1;
    BlochDirection a2;

    bool operator==(const SettingPair &) const = default;
};

enum class SettingPolicy { cycle, random };

/// When the ancilla is measured relative to particles 1 and 2.
enum class AncillaTiming { last, first };

struct TrialRecord {
    std::uint64_t run = 0;
    ScenarioKind scenario = ScenarioKind::ghz;
    BlochDirection a1;
    BlochDirection a2;
    int o1 = 1;
    int o2 = 1;
    OutcomeLabel ancilla = 1;
    /// Present for GHZ records only.
    std::optional<BlochDirection> ancilla_direction;

    bool operator==(const TrialRecord &) const = default;
};

/// CHSH measurement angles in the x-z plane (radians from +z towards +x).
/// S = E(a,b) + E(a,b') + E(a',b) - E(a',b').
struct ChshAngles {
    double a = 0.0;
    double a_prime = 0.0;
    double b = 0.0;
    double b_prime = 0.0;

    /// Settings in the order (a,b), (a,b'), (a',b), (a',b').
    std::array<SettingPair, 4> settings() const;
};

/// {0, pi/2} x {pi/4, -pi/4}: the shared setting menu every preset draws from.
ChshAngles default_menu_angles();

/// Angles reaching |S| = 2 sqrt2 on the given subensemble. GHZ presets assume
/// the ancilla is measured along x. Found by optimize_chsh and pinned here.
ChshAngles preset_angles(ScenarioKind kind, const OutcomeLabel &ancilla);

struct ConditionalBranch {
    int outcome;
    /// Normalized state of particles (1, 2).
    StateVector state;
    double probability;
    /// |up_z> = alpha |up_n> + beta |down_n>, phases chosen so that the
    /// +1 / -1 branches read alpha|00> + conj(beta)|11> and
    /// beta|00> - conj(alpha)|11>.
    Complex alpha;
    Complex beta;
    /// Ancilla direction parallel to z: the branches are product states.
    bool degenerate;
};

StateVector build_ghz();
StateVector build_factorable();

ConditionalBranch conditional_pair_state(const BlochDirection &theta3, int outcome);

/// Runs `shots` trials. Records are ordered by run index and depend only on
/// (scenario, menu, policy, seed, timing). Throws std::invalid_argument for
/// shots == 0 or an empty menu.
std::vector<TrialRecord> run_trials(const Scenario &scenario, std::span<const SettingPair> menu,
                                    SettingPolicy policy, std::uint64_t shots, std::uint64_t seed,
                                    AncillaTiming timing = AncillaTiming::last);

using Partition = std::map<OutcomeLabel, std::vector<TrialRecord>>;

/// Groups records by ancilla outcome. Every record lands in exactly one group.
Partition partition_records(std::span<const TrialRecord> records);

struct CorrelatorEstimate {
    SettingPair setting;
    std::size_t n = 0;
    double e_hat = 0.0;
    double std_error = 0.0;
};

struct SubensembleStats {
    std::optional<OutcomeLabel> label; // empty for the whole ensemble
    std::size_t count = 0;
    /// In ChshAngles::settings() order; entries with n == 0 are missing.
    std::array<CorrelatorEstimate, 4> correlators{};
    std::optional<double> chsh;
    double chsh_stderr = 0.0;
    std::vector<std::string> missing;
};

SubensembleStats estimate_stats(std::span<const TrialRecord> subensemble, const ChshAngles &angles,
                                std::optional<OutcomeLabel> label = std::nullopt);

double exact_chsh(const StateVector &state, const ChshAngles &angles);
double exact_chsh(const DensityMatrix &rho, const ChshAngles &angles);

struct ChshScan {
    double max_abs_s = 0.0;
    /// Signed S at the maximizer.
    double s = 0.0;
    ChshAngles argmax;
};

/// Exhaustive scan of x-z plane quadruples with `grid` points per angle over
/// [0, pi).
ChshScan grid_scan_chsh(const DensityMatrix &rho, int grid = 24);

/// Coarse grid over the full circle followed by a shrinking pattern search.
ChshScan optimize_chsh(const DensityMatrix &rho);

/// Largest |pre - post| over all conditional probabilities
/// Prob(o1, o2 | ancilla = i) computed with the ancilla measured first versus
/// reconstructed from the ancilla-last ordering by Bayes' rule.
double bayes_check(const BlochDirection &theta1, const BlochDirection &theta2, const BlochDirection &theta3);

/// State of particles (1, 2) after a Bell measurement on (3, 4) of the
/// factorable scenario yields `label`.
StateVector swap_outcome_state(BellLabel label);

struct JointOutcome {
    int o1;
    int o2;
    OutcomeLabel ancilla;

    auto operator<=>(const JointOutcome &) const = default;
};

enum class Step { particle1, particle2, ancilla };

/// Exact distribution over (o1, o2, ancilla) with the three measurements
/// applied in `order`.
std::map<JointOutcome, double> exact_joint_distribution(const Scenario &scenario, const SettingPair &setting,
                                                        std::span<const Step> order);

/// Prob(o1, o2 | ancilla) indexed [(+,+), (+,-), (-,+), (-,-)], per ancilla
/// label with nonzero probability.
std::map<OutcomeLabel, std::array<double, 4>>
exact_conditional_distribution(const Scenario &scenario, const SettingPair &setting, AncillaTiming timing);

} // namespace cfent
