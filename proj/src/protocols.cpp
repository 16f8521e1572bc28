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

#include "cfent/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace cfent {

namespace {

constexpr double kPi = std::numbers::pi;
// Two directions are the same setting when their unit vectors agree this well.
constexpr double kSettingMatchTol = 1e-9;

std::size_t outcome_slot(int o1, int o2) {
    return (o1 > 0 ? 0u : 2u) + (o2 > 0 ? 0u : 1u);
}

bool same_setting(const SettingPair &x, const SettingPair &y) {
    return x.a1.distance(y.a1) < kSettingMatchTol && x.a2.distance(y.a2) < kSettingMatchTol;
}

std::string setting_name(const SettingPair &s) {
    return "(" + std::to_string(s.a1.theta()) + "," + std::to_string(s.a1.phi()) + ")x(" +
           std::to_string(s.a2.theta()) + "," + std::to_string(s.a2.phi()) + ")";
}

// P v / |P v| without the zero-probability threshold; an exactly vanishing
// projection yields nullopt.
std::optional<StateVector> project_exact(const StateVector &v, const Operator &p) {
    CVector w = p.matrix() * v.amplitudes();
    if (!(w.squaredNorm() > 0.0)) {
        return std::nullopt;
    }
    return StateVector::normalized(v.num_qubits(), std::move(w));
}

} // namespace

std::string_view to_string(ScenarioKind kind) {
    return kind == ScenarioKind::ghz ? "ghz" : "factorable";
}

ScenarioKind parse_scenario(std::string_view name) {
    if (name == "ghz") {
        return ScenarioKind::ghz;
    }
    if (name == "factorable") {
        return ScenarioKind::factorable;
    }
    throw std::invalid_argument("unknown scenario: " + std::string(name));
}

StateVector Scenario::initial_state() const {
    return kind == ScenarioKind::ghz ? build_ghz() : build_factorable();
}

ProjectorFamily Scenario::ancilla_family() const {
    if (kind == ScenarioKind::ghz) {
        return ProjectorFamily::spin(ancilla_direction, 3, 3);
    }
    return ProjectorFamily::bell(3, 4, 4);
}

bool Scenario::degenerate() const {
    return kind == ScenarioKind::ghz && std::abs(std::sin(ancilla_direction.theta())) < kDegenerateSin;
}

std::array<SettingPair, 4> ChshAngles::settings() const {
    auto d = [](double angle) { return BlochDirection::in_xz_plane(angle); };
    return {SettingPair{d(a), d(b)}, SettingPair{d(a), d(b_prime)}, SettingPair{d(a_prime), d(b)},
            SettingPair{d(a_prime), d(b_prime)}};
}

ChshAngles default_menu_angles() {
    return {0.0, kPi / 2.0, kPi / 4.0, -kPi / 4.0};
}

ChshAngles preset_angles(ScenarioKind kind, const OutcomeLabel &ancilla) {
    // E(a,b) in the x-z plane: phi+ cos(a-b), phi- cos(a+b), psi+ -cos(a+b),
    // psi- -cos(a-b). Swapping b and b' keeps every preset on the shared menu.
    const ChshAngles straight{0.0, kPi / 2.0, kPi / 4.0, -kPi / 4.0};
    const ChshAngles swapped{0.0, kPi / 2.0, -kPi / 4.0, kPi / 4.0};
    if (kind == ScenarioKind::ghz) {
        const int *spin = std::get_if<int>(&ancilla);
        if (spin == nullptr) {
            throw std::invalid_argument("GHZ ancilla outcome must be +1 or -1");
        }
        return *spin > 0 ? straight : swapped;
    }
    const BellLabel *bell = std::get_if<BellLabel>(&ancilla);
    if (bell == nullptr) {
        throw std::invalid_argument("factorable ancilla outcome must be a Bell label");
    }
    switch (*bell) {
    case BellLabel::phi_plus:
    case BellLabel::psi_minus:
        return straight;
    case BellLabel::phi_minus:
    case BellLabel::psi_plus:
        return swapped;
    }
    return straight;
}

StateVector build_ghz() {
    const double r = 1.0 / std::sqrt(2.0);
    return StateVector::from_amplitudes({r, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, r});
}

StateVector build_factorable() {
    // |psi13> (x) |psi24> with particles reordered from (1,3,2,4) to (1,2,3,4).
    const StateVector pair = bell_state(BellLabel::phi_plus);
    const int order[] = {1, 3, 2, 4};
    return permute_particles(tensor(pair, pair), order);
}

ConditionalBranch conditional_pair_state(const BlochDirection &theta3, int outcome) {
    if (outcome != 1 && outcome != -1) {
        throw std::invalid_argument("ancilla outcome must be +1 or -1");
    }
    auto basis = spin_eigenbasis(theta3);
    // Rephase |up_n> by e^{-i phi} so that <up_n|down_z> = conj(<down_n|up_z>).
    const Complex rephase = std::polar(1.0, theta3.phi());
    const Complex alpha = rephase * basis.up[0];
    const Complex beta = std::conj(basis.down[0]);

    CVector amps = CVector::Zero(4);
    if (outcome == 1) {
        amps[0] = alpha;
        amps[3] = std::conj(beta);
    } else {
        amps[0] = beta;
        amps[3] = -std::conj(alpha);
    }
    return {outcome,
            StateVector::normalized(2, std::move(amps)),
            0.5,
            alpha,
            beta,
            std::abs(std::sin(theta3.theta())) < kDegenerateSin};
}

namespace {

struct PreparedSetting {
    ProjectorFamily first;
    ProjectorFamily second;
};

TrialRecord run_one(const Scenario &scenario, const StateVector &initial, const ProjectorFamily &ancilla,
                    std::span<const SettingPair> menu, std::span<const PreparedSetting> prepared,
                    SettingPolicy policy, std::uint64_t seed, std::uint64_t run, AncillaTiming timing) {
    RngStream rng(seed, run);
    std::size_t which = policy == SettingPolicy::cycle ? static_cast<std::size_t>(run % menu.size())
                                                       : static_cast<std::size_t>(rng.next_u64() % menu.size());
    const PreparedSetting &fam = prepared[which];

    StateVector state = initial;
    std::size_t anc_index = 0;
    if (timing == AncillaTiming::first) {
        auto m = measure(state, ancilla, rng);
        anc_index = m.index;
        state = std::move(m.state);
    }
    auto m1 = measure(state, fam.first, rng);
    auto m2 = measure(m1.state, fam.second, rng);
    if (timing == AncillaTiming::last) {
        anc_index = measure(m2.state, ancilla, rng).index;
    }

    TrialRecord rec;
    rec.run = run;
    rec.scenario = scenario.kind;
    rec.a1 = menu[which].a1;
    rec.a2 = menu[which].a2;
    rec.o1 = std::get<int>(fam.first.label(m1.index));
    rec.o2 = std::get<int>(fam.second.label(m2.index));
    rec.ancilla = ancilla.label(anc_index);
    if (scenario.kind == ScenarioKind::ghz) {
        rec.ancilla_direction = scenario.ancilla_direction;
    }
    return rec;
}

} // namespace

std::vector<TrialRecord> run_trials(const Scenario &scenario, std::span<const SettingPair> menu,
                                    SettingPolicy policy, std::uint64_t shots, std::uint64_t seed,
                                    AncillaTiming timing) {
    if (shots == 0) {
        throw std::invalid_argument("shots must be at least 1");
    }
    if (menu.empty()) {
        throw std::invalid_argument("settings menu is empty");
    }
    const StateVector initial = scenario.initial_state();
    const ProjectorFamily ancilla = scenario.ancilla_family();
    const int n = scenario.num_particles();
    std::vector<PreparedSetting> prepared;
    prepared.reserve(menu.size());
    for (const SettingPair &s : menu) {
        prepared.push_back({ProjectorFamily::spin(s.a1, 1, n), ProjectorFamily::spin(s.a2, 2, n)});
    }

    std::vector<TrialRecord> records(shots);
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t run = begin; run < end; ++run) {
            records[run] = run_one(scenario, initial, ancilla, menu, prepared, policy, seed, run, timing);
        }
    };

    const std::uint64_t workers =
        std::clamp<std::uint64_t>(std::thread::hardware_concurrency(), 1, std::max<std::uint64_t>(1, shots / 4096));
    if (workers <= 1) {
        work(0, shots);
        return records;
    }
    std::vector<std::jthread> pool;
    const std::uint64_t chunk = (shots + workers - 1) / workers;
    for (std::uint64_t w = 0; w < workers; ++w) {
        const std::uint64_t begin = w * chunk;
        const std::uint64_t end = std::min(shots, begin + chunk);
        if (begin < end) {
            pool.emplace_back(work, begin, end);
        }
    }
    pool.clear();
    return records;
}

Partition partition_records(std::span<const TrialRecord> records) {
    Partition groups;
    for (const TrialRecord &r : records) {
        groups[r.ancilla].push_back(r);
    }
    return groups;
}

SubensembleStats estimate_stats(std::span<const TrialRecord> subensemble, const ChshAngles &angles,
                                std::optional<OutcomeLabel> label) {
    SubensembleStats stats;
    stats.label = std::move(label);
    stats.count = subensemble.size();
    const auto settings = angles.settings();

    bool complete = true;
    double var_sum = 0.0;
    for (std::size_t k = 0; k < settings.size(); ++k) {
        CorrelatorEstimate &est = stats.correlators[k];
        est.setting = settings[k];
        double sum = 0.0;
        double sum_sq = 0.0;
        for (const TrialRecord &r : subensemble) {
            if (same_setting({r.a1, r.a2}, settings[k])) {
                const double x = r.o1 * r.o2;
                ++est.n;
                sum += x;
                sum_sq += x * x;
            }
        }
        if (est.n == 0) {
            complete = false;
            stats.missing.push_back(setting_name(settings[k]));
            continue;
        }
        const double n = static_cast<double>(est.n);
        est.e_hat = sum / n;
        if (est.n > 1) {
            const double var = std::max(0.0, (sum_sq - n * est.e_hat * est.e_hat) / (n - 1.0));
            est.std_error = std::sqrt(var / n);
        }
        var_sum += est.std_error * est.std_error;
    }
    if (complete) {
        const auto &c = stats.correlators;
        stats.chsh = c[0].e_hat + c[1].e_hat + c[2].e_hat - c[3].e_hat;
        stats.chsh_stderr = std::sqrt(var_sum);
    }
    return stats;
}

double exact_chsh(const DensityMatrix &rho, const ChshAngles &angles) {
    const auto s = angles.settings();
    return correlator(rho, s[0].a1, s[0].a2) + correlator(rho, s[1].a1, s[1].a2) +
           correlator(rho, s[2].a1, s[2].a2) - correlator(rho, s[3].a1, s[3].a2);
}

double exact_chsh(const StateVector &state, const ChshAngles &angles) {
    return exact_chsh(DensityMatrix::from_pure(state), angles);
}

namespace {

// Correlator table E(angles[i], angles[j]) over a uniform angle grid.
std::vector<double> correlator_table(const DensityMatrix &rho, const std::vector<double> &grid_angles) {
    const std::size_t g = grid_angles.size();
    std::vector<double> table(g * g);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            table[i * g + j] = correlator(rho, BlochDirection::in_xz_plane(grid_angles[i]),
                                          BlochDirection::in_xz_plane(grid_angles[j]));
        }
    }
    return table;
}

ChshScan scan_table(const std::vector<double> &table, const std::vector<double> &grid_angles) {
    const std::size_t g = grid_angles.size();
    ChshScan best;
    best.max_abs_s = -1.0;
    for (std::size_t a = 0; a < g; ++a) {
        for (std::size_t ap = 0; ap < g; ++ap) {
            for (std::size_t b = 0; b < g; ++b) {
                for (std::size_t bp = 0; bp < g; ++bp) {
                    const double s =
                        table[a * g + b] + table[a * g + bp] + table[ap * g + b] - table[ap * g + bp];
                    if (std::abs(s) > best.max_abs_s) {
                        best.max_abs_s = std::abs(s);
                        best.s = s;
                        best.argmax = {grid_angles[a], grid_angles[ap], grid_angles[b], grid_angles[bp]};
                    }
                }
            }
        }
    }
    return best;
}

std::vector<double> uniform_angles(int points, double span) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        out.push_back(span * k / points);
    }
    return out;
}

void check_two_qubit(const DensityMatrix &rho) {
    if (rho.num_qubits() != 2) {
        throw std::invalid_argument("CHSH needs a two-qubit state");
    }
}

} // namespace

ChshScan grid_scan_chsh(const DensityMatrix &rho, int grid) {
    check_two_qubit(rho);
    if (grid < 1) {
        throw std::invalid_argument("grid must have at least one point");
    }
    const auto angles = uniform_angles(grid, kPi);
    return scan_table(correlator_table(rho, angles), angles);
}

ChshScan optimize_chsh(const DensityMatrix &rho) {
    check_two_qubit(rho);
    const auto angles = uniform_angles(24, 2.0 * kPi);
    ChshScan best = scan_table(correlator_table(rho, angles), angles);
    const double sign = best.s < 0.0 ? -1.0 : 1.0;

    std::array<double, 4> x = {best.argmax.a, best.argmax.a_prime, best.argmax.b, best.argmax.b_prime};
    auto value = [&](const std::array<double, 4> &p) {
        return sign * exact_chsh(rho, ChshAngles{p[0], p[1], p[2], p[3]});
    };
    double fx = value(x);
    for (double step = 2.0 * kPi / 24.0; step > 1e-10;) {
        bool improved = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double dir : {1.0, -1.0}) {
                auto trial = x;
                trial[i] += dir * step;
                const double ft = value(trial);
                if (ft > fx + 1e-15) {
                    x = trial;
                    fx = ft;
                    improved = true;
                }
            }
        }
        if (!improved) {
            step /= 2.0;
        }
    }
    return {fx, sign * fx, ChshAngles{x[0], x[1], x[2], x[3]}};
}

double bayes_check(const BlochDirection &theta1, const BlochDirection &theta2, const BlochDirection &theta3) {
    const StateVector psi = build_ghz();
    const auto f1 = ProjectorFamily::spin(theta1, 1, 3);
    const auto f2 = ProjectorFamily::spin(theta2, 2, 3);
    const auto f3 = ProjectorFamily::spin(theta3, 3, 3);
    const auto p3 = outcome_probabilities(psi, f3);

    double worst = 0.0;
    for (std::size_t i = 0; i < f3.size(); ++i) {
        if (p3[i] < kZeroProbability) {
            throw ZeroProbabilityError("conditioning on an impossible ancilla outcome");
        }
        // Preselected: ancilla first, then particles 1 and 2.
        const StateVector pre = collapse(psi, f3, i);
        const auto p1_pre = outcome_probabilities(pre, f1);

        for (std::size_t a = 0; a < f1.size(); ++a) {
            for (std::size_t b = 0; b < f2.size(); ++b) {
                double lhs = 0.0;
                if (auto after1 = project_exact(pre, f1.projector(a))) {
                    lhs = p1_pre[a] * outcome_probabilities(*after1, f2)[b];
                }

                // Postselected: particles 1 and 2 first, then the ancilla.
                double prob_j = 0.0;
                double prob_i_given_j = 0.0;
                if (auto after1 = project_exact(psi, f1.projector(a))) {
                    prob_j = outcome_probabilities(psi, f1)[a] * outcome_probabilities(*after1, f2)[b];
                    if (auto after12 = project_exact(*after1, f2.projector(b))) {
                        prob_i_given_j = outcome_probabilities(*after12, f3)[i];
                    }
                }
                const double rhs = prob_j * prob_i_given_j / p3[i];
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    }
    return worst;
}

StateVector swap_outcome_state(BellLabel label) {
    const StateVector psi = build_factorable();
    const auto family = ProjectorFamily::bell(3, 4, 4);
    const StateVector after = collapse(psi, family, family.index_of(label));
    const StateVector partner = bell_state(label);

    // Contract the (3,4) factor against the observed Bell state.
    CVector pair = CVector::Zero(4);
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t m = 0; m < 4; ++m) {
            pair[static_cast<Eigen::Index>(k)] += std::conj(partner[m]) * after[k * 4 + m];
        }
    }
    StateVector out = StateVector::normalized(2, std::move(pair));
    if (std::abs(fidelity(tensor(out, partner), after) - 1.0) > kExactTol) {
        throw std::logic_error("post-measurement state does not factor");
    }
    return out;
}

std::map<JointOutcome, double> exact_joint_distribution(const Scenario &scenario, const SettingPair &setting,
                                                        std::span<const Step> order) {
    const int n = scenario.num_particles();
    std::vector<ProjectorFamily> families;
    std::vector<Step> steps(order.begin(), order.end());
    {
        auto sorted = steps;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != std::vector<Step>{Step::particle1, Step::particle2, Step::ancilla}) {
            throw std::invalid_argument("order must list each measurement exactly once");
        }
    }
    for (Step s : steps) {
        switch (s) {
        case Step::particle1:
            families.push_back(ProjectorFamily::spin(setting.a1, 1, n));
            break;
        case Step::particle2:
            families.push_back(ProjectorFamily::spin(setting.a2, 2, n));
            break;
        case Step::ancilla:
            families.push_back(scenario.ancilla_family());
            break;
        }
    }

    std::map<JointOutcome, double> dist;
    for (const OutcomePath &path : enumerate_paths(scenario.initial_state(), families)) {
        JointOutcome key{1, 1, 1};
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const OutcomeLabel &label = families[k].label(path.indices[k]);
            switch (steps[k]) {
            case Step::particle1:
                key.o1 = std::get<int>(label);
                break;
            case Step::particle2:
                key.o2 = std::get<int>(label);
                break;
            case Step::ancilla:
                key.ancilla = label;
                break;
            }
        }
        dist[key] += path.probability;
    }
    return dist;
}

std::map<OutcomeLabel, std::array<double, 4>>
exact_conditional_distribution(const Scenario &scenario, const SettingPair &setting, AncillaTiming timing) {
    static constexpr std::array<Step, 3> kFirst = {Step::ancilla, Step::particle1, Step::particle2};
    static constexpr std::array<Step, 3> kLast = {Step::particle1, Step::particle2, Step::ancilla};
    const auto joint = exact_joint_distribution(scenario, setting, timing == AncillaTiming::first ? kFirst : kLast);

    std::map<OutcomeLabel, std::array<double, 4>> cond;
    std::map<OutcomeLabel, double> marginal;
    for (const auto &[key, p] : joint) {
        cond[key.ancilla][outcome_slot(key.o1, key.o2)] += p;
        marginal[key.ancilla] += p;
    }
    for (auto it = cond.begin(); it != cond.end();) {
        const double m = marginal[it->first];
        if (m < kZeroProbability) {
            it = cond.erase(it);
            continue;
        }
        for (double &p : it->second) {
            p /= m;
        }
        ++it;
    }
    return cond;
}

} // namespace cfent
