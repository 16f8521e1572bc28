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

#include "cfent/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "cfent/histories.hpp"
#include "cfent/records.hpp"

namespace cfent::cli {

using nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBayesTol = 1e-12;
constexpr double kSeparableBound = 2.0;
constexpr double kBoundSlack = 1e-9;

std::vector<double> parse_angle_list(const std::string &text) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        const std::string item = text.substr(start, end - start);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v)) {
            throw UsageError("malformed angle '" + item + "' in --angles");
        }
        values.push_back(v);
        start = end + 1;
    }
    return values;
}

ChshAngles to_chsh(const std::vector<double> &v) {
    if (v.size() != 4) {
        throw UsageError("--angles expects a,a',b,b' (4 comma-separated radians)");
    }
    return {v[0], v[1], v[2], v[3]};
}

BlochDirection random_direction(RngStream &rng) {
    const double theta = std::acos(std::clamp(1.0 - 2.0 * rng.uniform(), -1.0, 1.0));
    return {theta, 2.0 * kPi * rng.uniform()};
}

BlochDirection ancilla_direction(const Command &cmd) {
    try {
        return {cmd.theta3, cmd.phi3};
    } catch (const std::invalid_argument &e) {
        throw UsageError(std::string("--theta3/--phi3: ") + e.what());
    }
}

Scenario scenario_of(const Command &cmd) {
    return cmd.scenario == ScenarioKind::ghz ? Scenario::ghz(ancilla_direction(cmd)) : Scenario::factorable();
}

ordered_json complex_json(Complex z) {
    return ordered_json::array({z.real(), z.imag()});
}

ordered_json state_json(const StateVector &s) {
    ordered_json amps = ordered_json::array();
    for (std::size_t i = 0; i < s.dim(); ++i) {
        amps.push_back(complex_json(s[i]));
    }
    return amps;
}

void emit(const Command &cmd, std::ostream &out, const std::string &text) {
    if (cmd.out.empty()) {
        out << text;
    } else {
        write_file_atomic(cmd.out, text);
    }
}

void require_json(const Command &cmd, const char *verb) {
    if (cmd.format != Format::json) {
        throw UsageError(std::string(verb) + " only supports --format json");
    }
}

int do_run(const Command &cmd, std::ostream &out) {
    require_json(cmd, "run");
    if (cmd.out.empty()) {
        throw UsageError("run requires --out <path>");
    }
    const Scenario scenario = scenario_of(cmd);
    const ChshAngles angles = cmd.angles.empty() ? default_menu_angles() : to_chsh(cmd.angles);
    const auto menu = angles.settings();
    const auto records = run_trials(scenario, menu, SettingPolicy::cycle, cmd.shots, cmd.seed);
    std::ostringstream buf;
    write_jsonl(buf, records);
    write_file_atomic(cmd.out, buf.str());
    ordered_json summary{{"records", records.size()}, {"out", cmd.out}, {"scenario", std::string(to_string(scenario.kind))},
                         {"seed", cmd.seed}};
    out << summary.dump() << '\n';
    return kExitOk;
}

std::string stats_csv(const std::vector<SubensembleStats> &all) {
    static constexpr const char *kNames[] = {"a,b", "a,b'", "a',b", "a',b'"};
    std::ostringstream csv;
    csv.precision(17);
    csv << "label,pair,a1_theta,a1_phi,a2_theta,a2_phi,n,E,stderr\n";
    for (const auto &s : all) {
        const std::string label = s.label ? to_string(*s.label) : "all";
        for (std::size_t k = 0; k < s.correlators.size(); ++k) {
            const auto &c = s.correlators[k];
            if (c.n == 0) {
                continue;
            }
            csv << label << ",\"" << kNames[k] << "\"," << c.setting.a1.theta() << ',' << c.setting.a1.phi() << ','
                << c.setting.a2.theta() << ',' << c.setting.a2.phi() << ',' << c.n << ',' << c.e_hat << ','
                << c.std_error << '\n';
        }
        if (s.chsh) {
            csv << label << ",chsh,,,,," << s.count << ',' << *s.chsh << ',' << s.chsh_stderr << '\n';
        }
    }
    return csv.str();
}

int do_analyze(const Command &cmd, std::ostream &out) {
    if (cmd.records.empty()) {
        throw UsageError("analyze requires --records <path>");
    }
    std::ifstream in(cmd.records);
    if (!in) {
        throw std::runtime_error("cannot open records file " + cmd.records);
    }
    const auto records = read_jsonl(in);
    if (records.empty()) {
        throw std::runtime_error("records file is empty: " + cmd.records);
    }
    const ScenarioKind kind = records.front().scenario;
    for (const auto &r : records) {
        if (r.scenario != kind) {
            throw std::runtime_error("records mix scenarios; line " + std::to_string(r.run + 1));
        }
    }
    const std::optional<ChshAngles> fixed =
        cmd.angles.empty() ? std::nullopt : std::optional<ChshAngles>(to_chsh(cmd.angles));

    std::vector<SubensembleStats> all;
    all.push_back(estimate_stats(records, fixed.value_or(default_menu_angles())));
    const auto groups = partition_records(records);
    ordered_json subs = ordered_json::array();
    for (const auto &[label, members] : groups) {
        const ChshAngles angles = fixed.value_or(preset_angles(kind, label));
        all.push_back(estimate_stats(members, angles, label));
        auto j = stats_to_json(all.back());
        j["angles"] = angles_to_json(angles);
        subs.push_back(std::move(j));
    }

    if (cmd.format == Format::csv) {
        emit(cmd, out, stats_csv(all));
        return kExitOk;
    }
    ordered_json doc;
    doc["scenario"] = std::string(to_string(kind));
    doc["total"] = records.size();
    auto whole = stats_to_json(all.front());
    whole["angles"] = angles_to_json(fixed.value_or(default_menu_angles()));
    doc["ensemble"] = std::move(whole);
    doc["subensembles"] = std::move(subs);
    emit(cmd, out, doc.dump(2) + "\n");
    return kExitOk;
}

ordered_json chsh_block(const StateVector &state, const ChshAngles &angles) {
    const auto rho = DensityMatrix::from_pure(state);
    const ChshScan best = optimize_chsh(rho);
    return {{"angles", angles_to_json(angles)},
            {"chsh", exact_chsh(rho, angles)},
            {"optimal", {{"chsh", best.s}, {"angles", angles_to_json(best.argmax)}}}};
}

int do_exact(const Command &cmd, std::ostream &out) {
    require_json(cmd, "exact");
    const Scenario scenario = scenario_of(cmd);
    const std::optional<ChshAngles> fixed =
        cmd.angles.empty() ? std::nullopt : std::optional<ChshAngles>(to_chsh(cmd.angles));
    const StateVector psi = scenario.initial_state();
    const auto family = scenario.ancilla_family();
    const auto probs = outcome_probabilities(psi, family);

    ordered_json doc;
    doc["scenario"] = std::string(to_string(scenario.kind));
    ordered_json branches = ordered_json::array();
    if (scenario.kind == ScenarioKind::ghz) {
        doc["ancilla_direction"] = direction_to_json(scenario.ancilla_direction);
        doc["degenerate"] = scenario.degenerate();
        for (int outcome : {1, -1}) {
            const auto branch = conditional_pair_state(scenario.ancilla_direction, outcome);
            ordered_json b{{"ancilla", outcome},
                           {"probability", probs[family.index_of(outcome)]},
                           {"alpha", complex_json(branch.alpha)},
                           {"beta", complex_json(branch.beta)},
                           {"state", state_json(branch.state)}};
            b.update(chsh_block(branch.state, fixed.value_or(preset_angles(scenario.kind, outcome))));
            branches.push_back(std::move(b));
        }
    } else {
        for (BellLabel label : kBellLabels) {
            const StateVector pair = swap_outcome_state(label);
            ordered_json b{{"ancilla", std::string(to_string(label))},
                           {"probability", probs[family.index_of(label)]},
                           {"state", state_json(pair)}};
            b.update(chsh_block(pair, fixed.value_or(preset_angles(scenario.kind, label))));
            branches.push_back(std::move(b));
        }
    }
    doc["branches"] = std::move(branches);

    const int keep[] = {1, 2};
    const auto reduced = partial_trace(DensityMatrix::from_pure(psi), keep);
    const ChshAngles whole_angles = fixed.value_or(default_menu_angles());
    const ChshScan scan = grid_scan_chsh(reduced, cmd.grid);
    doc["ensemble"] = {{"angles", angles_to_json(whole_angles)},
                       {"chsh", exact_chsh(reduced, whole_angles)},
                       {"grid_scan", {{"grid", cmd.grid}, {"max_abs_s", scan.max_abs_s}, {"argmax", angles_to_json(scan.argmax)}}}};
    emit(cmd, out, doc.dump(2) + "\n");
    return kExitOk;
}

int do_bayes(const Command &cmd, std::ostream &out) {
    require_json(cmd, "bayes");
    ordered_json doc;
    double worst = 0.0;
    if (!cmd.angles.empty()) {
        if (cmd.angles.size() != 3) {
            throw UsageError("bayes --angles expects theta1,theta2,theta3 (x-z plane radians)");
        }
        worst = bayes_check(BlochDirection::in_xz_plane(cmd.angles[0]), BlochDirection::in_xz_plane(cmd.angles[1]),
                            BlochDirection::in_xz_plane(cmd.angles[2]));
        doc["triples"] = 1;
    } else {
        for (std::uint64_t k = 0; k < cmd.shots; ++k) {
            RngStream rng(cmd.seed, k);
            const auto t1 = random_direction(rng);
            const auto t2 = random_direction(rng);
            const auto t3 = random_direction(rng);
            worst = std::max(worst, bayes_check(t1, t2, t3));
        }
        doc["triples"] = cmd.shots;
        doc["seed"] = cmd.seed;
    }
    const bool pass = worst < kBayesTol;
    doc["max_discrepancy"] = worst;
    doc["tolerance"] = kBayesTol;
    doc["pass"] = pass;
    emit(cmd, out, doc.dump(2) + "\n");
    return pass ? kExitOk : kExitAssertion;
}

int do_certify(const Command &cmd, std::ostream &out) {
    require_json(cmd, "certify");
    const Scenario scenario = scenario_of(cmd);
    ordered_json samples = ordered_json::array();
    bool pass = true;
    double max_defect = 0.0;
    double max_err = 0.0;
    std::string designated;
    bool degenerate = false;
    bool entangled = true;
    for (std::uint64_t k = 0; k < cmd.shots; ++k) {
        RngStream rng(cmd.seed, k);
        // The first sample is the z,z configuration; the rest are random.
        const BlochDirection t1 = k == 0 ? BlochDirection::z() : random_direction(rng);
        const BlochDirection t2 = k == 0 ? BlochDirection::z() : random_direction(rng);
        const auto report = counterfactual_certificate(scenario, t1, t2);
        pass = pass && report.pass;
        max_defect = std::max(max_defect, report.max_defect);
        max_err = std::max(max_err, report.max_probability_error);
        designated = report.designated;
        degenerate = report.degenerate;
        entangled = report.designated_entangled;
        samples.push_back(certificate_to_json(report));
    }
    ordered_json doc;
    doc["scenario"] = std::string(to_string(scenario.kind));
    if (scenario.kind == ScenarioKind::ghz) {
        doc["ancilla_direction"] = direction_to_json(scenario.ancilla_direction);
    }
    doc["designated"] = designated;
    doc["designated_entangled"] = entangled;
    doc["degenerate"] = degenerate;
    doc["max_defect"] = max_defect;
    doc["max_probability_error"] = max_err;
    doc["samples"] = std::move(samples);
    doc["pass"] = pass;
    emit(cmd, out, doc.dump(2) + "\n");
    return pass ? kExitOk : kExitAssertion;
}

DensityMatrix scan_state(const std::string &name, bool &separable) {
    separable = true;
    if (name == "eq1") {
        return partial_trace(DensityMatrix::from_pure(build_ghz()), {1, 2});
    }
    if (name == "eq5") {
        return partial_trace(DensityMatrix::from_pure(build_factorable()), {1, 2});
    }
    if (name == "product") {
        return DensityMatrix::from_pure(StateVector::basis(2, 0));
    }
    separable = false;
    try {
        return DensityMatrix::from_pure(bell_state(parse_bell_label(name)));
    } catch (const std::invalid_argument &) {
        throw UsageError("unknown --state '" + name + "' (eq1|eq5|product|phi_plus|phi_minus|psi_plus|psi_minus)");
    }
}

int do_scan(const Command &cmd, std::ostream &out) {
    bool separable = true;
    const DensityMatrix rho = scan_state(cmd.state, separable);
    const ChshScan scan = grid_scan_chsh(rho, cmd.grid);
    const bool bound_ok = !separable || scan.max_abs_s <= kSeparableBound + kBoundSlack;
    if (cmd.format == Format::csv) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "state,grid,max_abs_s,s,a,a_prime,b,b_prime,separable,bound_ok\n"
            << cmd.state << ',' << cmd.grid << ',' << scan.max_abs_s << ',' << scan.s << ',' << scan.argmax.a << ','
            << scan.argmax.a_prime << ',' << scan.argmax.b << ',' << scan.argmax.b_prime << ','
            << (separable ? "true" : "false") << ',' << (bound_ok ? "true" : "false") << '\n';
        emit(cmd, out, csv.str());
    } else {
        ordered_json doc{{"state", cmd.state},
                         {"grid", cmd.grid},
                         {"max_abs_s", scan.max_abs_s},
                         {"s", scan.s},
                         {"argmax", angles_to_json(scan.argmax)},
                         {"separable", separable},
                         {"bound_ok", bound_ok}};
        emit(cmd, out, doc.dump(2) + "\n");
    }
    return bound_ok ? kExitOk : kExitAssertion;
}

} // namespace

Command parse(const std::vector<std::string> &args) {
    CLI::App app{"Counterfactual entanglement simulation and verification toolkit", "cfent"};
    app.require_subcommand(1, 1);

    Command cmd;
    std::string scenario = "ghz";
    std::string angles;
    std::string format = "json";
    std::uint64_t shots = 0;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--seed", cmd.seed, "Random seed");
        sub->add_option("--out", cmd.out, "Output path (default: stdout)");
        sub->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    };
    auto add_scenario = [&](CLI::App *sub) {
        sub->add_option("--scenario", scenario, "ghz|factorable")->check(CLI::IsMember({"ghz", "factorable"}));
        sub->add_option("--theta3", cmd.theta3, "GHZ ancilla polar angle (radians)");
        sub->add_option("--phi3", cmd.phi3, "GHZ ancilla azimuth (radians)");
    };

    CLI::App *run = app.add_subcommand("run", "Simulate trials and write a JSONL record log");
    add_common(run);
    add_scenario(run);
    run->add_option("--angles", angles, "a,a',b,b' setting menu (radians, x-z plane)");
    run->add_option("--shots", shots, "Number of trials");

    CLI::App *analyze = app.add_subcommand("analyze", "Partition a record log and estimate CHSH statistics");
    add_common(analyze);
    analyze->add_option("--records", cmd.records, "JSONL record log");
    analyze->add_option("--angles", angles, "a,a',b,b' (default: per-subensemble presets)");

    CLI::App *exact = app.add_subcommand("exact", "Exact conditional states and CHSH values");
    add_common(exact);
    add_scenario(exact);
    exact->add_option("--angles", angles, "a,a',b,b' (default: presets)");
    exact->add_option("--grid", cmd.grid, "Grid points per angle for the ensemble scan");

    CLI::App *bayes = app.add_subcommand("bayes", "Check pre/postselection equivalence by Bayes' rule");
    add_common(bayes);
    bayes->add_option("--angles", angles, "theta1,theta2,theta3 (x-z plane radians)");
    bayes->add_option("--shots", shots, "Number of random direction triples");

    CLI::App *certify = app.add_subcommand("certify", "Consistent-histories certificate");
    add_common(certify);
    add_scenario(certify);
    certify->add_option("--shots", shots, "Number of sampled (theta1, theta2)");

    CLI::App *scan = app.add_subcommand("scan", "Grid scan of |S| for a fixed two-qubit state");
    add_common(scan);
    scan->add_option("--state", cmd.state, "eq1|eq5|product|phi_plus|phi_minus|psi_plus|psi_minus");
    scan->add_option("--grid", cmd.grid, "Grid points per angle");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        throw UsageError(app.help());
    } catch (const CLI::ParseError &e) {
        throw UsageError(e.what());
    }

    const std::pair<CLI::App *, Verb> verbs[] = {{run, Verb::run},         {analyze, Verb::analyze},
                                                 {exact, Verb::exact},     {bayes, Verb::bayes},
                                                 {certify, Verb::certify}, {scan, Verb::scan}};
    CLI::App *chosen = nullptr;
    for (const auto &[sub, verb] : verbs) {
        if (sub->parsed()) {
            cmd.verb = verb;
            chosen = sub;
        }
    }

    cmd.scenario = parse_scenario(scenario);
    cmd.format = format == "csv" ? Format::csv : Format::json;
    if (!angles.empty()) {
        cmd.angles = parse_angle_list(angles);
    }
    const bool shots_given = chosen->get_option_no_throw("--shots") != nullptr && chosen->count("--shots") > 0;
    if (shots_given && shots == 0) {
        throw UsageError("--shots must be at least 1");
    }
    switch (cmd.verb) {
    case Verb::run:
        cmd.shots = shots_given ? shots : kDefaultRunShots;
        break;
    case Verb::bayes:
        cmd.shots = shots_given ? shots : kDefaultBayesTriples;
        break;
    case Verb::certify:
        cmd.shots = shots_given ? shots : kDefaultCertifySamples;
        break;
    default:
        break;
    }
    if (cmd.grid < 1) {
        throw UsageError("--grid must be at least 1");
    }
    if (cmd.verb == Verb::run && cmd.out.empty()) {
        throw UsageError("run requires --out <path>");
    }
    if (cmd.verb == Verb::analyze && cmd.records.empty()) {
        throw UsageError("analyze requires --records <path>");
    }
    return cmd;
}

int execute(const Command &cmd, std::ostream &out, std::ostream &err) {
    try {
        switch (cmd.verb) {
        case Verb::run:
            return do_run(cmd, out);
        case Verb::analyze:
            return do_analyze(cmd, out);
        case Verb::exact:
            return do_exact(cmd, out);
        case Verb::bayes:
            return do_bayes(cmd, out);
        case Verb::certify:
            return do_certify(cmd, out);
        case Verb::scan:
            return do_scan(cmd, out);
        }
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const RecordFormatError &e) {
        err << "malformed record at " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

int main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    Command cmd;
    try {
        cmd = parse(args);
    } catch (const UsageError &e) {
        err << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument &e) {
        err << e.what() << '\n';
        return kExitUsage;
    }
    return execute(cmd, out, err);
}

} // namespace cfent::cli
