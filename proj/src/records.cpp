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

#include "cfent/records.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

namespace cfent {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

int spin_field(const json &j, const char *key) {
    const json &v = j.at(key);
    if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1)) {
        throw std::invalid_argument(std::string("field '") + key + "' must be +1 or -1");
    }
    return v.get<int>();
}

double real_field(const json &j, const char *key) {
    const json &v = j.at(key);
    if (!v.is_number()) {
        throw std::invalid_argument(std::string("field '") + key + "' must be a number");
    }
    return v.get<double>();
}

ordered_json label_to_json(const OutcomeLabel &label) {
    if (const int *spin = std::get_if<int>(&label)) {
        return *spin;
    }
    return std::string(to_string(std::get<BellLabel>(label)));
}

} // namespace

ordered_json record_to_json(const TrialRecord &r) {
    ordered_json j;
    j["run"] = r.run;
    j["scenario"] = std::string(to_string(r.scenario));
    j["a1_theta"] = r.a1.theta();
    j["a1_phi"] = r.a1.phi();
    j["a2_theta"] = r.a2.theta();
    j["a2_phi"] = r.a2.phi();
    j["o1"] = r.o1;
    j["o2"] = r.o2;
    j["ancilla"] = label_to_json(r.ancilla);
    if (r.ancilla_direction) {
        j["anc_theta"] = r.ancilla_direction->theta();
        j["anc_phi"] = r.ancilla_direction->phi();
    }
    return j;
}

TrialRecord record_from_json(const json &j) {
    try {
        if (!j.is_object()) {
            throw std::invalid_argument("record must be a JSON object");
        }
        TrialRecord r;
        const json &run = j.at("run");
        if (!run.is_number_unsigned() && !(run.is_number_integer() && run.get<long long>() >= 0)) {
            throw std::invalid_argument("field 'run' must be a non-negative integer");
        }
        r.run = run.get<std::uint64_t>();
        r.scenario = parse_scenario(j.at("scenario").get<std::string>());
        r.a1 = BlochDirection(real_field(j, "a1_theta"), real_field(j, "a1_phi"));
        r.a2 = BlochDirection(real_field(j, "a2_theta"), real_field(j, "a2_phi"));
        r.o1 = spin_field(j, "o1");
        r.o2 = spin_field(j, "o2");
        if (r.scenario == ScenarioKind::ghz) {
            r.ancilla = spin_field(j, "ancilla");
            r.ancilla_direction = BlochDirection(real_field(j, "anc_theta"), real_field(j, "anc_phi"));
        } else {
            r.ancilla = parse_bell_label(j.at("ancilla").get<std::string>());
            if (j.contains("anc_theta") || j.contains("anc_phi")) {
                throw std::invalid_argument("factorable records carry no ancilla direction");
            }
        }
        return r;
    } catch (const json::exception &e) {
        throw std::invalid_argument(e.what());
    }
}

void write_jsonl(std::ostream &out, std::span<const TrialRecord> records) {
    for (const TrialRecord &r : records) {
        out << record_to_json(r).dump() << '\n';
    }
}

std::vector<TrialRecord> read_jsonl(std::istream &in) {
    std::vector<TrialRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            records.push_back(record_from_json(json::parse(line)));
        } catch (const std::exception &e) {
            throw RecordFormatError(line_no, e.what());
        }
    }
    return records;
}

ordered_json direction_to_json(const BlochDirection &d) {
    return {{"theta", d.theta()}, {"phi", d.phi()}};
}

ordered_json angles_to_json(const ChshAngles &angles) {
    return {{"a", angles.a}, {"a_prime", angles.a_prime}, {"b", angles.b}, {"b_prime", angles.b_prime}};
}

ordered_json stats_to_json(const SubensembleStats &stats) {
    ordered_json j;
    j["label"] = stats.label ? label_to_json(*stats.label) : ordered_json("all");
    j["count"] = stats.count;
    ordered_json table = ordered_json::array();
    static constexpr const char *kNames[] = {"a,b", "a,b'", "a',b", "a',b'"};
    for (std::size_t k = 0; k < stats.correlators.size(); ++k) {
        const auto &c = stats.correlators[k];
        if (c.n == 0) {
            continue;
        }
        table.push_back({{"pair", kNames[k]},
                         {"a1", direction_to_json(c.setting.a1)},
                         {"a2", direction_to_json(c.setting.a2)},
                         {"n", c.n},
                         {"E", c.e_hat},
                         {"stderr", c.std_error}});
    }
    j["correlators"] = std::move(table);
    j["chsh"] = stats.chsh ? ordered_json(*stats.chsh) : ordered_json(nullptr);
    j["chsh_stderr"] = stats.chsh_stderr;
    if (!stats.missing.empty()) {
        j["missing"] = stats.missing;
    }
    return j;
}

ordered_json certificate_to_json(const CertificateReport &report) {
    ordered_json entries = ordered_json::array();
    for (const auto &e : report.entries) {
        ordered_json probs = ordered_json::object();
        for (const auto &[name, p] : e.probabilities) {
            probs[name] = p;
        }
        entries.push_back({{"i", e.i}, {"j", e.j}, {"trDF", e.tr_df}, {"defect", e.defect}, {"probabilities", probs}});
    }
    ordered_json j;
    j["scenario"] = std::string(to_string(report.scenario));
    j["ancilla"] = label_to_json(report.ancilla_outcome);
    j["theta1"] = direction_to_json(report.theta1);
    j["theta2"] = direction_to_json(report.theta2);
    j["designated"] = report.designated;
    j["designated_entangled"] = report.designated_entangled;
    j["degenerate"] = report.degenerate;
    j["max_defect"] = report.max_defect;
    j["max_probability_error"] = report.max_probability_error;
    j["entries"] = std::move(entries);
    j["pass"] = report.pass;
    return j;
}

void write_file_atomic(const std::string &path, const std::string &content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
    }
}

} // namespace cfent
