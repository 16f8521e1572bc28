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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

#include "test_util.hpp"

using namespace cfent;
using cfent::testing::Gen;

namespace {

TrialRecord random_record(Gen &gen, std::uint64_t run) {
    TrialRecord r;
    r.run = run;
    r.scenario = gen.uniform() < 0.5 ? ScenarioKind::ghz : ScenarioKind::factorable;
    r.a1 = gen.direction();
    r.a2 = gen.direction();
    r.o1 = gen.uniform() < 0.5 ? 1 : -1;
    r.o2 = gen.uniform() < 0.5 ? 1 : -1;
    if (r.scenario == ScenarioKind::ghz) {
        r.ancilla = gen.uniform() < 0.5 ? 1 : -1;
        r.ancilla_direction = gen.direction();
    } else {
        r.ancilla = kBellLabels[static_cast<std::size_t>(gen.uniform() * 4) % 4];
    }
    return r;
}

} // namespace

TEST(Records, field_names_and_order) {
    TrialRecord r;
    r.run = 7;
    r.a1 = BlochDirection::x();
    r.ancilla = -1;
    r.ancilla_direction = BlochDirection::x();
    const auto j = record_to_json(r);
    std::vector<std::string> keys;
    for (const auto &[k, v] : j.items()) {
        keys.push_back(k);
    }
    EXPECT_EQ(keys, (std::vector<std::string>{"run", "scenario", "a1_theta", "a1_phi", "a2_theta", "a2_phi", "o1",
                                              "o2", "ancilla", "anc_theta", "anc_phi"}));
    EXPECT_EQ(j["scenario"], "ghz");
    EXPECT_EQ(j["ancilla"], -1);

    r.scenario = ScenarioKind::factorable;
    r.ancilla = BellLabel::psi_minus;
    r.ancilla_direction.reset();
    const auto f = record_to_json(r);
    EXPECT_EQ(f["ancilla"], "psi_minus");
    EXPECT_FALSE(f.contains("anc_theta"));
    EXPECT_FALSE(f.contains("anc_phi"));
}

TEST(Records, jsonl_round_trip_is_exact) {
    Gen gen(151);
    std::vector<TrialRecord> records;
    for (std::uint64_t i = 0; i < 500; ++i) {
        records.push_back(random_record(gen, i));
    }
    std::stringstream ss;
    write_jsonl(ss, records);
    const std::string first = ss.str();
    auto back = read_jsonl(ss);
    ASSERT_EQ(back.size(), records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(back[i], records[i]) << "record " << i;
    }
    std::stringstream again;
    write_jsonl(again, back);
    EXPECT_EQ(again.str(), first);
}

TEST(Records, simulated_records_round_trip) {
    for (const Scenario &s : {Scenario::ghz(BlochDirection(1.3, 0.2)), Scenario::factorable()}) {
        auto records = run_trials(s, default_menu_angles().settings(), SettingPolicy::random, 2000, 9);
        std::stringstream ss;
        write_jsonl(ss, records);
        EXPECT_EQ(read_jsonl(ss), records);
    }
}

TEST(Records, malformed_lines_report_line_numbers) {
    Gen gen(157);
    const std::string good = record_to_json(random_record(gen, 0)).dump();
    const std::vector<std::pair<std::string, std::size_t>> cases = {
        {good + "\n" + good + "\n{not json\n", 3},
        {good + "\n\n" + R"({"run":1})" + "\n", 3},
        {R"({"run":0,"scenario":"ghz","a1_theta":0,"a1_phi":0,"a2_theta":0,"a2_phi":0,"o1":2,"o2":1,"ancilla":1,"anc_theta":0,"anc_phi":0})"
         "\n",
         1},
        {good + "\n" +
             R"({"run":1,"scenario":"factorable","a1_theta":0,"a1_phi":0,"a2_theta":0,"a2_phi":0,"o1":1,"o2":1,"ancilla":"chi"})"
             "\n",
         2},
        {R"({"run":-3,"scenario":"ghz","a1_theta":0,"a1_phi":0,"a2_theta":0,"a2_phi":0,"o1":1,"o2":1,"ancilla":1,"anc_theta":0,"anc_phi":0})"
         "\n",
         1},
        {R"({"run":0,"scenario":"werner","a1_theta":0,"a1_phi":0,"a2_theta":0,"a2_phi":0,"o1":1,"o2":1,"ancilla":1})"
         "\n",
         1},
        {"[1,2,3]\n", 1},
    };
    for (const auto &[text, line] : cases) {
        std::stringstream ss(text);
        try {
            read_jsonl(ss);
            ADD_FAILURE() << "accepted: " << text;
        } catch (const RecordFormatError &e) {
            EXPECT_EQ(e.line(), line) << e.what();
            EXPECT_NE(std::string(e.what()).find("line " + std::to_string(line)), std::string::npos);
        }
    }
}

TEST(Records, blank_lines_are_skipped) {
    Gen gen(163);
    const auto r = random_record(gen, 4);
    std::stringstream ss("\n  \n" + record_to_json(r).dump() + "\n\n");
    auto back = read_jsonl(ss);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], r);
}

TEST(Records, stats_serialization) {
    auto records = run_trials(Scenario::ghz(), default_menu_angles().settings(), SettingPolicy::cycle, 400, 1);
    auto stats = estimate_stats(records, default_menu_angles());
    const auto j = stats_to_json(stats);
    EXPECT_EQ(j["label"], "all");
    EXPECT_EQ(j["count"], 400);
    ASSERT_EQ(j["correlators"].size(), 4u);
    EXPECT_EQ(j["correlators"][0]["n"], 100);
    EXPECT_TRUE(j["chsh"].is_number());
    EXPECT_TRUE(j["missing"].empty());

    auto partial = estimate_stats(std::vector<TrialRecord>(3), default_menu_angles(), OutcomeLabel{BellLabel::phi_plus});
    const auto p = stats_to_json(partial);
    EXPECT_EQ(p["label"], "phi_plus");
    EXPECT_TRUE(p["chsh"].is_null());
    EXPECT_EQ(p["missing"].size(), 4u);
}

TEST(Records, certificate_serialization) {
    auto report = counterfactual_certificate(Scenario::ghz(), BlochDirection::z(), BlochDirection::z());
    const auto j = certificate_to_json(report);
    EXPECT_EQ(j["scenario"], "ghz");
    EXPECT_EQ(j["pass"], true);
    ASSERT_FALSE(j["entries"].empty());
    const auto &e = j["entries"][0];
    for (const char *key : {"i", "j", "trDF", "defect", "probabilities"}) {
        EXPECT_TRUE(e.contains(key)) << key;
    }
    EXPECT_NEAR(e["probabilities"]["phi_plus"].get<double>(), 1.0, 1e-10);
}

TEST(Records, atomic_write_replaces_file) {
    const auto dir = std::filesystem::temp_directory_path() / "cfent_records_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "out.txt").string();
    write_file_atomic(path, "first\n");
    write_file_atomic(path, "second\n");
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "second\n");
    EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
    std::filesystem::remove_all(dir);
    EXPECT_THROW(write_file_atomic((dir / "missing" / "x.txt").string(), "x"), std::runtime_error);
}
