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

// Command-line front end. Verbs: run, analyze, exact, bayes, certify, scan.
// Exit codes: 0 success, 1 usage or I/O error, 2 failed certificate or
// bound assertion.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfent/protocols.hpp"

namespace cfent::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAssertion = 2;

inline constexpr std::uint64_t kDefaultSeed = 1;
inline constexpr std::uint64_t kDefaultRunShots = 100000;
inline constexpr std::uint64_t kDefaultBayesTriples = 100;
inline constexpr std::uint64_t kDefaultCertifySamples = 20;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Verb { run, analyze, exact, bayes, certify, scan };
enum class Format { json, csv };

struct Command {
    Verb verb = Verb::run;
    ScenarioKind scenario = ScenarioKind::ghz;
    /// Ancilla spin axis for the GHZ scenario (radians).
    double theta3 = 1.5707963267948966;
    double phi3 = 0.0;
    /// Raw --angles values; 4 for CHSH verbs, 3 (theta1, theta2, theta3) for bayes.
    std::vector<double> angles;
    /// Trial count for run; number of random triples for bayes; number of
    /// sampled (theta1, theta2) for certify.
    std::uint64_t shots = 0;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
    std::string records;
    int grid = 24;
    Format format = Format::json;
    /// scan: eq1 | eq5 | product | phi_plus | phi_minus | psi_plus | psi_minus
    std::string state = "eq1";
};

/// `args` excludes the program name. Throws UsageError.
Command parse(const std::vector<std::string> &args);

/// Runs a parsed command, writing results to `out` (unless --out names a
/// file) and diagnostics to `err`. Returns the exit code.
int execute(const Command &cmd, std::ostream &out, std::ostream &err);

/// parse + execute with usage errors mapped to exit code 1.
int main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace cfent::cli
