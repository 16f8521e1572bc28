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

// Persistence: trial records as JSON lines, analyses and certificates as
// single JSON documents.

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfent/histories.hpp"
#include "cfent/protocols.hpp"

namespace cfent {

class RecordFormatError : public std::runtime_error {
  public:
    RecordFormatError(std::size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

nlohmann::ordered_json record_to_json(const TrialRecord &record);
/// Throws std::invalid_argument on missing or ill-typed fields.
TrialRecord record_from_json(const nlohmann::json &j);

void write_jsonl(std::ostream &out, std::span<const TrialRecord> records);
/// Blank lines are skipped; anything else malformed throws RecordFormatError.
std::vector<TrialRecord> read_jsonl(std::istream &in);

nlohmann::ordered_json direction_to_json(const BlochDirection &d);
nlohmann::ordered_json angles_to_json(const ChshAngles &angles);
nlohmann::ordered_json stats_to_json(const SubensembleStats &stats);
nlohmann::ordered_json certificate_to_json(const CertificateReport &report);

/// Writes via a sibling temporary file and rename. Throws std::runtime_error.
void write_file_atomic(const std::string &path, const std::string &content);

} // namespace cfent
