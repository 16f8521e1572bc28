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

// Born-rule measurement engine: exact outcome probabilities, collapse,
// sequential measurements and seeded sampling.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cfent/qcore.hpp"

namespace cfent {

/// Collapse threshold separating genuine zeros from rounding residue.
inline constexpr double kZeroProbability = 1e-12;

/// Spin outcomes are +1/-1, Bell-basis outcomes carry a BellLabel.
using OutcomeLabel = std::variant<int, BellLabel>;

std::string to_string(const OutcomeLabel &label);

/// Raised when a collapse is requested onto an outcome of (numerically) zero
/// probability, i.e. an impossible postselection branch.
class ZeroProbabilityError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Complete family of mutually orthogonal projectors with outcome labels.
class ProjectorFamily {
  public:
    /// Throws std::invalid_argument unless the projectors are orthogonal,
    /// complete and share one dimension.
    ProjectorFamily(std::vector<Operator> projectors, std::vector<OutcomeLabel> labels);

    /// sigma . n on `particle` of a num_qubits register, labels {+1, -1}.
    static ProjectorFamily spin(const BlochDirection &n, int particle, int num_qubits);
    /// Bell-basis measurement on particles (p, q), labels in kBellLabels order.
    static ProjectorFamily bell(int p, int q, int num_qubits);

    std::size_t size() const { return projectors_.size(); }
    std::size_t dim() const { return projectors_.front().dim(); }
    const Operator &projector(std::size_t i) const { return projectors_.at(i); }
    const OutcomeLabel &label(std::size_t i) const { return labels_.at(i); }
    const std::vector<Operator> &projectors() const { return projectors_; }
    /// Throws std::invalid_argument if the label is not in the family.
    std::size_t index_of(const OutcomeLabel &label) const;

  private:
    std::vector<Operator> projectors_;
    std::vector<OutcomeLabel> labels_;
};

struct MeasurementSetting {
    int particle = 1;
    BlochDirection direction;
};

/// Deterministic random stream keyed by (seed, stream_id). The k-th draw is a
/// pure function of (seed, stream_id, k), so trials can be generated in any
/// order or in parallel with identical results.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::vector<double> outcome_probabilities(const StateVector &state, const ProjectorFamily &family);

/// P|psi> renormalized. Throws ZeroProbabilityError below kZeroProbability.
StateVector collapse(const StateVector &state, const ProjectorFamily &family, std::size_t outcome_index);

struct Measured {
    std::size_t index;
    StateVector state;
};

/// Samples one outcome by the Born rule and returns the collapsed state.
Measured measure(const StateVector &state, const ProjectorFamily &family, RngStream &rng);

struct SequenceResult {
    std::vector<int> outcomes;
    StateVector final_state;
};

/// Spin measurements applied in list order, each conditioned on the earlier
/// collapses.
SequenceResult measure_sequence(const StateVector &state, std::span<const MeasurementSetting> settings,
                                RngStream &rng);

/// Throws std::invalid_argument for a non-Hermitian observable.
double expectation(const StateVector &state, const Operator &obs);
double expectation(const DensityMatrix &rho, const Operator &obs);

/// E(a, b) = <(sigma.a) (x) (sigma.b)> on a two-qubit state.
double correlator(const StateVector &state, const BlochDirection &a, const BlochDirection &b);
double correlator(const DensityMatrix &rho, const BlochDirection &a, const BlochDirection &b);

/// One branch of an exhaustive measurement enumeration. `indices[k]` is the
/// outcome index of the k-th family in measurement order.
struct OutcomePath {
    std::vector<std::size_t> indices;
    double probability;
};

/// Enumerates every outcome path of `families` measured in order. The path
/// probability is |P_k ... P_1 psi|^2, so zero-probability paths are kept
/// (with probability 0) and nothing is renormalized along the way.
std::vector<OutcomePath> enumerate_paths(const StateVector &state, std::span<const ProjectorFamily> families);

} // namespace cfent
