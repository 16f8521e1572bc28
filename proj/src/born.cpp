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

#include "cfent/born.hpp"

#include <algorithm>
#include <cmath>

namespace cfent {

namespace {

constexpr double kClampSlack = 1e-14;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double born_probability(const CVector &psi, const Operator &p) {
    double prob = psi.dot(p.matrix() * psi).real();
    if (prob < -kClampSlack || prob > 1.0 + kClampSlack) {
        throw std::logic_error("Born probability outside [0, 1]: " + std::to_string(prob));
    }
    return std::clamp(prob, 0.0, 1.0);
}

void check_dims(const StateVector &state, const ProjectorFamily &family) {
    if (state.dim() != family.dim()) {
        throw std::invalid_argument("state and measurement dimensions differ");
    }
}

std::size_t sample_index(const std::vector<double> &probs, double u) {
    double cum = 0.0;
    std::size_t last_possible = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < kZeroProbability) {
            continue;
        }
        cum += probs[i];
        last_possible = i;
        if (u < cum) {
            return i;
        }
    }
    // Rounding left u above the accumulated total.
    return last_possible;
}

} // namespace

std::string to_string(const OutcomeLabel &label) {
    if (const int *spin = std::get_if<int>(&label)) {
        return *spin > 0 ? "+1" : "-1";
    }
    return std::string(to_string(std::get<BellLabel>(label)));
}

ProjectorFamily::ProjectorFamily(std::vector<Operator> projectors, std::vector<OutcomeLabel> labels)
    : projectors_(std::move(projectors)), labels_(std::move(labels)) {
    if (projectors_.empty() || projectors_.size() != labels_.size()) {
        throw std::invalid_argument("projector family needs one label per projector");
    }
    const std::size_t dim = projectors_.front().dim();
    CMatrix sum = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < projectors_.size(); ++i) {
        const Operator &p = projectors_[i];
        if (p.dim() != dim) {
            throw std::invalid_argument("projector dimensions differ");
        }
        if (!p.is_projector()) {
            throw std::invalid_argument("family member is not a projector");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if ((p.matrix() * projectors_[j].matrix()).cwiseAbs().maxCoeff() > kExactTol) {
                throw std::invalid_argument("family projectors are not orthogonal");
            }
            if (labels_[i] == labels_[j]) {
                throw std::invalid_argument("duplicate outcome label");
            }
        }
        sum += p.matrix();
    }
    if (max_abs_diff(sum, CMatrix::Identity(sum.rows(), sum.cols())) > kExactTol) {
        throw std::invalid_argument("projector family is not complete");
    }
}

ProjectorFamily ProjectorFamily::spin(const BlochDirection &n, int particle, int num_qubits) {
    auto basis = spin_eigenbasis(n);
    const int where[] = {particle};
    return ProjectorFamily({embed(cfent::projector(basis.up), where, num_qubits), embed(cfent::projector(basis.down), where, num_qubits)},
                           {OutcomeLabel{1}, OutcomeLabel{-1}});
}

ProjectorFamily ProjectorFamily::bell(int p, int q, int num_qubits) {
    const int where[] = {p, q};
    std::vector<Operator> projectors;
    std::vector<OutcomeLabel> labels;
    for (BellLabel label : kBellLabels) {
        projectors.push_back(embed(cfent::projector(bell_state(label)), where, num_qubits));
        labels.emplace_back(label);
    }
    return {std::move(projectors), std::move(labels)};
}

std::size_t ProjectorFamily::index_of(const OutcomeLabel &label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        throw std::invalid_argument("outcome label " + to_string(label) + " not in family");
    }
    return static_cast<std::size_t>(it - labels_.begin());
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(splitmix64(splitmix64(seed) ^ stream_id)) {}

std::uint64_t RngStream::next_u64() {
    return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::vector<double> outcome_probabilities(const StateVector &state, const ProjectorFamily &family) {
    check_dims(state, family);
    std::vector<double> probs;
    probs.reserve(family.size());
    for (const Operator &p : family.projectors()) {
        probs.push_back(born_probability(state.amplitudes(), p));
    }
    return probs;
}

StateVector collapse(const StateVector &state, const ProjectorFamily &family, std::size_t outcome_index) {
    check_dims(state, family);
    if (outcome_index >= family.size()) {
        throw std::invalid_argument("outcome index out of range");
    }
    CVector projected = family.projector(outcome_index).matrix() * state.amplitudes();
    double prob = projected.squaredNorm();
    if (prob < kZeroProbability) {
        throw ZeroProbabilityError("outcome " + to_string(family.label(outcome_index)) +
                                   " has zero probability");
    }
    return StateVector::normalized(state.num_qubits(), std::move(projected));
}

Measured measure(const StateVector &state, const ProjectorFamily &family, RngStream &rng) {
    auto probs = outcome_probabilities(state, family);
    std::size_t index = sample_index(probs, rng.uniform());
    return {index, collapse(state, family, index)};
}

SequenceResult measure_sequence(const StateVector &state, std::span<const MeasurementSetting> settings,
                                RngStream &rng) {
    SequenceResult result{{}, state};
    result.outcomes.reserve(settings.size());
    for (const MeasurementSetting &s : settings) {
        auto family = ProjectorFamily::spin(s.direction, s.particle, state.num_qubits());
        auto m = measure(result.final_state, family, rng);
        result.outcomes.push_back(std::get<int>(family.label(m.index)));
        result.final_state = std::move(m.state);
    }
    return result;
}

double expectation(const StateVector &state, const Operator &obs) {
    if (state.dim() != obs.dim()) {
        throw std::invalid_argument("state and observable dimensions differ");
    }
    if (!obs.is_hermitian()) {
        throw std::invalid_argument("observable is not Hermitian");
    }
    return state.amplitudes().dot(obs.matrix() * state.amplitudes()).real();
}

double expectation(const DensityMatrix &rho, const Operator &obs) {
    if (rho.dim() != obs.dim()) {
        throw std::invalid_argument("state and observable dimensions differ");
    }
    if (!obs.is_hermitian()) {
        throw std::invalid_argument("observable is not Hermitian");
    }
    return (rho.matrix() * obs.matrix()).trace().real();
}

namespace {

Operator two_party_observable(const BlochDirection &a, const BlochDirection &b) {
    return tensor(spin_operator(a), spin_operator(b));
}

} // namespace

double correlator(const StateVector &state, const BlochDirection &a, const BlochDirection &b) {
    if (state.num_qubits() != 2) {
        throw std::invalid_argument("correlator needs a two-qubit state");
    }
    return expectation(state, two_party_observable(a, b));
}

double correlator(const DensityMatrix &rho, const BlochDirection &a, const BlochDirection &b) {
    if (rho.num_qubits() != 2) {
        throw std::invalid_argument("correlator needs a two-qubit state");
    }
    return expectation(rho, two_party_observable(a, b));
}

std::vector<OutcomePath> enumerate_paths(const StateVector &state, std::span<const ProjectorFamily> families) {
    for (const auto &f : families) {
        check_dims(state, f);
    }
    std::vector<OutcomePath> out;
    std::vector<std::size_t> indices;
    auto recurse = [&](auto &self, const CVector &v, std::size_t depth) -> void {
        if (depth == families.size()) {
            out.push_back({indices, v.squaredNorm()});
            return;
        }
        const ProjectorFamily &f = families[depth];
        for (std::size_t i = 0; i < f.size(); ++i) {
            indices.push_back(i);
            self(self, CVector(f.projector(i).matrix() * v), depth + 1);
            indices.pop_back();
        }
    };
    recurse(recurse, state.amplitudes(), 0);
    return out;
}

} // namespace cfent
