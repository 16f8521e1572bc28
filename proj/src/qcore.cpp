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

#include "cfent/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace cfent {

namespace {

constexpr double kPi = std::numbers::pi;

bool all_finite(const CMatrix &m) {
    return m.allFinite();
}

std::size_t checked_dim(int num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw std::invalid_argument("qubit count out of range: " + std::to_string(num_qubits));
    }
    return std::size_t{1} << num_qubits;
}

int qubits_for_dim(std::size_t dim) {
    int n = 0;
    while ((std::size_t{1} << n) < dim) {
        ++n;
    }
    if ((std::size_t{1} << n) != dim || n < 1) {
        throw std::invalid_argument("dimension is not a power of two: " + std::to_string(dim));
    }
    return n;
}

// Bit position (from the least significant end) of a 1-based particle.
int bit_of(int particle, int num_qubits) {
    return num_qubits - particle;
}

void check_particles(std::span<const int> particles, int num_qubits) {
    std::vector<bool> seen(static_cast<std::size_t>(num_qubits) + 1, false);
    for (int p : particles) {
        if (p < 1 || p > num_qubits) {
            throw std::invalid_argument("particle index out of range: " + std::to_string(p));
        }
        if (seen[static_cast<std::size_t>(p)]) {
            throw std::invalid_argument("repeated particle index: " + std::to_string(p));
        }
        seen[static_cast<std::size_t>(p)] = true;
    }
}

// Index into the sub-register formed by `particles` (first listed = most
// significant) extracted from a full-register basis index.
std::size_t sub_index(std::size_t full, std::span<const int> particles, int num_qubits) {
    std::size_t sub = 0;
    for (int p : particles) {
        sub = (sub << 1) | ((full >> bit_of(p, num_qubits)) & 1u);
    }
    return sub;
}

} // namespace

BlochDirection::BlochDirection(double theta, double phi) : theta_(theta), phi_(phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi) || theta < 0.0 || theta > kPi || phi < 0.0 ||
        phi >= 2.0 * kPi) {
        throw std::invalid_argument("Bloch direction out of range: theta=" + std::to_string(theta) +
                                    " phi=" + std::to_string(phi));
    }
}

BlochDirection BlochDirection::in_xz_plane(double angle) {
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("non-finite angle");
    }
    double a = std::remainder(angle, 2.0 * kPi); // [-pi, pi]
    if (a >= 0.0) {
        return {a, 0.0};
    }
    return {-a, kPi};
}

BlochDirection BlochDirection::x() {
    return {kPi / 2.0, 0.0};
}

BlochDirection BlochDirection::y() {
    return {kPi / 2.0, kPi / 2.0};
}

std::array<double, 3> BlochDirection::unit_vector() const {
    return {std::sin(theta_) * std::cos(phi_), std::sin(theta_) * std::sin(phi_), std::cos(theta_)};
}

double BlochDirection::distance(const BlochDirection &other) const {
    auto u = unit_vector();
    auto v = other.unit_vector();
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        s += (u[i] - v[i]) * (u[i] - v[i]);
    }
    return std::sqrt(s);
}

StateVector::StateVector(int num_qubits, CVector amps) : num_qubits_(num_qubits), amps_(std::move(amps)) {
    if (static_cast<std::size_t>(amps_.size()) != checked_dim(num_qubits)) {
        throw std::invalid_argument("amplitude count does not match qubit count");
    }
    if (!amps_.allFinite()) {
        throw std::invalid_argument("non-finite amplitude");
    }
    if (std::abs(amps_.squaredNorm() - 1.0) > kExactTol) {
        throw std::invalid_argument("state vector is not normalized");
    }
}

StateVector StateVector::basis(int num_qubits, std::size_t index) {
    std::size_t dim = checked_dim(num_qubits);
    if (index >= dim) {
        throw std::invalid_argument("basis index out of range");
    }
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return {num_qubits, std::move(v)};
}

StateVector StateVector::from_amplitudes(const std::vector<Complex> &amps) {
    CVector v(static_cast<Eigen::Index>(amps.size()));
    for (std::size_t i = 0; i < amps.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = amps[i];
    }
    return {qubits_for_dim(amps.size()), std::move(v)};
}

StateVector StateVector::normalized(int num_qubits, CVector amps) {
    double norm = amps.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw std::invalid_argument("cannot normalize a zero or non-finite vector");
    }
    amps /= norm;
    return {num_qubits, std::move(amps)};
}

Operator::Operator(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw std::invalid_argument("operator must be square and non-empty");
    }
    if (!all_finite(m_)) {
        throw std::invalid_argument("non-finite operator entry");
    }
}

Operator Operator::identity(std::size_t dim) {
    return Operator(CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

bool Operator::is_hermitian(double tol) const {
    return max_abs_diff(m_, m_.adjoint()) <= tol;
}

bool Operator::is_projector(double tol) const {
    return is_hermitian(tol) && max_abs_diff(m_ * m_, m_) <= tol;
}

Operator operator*(const Operator &a, const Operator &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("operator dimension mismatch");
    }
    return Operator(a.m_ * b.m_);
}

Operator operator+(const Operator &a, const Operator &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("operator dimension mismatch");
    }
    return Operator(a.m_ + b.m_);
}

Operator operator-(const Operator &a, const Operator &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("operator dimension mismatch");
    }
    return Operator(a.m_ - b.m_);
}

DensityMatrix::DensityMatrix(int num_qubits, CMatrix m) : num_qubits_(num_qubits), m_(std::move(m)) {
    std::size_t dim = checked_dim(num_qubits);
    if (static_cast<std::size_t>(m_.rows()) != dim || static_cast<std::size_t>(m_.cols()) != dim) {
        throw std::invalid_argument("density matrix shape does not match qubit count");
    }
    if (!all_finite(m_)) {
        throw std::invalid_argument("non-finite density matrix entry");
    }
    if (max_abs_diff(m_, m_.adjoint()) > kExactTol) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(m_.trace() - Complex(1.0)) > kExactTol) {
        throw std::invalid_argument("density matrix trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -kEigenTol) {
        throw std::invalid_argument("density matrix has a negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::from_pure(const StateVector &psi) {
    const CVector &v = psi.amplitudes();
    return {psi.num_qubits(), v * v.adjoint()};
}

DensityMatrix DensityMatrix::maximally_mixed(int num_qubits) {
    auto dim = static_cast<Eigen::Index>(checked_dim(num_qubits));
    return {num_qubits, CMatrix::Identity(dim, dim) / static_cast<double>(dim)};
}

double DensityMatrix::purity() const {
    return (m_ * m_).trace().real();
}

std::string_view to_string(BellLabel label) {
    switch (label) {
    case BellLabel::phi_plus:
        return "phi_plus";
    case BellLabel::phi_minus:
        return "phi_minus";
    case BellLabel::psi_plus:
        return "psi_plus";
    case BellLabel::psi_minus:
        return "psi_minus";
    }
    return "?";
}

BellLabel parse_bell_label(std::string_view name) {
    for (BellLabel label : kBellLabels) {
        if (to_string(label) == name) {
            return label;
        }
    }
    throw std::invalid_argument("unknown Bell label: " + std::string(name));
}

Operator tensor(const Operator &a, const Operator &b) {
    return Operator(Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval());
}

StateVector tensor(const StateVector &a, const StateVector &b) {
    CVector v(static_cast<Eigen::Index>(a.dim() * b.dim()));
    for (std::size_t i = 0; i < a.dim(); ++i) {
        v.segment(static_cast<Eigen::Index>(i * b.dim()), static_cast<Eigen::Index>(b.dim())) =
            a[i] * b.amplitudes();
    }
    return StateVector::normalized(a.num_qubits() + b.num_qubits(), std::move(v));
}

DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b) {
    return {a.num_qubits() + b.num_qubits(), Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval()};
}

DensityMatrix partial_trace(const DensityMatrix &rho, std::span<const int> keep) {
    const int n = rho.num_qubits();
    if (keep.empty()) {
        throw std::invalid_argument("partial trace needs at least one kept particle");
    }
    check_particles(keep, n);

    std::vector<int> kept(keep.begin(), keep.end());
    std::sort(kept.begin(), kept.end());
    std::vector<int> traced;
    for (int p = 1; p <= n; ++p) {
        if (!std::binary_search(kept.begin(), kept.end(), p)) {
            traced.push_back(p);
        }
    }

    const std::size_t kdim = std::size_t{1} << kept.size();
    const std::size_t tdim = std::size_t{1} << traced.size();
    auto compose = [&](std::size_t k, std::size_t t) {
        std::size_t full = 0;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            std::size_t bit = (k >> (kept.size() - 1 - i)) & 1u;
            full |= bit << bit_of(kept[i], n);
        }
        for (std::size_t i = 0; i < traced.size(); ++i) {
            std::size_t bit = (t >> (traced.size() - 1 - i)) & 1u;
            full |= bit << bit_of(traced[i], n);
        }
        return static_cast<Eigen::Index>(full);
    };

    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(kdim));
    for (std::size_t r = 0; r < kdim; ++r) {
        for (std::size_t c = 0; c < kdim; ++c) {
            Complex s = 0.0;
            for (std::size_t t = 0; t < tdim; ++t) {
                s += rho.matrix()(compose(r, t), compose(c, t));
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s;
        }
    }
    // Reductions of a valid state are valid; skip the eigen-solve.
    return DensityMatrix(DensityMatrix::Unchecked{}, static_cast<int>(kept.size()), std::move(out));
}

Operator spin_operator(const BlochDirection &n) {
    auto [x, y, z] = n.unit_vector();
    CMatrix m(2, 2);
    m << Complex(z, 0.0), Complex(x, -y), Complex(x, y), Complex(-z, 0.0);
    return Operator(std::move(m));
}

SpinEigenbasis spin_eigenbasis(const BlochDirection &n) {
    const double c = std::cos(n.theta() / 2.0);
    const double s = std::sin(n.theta() / 2.0);
    const Complex phase = std::polar(1.0, n.phi());
    CVector up(2);
    up << Complex(c, 0.0), phase * s;
    CVector down(2);
    down << Complex(s, 0.0), -phase * c;
    return {StateVector(1, std::move(up)), StateVector(1, std::move(down))};
}

StateVector spin_state(const BlochDirection &n, int outcome) {
    if (outcome != 1 && outcome != -1) {
        throw std::invalid_argument("spin outcome must be +1 or -1");
    }
    auto basis = spin_eigenbasis(n);
    return outcome == 1 ? basis.up : basis.down;
}

Operator projector(const StateVector &v) {
    if (std::abs(v.amplitudes().squaredNorm() - 1.0) > kExactTol) {
        throw std::invalid_argument("projector needs a normalized vector");
    }
    return Operator(v.amplitudes() * v.amplitudes().adjoint());
}

std::array<StateVector, 4> bell_basis() {
    const double r = 1.0 / std::sqrt(2.0);
    return {StateVector::from_amplitudes({r, 0.0, 0.0, r}), StateVector::from_amplitudes({r, 0.0, 0.0, -r}),
            StateVector::from_amplitudes({0.0, r, r, 0.0}), StateVector::from_amplitudes({0.0, r, -r, 0.0})};
}

StateVector bell_state(BellLabel label) {
    return bell_basis()[static_cast<std::size_t>(label)];
}

Operator embed(const Operator &local, std::span<const int> particles, int num_qubits) {
    const std::size_t dim = checked_dim(num_qubits);
    check_particles(particles, num_qubits);
    if (local.dim() != (std::size_t{1} << particles.size())) {
        throw std::invalid_argument("local operator dimension does not match particle count");
    }
    std::size_t mask = 0;
    for (int p : particles) {
        mask |= std::size_t{1} << bit_of(p, num_qubits);
    }
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if ((r & ~mask) != (c & ~mask)) {
                continue;
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                local(sub_index(r, particles, num_qubits), sub_index(c, particles, num_qubits));
        }
    }
    return Operator(std::move(out));
}

StateVector permute_particles(const StateVector &psi, std::span<const int> order) {
    const int n = psi.num_qubits();
    if (order.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("permutation must list every particle");
    }
    check_particles(order, n);
    CVector out(static_cast<Eigen::Index>(psi.dim()));
    for (std::size_t src = 0; src < psi.dim(); ++src) {
        // Result particle k carries the bit of source particle order[k-1].
        out[static_cast<Eigen::Index>(sub_index(src, order, n))] = psi[src];
    }
    return {n, std::move(out)};
}

Complex inner(const StateVector &a, const StateVector &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("state dimension mismatch");
    }
    return a.amplitudes().dot(b.amplitudes());
}

double fidelity(const StateVector &a, const StateVector &b) {
    return std::norm(inner(a, b));
}

double max_abs_diff(const CMatrix &a, const CMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("matrix shape mismatch");
    }
    if (a.size() == 0) {
        return 0.0;
    }
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace cfent
