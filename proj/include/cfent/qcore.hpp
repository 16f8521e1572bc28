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

// Dense complex linear algebra for small multi-qubit systems.
//
// Basis convention: particle 1 is the most significant bit of a basis index,
// bit value 0 is spin-up along z. Particles are numbered from 1 everywhere in
// the public API.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cfent {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Tolerance for exact linear-algebra identities.
inline constexpr double kExactTol = 1e-12;
/// Tolerance for eigenvalue positivity, which accumulates rounding.
inline constexpr double kEigenTol = 1e-10;
inline constexpr int kMaxQubits = 6;

/// Measurement axis on the Bloch sphere, theta in [0, pi], phi in [0, 2 pi).
class BlochDirection {
  public:
    BlochDirection() = default;
    BlochDirection(double theta, double phi);

    /// Direction at signed angle `angle` from +z towards +x in the x-z plane.
    /// Any real angle is accepted and folded into (theta, phi in {0, pi}).
    static BlochDirection in_xz_plane(double angle);
    static BlochDirection z() { return {}; }
    static BlochDirection x();
    static BlochDirection y();

    double theta() const { return theta_; }
    double phi() const { return phi_; }
    std::array<double, 3> unit_vector() const;

    /// Euclidean distance between unit vectors.
    double distance(const BlochDirection &other) const;

    bool operator==(const BlochDirection &) const = default;

  private:
    double theta_ = 0.0;
    double phi_ = 0.0;
};

class StateVector {
  public:
    /// Throws std::invalid_argument unless amps has length 2^num_qubits, is
    /// finite and has unit norm within kExactTol.
    StateVector(int num_qubits, CVector amps);

    static StateVector basis(int num_qubits, std::size_t index);
    static StateVector from_amplitudes(const std::vector<Complex> &amps);
    /// Normalizes `amps` first; throws if the norm vanishes.
    static StateVector normalized(int num_qubits, CVector amps);

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    const CVector &amplitudes() const { return amps_; }
    Complex operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }

  private:
    int num_qubits_;
    CVector amps_;
};

/// General square operator. No structure is assumed beyond finiteness.
class Operator {
  public:
    explicit Operator(CMatrix m);

    static Operator identity(std::size_t dim);

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const CMatrix &matrix() const { return m_; }
    Complex operator()(std::size_t r, std::size_t c) const {
        return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

    bool is_hermitian(double tol = kExactTol) const;
    bool is_projector(double tol = kExactTol) const;
    Complex trace() const { return m_.trace(); }
    Operator adjoint() const { return Operator(m_.adjoint()); }

    friend Operator operator*(const Operator &a, const Operator &b);
    friend Operator operator+(const Operator &a, const Operator &b);
    friend Operator operator-(const Operator &a, const Operator &b);

  private:
    CMatrix m_;
};

/// Hermitian, unit-trace, positive semidefinite matrix over num_qubits qubits.
class DensityMatrix {
  public:
    /// Validates every invariant; throws std::invalid_argument on violation.
    DensityMatrix(int num_qubits, CMatrix m);

    static DensityMatrix from_pure(const StateVector &psi);
    static DensityMatrix maximally_mixed(int num_qubits);

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const CMatrix &matrix() const { return m_; }
    Operator as_operator() const { return Operator(m_); }
    /// Tr(rho^2).
    double purity() const;

  private:
    struct Unchecked {};
    DensityMatrix(Unchecked, int num_qubits, CMatrix m) : num_qubits_(num_qubits), m_(std::move(m)) {}
    friend DensityMatrix partial_trace(const DensityMatrix &, std::span<const int>);

    int num_qubits_;
    CMatrix m_;
};

enum class BellLabel { phi_plus, phi_minus, psi_plus, psi_minus };

inline constexpr std::array<BellLabel, 4> kBellLabels = {BellLabel::phi_plus, BellLabel::phi_minus,
                                                         BellLabel::psi_plus, BellLabel::psi_minus};

std::string_view to_string(BellLabel label);
/// Throws std::invalid_argument for unknown names.
BellLabel parse_bell_label(std::string_view name);

/// Kronecker product; `a` occupies the high-order bits.
Operator tensor(const Operator &a, const Operator &b);
StateVector tensor(const StateVector &a, const StateVector &b);
DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b);

/// Reduced state on the particles listed in `keep` (1-based, any order; the
/// result keeps them in ascending order).
DensityMatrix partial_trace(const DensityMatrix &rho, std::span<const int> keep);
inline DensityMatrix partial_trace(const DensityMatrix &rho, std::initializer_list<int> keep) {
    return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

/// sigma . n
Operator spin_operator(const BlochDirection &n);

struct SpinEigenbasis {
    StateVector up;
    StateVector down;
};

/// up = (cos(t/2), e^{i p} sin(t/2)), down = (sin(t/2), -e^{i p} cos(t/2)).
SpinEigenbasis spin_eigenbasis(const BlochDirection &n);

/// Eigenvector of sigma . n for outcome +1 or -1.
StateVector spin_state(const BlochDirection &n, int outcome);

/// |v><v|. Throws std::invalid_argument if v is not normalized.
Operator projector(const StateVector &v);

/// Ordered [phi_plus, phi_minus, psi_plus, psi_minus].
std::array<StateVector, 4> bell_basis();
StateVector bell_state(BellLabel label);

/// Lifts `local`, acting on `particles` (1-based, in the given order), to the
/// full num_qubits register with identity elsewhere.
Operator embed(const Operator &local, std::span<const int> particles, int num_qubits);
inline Operator embed(const Operator &local, std::initializer_list<int> particles, int num_qubits) {
    return embed(local, std::span<const int>(particles.begin(), particles.size()), num_qubits);
}

/// Reorders particles: particle k of the result is particle order[k-1] of psi.
StateVector permute_particles(const StateVector &psi, std::span<const int> order);

Complex inner(const StateVector &a, const StateVector &b);
/// |<a|b>|^2, the phase-insensitive overlap.
double fidelity(const StateVector &a, const StateVector &b);
double max_abs_diff(const CMatrix &a, const CMatrix &b);

} // namespace cfent
