#pragma once

#include "spinorforge/spinor_core.hpp"

#include <array>
#include <optional>

namespace spinorforge {

// psi = (u, chi) in W = U + Ū*; natural components (u^1, u^2, chi_1, chi_2).
struct DiracSpinor {
    Vec2 u = Vec2::Zero();
    Vec2 chi = Vec2::Zero();

    Vec4 to_vec() const;
    static DiracSpinor from_vec(const Vec4& v);
};

// End(W) as blocks K: U->U, P: Ū*->U, Q: U->Ū*, J: Ū*->Ū*.
struct EndW {
    Mat2 K = Mat2::Zero();
    Mat2 P = Mat2::Zero();
    Mat2 Q = Mat2::Zero();
    Mat2 J = Mat2::Zero();

    static EndW identity();
    static EndW from_matrix(const Mat4& m);
    Mat4 to_matrix() const;
    DiracSpinor apply(const DiracSpinor& psi) const;

    EndW operator*(const EndW& o) const;
    EndW operator+(const EndW& o) const;
    EndW operator-(const EndW& o) const;
    EndW operator*(cplx s) const;
    // epsilon-adjoint of the whole endomorphism; D is its +1 eigenspace.
    EndW dagger_eps() const;
};

enum class SpinorBasisKind { Weyl, Dirac };

// Columns: the basis vectors in natural components.
Mat4 basis_matrix(SpinorBasisKind kind);
// Matrix of phi in the chosen basis.
Mat4 in_basis(const EndW& phi, SpinorBasisKind kind);

EndW gamma_of(const Mat2& y);
// gamma_lambda = gamma(tau_lambda)
EndW gamma_lambda(int lambda);

cplx k_product(const DiracSpinor& a, const DiracSpinor& b);
// psi-bar = (chi-bar in U*, u-bar in Ū)
std::pair<TwoSpinor, TwoSpinor> dirac_adjoint(const DiracSpinor& psi);
// Gram matrix of k on the chosen basis.
Mat4 k_gram(SpinorBasisKind kind);

// gamma_0 gamma_1 gamma_2 gamma_3 over the reference Pauli basis.
EndW gamma_eta();

enum class DiscreteSymmetry { C, P, T };

// C_omega(u, chi) = (omega^#(chi-bar), -omega-bar^flat(u-bar)); antilinear.
DiracSpinor charge_conjugation(const DiracSpinor& psi, const SymplecticForm& omega);
// observer: future timelike unit Hermitian tensor.
DiracSpinor discrete_symmetries(const DiracSpinor& psi, const Mat2& observer,
                                const SymplecticForm& omega, DiscreteSymmetry which);

enum class SlotType { UUdual, UUbar, UbarDualUdual, UbarDualUbar };

// X~ = adj(X)^T; the same array formula covers every slot type.
Mat2 eps_transpose(const Mat2& x, SlotType slot = SlotType::UUdual);
// X‡ = conj(X~)
Mat2 eps_adjoint(const Mat2& x);

struct GradeParts {
    // Real Dirac-algebra part A and imaginary part B with phi = A + iB.
    EndW d_part, i_part;
    // Graded components of A.
    std::array<EndW, 5> grade;
    // Graded components of B (so the i*D part is i * sum of these).
    std::array<EndW, 5> i_grade;
};

GradeParts grade_decompose(const EndW& phi);
// Graded components of an element that is already in D.
std::array<EndW, 5> grades_of_d(const EndW& a);

struct BlockDetInverse {
    cplx det;
    std::optional<EndW> inverse;
};

BlockDetInverse block_det_inverse(const EndW& phi, double singular_tol = 1e-12);

}  // namespace spinorforge
