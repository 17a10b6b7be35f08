#pragma once

#include "spinorforge/dirac.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spinorforge {

enum class Parity { Even, Odd };

struct CliffordElement {
    EndW phi;
    Parity parity = Parity::Even;
    double nu = 1.0;
};

enum class Rejection { None, Singular, NotInDiracAlgebra, MixedParity, NonRealDet };
const char* to_string(Rejection r);

struct Membership {
    std::optional<CliffordElement> element;
    Rejection reason = Rejection::None;
    bool accepted() const { return element.has_value(); }
};

Membership clifford_membership(const EndW& phi, double tol = 1e-10);

// Ad[phi] v = phi gamma(v) phi^-1, read back as a Hermitian tensor.
Mat2 adjoint_action(const CliffordElement& phi, const Mat2& v);
// Full Lorentz matrix of Ad[phi] in the reference Pauli basis.
RMat4 adjoint_matrix(const CliffordElement& phi);

bool is_pin(const CliffordElement& c, double tol = 1e-10);
bool is_spin(const CliffordElement& c, double tol = 1e-10);
bool is_spin_up(const CliffordElement& c, double tol = 1e-10);

// SL(2,C) <-> Spin-up <-> Lor+up.
EndW spin_from_sl(const Mat2& K);
Mat2 sl_from_spin(const CliffordElement& c);
RMat4 sl_to_lorentz(const Mat2& K);
// Deterministic branch: Re tr K > 0, then Im tr K > 0, then first nonzero entry.
Mat2 lorentz_to_sl(const RMat4& L);
Mat2 normalize_cover_sign(const Mat2& K);
bool is_proper_orthochronous(const RMat4& L, double tol = 1e-10);

enum class CoverForm { SL, Spin, Lorentz };

struct CoverValue {
    std::optional<Mat2> K;
    std::optional<EndW> spin;
    std::optional<RMat4> L;
};

CoverValue covering_maps(const CoverValue& in, CoverForm from, CoverForm to);

struct Factorization {
    bool ok = false;
    // Hermitian factors whose ordered product is the input matrix.
    std::vector<Mat2> factors;
    double residual = 0.0;
    int attempts = 0;
    std::string message;
};

Factorization hermitian_factorization(const Mat2& M, std::uint64_t seed = 0x5eed, int max_retries = 64);

// Hermitian vectors w_i with phi = gamma(w_1) ... gamma(w_n), n <= 4.
struct VectorFactorization {
    bool ok = false;
    std::vector<Mat2> vectors;
    double residual = 0.0;
    std::string message;
};

VectorFactorization clifford_vector_factorization(const CliffordElement& c, std::uint64_t seed = 0x5eed);

// Lie algebra sl(2,C) <-> Lambda^2 H.
Mat2 nu_boost(int i);     // nu-check_i = sigma_i / 2
Mat2 nu_rotation(int i);  // nu_i = -i sigma_i / 2
// l(A) V = A V + V A^dagger as L^lambda_mu.
RMat4 lie_sl_to_lorentz(const Mat2& A);
// 2-form omega_{lambda mu} = eta_{lambda kappa} l^kappa_mu.
RMat4 lie_sl_to_two_form(const Mat2& A);
Mat2 lie_two_form_to_sl(const RMat4& omega);
RMat4 hodge_star(const RMat4& omega);
RMat4 rho_boost(int i);     // 2 tau^0 wedge tau^i (half-wedge convention)
RMat4 rho_rotation(int i);  // -*rho-check_i
double killing_form(const Mat2& A, const Mat2& B);
// 1/2 tr(l l') = -1/2 omega_{lm} omega'^{lm}
double two_form_metric(const RMat4& w1, const RMat4& w2);

}  // namespace spinorforge
