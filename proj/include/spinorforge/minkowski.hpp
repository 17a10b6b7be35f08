#pragma once

#include "spinorforge/types.hpp"

#include <array>
#include <optional>

namespace spinorforge {

// sigma_0 = 1, sigma_1..3 the Pauli matrices.
const std::array<Mat2, 4>& pauli_sigma();
// tau_lambda = sigma_lambda / sqrt(2)
Mat2 tau(int lambda);
const RMat4& eta();

Mat2 pauli_to_matrix(const RVec4& x);
// Requires Hermitian input: x^lambda = tr(sigma_lambda w) / sqrt(2).
RVec4 pauli_to_components(const Mat2& w);
// Components of an arbitrary w in U(x)Ū over the Pauli basis (complex).
Vec4 pauli_components_complex(const Mat2& w);

// Polarization of g(w, w) = 2 det w.
cplx metric_g(const Mat2& w1, const Mat2& w2);

enum class CausalClass { NullFuture, NullPast, TimelikeFuture, TimelikePast, Spacelike, Zero };
const char* to_string(CausalClass c);

struct CausalResult {
    CausalClass cls = CausalClass::Zero;
    // For null classes: w = sign * u u^dagger.
    std::optional<Vec2> factor;
    int sign = 0;
};

CausalResult causal_classify(const Mat2& w);

// Normalized 2-spinor basis whose Pauli basis is the given frame. The columns
// of the result are zeta_1, zeta_2 in reference components.
Mat2 basis_from_frame(const std::array<Mat2, 4>& frame);

// Lorentz matrix L^lambda_mu with e_mu = L^lambda_mu tau_lambda.
RMat4 frame_matrix(const std::array<Mat2, 4>& frame);

}  // namespace spinorforge

namespace spinorforge {

// Permutation sign of (a, b, c, d); zero on repeated indices. eps_{0123} = +1.
int levi_civita(int a, int b, int c, int d);

}  // namespace spinorforge
