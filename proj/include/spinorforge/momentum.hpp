#pragma once

#include "spinorforge/dirac.hpp"
#include "spinorforge/spinor_core.hpp"

#include <optional>

namespace spinorforge {

struct MomentumPoint {
    Mat2 p = Mat2::Zero();
    double mu = 0.0;
    // h = sqrt2 p-bar-flat / mu, present when mu > 0; rows dotted, as in HermitianForm.
    std::optional<Mat2> h;
};

enum class SpinorStratum { W0, Wback, Wplus, Wminus };
const char* to_string(SpinorStratum s);

// Builds mu and h from a Hermitian p; requires p future non-spacelike.
MomentumPoint momentum_point(const Mat2& p);

struct Projection {
    MomentumPoint point;
    SpinorStratum stratum = SpinorStratum::W0;
    Vec2 v = Vec2::Zero();     // v = -chi-bar^#
    cplx pairing{0.0, 0.0};    // <chi-bar, u> = eps(v, u)
};

SpinorStratum classify_stratum(const DiracSpinor& psi, double tol = 1e-10);
Projection momentum_project(const DiracSpinor& psi, const SymplecticForm& form = {});

struct PgenReport {
    bool i = false, ii = false, iii = false, iv = false, v = false, vprime = false;
    bool global_identity = false;
    double theta = 0.0;
    bool all_agree() const { return i == ii && ii == iii && iii == iv && iv == v && v == vprime; }
    bool all_pass() const { return i && ii && iii && iv && v && vprime; }
};

PgenReport pgen_verify(const DiracSpinor& psi, const MomentumPoint& p, const SymplecticForm& form = {},
                       double tol = 1e-9);

// Positive Hermitian square root of sqrt2 p / mu.
Mat2 boost_section(const MomentumPoint& p);
// Fibre origin (sqrt(mu) B_p zeta_1, chi from sqrt(mu) B_p zeta_2).
DiracSpinor fiber_origin(const MomentumPoint& p, const SymplecticForm& form = {});

struct U2Params {
    cplx a, b, c;
    // c * [[a, conj b], [-b, conj a]]
    Mat2 matrix() const;
};

// (u', chi') = (c (a u + b chi-bar^#), conj(c) (a chi + b u-bar^flat)).
DiracSpinor u2_act(const DiracSpinor& psi, const U2Params& m, const SymplecticForm& form = {});

struct Transporter {
    Mat2 K;
    U2Params params;
};

Transporter fiber_transporter(const DiracSpinor& psi, const DiracSpinor& psi2, const SymplecticForm& form = {});

}  // namespace spinorforge
