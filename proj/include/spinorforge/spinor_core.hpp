#pragma once

#include "spinorforge/types.hpp"

#include <utility>

namespace spinorforge {

// The four spaces U, U*, Ū, Ū*. Dotted spaces are the conjugate ones.
enum class Variance { U, UDual, UBar, UBarDual };

const char* to_string(Variance v);
bool is_dotted(Variance v);

struct TwoSpinor {
    Vec2 c = Vec2::Zero();
    Variance var = Variance::U;
};

TwoSpinor conjugate(const TwoSpinor& x);

// Pairing of a space with its dual; throws on dotted/undotted mixing.
cplx contract(const TwoSpinor& a, const TwoSpinor& b);

// Ricci matrix, eps(0,1) = +1.
Mat2 ricci();

// omega = phase * eps in the reference basis, with |phase| = 1.
class SymplecticForm {
public:
    SymplecticForm() = default;
    explicit SymplecticForm(cplx phase);
    static SymplecticForm from_angle(double theta);

    cplx phase() const { return phase_; }
    // omega_AB
    Mat2 lower() const { return phase_ * ricci(); }
    // omega^AB, the dual element: lower() * upper() = -1.
    Mat2 upper() const { return std::conj(phase_) * ricci(); }
    // omega(s, t) = omega_AB s^A t^B
    cplx operator()(const Vec2& s, const Vec2& t) const;
    SymplecticForm conjugate() const { return SymplecticForm(std::conj(phase_)); }

private:
    cplx phase_{1.0, 0.0};
};

enum class Direction { Flat, Sharp };

// flat: U -> U*, Ū -> Ū*; sharp: the inverse directions. sharp(flat(u)) = -u.
TwoSpinor eps_maps(const TwoSpinor& x, const SymplecticForm& form, Direction dir);

std::pair<Mat2, Mat2> herm_split(const Mat2& w);

// Hermitian 2-form with components h(Ȧ, B) (row dotted).
struct HermitianForm {
    Mat2 h = Mat2::Identity();
    bool hermitian(double tol = kAbsTol) const { return is_hermitian(h, tol); }
    bool normalized(double tol = 1e-10) const;
};

// flat: Ū -> U* and U -> Ū*; sharp: U* -> Ū and Ū* -> U.
TwoSpinor herm_metric_maps(const HermitianForm& h, const TwoSpinor& x, Direction dir);

}  // namespace spinorforge
