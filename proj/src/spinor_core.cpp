#include "spinorforge/spinor_core.hpp"

#include <cmath>

namespace spinorforge {

bool approx_equal(cplx a, cplx b, double rel, double abs) {
    double d = std::abs(a - b);
    return d <= abs || d <= rel * std::max(std::abs(a), std::abs(b));
}

bool is_hermitian(const Mat2& w, double tol) {
    double scale = std::max(1.0, max_abs(w));
    return max_abs_diff(w, w.adjoint()) <= tol * scale;
}

const char* to_string(Variance v) {
    switch (v) {
        case Variance::U: return "U";
        case Variance::UDual: return "U*";
        case Variance::UBar: return "Ubar";
        case Variance::UBarDual: return "Ubar*";
    }
    return "?";
}

bool is_dotted(Variance v) { return v == Variance::UBar || v == Variance::UBarDual; }

TwoSpinor conjugate(const TwoSpinor& x) {
    Variance v = x.var;
    switch (x.var) {
        case Variance::U: v = Variance::UBar; break;
        case Variance::UBar: v = Variance::U; break;
        case Variance::UDual: v = Variance::UBarDual; break;
        case Variance::UBarDual: v = Variance::UDual; break;
    }
    return {x.c.conjugate(), v};
}

static bool dual_pair(Variance a, Variance b) {
    return (a == Variance::U && b == Variance::UDual) || (a == Variance::UDual && b == Variance::U) ||
           (a == Variance::UBar && b == Variance::UBarDual) ||
           (a == Variance::UBarDual && b == Variance::UBar);
}

cplx contract(const TwoSpinor& a, const TwoSpinor& b) {
    if (!dual_pair(a.var, b.var))
        throw contract_violation(std::string("cannot contract ") + to_string(a.var) + " with " +
                                 to_string(b.var));
    return a.c.transpose() * b.c;
}

Mat2 ricci() {
    Mat2 e;
    e << 0.0, 1.0, -1.0, 0.0;
    return e;
}

SymplecticForm::SymplecticForm(cplx phase) : phase_(phase) {
    if (std::abs(std::abs(phase) - 1.0) > 1e-12)
        throw contract_violation("symplectic form phase must have unit modulus");
}

SymplecticForm SymplecticForm::from_angle(double theta) {
    return SymplecticForm(std::polar(1.0, theta));
}

cplx SymplecticForm::operator()(const Vec2& s, const Vec2& t) const {
    return phase_ * (s(0) * t(1) - s(1) * t(0));
}

TwoSpinor eps_maps(const TwoSpinor& x, const SymplecticForm& form, Direction dir) {
    // Dotted spaces use the conjugate form.
    SymplecticForm f = is_dotted(x.var) ? form.conjugate() : form;
    if (dir == Direction::Flat) {
        if (x.var != Variance::U && x.var != Variance::UBar)
            throw contract_violation("flat needs a U or Ubar spinor");
        // (u_flat)_B = omega_AB u^A
        Vec2 r = f.lower().transpose() * x.c;
        return {r, x.var == Variance::U ? Variance::UDual : Variance::UBarDual};
    }
    if (x.var != Variance::UDual && x.var != Variance::UBarDual)
        throw contract_violation("sharp needs a U* or Ubar* spinor");
    // (lambda_sharp)^B = omega^AB lambda_A
    Vec2 r = f.upper().transpose() * x.c;
    return {r, x.var == Variance::UDual ? Variance::U : Variance::UBar};
}

std::pair<Mat2, Mat2> herm_split(const Mat2& w) {
    Mat2 wd = w.adjoint();
    return {0.5 * (w + wd), 0.5 * (w - wd)};
}

bool HermitianForm::normalized(double tol) const {
    if (!hermitian(tol)) return false;
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (h + h.adjoint()));
    if (es.eigenvalues().minCoeff() <= 0.0) return false;
    // g(h, h) = 2 det h
    return std::abs(det2(h) - 1.0) <= tol;
}

TwoSpinor herm_metric_maps(const HermitianForm& hf, const TwoSpinor& x, Direction dir) {
    const Mat2& h = hf.h;
    if (dir == Direction::Flat) {
        switch (x.var) {
            case Variance::UBar: return {h.transpose() * x.c, Variance::UDual};  // h_{ȦB} v̄^Ȧ
            case Variance::U: return {h * x.c, Variance::UBarDual};              // h_{ȦB} u^B
            default: throw contract_violation("hermitian flat needs a U or Ubar spinor");
        }
    }
    cplx d = det2(h);
    if (std::abs(d) <= kAbsTol * std::max(1.0, h.squaredNorm()))
        throw degenerate_form_error("hermitian form is degenerate");
    Mat2 inv = adj2(h) / d;
    switch (x.var) {
        case Variance::UDual: return {inv.transpose() * x.c, Variance::UBar};
        case Variance::UBarDual: return {inv * x.c, Variance::U};
        default: throw contract_violation("hermitian sharp needs a U* or Ubar* spinor");
    }
}

}  // namespace spinorforge
