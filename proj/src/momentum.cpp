#include "spinorforge/momentum.hpp"

#include "spinorforge/minkowski.hpp"

#include <cmath>

namespace spinorforge {

const char* to_string(SpinorStratum s) {
    switch (s) {
        case SpinorStratum::W0: return "W0";
        case SpinorStratum::Wback: return "Wback";
        case SpinorStratum::Wplus: return "Wplus";
        case SpinorStratum::Wminus: return "Wminus";
    }
    return "?";
}

MomentumPoint momentum_point(const Mat2& p) {
    if (!is_hermitian(p, 1e-10)) throw contract_violation("momentum must be Hermitian");
    MomentumPoint m;
    m.p = 0.5 * (p + p.adjoint());
    double gpp = metric_g(m.p, m.p).real();
    double scale = m.p.squaredNorm();
    if (gpp < -1e-12 * scale || m.p.trace().real() < 0) throw contract_violation("momentum must be future causal");
    // Rounding in a null det is ~1e-16 * scale; anything below 1e-13 * scale counts as null.
    m.mu = gpp > 1e-13 * scale ? std::sqrt(gpp) : 0.0;
    // Stored with the dotted index first, matching HermitianForm.
    if (m.mu > 0) m.h = (std::sqrt(2.0) / m.mu) * adj2(m.p);
    return m;
}

static cplx pairing_of(const DiracSpinor& psi) { return (psi.chi.adjoint() * psi.u)(0); }

SpinorStratum classify_stratum(const DiracSpinor& psi, double tol) {
    cplx c = pairing_of(psi);
    double scale = psi.u.norm() * psi.chi.norm();
    if (std::abs(c) <= tol * std::max(scale, 1e-300)) return SpinorStratum::W0;
    if (std::abs(c.imag()) <= tol * std::abs(c)) return c.real() > 0 ? SpinorStratum::Wplus : SpinorStratum::Wminus;
    return SpinorStratum::Wback;
}

Projection momentum_project(const DiracSpinor& psi, const SymplecticForm& form) {
    if (psi.u.norm() == 0 && psi.chi.norm() == 0) throw contract_violation("momentum_project needs psi != 0");
    Projection r;
    TwoSpinor chibar{psi.chi.conjugate(), Variance::UDual};
    r.v = -eps_maps(chibar, form, Direction::Sharp).c;
    Mat2 p = (psi.u * psi.u.adjoint() + r.v * r.v.adjoint()) / std::sqrt(2.0);
    r.point = momentum_point(p);
    r.pairing = pairing_of(psi);
    r.stratum = classify_stratum(psi);
    return r;
}

PgenReport pgen_verify(const DiracSpinor& psi, const MomentumPoint& pm, const SymplecticForm& form, double tol) {
    const Vec2& u = psi.u;
    const Vec2& chi = psi.chi;
    cplx c = pairing_of(psi);
    if (std::abs(c) <= 1e-12 * std::max(1e-300, u.norm() * chi.norm()))
        throw contract_violation("pgen_verify needs <chi-bar, u> != 0");
    if (pm.mu <= 0) throw contract_violation("pgen_verify needs a timelike momentum");
    if (!pm.h) throw contract_violation("pgen_verify needs h(p)");
    PgenReport r;
    // Condition i compares against p(u, chi); the others only see mu and h of the given p.
    TwoSpinor chibar{chi.conjugate(), Variance::UDual};
    Vec2 v = -eps_maps(chibar, form, Direction::Sharp).c;
    Mat2 p_own = (u * u.adjoint() + v * v.adjoint()) / std::sqrt(2.0);
    const Mat2& h = *pm.h;
    double mu = pm.mu;
    Mat2 hinv = h.inverse();
    double s = std::max(1.0, u.norm() + chi.norm());

    // iii fixes theta.
    Vec2 hu = h * u;
    int k = std::abs(chi(0)) >= std::abs(chi(1)) ? 0 : 1;
    cplx ph = hu(k) / chi(k);
    r.theta = std::arg(ph);
    cplx e = std::polar(1.0, r.theta);
    double ps = std::max(1.0, pm.p.norm());

    r.i = max_abs_diff(pm.p, p_own) <= tol * ps;
    DiracSpinor gp = gamma_of(pm.p).apply(psi);
    Vec2 want_u = mu * u / e, want_chi = mu * e * chi;
    r.ii = max_abs_diff(gp.u, want_u) <= tol * s * ps && max_abs_diff(gp.chi, want_chi) <= tol * s * ps;
    r.iii = max_abs_diff(hu, e * chi) <= tol * s;
    r.iv = max_abs_diff(hinv * chi, u / e) <= tol * s;
    cplx huv = (u.conjugate().transpose() * h * v)(0);
    cplx huu = (u.conjugate().transpose() * h * u)(0);
    cplx hvv = (v.conjugate().transpose() * h * v)(0);
    double sc = std::max(1.0, std::abs(c));
    r.v = std::abs(huv) <= tol * s * s && std::abs(huu - std::abs(c)) <= tol * sc * s;
    r.vprime = std::abs(huv) <= tol * s * s && std::abs(hvv - std::abs(c)) <= tol * sc * s;
    // Global identity with theta read from <chi-bar, u>.
    DiracSpinor go = gamma_of(p_own).apply(psi);
    cplx eg = c / std::abs(c);
    want_u = std::abs(c) * u / eg;
    want_chi = std::abs(c) * eg * chi;
    r.global_identity = max_abs_diff(go.u, want_u) <= tol * s * ps && max_abs_diff(go.chi, want_chi) <= tol * s * ps;
    return r;
}

Mat2 boost_section(const MomentumPoint& p) {
    if (p.mu <= 0) throw contract_violation("boost_section needs a timelike momentum");
    Mat2 target = std::sqrt(2.0) * p.p / p.mu;
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (target + target.adjoint()));
    Mat2 B = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cast<cplx>().asDiagonal() *
             es.eigenvectors().adjoint();
    return B;
}

DiracSpinor fiber_origin(const MomentumPoint& p, const SymplecticForm& form) {
    Mat2 B = boost_section(p) * std::sqrt(p.mu);
    Vec2 u = B.col(0), v = B.col(1);
    // chi = v-bar-flat
    Vec2 chi = eps_maps(TwoSpinor{v.conjugate(), Variance::UBar}, form, Direction::Flat).c;
    return {u, chi};
}

Mat2 U2Params::matrix() const {
    Mat2 m;
    m << a, std::conj(b), -b, std::conj(a);
    return c * m;
}

DiracSpinor u2_act(const DiracSpinor& psi, const U2Params& m, const SymplecticForm& form) {
    Vec2 chibar_sharp = eps_maps(TwoSpinor{psi.chi.conjugate(), Variance::UDual}, form, Direction::Sharp).c;
    Vec2 ubar_flat = eps_maps(TwoSpinor{psi.u.conjugate(), Variance::UBar}, form, Direction::Flat).c;
    return {m.c * (m.a * psi.u + m.b * chibar_sharp), std::conj(m.c) * (m.a * psi.chi + m.b * ubar_flat)};
}

Transporter fiber_transporter(const DiracSpinor& psi, const DiracSpinor& psi2, const SymplecticForm& form) {
    auto p1 = momentum_project(psi, form);
    auto p2 = momentum_project(psi2, form);
    if (p1.stratum == SpinorStratum::W0 || p2.stratum == SpinorStratum::W0)
        throw contract_violation("fiber_transporter needs spinors over a timelike momentum");
    if (max_abs_diff(p1.point.p, p2.point.p) > 1e-10 * std::max(1.0, p1.point.p.norm()))
        throw contract_violation("spinors lie in different fibres");
    const Vec2 &u = psi.u, &u2 = psi2.u;
    Vec2 chib = psi.chi.conjugate(), chib2 = psi2.chi.conjugate();
    Mat2 eps_up = form.upper();
    Vec2 chib_sharp = eps_up.transpose() * chib;
    Vec2 u_flat = form.lower().transpose() * u;
    cplx c = (chib.transpose() * u)(0);
    cplx c_u2 = (chib.transpose() * u2)(0);
    cplx c2_u = (chib2.transpose() * u)(0);
    cplx e_sharp = (chib.transpose() * eps_up * chib2)(0);
    cplx e_uu2 = form(u, u2);
    Mat2 K = (c_u2 * u * chib.transpose() - e_sharp * u * u_flat.transpose() + e_uu2 * chib_sharp * chib.transpose() +
              c2_u * chib_sharp * u_flat.transpose()) /
             (c * c);
    Transporter t{K, {}};
    // Matrix of K in the basis (u, v): columns are the images.
    Mat2 basis;
    basis.col(0) = u;
    basis.col(1) = p1.v;
    Mat2 img;
    img.col(0) = u2;
    img.col(1) = p2.v;
    Mat2 M = basis.inverse() * img;
    cplx cc = std::sqrt(det2(M));
    if (cc.real() < 0 || (cc.real() == 0 && cc.imag() < 0)) cc = -cc;
    t.params.c = cc;
    t.params.a = M(0, 0) / cc;
    t.params.b = -M(1, 0) / cc;
    return t;
}

}  // namespace spinorforge
