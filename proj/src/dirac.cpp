#include "spinorforge/dirac.hpp"

#include "spinorforge/minkowski.hpp"

#include <cmath>

namespace spinorforge {

Vec4 DiracSpinor::to_vec() const {
    Vec4 v;
    v << u, chi;
    return v;
}

DiracSpinor DiracSpinor::from_vec(const Vec4& v) { return {v.head<2>(), v.tail<2>()}; }

EndW EndW::identity() { return {Mat2::Identity(), Mat2::Zero(), Mat2::Zero(), Mat2::Identity()}; }

EndW EndW::from_matrix(const Mat4& m) {
    return {m.topLeftCorner<2, 2>(), m.topRightCorner<2, 2>(), m.bottomLeftCorner<2, 2>(),
            m.bottomRightCorner<2, 2>()};
}

Mat4 EndW::to_matrix() const {
    Mat4 m;
    m << K, P, Q, J;
    return m;
}

DiracSpinor EndW::apply(const DiracSpinor& psi) const {
    return {K * psi.u + P * psi.chi, Q * psi.u + J * psi.chi};
}

EndW EndW::operator*(const EndW& o) const {
    return {K * o.K + P * o.Q, K * o.P + P * o.J, Q * o.K + J * o.Q, Q * o.P + J * o.J};
}
EndW EndW::operator+(const EndW& o) const { return {K + o.K, P + o.P, Q + o.Q, J + o.J}; }
EndW EndW::operator-(const EndW& o) const { return {K - o.K, P - o.P, Q - o.Q, J - o.J}; }
EndW EndW::operator*(cplx s) const { return {K * s, P * s, Q * s, J * s}; }

EndW EndW::dagger_eps() const {
    return {eps_adjoint(J), eps_adjoint(Q), eps_adjoint(P), eps_adjoint(K)};
}

Mat4 basis_matrix(SpinorBasisKind kind) {
    // Weyl basis (zeta_1, zeta_2, -zbar^1, -zbar^2).
    Mat4 weyl = Vec4(1, 1, -1, -1).asDiagonal();
    if (kind == SpinorBasisKind::Weyl) return weyl;
    // Dirac basis in Weyl components, uniform 1/sqrt2 normalization.
    Mat4 u;
    u << 1, 0, 1, 0,
         0, 1, 0, 1,
        -1, 0, 1, 0,
         0, -1, 0, 1;
    return weyl * u / std::sqrt(2.0);
}

Mat4 in_basis(const EndW& phi, SpinorBasisKind kind) {
    Mat4 b = basis_matrix(kind);
    return b.inverse() * phi.to_matrix() * b;
}

EndW gamma_of(const Mat2& y) {
    const double r2 = std::sqrt(2.0);
    // The lower block is sqrt2 times y-flat transposed; for Hermitian y this is sqrt2 y‡.
    return {Mat2::Zero(), r2 * y, r2 * adj2(y), Mat2::Zero()};
}

EndW gamma_lambda(int lambda) { return gamma_of(tau(lambda)); }

cplx k_product(const DiracSpinor& a, const DiracSpinor& b) {
    // <chi-bar, u'> + <chi', u-bar>
    return (a.chi.adjoint() * b.u)(0) + (b.chi.transpose() * a.u.conjugate())(0);
}

std::pair<TwoSpinor, TwoSpinor> dirac_adjoint(const DiracSpinor& psi) {
    return {TwoSpinor{psi.chi.conjugate(), Variance::UDual}, TwoSpinor{psi.u.conjugate(), Variance::UBar}};
}

Mat4 k_gram(SpinorBasisKind kind) {
    Mat4 b = basis_matrix(kind);
    Mat4 g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            g(i, j) = k_product(DiracSpinor::from_vec(b.col(i)), DiracSpinor::from_vec(b.col(j)));
    return g;
}

EndW gamma_eta() { return gamma_lambda(0) * gamma_lambda(1) * gamma_lambda(2) * gamma_lambda(3); }

DiracSpinor charge_conjugation(const DiracSpinor& psi, const SymplecticForm& omega) {
    // Conjugate first, then act linearly.
    Vec2 chibar = psi.chi.conjugate();
    Vec2 ubar = psi.u.conjugate();
    Vec2 u = omega.upper().transpose() * chibar;
    Vec2 chi = -(omega.conjugate().lower().transpose() * ubar);
    return {u, chi};
}

DiracSpinor discrete_symmetries(const DiracSpinor& psi, const Mat2& observer, const SymplecticForm& omega,
                                DiscreteSymmetry which) {
    if (!is_hermitian(observer, 1e-10)) throw contract_violation("observer must be Hermitian");
    if (std::abs(metric_g(observer, observer).real() - 1.0) > 1e-10 || observer.trace().real() <= 0)
        throw contract_violation("observer must be a future timelike unit vector");
    switch (which) {
        case DiscreteSymmetry::C: return charge_conjugation(psi, omega);
        case DiscreteSymmetry::P: return gamma_of(observer).apply(psi);
        case DiscreteSymmetry::T:
            return (gamma_eta() * gamma_of(observer)).apply(charge_conjugation(psi, omega));
    }
    return psi;
}

Mat2 eps_transpose(const Mat2& x, SlotType) { return adj2(x).transpose(); }

Mat2 eps_adjoint(const Mat2& x) { return adj2(x).adjoint(); }

std::array<EndW, 5> grades_of_d(const EndW& a) {
    std::array<EndW, 5> g;
    cplx k0 = 0.5 * a.K.trace();
    Mat2 k_tl = a.K - k0 * Mat2::Identity();
    g[0] = EndW::identity() * k0.real();
    g[4] = EndW{Mat2::Identity() * (I * k0.imag()), Mat2::Zero(), Mat2::Zero(),
                Mat2::Identity() * (-I * k0.imag())};
    g[2] = EndW{k_tl, Mat2::Zero(), Mat2::Zero(), eps_adjoint(k_tl)};
    auto [ph, pa] = herm_split(a.P);
    g[1] = EndW{Mat2::Zero(), ph, eps_adjoint(ph), Mat2::Zero()};
    g[3] = EndW{Mat2::Zero(), pa, eps_adjoint(pa), Mat2::Zero()};
    return g;
}

GradeParts grade_decompose(const EndW& phi) {
    GradeParts r;
    EndW d = phi.dagger_eps();
    r.d_part = (phi + d) * 0.5;
    r.i_part = (phi - d) * (1.0 / (2.0 * I));
    r.grade = grades_of_d(r.d_part);
    r.i_grade = grades_of_d(r.i_part);
    return r;
}

BlockDetInverse block_det_inverse(const EndW& phi, double singular_tol) {
    const Mat2 &K = phi.K, &P = phi.P, &Q = phi.Q, &J = phi.J;
    // X~* = adj(X)
    Mat2 aK = adj2(K), aP = adj2(P), aQ = adj2(Q), aJ = adj2(J);
    cplx det = det2(K) * det2(J) + det2(P) * det2(Q) - (aQ * J * aP * K).trace();
    BlockDetInverse r{det, std::nullopt};
    double scale = std::pow(std::max(1e-300, phi.to_matrix().norm()), 4);
    if (std::abs(det) <= singular_tol * scale) return r;
    EndW adjphi{det2(J) * aK - aQ * J * aP, det2(P) * aQ - aK * P * aJ, det2(Q) * aP - aJ * Q * aK,
                det2(K) * aJ - aP * K * aQ};
    r.inverse = adjphi * (1.0 / det);
    return r;
}

}  // namespace spinorforge
