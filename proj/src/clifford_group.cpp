#include "spinorforge/clifford_group.hpp"

#include "spinorforge/minkowski.hpp"

#include <cmath>
#include <random>

namespace spinorforge {

const char* to_string(Rejection r) {
    switch (r) {
        case Rejection::None: return "none";
        case Rejection::Singular: return "singular";
        case Rejection::NotInDiracAlgebra: return "not_in_dirac_algebra";
        case Rejection::MixedParity: return "mixed_parity";
        case Rejection::NonRealDet: return "non_real_det";
    }
    return "?";
}

Membership clifford_membership(const EndW& phi, double tol) {
    Membership m;
    double scale = std::max(1e-300, phi.to_matrix().norm());
    auto bd = block_det_inverse(phi);
    if (!bd.inverse) {
        m.reason = Rejection::Singular;
        return m;
    }
    EndW d = phi.dagger_eps();
    if ((phi - d).to_matrix().norm() > tol * scale) {
        m.reason = Rejection::NotInDiracAlgebra;
        return m;
    }
    double diag = std::hypot(phi.K.norm(), phi.J.norm());
    double off = std::hypot(phi.P.norm(), phi.Q.norm());
    CliffordElement c{phi, Parity::Even, 0.0};
    cplx nu;
    if (off <= tol * scale) {
        nu = det2(phi.K);
    } else if (diag <= tol * scale) {
        c.parity = Parity::Odd;
        nu = det2(phi.P);
    } else {
        m.reason = Rejection::MixedParity;
        return m;
    }
    if (std::abs(nu.imag()) > tol * std::abs(nu)) {
        m.reason = Rejection::NonRealDet;
        return m;
    }
    c.nu = nu.real();
    m.element = c;
    return m;
}

Mat2 adjoint_action(const CliffordElement& c, const Mat2& v) {
    if (!is_hermitian(v, 1e-10)) throw contract_violation("adjoint_action needs a Hermitian vector");
    auto inv = block_det_inverse(c.phi).inverse;
    if (!inv) throw contract_violation("Clifford element is singular");
    EndW r = c.phi * gamma_of(v) * *inv;
    return r.P / std::sqrt(2.0);
}

RMat4 adjoint_matrix(const CliffordElement& c) {
    RMat4 L;
    for (int m = 0; m < 4; ++m) L.col(m) = pauli_components_complex(adjoint_action(c, tau(m))).real();
    return L;
}

bool is_pin(const CliffordElement& c, double tol) { return std::abs(std::abs(c.nu) - 1.0) <= tol; }
bool is_spin(const CliffordElement& c, double tol) { return c.parity == Parity::Even && is_pin(c, tol); }
bool is_spin_up(const CliffordElement& c, double tol) {
    return c.parity == Parity::Even && std::abs(c.nu - 1.0) <= tol;
}

EndW spin_from_sl(const Mat2& K) { return {K, Mat2::Zero(), Mat2::Zero(), eps_adjoint(K)}; }

Mat2 sl_from_spin(const CliffordElement& c) {
    if (!is_spin_up(c)) throw contract_violation("element is not in Spin-up");
    return c.phi.K;
}

RMat4 sl_to_lorentz(const Mat2& K) {
    // L^l_m = tr(sigma_l K sigma_m K^dagger) / 2, free of the sqrt2 factors of tau.
    const auto& s = pauli_sigma();
    RMat4 L;
    for (int m = 0; m < 4; ++m) {
        Mat2 w = K * s[m] * K.adjoint();
        for (int l = 0; l < 4; ++l) L(l, m) = 0.5 * (s[l] * w).trace().real();
    }
    return L;
}

bool is_proper_orthochronous(const RMat4& L, double tol) {
    double iso = (L.transpose() * eta() * L - eta()).cwiseAbs().maxCoeff();
    return iso <= tol * std::max(1.0, L.squaredNorm()) && std::abs(L.determinant() - 1.0) <= tol * L.squaredNorm() &&
           L(0, 0) >= 1.0 - tol;
}

Mat2 normalize_cover_sign(const Mat2& K) {
    const double tol = 1e-12 * std::max(1.0, K.norm());
    cplx t = K.trace();
    double s = 0;
    if (std::abs(t.real()) > tol) {
        s = t.real();
    } else if (std::abs(t.imag()) > tol) {
        s = t.imag();
    } else {
        for (int i = 0; i < 4 && s == 0; ++i) {
            cplx z = K(i / 2, i % 2);
            if (std::abs(z.real()) > tol) s = z.real();
            else if (std::abs(z.imag()) > tol) s = z.imag();
        }
    }
    return s < 0 ? Mat2(-K) : K;
}

Mat2 lorentz_to_sl(const RMat4& L) {
    if (!is_proper_orthochronous(L, 1e-9)) throw contract_violation("L is not proper orthochronous");
    // The map V -> K V K^dagger on column-major vec(V) is conj(K) kron K.
    Eigen::Matrix4cd Vt, T;
    for (int l = 0; l < 4; ++l) {
        Mat2 t = tau(l);
        Vt.col(l) << t(0, 0), t(1, 0), t(0, 1), t(1, 1);
    }
    T = Vt * L.cast<cplx>() * Vt.inverse();
    // Rearranged as R[(r,a)][(c,b)] = K(r,a) conj(K(c,b)), a rank-one Hermitian matrix.
    Eigen::Matrix4cd R;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) R(r * 2 + a, c * 2 + b) = T(r + 2 * c, a + 2 * b);
    R = 0.5 * (R + R.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(R);
    Vec4 k = es.eigenvectors().col(3) * std::sqrt(std::max(0.0, es.eigenvalues()(3)));
    Mat2 K;
    K << k(0), k(1), k(2), k(3);
    K /= std::sqrt(det2(K));
    return normalize_cover_sign(K);
}

CoverValue covering_maps(const CoverValue& in, CoverForm from, CoverForm to) {
    Mat2 K;
    switch (from) {
        case CoverForm::SL:
            if (!in.K) throw contract_violation("missing SL(2,C) input");
            if (std::abs(det2(*in.K) - 1.0) > 1e-10) throw contract_violation("det K must be 1");
            K = *in.K;
            break;
        case CoverForm::Spin: {
            if (!in.spin) throw contract_violation("missing Spin input");
            auto m = clifford_membership(*in.spin);
            if (!m.accepted() || !is_spin_up(*m.element)) throw contract_violation("input is not in Spin-up");
            K = sl_from_spin(*m.element);
            break;
        }
        case CoverForm::Lorentz:
            if (!in.L) throw contract_violation("missing Lorentz input");
            K = lorentz_to_sl(*in.L);
            break;
    }
    CoverValue out;
    switch (to) {
        case CoverForm::SL: out.K = K; break;
        case CoverForm::Spin: out.spin = spin_from_sl(K); break;
        case CoverForm::Lorentz: out.L = sl_to_lorentz(K); break;
    }
    return out;
}

namespace {

Mat2 herm_from(const Eigen::Vector4d& x) {
    Mat2 h = Mat2::Zero();
    for (int l = 0; l < 4; ++l) h += x(l) * pauli_sigma()[l];
    return h;
}

Mat2 product(const std::vector<Mat2>& f) {
    Mat2 p = Mat2::Identity();
    for (const auto& m : f) p = p * m;
    return p;
}

// Hermitian H with A H Hermitian and the largest |det H| in that solution space.
std::optional<Mat2> hermitian_right_factor(const Mat2& A) {
    // Columns: anti-Hermitian part of A sigma_l, as 4 real numbers.
    Eigen::Matrix4d M;
    for (int l = 0; l < 4; ++l) {
        Mat2 X = A * pauli_sigma()[l];
        Mat2 anti = X - X.adjoint();
        Vec4 c = pauli_components_complex(anti);
        // anti = i * (Hermitian), so c is purely imaginary in exact arithmetic.
        M.col(l) = c.imag();
    }
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    double smax = std::max(1e-300, s(0));
    std::vector<Eigen::Vector4d> ker;
    for (int i = 0; i < 4; ++i)
        if (s(i) <= 1e-9 * smax || smax < 1e-14) ker.push_back(svd.matrixV().col(i));
    if (ker.empty()) return std::nullopt;
    // det(sum c_i H_i) is a real quadratic form on the kernel; take its dominant eigenvector.
    const int n = static_cast<int>(ker.size());
    Eigen::MatrixXd Qf(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Mat2 hi = herm_from(ker[i]), hj = herm_from(ker[j]);
            Qf(i, j) = 0.5 * (det2(hi + hj) - det2(hi) - det2(hj)).real();
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Qf);
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(best))) best = i;
    if (std::abs(es.eigenvalues()(best)) < 1e-12) return std::nullopt;
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    for (int i = 0; i < n; ++i) x += es.eigenvectors()(i, best) * ker[i];
    return herm_from(x);
}

}  // namespace

Factorization hermitian_factorization(const Mat2& M, std::uint64_t seed, int max_retries) {
    Factorization out;
    cplx d = det2(M);
    double scale = std::max(1e-300, M.squaredNorm());
    if (std::abs(d.imag()) > 1e-10 * std::max(std::abs(d), 1e-300) + 1e-14 * scale)
        throw contract_violation("hermitian_factorization needs a real determinant");
    if (std::abs(d) <= 1e-14 * scale) throw contract_violation("hermitian_factorization needs det != 0");

    auto finish = [&](std::vector<Mat2> f) {
        out.factors = std::move(f);
        out.residual = rel_diff(product(out.factors), M);
        bool herm = true;
        for (const auto& x : out.factors) herm = herm && is_hermitian(x, 1e-10) && std::abs(det2(x)) > 1e-14;
        out.ok = herm && out.residual < 1e-9;
        return out.ok;
    };

    out.attempts = 1;
    if (is_hermitian(M, 1e-13) && finish({0.5 * (M + M.adjoint())})) return out;

    // Step 1: Hermitian X with tr(X M) real, i.e. x . c = 0 with c_l = Im tr(sigma_l M).
    Eigen::Vector4d c;
    for (int l = 0; l < 4; ++l) c(l) = (pauli_sigma()[l] * M).trace().imag();
    Eigen::Matrix<double, 4, 3> B;
    {
        Eigen::Vector4d cn = c.norm() > 0 ? Eigen::Vector4d(c / c.norm()) : Eigen::Vector4d(1, 0, 0, 0);
        Eigen::Matrix4d P = Eigen::Matrix4d::Identity() - cn * cn.transpose();
        Eigen::JacobiSVD<Eigen::Matrix4d> svd(P, Eigen::ComputeFullU);
        B = svd.matrixU().leftCols<3>();
    }

    auto attempt = [&](const std::optional<Mat2>& Xopt) -> bool {
        Mat2 A = Xopt ? Mat2(*Xopt * M) : M;
        auto H = hermitian_right_factor(A);
        if (!H) return false;
        Mat2 S = A * *H;
        S = 0.5 * (S + S.adjoint());
        Mat2 Hinv = H->inverse();
        Hinv = 0.5 * (Hinv + Hinv.adjoint());
        std::vector<Mat2> f;
        if (Xopt) {
            Mat2 Xinv = Xopt->inverse();
            f.push_back(0.5 * (Xinv + Xinv.adjoint()));
        }
        f.push_back(S);
        f.push_back(Hinv);
        return finish(f);
    };

    double tr_im = std::abs(M.trace().imag());
    if (tr_im <= 1e-13 * std::sqrt(scale) && attempt(std::nullopt)) return out;

    // Deterministic choice: maximize |det X| on the hyperplane.
    {
        Eigen::Matrix3d E = B.transpose() * RMat4(eta()) * B;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(E);
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(best))) best = i;
        ++out.attempts;
        if (attempt(herm_from(B * es.eigenvectors().col(best)))) return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (int k = 0; k < max_retries; ++k) {
        Eigen::Vector3d y(nd(rng), nd(rng), nd(rng));
        ++out.attempts;
        if (attempt(herm_from(B * y))) return out;
    }
    out.ok = false;
    out.factors.clear();
    out.message = "no Hermitian factorization found within the retry budget";
    return out;
}

VectorFactorization clifford_vector_factorization(const CliffordElement& c, std::uint64_t seed) {
    VectorFactorization out;
    const Mat2& M = c.parity == Parity::Even ? c.phi.K : c.phi.P;
    Factorization f = hermitian_factorization(M, seed);
    if (!f.ok) {
        out.message = f.message;
        return out;
    }
    // Alternate V_1 V_2‡ V_3 ...; for Hermitian W, W = adj(W)‡.
    std::vector<Mat2> V;
    for (std::size_t i = 0; i < f.factors.size(); ++i)
        V.push_back(i % 2 == 1 ? adj2(f.factors[i]) : f.factors[i]);
    bool want_even = c.parity == Parity::Even;
    if ((V.size() % 2 == 0) != want_even) V.push_back(Mat2::Identity());
    EndW prod = EndW::identity();
    for (auto& v : V) {
        v /= std::sqrt(2.0);
        out.vectors.push_back(v);
        prod = prod * gamma_of(v);
    }
    out.residual = rel_diff(prod.to_matrix(), c.phi.to_matrix());
    out.ok = out.residual < 1e-9;
    if (!out.ok) out.message = "vector reassembly failed";
    return out;
}

Mat2 nu_boost(int i) { return pauli_sigma()[i] / 2.0; }
Mat2 nu_rotation(int i) { return -I * pauli_sigma()[i] / 2.0; }

RMat4 lie_sl_to_lorentz(const Mat2& A) {
    RMat4 l;
    for (int m = 0; m < 4; ++m) l.col(m) = pauli_components_complex(A * tau(m) + tau(m) * A.adjoint()).real();
    return l;
}

RMat4 lie_sl_to_two_form(const Mat2& A) { return eta() * lie_sl_to_lorentz(A); }

namespace {
const int kPairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {2, 3}, {3, 1}, {1, 2}};
}

Mat2 lie_two_form_to_sl(const RMat4& omega) {
    if ((omega + omega.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, omega.norm()))
        throw contract_violation("two-form must be antisymmetric");
    Eigen::Matrix<double, 6, 6> M;
    std::array<Mat2, 6> basis;
    for (int i = 0; i < 3; ++i) {
        basis[i] = nu_boost(i + 1);
        basis[i + 3] = nu_rotation(i + 1);
    }
    for (int j = 0; j < 6; ++j) {
        RMat4 w = lie_sl_to_two_form(basis[j]);
        for (int r = 0; r < 6; ++r) M(r, j) = w(kPairs[r][0], kPairs[r][1]);
    }
    Eigen::Matrix<double, 6, 1> rhs;
    for (int r = 0; r < 6; ++r) rhs(r) = omega(kPairs[r][0], kPairs[r][1]);
    Eigen::Matrix<double, 6, 1> x = M.fullPivLu().solve(rhs);
    Mat2 A = Mat2::Zero();
    for (int j = 0; j < 6; ++j) A += x(j) * basis[j];
    return A;
}

RMat4 hodge_star(const RMat4& omega) {
    RMat4 up = eta() * omega * eta();
    RMat4 r = RMat4::Zero();
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) r(m, n) += 0.5 * up(a, b) * levi_civita(a, b, m, n);
    return r;
}

RMat4 rho_boost(int i) {
    RMat4 w = RMat4::Zero();
    w(0, i) = 1.0;
    w(i, 0) = -1.0;
    return w;
}

RMat4 rho_rotation(int i) { return -hodge_star(rho_boost(i)); }

double killing_form(const Mat2& A, const Mat2& B) {
    for (const Mat2* m : {&A, &B})
        if (std::abs(m->trace()) > 1e-12 * std::max(1.0, m->norm()))
            throw contract_violation("killing_form needs traceless input");
    return 2.0 * (A * B).trace().real();
}

double two_form_metric(const RMat4& w1, const RMat4& w2) {
    RMat4 l1 = eta() * w1, l2 = eta() * w2;
    return 0.5 * (l1 * l2).trace();
}

}  // namespace spinorforge
