#include "spinorforge/field_theory.hpp"

#include "spinorforge/minkowski.hpp"
#include "spinorforge/momentum.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

namespace spinorforge {

const char* to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "interior"; }

std::size_t Grid4::size() const {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return n;
}

std::size_t Grid4::index(const std::array<int, 4>& i) const {
    std::size_t s = 0;
    for (int a = 0; a < 4; ++a) s = s * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(i[a]);
    return s;
}

std::array<int, 4> Grid4::coords(std::size_t site) const {
    std::array<int, 4> i{};
    for (int a = 3; a >= 0; --a) {
        i[a] = static_cast<int>(site % static_cast<std::size_t>(shape[a]));
        site /= static_cast<std::size_t>(shape[a]);
    }
    return i;
}

std::optional<std::size_t> Grid4::neighbor(std::size_t site, int a, int dir) const {
    auto i = coords(site);
    i[a] += dir;
    if (i[a] < 0 || i[a] >= shape[a]) {
        if (boundary == Boundary::Interior) return std::nullopt;
        i[a] = (i[a] + shape[a]) % shape[a];
    }
    return index(i);
}

bool Grid4::interior(std::size_t site, int depth) const {
    if (boundary == Boundary::Periodic) return true;
    auto i = coords(site);
    for (int a = 0; a < 4; ++a)
        if (i[a] < depth || i[a] >= shape[a] - depth) return false;
    return true;
}

double Grid4::cell_volume() const { return spacing[0] * spacing[1] * spacing[2] * spacing[3]; }

RVec4 Grid4::position(std::size_t site) const {
    auto i = coords(site);
    RVec4 x;
    for (int a = 0; a < 4; ++a) x(a) = i[a] * spacing[a];
    return x;
}

FieldConfig FieldConfig::flat_vacuum(const Grid4& grid, const Constants& c) {
    FieldConfig f;
    f.grid = grid;
    std::size_t n = grid.size();
    f.theta.assign(n, RMat4::Identity());
    std::array<Mat2, 4> zero;
    zero.fill(Mat2::Zero());
    f.cs.assign(n, zero);
    f.a.assign(n, RVec4::Zero());
    f.ftilde.assign(n, RMat4::Zero());
    f.psi.assign(n, DiracSpinor{});
    f.constants = c;
    return f;
}

void FieldConfig::validate() const {
    std::size_t n = grid.size();
    for (int a = 0; a < 4; ++a) {
        if (grid.shape[a] < 1) throw contract_violation("grid shape must be positive");
        if (!(grid.spacing[a] > 0)) throw contract_violation("grid spacing must be positive");
    }
    if (theta.size() != n || cs.size() != n || a.size() != n || ftilde.size() != n || psi.size() != n)
        throw contract_violation("field arrays must have one entry per grid site");
    if (!(constants.k != 0.0)) throw contract_violation("coupling k must be nonzero");
    for (const auto& f : ftilde)
        if (max_abs(RMat4(f + f.transpose())) > 1e-12) throw contract_violation("F~ must be antisymmetric");
}

namespace {

const double kSqrt2 = std::sqrt(2.0);

struct Perm {
    std::array<int, 4> p;
    int sign;
};

const std::array<Perm, 24>& perms() {
    static const std::array<Perm, 24> table = [] {
        std::array<Perm, 24> r{};
        std::array<int, 4> p{0, 1, 2, 3};
        int n = 0;
        do {
            r[n++] = {p, levi_civita(p[0], p[1], p[2], p[3])};
        } while (std::next_permutation(p.begin(), p.end()));
        return r;
    }();
    return table;
}

int pair_index(int l, int m) {
    for (int i = 0; i < 6; ++i)
        if (kPairs[i][0] == l && kPairs[i][1] == m) return i;
    return -1;
}

RMat4 cofactor(const RMat4& m) {
    RMat4 c;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Eigen::Matrix3d minor;
            for (int r = 0, rr = 0; r < 4; ++r) {
                if (r == i) continue;
                for (int s = 0, ss = 0; s < 4; ++s) {
                    if (s == j) continue;
                    minor(rr, ss++) = m(r, s);
                }
                ++rr;
            }
            c(i, j) = ((i + j) % 2 ? -1.0 : 1.0) * minor.determinant();
        }
    return c;
}

// tr(sigma_lambda X) / sqrt2: the H components of a U (x) Ū tensor.
cplx hcomp(const Mat2& x, int l) { return (pauli_sigma()[l] * x).trace() / kSqrt2; }

// Pointwise data needed at the centre and at the neighbours of a stencil.
struct Point {
    std::array<Mat2, 4> conn;
    ConnectionPart cp;
    RMat4 theta;
    RMat4 ftilde_up;
    RVec4 a;
    DiracSpinor psi;
    RMat4 cot;
    std::array<Mat2, 4> hmat;
};

Point make_point(const FieldConfig& cfg, std::size_t s) {
    Point p;
    for (int a = 0; a < 4; ++a)
        p.conn[a] = cfg.cs[s][a] + I * cfg.constants.q * cfg.a[s](a) * Mat2::Identity();
    p.cp = induced_connections(p.conn);
    p.theta = cfg.theta[s];
    p.ftilde_up = eta() * cfg.ftilde[s] * eta();
    p.a = cfg.a[s];
    p.psi = cfg.psi[s];
    p.cot = cofactor(p.theta);
    for (int a = 0; a < 4; ++a) p.hmat[a] = cotetrad_matrix(p.cot, a);
    return p;
}

struct Stencil {
    Point c;
    std::array<Point, 4> plus, minus;
    std::array<double, 4> inv2h{};

    template <class F>
    auto d(int a, F&& f) const -> decltype(f(c)) {
        return decltype(f(c))((f(plus[a]) - f(minus[a])) * inv2h[a]);
    }
};

Stencil make_stencil(const FieldConfig& cfg, std::size_t s) {
    Stencil st;
    st.c = make_point(cfg, s);
    for (int a = 0; a < 4; ++a) {
        auto np = cfg.grid.neighbor(s, a, +1);
        auto nm = cfg.grid.neighbor(s, a, -1);
        if (!np || !nm)
            throw stencil_error("site " + std::to_string(s) + " has no central stencil along axis " + std::to_string(a));
        st.plus[a] = make_point(cfg, *np);
        st.minus[a] = make_point(cfg, *nm);
        st.inv2h[a] = 1.0 / (2.0 * cfg.grid.spacing[a]);
    }
    return st;
}

// Everything the site-level formulas share.
struct Core {
    Stencil st;
    MetricPart mp;
    Constants k;
    std::array<RMat4, 4> dtheta;                  // dtheta[a](b, lambda) = d_a Theta_b^lambda
    std::array<std::array<RMat4, 4>, 4> rtilde;   // lower endomorphism index
    std::array<std::array<RMat4, 4>, 4> rtilde_up;
    std::array<std::array<Mat2, 4>, 4> rspin;
    std::array<std::array<RVec4, 4>, 4> storsion; // Theta_c^lambda T^c_ab
    std::array<Vec2, 4> nu, nchi, nv;
    Vec2 v;
    std::array<Mat2, 4> current;                 // J(u) - J(v)
    RMat4 dAmat;                                  // dAmat(a, b) = d_a A_b
};

Core make_core(const FieldConfig& cfg, std::size_t s) {
    Core k;
    k.st = make_stencil(cfg, s);
    const Stencil& st = k.st;
    const Point& c = st.c;
    k.mp = geometry_from_tetrad(c.theta);
    k.k = cfg.constants;

    for (int a = 0; a < 4; ++a) k.dtheta[a] = st.d(a, [](const Point& p) { return RMat4(p.theta); });
    std::array<std::array<RMat4, 4>, 4> dgam;
    std::array<std::array<Mat2, 4>, 4> dconn;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            dgam[a][b] = st.d(a, [b](const Point& p) { return RMat4(p.cp.gamma[b]); });
            dconn[a][b] = st.d(a, [b](const Point& p) { return Mat2(p.conn[b]); });
        }
    const auto& gam = c.cp.gamma;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            k.rtilde[a][b] = -dgam[a][b] + dgam[b][a] + gam[a] * gam[b] - gam[b] * gam[a];
            k.rtilde_up[a][b] = k.rtilde[a][b] * eta();
            k.rspin[a][b] = -dconn[a][b] + dconn[b][a] + c.conn[a] * c.conn[b] - c.conn[b] * c.conn[a];
            RVec4 ta = c.theta.row(a).transpose(), tb = c.theta.row(b).transpose();
            k.storsion[a][b] = k.dtheta[a].row(b).transpose() - k.dtheta[b].row(a).transpose() + gam[b] * ta -
                               gam[a] * tb + 2.0 * (ta * c.cp.G(b) - tb * c.cp.G(a));
        }

    const Mat2 eps = ricci();
    const Vec2& u = c.psi.u;
    const Vec2& chi = c.psi.chi;
    k.v = eps * chi.conjugate();
    for (int a = 0; a < 4; ++a) {
        Vec2 du = st.d(a, [](const Point& p) { return Vec2(p.psi.u); });
        Vec2 dchi = st.d(a, [](const Point& p) { return Vec2(p.psi.chi); });
        k.nu[a] = du - c.conn[a] * u;
        k.nchi[a] = dchi + c.conn[a].adjoint() * chi;
        k.nv[a] = eps * k.nchi[a].conjugate();
        Mat2 ju = k.nu[a] * u.adjoint() - u * k.nu[a].adjoint();
        Mat2 jv = k.nv[a] * k.v.adjoint() - k.v * k.nv[a].adjoint();
        k.current[a] = ju - jv;
    }
    for (int a = 0; a < 4; ++a) {
        RVec4 d = st.d(a, [](const Point& p) { return RVec4(p.a); });
        k.dAmat.row(a) = d.transpose();
    }
    return k;
}

double dirac_pairing_re(const Core& k) { return (k.st.c.psi.chi.adjoint() * k.st.c.psi.u)(0).real(); }

Densities densities(const Core& k) {
    Densities d;
    const Point& c = k.st.c;
    const Tensor4& C2 = k.mp.cotetrad2;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            for (int l = 0; l < 4; ++l)
                for (int m = 0; m < 4; ++m) {
                    double w = C2[t4(a, b, l, m)];
                    if (w == 0.0) continue;
                    d.g += w * k.rtilde_up[a][b](l, m);
                    d.em += -0.5 * w * k.dAmat(a, b) * c.ftilde_up(l, m);
                }
        }
    d.g /= 4.0 * k.k.k;
    RMat4 flo = eta() * c.ftilde_up * eta();
    d.em += 0.25 * (c.ftilde_up.cwiseProduct(flo)).sum() * k.mp.det;
    cplx kin = 0.0;
    for (int a = 0; a < 4; ++a) kin += (c.hmat[a] * k.current[a]).trace();
    kin *= I / kSqrt2;
    d.d = kin.real() - 2.0 * k.k.m * dirac_pairing_re(k) * k.mp.det;
    d.d_imag = kin.imag();
    return d;
}

// Real basis of traceless connections and the perturbation that moves one Gamma~^{lambda mu} pair by one.
const std::array<Mat2, 6>& gamma_pair_basis() {
    static const std::array<Mat2, 6> basis = [] {
        std::array<Mat2, 6> b;
        for (int i = 0; i < 3; ++i) {
            b[i] = pauli_sigma()[i + 1];
            b[i + 3] = I * pauli_sigma()[i + 1];
        }
        Eigen::Matrix<double, 6, 6> m;
        for (int kk = 0; kk < 6; ++kk) {
            std::array<Mat2, 4> conn;
            conn.fill(Mat2::Zero());
            conn[0] = b[kk];
            RMat4 up = induced_connections(conn).gamma[0] * eta();
            for (int p = 0; p < 6; ++p) m(p, kk) = up(kPairs[p][0], kPairs[p][1]);
        }
        Eigen::Matrix<double, 6, 6> inv = m.inverse();
        std::array<Mat2, 6> out;
        for (int p = 0; p < 6; ++p) {
            out[p] = Mat2::Zero();
            for (int kk = 0; kk < 6; ++kk) out[p] += inv(kk, p) * b[kk];
        }
        return out;
    }();
    return basis;
}

ELComponents components(const Core& k) {
    ELComponents e;
    const Point& c = k.st.c;
    const auto& P = perms();
    const double kk = k.k.k;
    const double m = k.k.m;
    const double re_pair = dirac_pairing_re(k);
    const RMat4& th = c.theta;
    const auto& gam = c.cp.gamma;

    // X(a, lambda) = (i / 2 sqrt2) H-components of J(u) - J(v)
    RMat4 X;
    for (int a = 0; a < 4; ++a)
        for (int l = 0; l < 4; ++l) X(a, l) = (I / (2.0 * kSqrt2) * hcomp(k.current[a], l)).real();

    // Gamma~_c Theta_b as gt[c][b](nu)
    std::array<std::array<RVec4, 4>, 4> gt;
    for (int cc = 0; cc < 4; ++cc)
        for (int b = 0; b < 4; ++b) gt[cc][b] = gam[cc] * th.row(b).transpose();

    std::array<RMat4, 4> dft;
    for (int b = 0; b < 4; ++b) dft[b] = k.st.d(b, [](const Point& p) { return RMat4(p.ftilde_up); });

    for (const auto& pa : P)
        for (const auto& pb : P) {
            const auto& A = pa.p;
            const auto& L = pb.p;
            double s = pa.sign * pb.sign;
            // Theta components: free (c, nu) = (A[2], L[2]), contracted a, b, d <-> lambda, mu, rho
            e.theta_g(A[2], L[2]) += s * k.rtilde_up[A[0]][A[1]](L[0], L[1]) * th(A[3], L[3]);
            e.theta_em(A[2], L[2]) += -0.5 * s * k.dAmat(A[0], A[1]) * c.ftilde_up(L[0], L[1]) * th(A[3], L[3]);
            e.theta_d(A[2], L[2]) +=
                s * th(A[1], L[1]) * th(A[3], L[3]) * (X(A[0], L[0]) - m * re_pair / 3.0 * th(A[0], L[0]));
            // Gamma~ components: free a = A[0] and the ordered pair (L[0], L[1])
            int pi = pair_index(L[0], L[1]);
            if (pi >= 0) {
                double dir = k.dtheta[A[1]](A[2], L[2]) + gt[A[2]][A[1]](L[2]);
                e.gamma_g_display[A[0]][pi] += s * dir * th(A[3], L[3]);
                e.gamma_g_torsion[A[0]][pi] += s * k.storsion[A[1]][A[2]](L[2]) * th(A[3], L[3]);
            }
            // A components: free a = A[0]
            e.a_em_display(A[0]) += s * (dft[A[1]](L[0], L[1]) * th(A[2], L[2]) * th(A[3], L[3]) +
                                         2.0 * c.ftilde_up(L[0], L[1]) * k.dtheta[A[1]](A[2], L[2]) * th(A[3], L[3]));
        }
    e.theta_g /= 4.0 * kk;
    RMat4 flo = eta() * c.ftilde_up * eta();
    e.theta_em += 0.25 * (c.ftilde_up.cwiseProduct(flo)).sum() * k.mp.cotetrad;
    for (int a = 0; a < 4; ++a)
        for (int p = 0; p < 6; ++p) {
            e.gamma_g_display[a][p] /= 2.0 * kk;
            e.gamma_g_torsion[a][p] /= 4.0 * kk;
            e.gamma_g[a][p] = kGammaPairFactor * e.gamma_g_display[a][p];
        }
    e.a_em_display *= 0.5;
    e.a_em = kEmCurrentFactor * e.a_em_display;

    // Dirac Gamma~ component: the connection enters linearly, so the exact derivative is the linear term.
    const Vec2& u = c.psi.u;
    const Vec2& chi = c.psi.chi;
    const Mat2 eps = ricci();
    const auto& basis = gamma_pair_basis();
    for (int a = 0; a < 4; ++a)
        for (int p = 0; p < 6; ++p) {
            Vec2 dnu = -basis[p] * u;
            Vec2 dnv = eps * (basis[p].adjoint() * chi).conjugate();
            Mat2 dj = dnu * u.adjoint() - u * dnu.adjoint() - (dnv * k.v.adjoint() - k.v * dnv.adjoint());
            e.gamma_d[a][p] = (I / kSqrt2 * (c.hmat[a] * dj).trace()).real();
        }

    // Transcribed index formula for the same component.
    {
        std::array<Mat2, 4> tup, tlo;
        for (int l = 0; l < 4; ++l) {
            tup[l] = tau(l);
            tlo[l] = eps * tau(l) * eps.transpose();
        }
        Vec2 chib = chi.conjugate();
        for (int a = 0; a < 4; ++a) {
            Mat2 B = c.hmat[a].transpose();
            Mat2 Bu = adj2(c.hmat[a]);
            cplx T[4][4];
            for (int l = 0; l < 4; ++l)
                for (int mu = 0; mu < 4; ++mu) {
                    cplx t = 0.0;
                    for (int A = 0; A < 2; ++A)
                        for (int Ad = 0; Ad < 2; ++Ad) {
                            cplx w = 0.0;
                            for (int D = 0; D < 2; ++D)
                                for (int Cd = 0; Cd < 2; ++Cd) w += B(A, Cd) * tup[l](D, Cd) * tlo[mu](D, Ad);
                            for (int C = 0; C < 2; ++C)
                                for (int Dd = 0; Dd < 2; ++Dd) w -= B(C, Ad) * tup[l](C, Dd) * tlo[mu](A, Dd);
                            t += w * u(A) * std::conj(u(Ad));
                        }
                    for (int Bi = 0; Bi < 2; ++Bi)
                        for (int Bd = 0; Bd < 2; ++Bd) {
                            cplx w = 0.0;
                            for (int D = 0; D < 2; ++D)
                                for (int Cd = 0; Cd < 2; ++Cd) w += Bu(Bi, Cd) * tup[l](D, Bd) * tlo[mu](D, Cd);
                            for (int C = 0; C < 2; ++C)
                                for (int Dd = 0; Dd < 2; ++Dd) w -= Bu(C, Bd) * tup[l](Bi, Dd) * tlo[mu](C, Dd);
                            t += w * chib(Bi) * chi(Bd);
                        }
                    T[l][mu] = t;
                }
            for (int p = 0; p < 6; ++p) {
                int l = kPairs[p][0], mu = kPairs[p][1];
                e.gamma_d_display[a][p] = (I / (4.0 * kSqrt2) * (T[l][mu] - T[mu][l])).real();
            }
        }
    }

    // Dirac current
    Mat2 uu = u * u.adjoint() + k.v * k.v.adjoint();
    for (int a = 0; a < 4; ++a) e.a_d(a) = (kSqrt2 * k.k.q * (c.hmat[a] * uu).trace()).real();

    // F~ components, lower-index display raised with eta
    for (int p = 0; p < 6; ++p) {
        int l = kPairs[p][0], mu = kPairs[p][1];
        double s = 0.0;
        for (const auto& pa : P)
            for (const auto& pb : P) {
                if (pb.p[0] != l || pb.p[1] != mu) continue;
                const auto& A = pa.p;
                const auto& L = pb.p;
                s += pa.sign * pb.sign * k.dAmat(A[0], A[1]) * th(A[2], L[2]) * th(A[3], L[3]);
            }
        double disp = -0.5 * s + flo(l, mu) * k.mp.det;
        e.ftilde[p] = eta()(l, l) * eta()(mu, mu) * disp;
    }

    // Spinor components
    Mat2 div = Mat2::Zero(), divu = Mat2::Zero();
    Vec2 kin_u = Vec2::Zero(), kin_chi = Vec2::Zero();
    for (int a = 0; a < 4; ++a) {
        Mat2 dh = k.st.d(a, [a](const Point& p) { return Mat2(p.hmat[a]); });
        Mat2 dhu = k.st.d(a, [a](const Point& p) { return Mat2(adj2(p.hmat[a])); });
        div += dh + c.hmat[a] * c.conn[a] + c.conn[a].adjoint() * c.hmat[a];
        Mat2 bu = adj2(c.hmat[a]);
        divu += dhu - c.conn[a] * bu - bu * c.conn[a].adjoint();
        kin_u += c.hmat[a] * k.nu[a];
        kin_chi += bu * k.nchi[a];
    }
    const double det = k.mp.det;
    e.ubar_divergence = kSqrt2 * I * kin_u - m * det * chi + I / kSqrt2 * (div * u);
    e.chibar_divergence = kSqrt2 * I * kin_chi - m * det * u + I / kSqrt2 * (divu * chi);
    if (k.mp.nondegenerate) {
        const RMat4& inv = *k.mp.theta_inv;
        RVec4 tr = RVec4::Zero();
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) tr(a) += inv.row(b).dot(k.storsion[a][b].transpose());
        Mat2 tm = Mat2::Zero();
        for (int a = 0; a < 4; ++a) tm += tr(a) * c.hmat[a];
        e.ubar = kSqrt2 * I * kin_u - m * det * chi + I / kSqrt2 * (tm * u);
        e.chibar = kSqrt2 * I * kin_chi - m * det * u + I / kSqrt2 * (adj2(tm) * chi);
        e.torsion_form = true;
    } else {
        e.ubar = e.ubar_divergence;
        e.chibar = e.chibar_divergence;
    }
    return e;
}

}  // namespace

ConnectionPart induced_connections(const std::array<Mat2, 4>& conn) {
    ConnectionPart cp;
    const auto& s = pauli_sigma();
    for (int a = 0; a < 4; ++a) {
        cplx h = 0.5 * conn[a].trace();
        cp.G(a) = h.real();
        cp.Y(a) = h.imag();
        for (int mu = 0; mu < 4; ++mu) {
            Mat2 img = conn[a] * s[mu] + s[mu] * conn[a].adjoint() - 2.0 * cp.G(a) * s[mu];
            for (int l = 0; l < 4; ++l) cp.gamma[a](l, mu) = 0.5 * (s[l] * img).trace().real();
        }
    }
    return cp;
}

Mat2 reconstruct_connection(double G, double Y, const RMat4& gamma) {
    const auto& s = pauli_sigma();
    Mat2 c = cplx(G, Y) * Mat2::Identity();
    for (int l = 0; l < 4; ++l)
        for (int mu = 0; mu < 4; ++mu) c += 0.25 * gamma(l, mu) * s[l] * s[mu];
    return c;
}

EndW four_spinor_connection(const RMat4& gamma) {
    RMat4 up = gamma * eta();
    EndW r;
    for (int l = 0; l < 4; ++l)
        for (int mu = 0; mu < 4; ++mu)
            if (up(l, mu) != 0.0) r = r + (gamma_lambda(l) * gamma_lambda(mu)) * cplx(0.25 * up(l, mu));
    return r;
}

MetricPart geometry_from_tetrad(const RMat4& theta, double degenerate_tol) {
    MetricPart mp;
    mp.g = theta * eta() * theta.transpose();
    mp.det = theta.determinant();
    mp.cotetrad = cofactor(theta);
    // 2x2 minors of rows (c, d) and columns (nu, rho) complementary to (a, b) and (lambda, mu)
    for (const auto& pa : perms())
        for (const auto& pb : perms()) {
            const auto& A = pa.p;
            const auto& L = pb.p;
            mp.cotetrad2[t4(A[0], A[1], L[0], L[1])] +=
                0.5 * pa.sign * pb.sign * theta(A[2], L[2]) * theta(A[3], L[3]);
        }
    double scale = std::max(1.0, std::pow(max_abs(theta), 4));
    mp.nondegenerate = std::abs(mp.det) > degenerate_tol * scale;
    if (mp.nondegenerate) {
        mp.g_inv = mp.g.inverse();
        mp.theta_inv = RMat4(mp.cotetrad / mp.det);
    }
    return mp;
}

Mat2 cotetrad_matrix(const RMat4& cotetrad, int a) {
    Mat2 h = Mat2::Zero();
    for (int l = 0; l < 4; ++l) h += cotetrad(a, l) * tau(l);
    return h;
}

CurvatureTorsion curvature_torsion(const FieldConfig& cfg, std::size_t site) {
    Core k = make_core(cfg, site);
    CurvatureTorsion ct;
    ct.spinor = k.rspin;
    ct.rtilde = k.rtilde;
    ct.theta_torsion = k.storsion;
    if (k.mp.nondegenerate) {
        const RMat4& inv = *k.mp.theta_inv;
        std::array<RMat4, 4> t;
        RVec4 tr = RVec4::Zero();
        double r = 0.0;
        for (int cc = 0; cc < 4; ++cc)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) t[cc](a, b) = inv.row(cc).dot(k.storsion[a][b].transpose());
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                tr(a) += t[b](a, b);
                r += (inv.row(a) * k.rtilde_up[a][b] * inv.row(b).transpose())(0);
            }
        ct.torsion = t;
        ct.trace = tr;
        ct.scalar = r;
    }
    return ct;
}

DiracSpinor dirac_operator_apply(const FieldConfig& cfg, std::size_t site) {
    Core k = make_core(cfg, site);
    DiracSpinor r;
    for (int a = 0; a < 4; ++a) {
        r.u += kSqrt2 * adj2(k.st.c.hmat[a]) * k.nchi[a];
        r.chi += kSqrt2 * k.st.c.hmat[a] * k.nu[a];
    }
    return r;
}

std::optional<DiracSpinor> dirac_operator_inverse_form(const FieldConfig& cfg, std::size_t site) {
    Core k = make_core(cfg, site);
    if (!k.mp.nondegenerate) return std::nullopt;
    Vec4 acc = Vec4::Zero();
    const RMat4& inv = *k.mp.theta_inv;
    for (int a = 0; a < 4; ++a) {
        DiracSpinor nab{k.nu[a], k.nchi[a]};
        for (int l = 0; l < 4; ++l) {
            double coeff = inv(a, l) * eta()(l, l) * k.mp.det;
            if (coeff != 0.0) acc += coeff * gamma_lambda(l).apply(nab).to_vec();
        }
    }
    return DiracSpinor::from_vec(acc);
}

Densities lagrangian_eval(const FieldConfig& cfg, std::size_t site) { return densities(make_core(cfg, site)); }

ELComponents euler_lagrange_eval(const FieldConfig& cfg, std::size_t site) { return components(make_core(cfg, site)); }

std::optional<Vec4> dirac_equation_residual(const FieldConfig& cfg, std::size_t site) {
    Core k = make_core(cfg, site);
    if (!k.mp.nondegenerate) return std::nullopt;
    ELComponents e = components(k);
    Vec4 r;
    r << e.chibar, e.ubar;
    return Vec4(r / k.mp.det);
}

const char* to_string(FieldKind k) {
    switch (k) {
        case FieldKind::Theta: return "theta";
        case FieldKind::Gamma: return "gamma";
        case FieldKind::A: return "A";
        case FieldKind::Ftilde: return "ftilde";
        case FieldKind::Ubar: return "ubar";
        case FieldKind::Chibar: return "chibar";
    }
    return "?";
}

std::string FieldComponent::label() const {
    std::string s = to_string(kind);
    switch (kind) {
        case FieldKind::Theta: return s + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        case FieldKind::Gamma:
            return s + "[" + std::to_string(i) + "][" + std::to_string(kPairs[j][0]) + std::to_string(kPairs[j][1]) + "]";
        case FieldKind::Ftilde: return s + "[" + std::to_string(kPairs[i][0]) + std::to_string(kPairs[i][1]) + "]";
        default: return s + "[" + std::to_string(i) + "]";
    }
}

std::vector<FieldComponent> components_of(FieldKind kind) {
    std::vector<FieldComponent> out;
    switch (kind) {
        case FieldKind::Theta:
            for (int c = 0; c < 4; ++c)
                for (int n = 0; n < 4; ++n) out.push_back({kind, c, n});
            break;
        case FieldKind::Gamma:
            for (int a = 0; a < 4; ++a)
                for (int p = 0; p < 6; ++p) out.push_back({kind, a, p});
            break;
        case FieldKind::A:
            for (int a = 0; a < 4; ++a) out.push_back({kind, a, 0});
            break;
        case FieldKind::Ftilde:
            for (int p = 0; p < 6; ++p) out.push_back({kind, p, 0});
            break;
        case FieldKind::Ubar:
        case FieldKind::Chibar:
            for (int i = 0; i < 2; ++i) out.push_back({kind, i, 0});
            break;
    }
    return out;
}

namespace {

// Sum of the densities whose stencil touches the site.
double local_action(const FieldConfig& cfg, std::size_t site) {
    double s = lagrangian_eval(cfg, site).total();
    for (int a = 0; a < 4; ++a)
        for (int dir : {-1, 1}) s += lagrangian_eval(cfg, *cfg.grid.neighbor(site, a, dir)).total();
    return s;
}

// Applies +-delta (or +-i delta for imag = true) to one field value.
void perturb(FieldConfig& cfg, const FieldComponent& w, std::size_t s, double delta, bool imag) {
    cplx d = imag ? cplx(0.0, delta) : cplx(delta, 0.0);
    switch (w.kind) {
        case FieldKind::Theta: cfg.theta[s](w.i, w.j) += delta; break;
        case FieldKind::Gamma: cfg.cs[s][w.i] += delta * gamma_pair_basis()[w.j]; break;
        case FieldKind::A: cfg.a[s](w.i) += delta; break;
        case FieldKind::Ftilde: {
            int l = kPairs[w.i][0], m = kPairs[w.i][1];
            cfg.ftilde[s](l, m) += delta;
            cfg.ftilde[s](m, l) -= delta;
            break;
        }
        case FieldKind::Ubar: cfg.psi[s].u(w.i) += d; break;
        case FieldKind::Chibar: cfg.psi[s].chi(w.i) += d; break;
    }
}

cplx oracle_in_place(FieldConfig& cfg, const FieldComponent& w, std::size_t site, double delta) {
    auto partial = [&](bool imag) {
        FieldConfig& f = cfg;
        perturb(f, w, site, delta, imag);
        double sp = local_action(f, site);
        perturb(f, w, site, -2.0 * delta, imag);
        double sm = local_action(f, site);
        perturb(f, w, site, delta, imag);
        return (sp - sm) / (2.0 * delta);
    };
    bool complex_field = w.kind == FieldKind::Ubar || w.kind == FieldKind::Chibar;
    if (!complex_field) return {partial(false), 0.0};
    return 0.5 * cplx(partial(false), partial(true));
}

}  // namespace

cplx variational_oracle(const FieldConfig& cfg, const FieldComponent& which, std::size_t site, double delta) {
    if (!cfg.grid.interior(site, 2)) throw stencil_error("oracle needs two sites of margin around the perturbed site");
    FieldConfig work = cfg;
    return oracle_in_place(work, which, site, delta);
}

std::vector<cplx> variational_oracle(const FieldConfig& cfg, const std::vector<FieldComponent>& which,
                                     std::size_t site, double delta) {
    if (!cfg.grid.interior(site, 2)) throw stencil_error("oracle needs two sites of margin around the perturbed site");
    FieldConfig work = cfg;
    std::vector<cplx> out;
    out.reserve(which.size());
    for (const auto& w : which) out.push_back(oracle_in_place(work, w, site, delta));
    return out;
}

cplx analytic_component(const ELComponents& el, const FieldComponent& w) {
    switch (w.kind) {
        case FieldKind::Theta: return el.theta()(w.i, w.j);
        case FieldKind::Gamma: return el.gamma(w.i, w.j);
        case FieldKind::A: return el.a()(w.i);
        case FieldKind::Ftilde: return el.ftilde[w.i];
        case FieldKind::Ubar: return el.ubar(w.i);
        case FieldKind::Chibar: return el.chibar(w.i);
    }
    return 0.0;
}

int configured_threads() {
    if (const char* env = std::getenv("SPINORFORGE_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end != env && n > 0) return static_cast<int>(n);
    }
    return omp_get_max_threads();
}

namespace {

SiteResult evaluate_site(const FieldConfig& cfg, std::size_t s) {
    SiteResult r;
    if (!cfg.grid.interior(s, 1)) return r;
    Core k = make_core(cfg, s);
    r.evaluated = true;
    r.dens = densities(k);
    r.el = components(k);
    if (k.mp.nondegenerate) {
        Vec4 v;
        v << r.el.chibar, r.el.ubar;
        r.residual = Vec4(v / k.mp.det);
    }
    return r;
}

}  // namespace

FieldEvaluation evaluate_field(const FieldConfig& cfg, ExecPolicy policy) {
    cfg.validate();
    FieldEvaluation ev;
    const std::size_t n = cfg.grid.size();
    ev.sites.resize(n);
    if (policy == ExecPolicy::Serial) {
        for (std::size_t s = 0; s < n; ++s) ev.sites[s] = evaluate_site(cfg, s);
    } else {
        const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(configured_threads())
        for (long long s = 0; s < nn; ++s) ev.sites[s] = evaluate_site(cfg, static_cast<std::size_t>(s));
    }
    // Serial reduction keeps the action independent of the thread count.
    for (const auto& r : ev.sites)
        if (r.evaluated) ev.action += r.dens.total() * cfg.grid.cell_volume();
    return ev;
}

std::vector<ComponentStats> summarize(const FieldEvaluation& ev) {
    std::vector<ComponentStats> st = {{"density_g"},       {"density_em"},     {"density_dirac"},  {"density_dirac_imag"},
                                      {"el_theta"},        {"el_gamma"},       {"el_A"},           {"el_ftilde"},
                                      {"el_ubar"},         {"el_chibar"},      {"dirac_residual"}, {"torsion_rewrite"}};
    std::size_t count = 0;
    for (const auto& r : ev.sites) {
        if (!r.evaluated) continue;
        ++count;
        double tr = 0.0, gm = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int p = 0; p < 6; ++p) {
                tr = std::max(tr, std::abs(r.el.gamma_g_display[a][p] - r.el.gamma_g_torsion[a][p]));
                gm = std::max(gm, std::abs(r.el.gamma(a, p)));
            }
        double ft = 0.0;
        for (double x : r.el.ftilde) ft = std::max(ft, std::abs(x));
        double vals[] = {std::abs(r.dens.g),
                         std::abs(r.dens.em),
                         std::abs(r.dens.d),
                         std::abs(r.dens.d_imag),
                         max_abs(r.el.theta()),
                         gm,
                         max_abs(r.el.a()),
                         ft,
                         max_abs(r.el.ubar),
                         max_abs(r.el.chibar),
                         r.residual ? max_abs(*r.residual) : 0.0,
                         tr};
        for (std::size_t i = 0; i < st.size(); ++i) {
            st[i].max = std::max(st[i].max, vals[i]);
            st[i].mean += vals[i];
        }
    }
    if (count)
        for (auto& s : st) s.mean /= static_cast<double>(count);
    return st;
}

namespace {

// sum of two random plane modes a sin(k.x + phase), independent of the grid
struct SmoothScalar {
    std::array<RVec4, 2> k;
    std::array<double, 2> amp, phase;
    double offset = 0.0;

    double operator()(const RVec4& x) const {
        double s = offset;
        for (int m = 0; m < 2; ++m) s += amp[m] * std::sin(k[m].dot(x) + phase[m]);
        return s;
    }
};

SmoothScalar draw(std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SmoothScalar f;
    for (int m = 0; m < 2; ++m) {
        for (int a = 0; a < 4; ++a) f.k[m](a) = 2.0 * u(rng);
        f.amp[m] = amplitude * u(rng);
        f.phase[m] = 3.14159265358979 * u(rng);
    }
    f.offset = amplitude * u(rng);
    return f;
}

}  // namespace

FieldConfig smooth_random_config(const Grid4& grid, std::uint64_t seed, const SmoothOptions& opt) {
    std::mt19937_64 rng(seed);
    std::array<SmoothScalar, 16> th;
    std::array<std::array<SmoothScalar, 6>, 4> cs;
    std::array<SmoothScalar, 4> a;
    std::array<SmoothScalar, 6> ft;
    std::array<SmoothScalar, 8> ps;
    for (auto& f : th) f = draw(rng, opt.tetrad_amplitude);
    for (auto& row : cs)
        for (auto& f : row) f = draw(rng, opt.connection_amplitude);
    for (auto& f : a) f = draw(rng, opt.potential_amplitude);
    for (auto& f : ft) f = draw(rng, opt.ftilde_amplitude);
    for (auto& f : ps) f = draw(rng, opt.spinor_amplitude);

    FieldConfig cfg = FieldConfig::flat_vacuum(grid, opt.constants);
    const auto& s = pauli_sigma();
    for (std::size_t site = 0; site < grid.size(); ++site) {
        RVec4 x = grid.position(site);
        for (int i = 0; i < 16; ++i) cfg.theta[site](i / 4, i % 4) += th[i](x);
        for (int b = 0; b < 4; ++b) {
            Mat2 c = Mat2::Zero();
            for (int i = 0; i < 3; ++i) c += cplx(cs[b][i](x), cs[b][i + 3](x)) * s[i + 1];
            cfg.cs[site][b] = c;
            cfg.a[site](b) = a[b](x);
        }
        for (int p = 0; p < 6; ++p) {
            double v = ft[p](x);
            cfg.ftilde[site](kPairs[p][0], kPairs[p][1]) = v;
            cfg.ftilde[site](kPairs[p][1], kPairs[p][0]) = -v;
        }
        for (int i = 0; i < 2; ++i) {
            cfg.psi[site].u(i) = cplx(ps[i](x), ps[i + 2](x));
            cfg.psi[site].chi(i) = cplx(ps[i + 4](x), ps[i + 6](x));
        }
    }
    return cfg;
}

FieldConfig plane_wave_config(const Grid4& grid, const DiracSpinor& psi0) {
    Projection pr = momentum_project(psi0);
    if (pr.stratum != SpinorStratum::Wplus) throw contract_violation("plane wave needs psi0 in W+");
    RVec4 plow = eta() * pauli_to_components(pr.point.p);
    RVec4 kx;
    for (int a = 0; a < 4; ++a) {
        double z = plow(a) * grid.spacing[a];
        if (std::abs(z) > 1.0) throw contract_violation("momentum too large for the grid spacing");
        kx(a) = std::asin(z) / grid.spacing[a];
    }
    FieldConfig cfg = FieldConfig::flat_vacuum(grid, Constants{1.0, pr.point.mu, 0.0});
    for (std::size_t s = 0; s < grid.size(); ++s) {
        cplx ph = std::exp(-I * kx.dot(grid.position(s)));
        cfg.psi[s].u = ph * psi0.u;
        cfg.psi[s].chi = ph * psi0.chi;
    }
    return cfg;
}

}  // namespace spinorforge
