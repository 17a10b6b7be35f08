#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "spinorforge/clifford_group.hpp"
#include "spinorforge/field_theory.hpp"
#include "spinorforge/minkowski.hpp"
#include "spinorforge/momentum.hpp"
#include "test_support.hpp"

#include <cstdlib>

using namespace spinorforge;

namespace {

Grid4 small_grid(int n = 5, double h = 0.1) {
    Grid4 g;
    g.shape = {n, n, n, n};
    g.spacing = {h, h, h, h};
    return g;
}

std::size_t centre(const Grid4& g) { return g.index({g.shape[0] / 2, g.shape[1] / 2, g.shape[2] / 2, g.shape[3] / 2}); }

double max_el(const ELComponents& e) {
    double m = std::max({max_abs(e.theta()), max_abs(e.a()), max_abs(e.ubar), max_abs(e.chibar)});
    for (int a = 0; a < 4; ++a)
        for (int p = 0; p < 6; ++p) m = std::max(m, std::abs(e.gamma(a, p)));
    for (double x : e.ftilde) m = std::max(m, std::abs(x));
    return m;
}

RMat4 lorentz_of(const Mat2& K) {
    RMat4 L;
    for (int mu = 0; mu < 4; ++mu) L.col(mu) = pauli_to_components(K * tau(mu) * K.adjoint());
    return L;
}

// Constant frame change by K with |det K| = 1.
FieldConfig gauge(const FieldConfig& cfg, const Mat2& K) {
    FieldConfig out = cfg;
    Mat2 Ki = K.inverse();
    RMat4 L = lorentz_of(K);
    RMat4 Li = L.inverse();
    for (std::size_t s = 0; s < cfg.grid.size(); ++s) {
        for (int a = 0; a < 4; ++a) out.cs[s][a] = Ki * cfg.cs[s][a] * K;
        out.theta[s] = cfg.theta[s] * Li.transpose();
        out.ftilde[s] = L.transpose() * cfg.ftilde[s] * L;
        out.psi[s].u = Ki * cfg.psi[s].u;
        out.psi[s].chi = K.adjoint() * cfg.psi[s].chi;
    }
    return out;
}

}  // namespace

TEST_CASE("grid indexing puts x3 fastest and handles both boundary modes") {
    Grid4 g = small_grid(4);
    CHECK(g.index({0, 0, 0, 1}) == 1);
    CHECK(g.index({1, 0, 0, 0}) == 64);
    for (std::size_t s : {0ul, 37ul, 255ul}) CHECK(g.index(g.coords(s)) == s);
    CHECK_FALSE(g.neighbor(0, 2, -1).has_value());
    g.boundary = Boundary::Periodic;
    CHECK(*g.neighbor(0, 2, -1) == g.index({0, 0, 3, 0}));
}

TEST_CASE("flat vacuum has vanishing densities and Euler-Lagrange components") {
    FieldConfig cfg = FieldConfig::flat_vacuum(small_grid(), Constants{1.0, 0.5, 0.3});
    auto d = lagrangian_eval(cfg, centre(cfg.grid));
    CHECK(std::abs(d.total()) < 1e-12);
    CHECK(max_el(euler_lagrange_eval(cfg, centre(cfg.grid))) < 1e-12);
    auto ev = evaluate_field(cfg, ExecPolicy::Serial);
    for (const auto& st : summarize(ev)) CHECK(st.max < 1e-12);
}

TEST_CASE("tetrad geometry: metric, determinant and cotetrad") {
    RMat4 th = RMat4::Identity();
    th(0, 0) = 2.0;
    MetricPart mp = geometry_from_tetrad(th);
    CHECK(mp.det == doctest::Approx(2.0));
    CHECK(max_abs_diff(mp.g, RMat4(RVec4(4, -1, -1, -1).asDiagonal())) < 1e-14);
    CHECK(mp.cotetrad(0, 0) == doctest::Approx(1.0));
    CHECK(mp.cotetrad(1, 1) == doctest::Approx(2.0));

    sf_test::Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        RMat4 m;
        for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = rng.real();
        MetricPart q = geometry_from_tetrad(m);
        CHECK(max_abs_diff(q.cotetrad, RMat4(q.det * m.inverse().transpose())) < 1e-10 * std::max(1.0, std::abs(q.det)));
        CHECK(max_abs_diff(RMat4(m.transpose() * q.cotetrad), RMat4(q.det * RMat4::Identity())) < 1e-10 * std::max(1.0, std::abs(q.det)));
        // Contracting the second cotetrad with one more Theta gives the first.
        for (int a = 0; a < 4; ++a)
            for (int l = 0; l < 4; ++l) {
                double s = 0.0;
                for (int b = 0; b < 4; ++b)
                    for (int mu = 0; mu < 4; ++mu) s += q.cotetrad2[t4(a, b, l, mu)] * m(b, mu);
                CHECK(s == doctest::Approx(3.0 * q.cotetrad(a, l)).epsilon(1e-9));
            }
    }
    RMat4 deg = RMat4::Identity();
    deg(3, 3) = 0.0;
    CHECK_FALSE(geometry_from_tetrad(deg).nondegenerate);
}

TEST_CASE("induced connections reconstruct the spinor connection") {
    sf_test::Rng rng(12);
    for (int t = 0; t < 50; ++t) {
        std::array<Mat2, 4> conn;
        for (auto& c : conn) c = rng.mat2();
        ConnectionPart cp = induced_connections(conn);
        for (int a = 0; a < 4; ++a) {
            CHECK(max_abs_diff(reconstruct_connection(cp.G(a), cp.Y(a), cp.gamma[a]), conn[a]) < 1e-12);
            // metricity: Gamma~^{lambda mu} antisymmetric
            RMat4 up = cp.gamma[a] * eta();
            CHECK(max_abs(RMat4(up + up.transpose())) < 1e-12);
            // four-spinor form: the traceless part acts as (C0, -C0^dagger) on U + Ū*
            Mat2 c0 = conn[a] - 0.5 * conn[a].trace() * Mat2::Identity();
            EndW w = four_spinor_connection(cp.gamma[a]);
            CHECK(max_abs_diff(w.K, c0) < 1e-12);
            CHECK(max_abs_diff(w.J, Mat2(-c0.adjoint())) < 1e-12);
            CHECK(max_abs(w.P) < 1e-12);
            CHECK(max_abs(w.Q) < 1e-12);
        }
    }
    std::array<Mat2, 4> pure;
    pure.fill(Mat2::Zero());
    pure[2] = cplx(0.0, 0.7) * Mat2::Identity();
    ConnectionPart cp = induced_connections(pure);
    CHECK(cp.Y(2) == doctest::Approx(0.7));
    CHECK(max_abs(cp.gamma[2]) < 1e-15);
}

TEST_CASE("curvature of a constant connection is the commutator term") {
    FieldConfig cfg = FieldConfig::flat_vacuum(small_grid());
    sf_test::Rng rng(13);
    std::array<Mat2, 4> c;
    for (auto& m : c) m = rng.mat2();
    for (auto& cs : cfg.cs) cs = c;
    auto ct = curvature_torsion(cfg, centre(cfg.grid));
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) CHECK(max_abs_diff(ct.spinor[a][b], Mat2(c[a] * c[b] - c[b] * c[a])) < 1e-12);
}

TEST_CASE("linear electromagnetic trace gives exact imaginary curvature") {
    FieldConfig cfg = FieldConfig::flat_vacuum(small_grid());
    for (std::size_t s = 0; s < cfg.grid.size(); ++s) cfg.cs[s][0] = I * cfg.grid.position(s)(1) * Mat2::Identity();
    auto ct = curvature_torsion(cfg, centre(cfg.grid));
    // (dY)_10 = 1/2 in the half convention; R_10 = -2 i (dY)_10
    CHECK(max_abs_diff(ct.spinor[1][0], Mat2(-I * Mat2::Identity())) < 1e-12);
    CHECK(max_abs_diff(ct.spinor[0][1], Mat2(I * Mat2::Identity())) < 1e-12);
    CHECK(max_abs(ct.spinor[2][3]) < 1e-12);
}

TEST_CASE("spinor and vector curvatures obey the curvature relation") {
    FieldConfig cfg = smooth_random_config(small_grid(), 21);
    // add a dilaton part so that G and dG are nonzero
    for (std::size_t s = 0; s < cfg.grid.size(); ++s) {
        RVec4 x = cfg.grid.position(s);
        for (int a = 0; a < 4; ++a) cfg.cs[s][a] += std::sin(x(0) + 2.0 * x(a)) * Mat2::Identity();
    }
    std::size_t s = centre(cfg.grid);
    auto ct = curvature_torsion(cfg, s);
    // G + i Y from the effective connection at a site, differenced independently
    auto gy = [&](std::size_t site, int b) {
        return 0.5 * cfg.cs[site][b].trace() + I * cfg.constants.q * cfg.a[site](b);
    };
    auto d = [&](int a, int b) {
        return (gy(*cfg.grid.neighbor(s, a, 1), b) - gy(*cfg.grid.neighbor(s, a, -1), b)) / (2.0 * cfg.grid.spacing[a]);
    };
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            Mat2 rhs = ct.spinor[a][b];
            Mat2 vec = Mat2::Zero();
            for (int l = 0; l < 4; ++l)
                for (int mu = 0; mu < 4; ++mu)
                    vec += 0.25 * ct.rtilde[a][b](l, mu) * pauli_sigma()[l] * pauli_sigma()[mu];
            // -2 (dG + i dY)_ab with the half-convention exterior derivative
            cplx tr = -(d(a, b) - d(b, a));
            CHECK(max_abs_diff(rhs, Mat2(tr * Mat2::Identity() + vec)) < 1e-10);
            // antisymmetry in ab and in lambda mu after raising
            RMat4 up = ct.rtilde[a][b] * eta();
            CHECK(max_abs(RMat4(up + up.transpose())) < 1e-10);
            CHECK(max_abs(RMat4(ct.rtilde[a][b] + ct.rtilde[b][a])) < 1e-12);
        }
}

TEST_CASE("gravitational density equals R det Theta / 2k") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        FieldConfig cfg = smooth_random_config(small_grid(), seed);
        cfg.constants.k = 0.7;
        std::size_t s = centre(cfg.grid);
        auto ct = curvature_torsion(cfg, s);
        REQUIRE(ct.scalar.has_value());
        double det = cfg.theta[s].determinant();
        CHECK(lagrangian_eval(cfg, s).g == doctest::Approx(*ct.scalar * det / (2.0 * 0.7)).epsilon(1e-10));
    }
}

TEST_CASE("torsion vanishes for the flat tetrad with zero connection") {
    FieldConfig cfg = FieldConfig::flat_vacuum(small_grid());
    auto ct = curvature_torsion(cfg, centre(cfg.grid));
    REQUIRE(ct.torsion.has_value());
    for (const auto& t : *ct.torsion) CHECK(max_abs(t) < 1e-14);
}

TEST_CASE("torsion rewriting of the gravitational Gamma component agrees") {
    FieldConfig cfg = smooth_random_config(small_grid(), 5);
    auto e = euler_lagrange_eval(cfg, centre(cfg.grid));
    for (int a = 0; a < 4; ++a)
        for (int p = 0; p < 6; ++p) CHECK(e.gamma_g_display[a][p] == doctest::Approx(e.gamma_g_torsion[a][p]).epsilon(1e-10));
}

TEST_CASE("transcribed Dirac Gamma component matches the exact linear term") {
    FieldConfig cfg = smooth_random_config(small_grid(), 6);
    auto e = euler_lagrange_eval(cfg, centre(cfg.grid));
    for (int a = 0; a < 4; ++a)
        for (int p = 0; p < 6; ++p)
            CHECK(e.gamma_d[a][p] == doctest::Approx(kDiracGammaDisplayFactor * e.gamma_d_display[a][p]).epsilon(1e-10));
}

TEST_CASE("cotetrad Dirac operator equals gamma^a nabla_a times det Theta") {
    FieldConfig cfg = smooth_random_config(small_grid(), 8);
    for (std::size_t s : {centre(cfg.grid), cfg.grid.index({1, 2, 3, 1})}) {
        DiracSpinor a = dirac_operator_apply(cfg, s);
        auto b = dirac_operator_inverse_form(cfg, s);
        REQUIRE(b.has_value());
        CHECK(max_abs_diff(a.to_vec(), b->to_vec()) < 1e-10);
    }
}

TEST_CASE("Dirac density is real and the residual carries the torsion term") {
    FieldConfig cfg = smooth_random_config(small_grid(), 9);
    std::size_t s = centre(cfg.grid);
    CHECK(std::abs(lagrangian_eval(cfg, s).d_imag) < 1e-12);

    auto res = dirac_equation_residual(cfg, s);
    REQUIRE(res.has_value());
    double det = cfg.theta[s].determinant();
    Vec4 base = (I * dirac_operator_apply(cfg, s).to_vec()) / det - cfg.constants.m * cfg.psi[s].to_vec();
    auto ct = curvature_torsion(cfg, s);
    RMat4 inv = cfg.theta[s].inverse().transpose();  // Theta^a_lambda
    RVec4 tsharp = RVec4::Zero();
    for (int l = 0; l < 4; ++l)
        for (int a = 0; a < 4; ++a) tsharp(l) += eta()(l, l) * inv(a, l) * (*ct.trace)(a);
    Vec4 shift = (0.5 * I) * gamma_of(pauli_to_matrix(tsharp)).apply(cfg.psi[s]).to_vec();
    CHECK(max_abs_diff(*res, Vec4(base + shift)) < 1e-10);
}

TEST_CASE("plane wave solves the Dirac equation on the flat background") {
    sf_test::Rng rng(15);
    int done = 0;
    for (int t = 0; t < 40 && done < 5; ++t) {
        DiracSpinor psi0{0.4 * rng.vec2(), 0.4 * rng.vec2()};
        cplx c = (psi0.chi.adjoint() * psi0.u)(0);
        if (std::abs(c) < 0.05) continue;
        psi0.u *= std::exp(-I * std::arg(c));
        REQUIRE(momentum_project(psi0).stratum == SpinorStratum::Wplus);
        FieldConfig cfg = plane_wave_config(small_grid(), psi0);
        std::size_t s = centre(cfg.grid);
        auto r = dirac_equation_residual(cfg, s);
        REQUIRE(r.has_value());
        CHECK(max_abs(*r) < 1e-9);
        CHECK(std::abs(lagrangian_eval(cfg, s).d) < 1e-9);
        // the current is constant, so its divergence vanishes
        auto e0 = euler_lagrange_eval(cfg, s);
        auto e1 = euler_lagrange_eval(cfg, cfg.grid.index({1, 1, 2, 3}));
        CHECK(max_abs_diff(e0.a_d, e1.a_d) < 1e-12);
        ++done;
    }
    CHECK(done == 5);
}

TEST_CASE("F~ equation: linear potential sources it and the pullback of 2dA solves it") {
    FieldConfig cfg = FieldConfig::flat_vacuum(small_grid());
    sf_test::Rng rng(16);
    RMat4 c;
    for (int i = 0; i < 16; ++i) c(i / 4, i % 4) = rng.real();
    for (std::size_t s = 0; s < cfg.grid.size(); ++s) cfg.a[s] = c.transpose() * cfg.grid.position(s);
    std::size_t s = centre(cfg.grid);
    auto e = euler_lagrange_eval(cfg, s);
    double mx = 0.0;
    for (int p = 0; p < 6; ++p) {
        int l = kPairs[p][0], m = kPairs[p][1];
        double expect = -eta()(l, l) * eta()(m, m) * (c(l, m) - c(m, l));
        CHECK(e.ftilde[p] == doctest::Approx(expect).epsilon(1e-10));
        mx = std::max(mx, std::abs(e.ftilde[p]));
    }
    CHECK(mx > 1e-3);
    RMat4 f = c - c.transpose();
    for (auto& ft : cfg.ftilde) ft = f;
    e = euler_lagrange_eval(cfg, s);
    for (double x : e.ftilde) CHECK(std::abs(x) < 1e-12);
    // on shell the electromagnetic density is -F^2 / 4
    RMat4 fup = eta() * f * eta();
    CHECK(lagrangian_eval(cfg, s).em == doctest::Approx(-0.25 * fup.cwiseProduct(f).sum()).epsilon(1e-12));
}

TEST_CASE("analytic components match the variational oracle on a smooth configuration") {
    FieldConfig cfg = smooth_random_config(small_grid(6), 31);
    std::size_t s = cfg.grid.index({2, 3, 2, 3});
    auto e = euler_lagrange_eval(cfg, s);
    for (auto kind : {FieldKind::Theta, FieldKind::Gamma, FieldKind::A, FieldKind::Ftilde, FieldKind::Ubar, FieldKind::Chibar}) {
        auto comps = components_of(kind);
        auto o = variational_oracle(cfg, comps, s);
        double err = 0.0;
        for (std::size_t i = 0; i < comps.size(); ++i) err = std::max(err, std::abs(o[i] - analytic_component(e, comps[i])));
        INFO(to_string(kind));
        // algebraic components are exact; the others carry the O(h^2) stencil error
        CHECK(err < ((kind == FieldKind::Theta || kind == FieldKind::Ftilde) ? 1e-8 : 1e-2));
    }
}

TEST_CASE("oracle refuses sites without room for the local action") {
    FieldConfig cfg = FieldConfig::flat_vacuum(small_grid());
    CHECK_THROWS_AS(variational_oracle(cfg, FieldComponent{FieldKind::A, 0, 0}, cfg.grid.index({1, 2, 2, 2})), stencil_error);
}

TEST_CASE("constant gauge transformations leave every density invariant") {
    FieldConfig cfg = smooth_random_config(small_grid(), 41);
    sf_test::Rng rng(17);
    for (int t = 0; t < 5; ++t) {
        Mat2 K = std::exp(I * rng.uniform(-3, 3)) * rng.sl2c();
        FieldConfig g = gauge(cfg, K);
        for (std::size_t s : {centre(cfg.grid), cfg.grid.index({1, 2, 3, 1})}) {
            auto d0 = lagrangian_eval(cfg, s);
            auto d1 = lagrangian_eval(g, s);
            CHECK(d1.g == doctest::Approx(d0.g).epsilon(1e-10));
            CHECK(d1.em == doctest::Approx(d0.em).epsilon(1e-10));
            CHECK(d1.d == doctest::Approx(d0.d).epsilon(1e-10));
            // G and Y unchanged, Gamma~ conjugated
            auto c0 = induced_connections(cfg.cs[s]);
            auto c1 = induced_connections(g.cs[s]);
            CHECK(max_abs_diff(c0.Y, c1.Y) < 1e-12);
            CHECK(max_abs_diff(c0.G, c1.G) < 1e-12);
            RMat4 L = lorentz_of(K);
            CHECK(max_abs_diff(c1.gamma[1], RMat4(L.inverse() * c0.gamma[1] * L)) < 1e-9);
        }
    }
}

TEST_CASE("degenerate tetrad: densities evaluate, residual is withheld") {
    FieldConfig cfg = smooth_random_config(small_grid(), 51);
    for (auto& th : cfg.theta) th.row(3).setZero();
    std::size_t s = centre(cfg.grid);
    CHECK(std::abs(lagrangian_eval(cfg, s).d_imag) < 1e-12);
    CHECK_FALSE(dirac_equation_residual(cfg, s).has_value());
    auto e = euler_lagrange_eval(cfg, s);
    CHECK_FALSE(e.torsion_form);
    CHECK(max_abs_diff(e.ubar, e.ubar_divergence) == 0.0);
    CHECK_FALSE(curvature_torsion(cfg, s).torsion.has_value());
}

TEST_CASE("serial and OpenMP evaluators agree exactly") {
    setenv("SPINORFORGE_THREADS", "3", 1);
    CHECK(configured_threads() == 3);
    FieldConfig cfg = smooth_random_config(small_grid(6), 61);
    auto a = evaluate_field(cfg, ExecPolicy::Serial);
    auto b = evaluate_field(cfg, ExecPolicy::OpenMP);
    CHECK(a.action == b.action);
    for (std::size_t s = 0; s < cfg.grid.size(); ++s) {
        REQUIRE(a.sites[s].evaluated == b.sites[s].evaluated);
        if (!a.sites[s].evaluated) continue;
        CHECK(a.sites[s].dens.total() == b.sites[s].dens.total());
        CHECK(a.sites[s].el.theta() == b.sites[s].el.theta());
        CHECK(a.sites[s].el.ubar == b.sites[s].el.ubar);
        CHECK(*a.sites[s].residual == *b.sites[s].residual);
    }
    unsetenv("SPINORFORGE_THREADS");
}

TEST_CASE("field config JSON round trip and error keys") {
    FieldConfig cfg = smooth_random_config(small_grid(3), 71);
    FieldConfig back = parse_field_config(dump_field_config(cfg));
    CHECK(back.grid.shape == cfg.grid.shape);
    CHECK(back.constants.m == cfg.constants.m);
    for (std::size_t s = 0; s < cfg.grid.size(); ++s) {
        CHECK(back.theta[s] == cfg.theta[s]);
        CHECK(back.cs[s][2] == cfg.cs[s][2]);
        CHECK(back.psi[s].chi == cfg.psi[s].chi);
    }

    std::string minimal = R"({"grid":{"shape":[3,3,3,3],"spacing":[0.1,0.1,0.1,0.1]},
        "constants":{"k":1,"m":0,"q":0},
        "theta":[[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]],
        "cs":[[[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]]]],
        "a":[[0,0,0,0]], "ftilde":[[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]],
        "psi":[{"u":[0,0],"chi":[0,0]}]})";
    FieldConfig m = parse_field_config(minimal);
    CHECK(m.theta.size() == 81);
    CHECK(m.grid.boundary == Boundary::Interior);

    auto key_of = [](const std::string& text) {
        try {
            parse_field_config(text);
        } catch (const config_error& e) {
            return e.key;
        }
        return std::string("<none>");
    };
    std::string no_psi = minimal.substr(0, minimal.find(",\n        \"psi\"")) + "}";
    CHECK(key_of(no_psi) == "psi");
    std::string bad_a = minimal;
    bad_a.replace(bad_a.find("[[0,0,0,0]]"), 11, "[[0,0,\"x\",0]]");
    CHECK(key_of(bad_a) == "a[0][2]");
    std::string asym = minimal;
    asym.replace(asym.find("\"ftilde\":[[[0,0"), 15, "\"ftilde\":[[[0,1");
    CHECK(key_of(asym) == "ftilde[0]");
    CHECK(key_of("[1,2]") == "");
}
