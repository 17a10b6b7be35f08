#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "spinorforge/spinor_core.hpp"
#include "test_support.hpp"

using namespace spinorforge;

TEST_CASE("flat of basis vector") {
    TwoSpinor u{Vec2(1, 0), Variance::U};
    auto f = eps_maps(u, SymplecticForm{}, Direction::Flat);
    CHECK(f.var == Variance::UDual);
    CHECK(std::abs(f.c(0)) < 1e-15);
    CHECK(std::abs(f.c(1) - 1.0) < 1e-15);
}

TEST_CASE("sharp of second dual basis vector") {
    TwoSpinor l{Vec2(0, 1), Variance::UDual};
    auto s = eps_maps(l, SymplecticForm{}, Direction::Sharp);
    CHECK(s.var == Variance::U);
    CHECK(std::abs(s.c(0) + 1.0) < 1e-15);
    CHECK(std::abs(s.c(1)) < 1e-15);
}

TEST_CASE("sharp after flat is minus identity, for every phase and variance") {
    sf_test::Rng rng(1);
    for (int n = 0; n < 200; ++n) {
        SymplecticForm w = SymplecticForm::from_angle(rng.uniform(-3, 3));
        for (Variance v : {Variance::U, Variance::UBar}) {
            TwoSpinor x{rng.vec2(), v};
            auto back = eps_maps(eps_maps(x, w, Direction::Flat), w, Direction::Sharp);
            CHECK(back.var == v);
            CHECK(max_abs_diff(back.c, -x.c) < 1e-13);
        }
    }
}

TEST_CASE("omega sharp is minus inverse of omega flat") {
    SymplecticForm w = SymplecticForm::from_angle(0.7);
    Mat2 prod = w.lower() * w.upper();
    CHECK(max_abs_diff(prod, -Mat2::Identity()) < 1e-15);
}

TEST_CASE("variance mismatch is a contract violation") {
    TwoSpinor l{Vec2(1, 0), Variance::UDual};
    CHECK_THROWS_AS(eps_maps(l, SymplecticForm{}, Direction::Flat), contract_violation);
    TwoSpinor u{Vec2(1, 0), Variance::U};
    CHECK_THROWS_AS(eps_maps(u, SymplecticForm{}, Direction::Sharp), contract_violation);
    TwoSpinor ub{Vec2(1, 0), Variance::UBarDual};
    CHECK_THROWS_AS(contract(u, ub), contract_violation);
    CHECK_NOTHROW(contract(u, l));
}

TEST_CASE("conjugation is an involution on every variance") {
    sf_test::Rng rng(2);
    for (Variance v : {Variance::U, Variance::UDual, Variance::UBar, Variance::UBarDual}) {
        TwoSpinor x{rng.vec2(), v};
        auto y = conjugate(conjugate(x));
        CHECK(y.var == v);
        CHECK(max_abs_diff(y.c, x.c) == 0.0);
        CHECK(conjugate(x).var != v);
    }
}

TEST_CASE("symplectic form: antisymmetry, phase covariance, realness of eps eps-bar") {
    sf_test::Rng rng(3);
    for (int n = 0; n < 100; ++n) {
        Vec2 s = rng.vec2(), t = rng.vec2();
        SymplecticForm e;
        SymplecticForm w = SymplecticForm::from_angle(rng.uniform(-3, 3));
        CHECK(std::abs(e(s, t) + e(t, s)) < 1e-14);
        CHECK(std::abs(std::abs(w(s, t)) - std::abs(e(s, t))) < 1e-12);
        cplx prod = e(s, t) * e.conjugate()(s.conjugate(), t.conjugate());
        CHECK(std::abs(prod.imag()) < 1e-12);
        CHECK(prod.real() >= 0.0);
    }
    CHECK_THROWS_AS(SymplecticForm(cplx(2.0, 0.0)), contract_violation);
}

TEST_CASE("herm_split") {
    auto [h1, a1] = herm_split(Mat2::Identity());
    CHECK(max_abs_diff(h1, Mat2::Identity()) == 0.0);
    CHECK(max_abs(a1) == 0.0);
    auto [h2, a2] = herm_split(I * Mat2::Identity());
    CHECK(max_abs(h2) == 0.0);
    CHECK(max_abs_diff(a2, Mat2(I * Mat2::Identity())) == 0.0);
    sf_test::Rng rng(4);
    for (int n = 0; n < 200; ++n) {
        Mat2 w = rng.mat2();
        auto [h, a] = herm_split(w);
        CHECK(max_abs_diff(h + a, w) < 1e-15);
        CHECK(max_abs_diff(h.adjoint(), h) == 0.0);
        CHECK(max_abs_diff(a.adjoint(), Mat2(-a)) == 0.0);
    }
}

TEST_CASE("hermitian metric maps") {
    HermitianForm id;
    auto f = herm_metric_maps(id, TwoSpinor{Vec2(1, 0), Variance::UBar}, Direction::Flat);
    CHECK(f.var == Variance::UDual);
    CHECK(max_abs_diff(f.c, Vec2(1, 0)) == 0.0);

    sf_test::Rng rng(5);
    for (int n = 0; n < 200; ++n) {
        HermitianForm h{rng.hermitian()};
        for (Variance v : {Variance::U, Variance::UBar}) {
            TwoSpinor x{rng.vec2(), v};
            auto back = herm_metric_maps(h, herm_metric_maps(h, x, Direction::Flat), Direction::Sharp);
            CHECK(back.var == v);
            CHECK(max_abs_diff(back.c, x.c) < 1e-9 * std::max(1.0, x.c.norm()));
        }
    }
    Mat2 sing;
    sing << 1, 1, 1, 1;
    CHECK_THROWS_AS(herm_metric_maps(HermitianForm{sing}, TwoSpinor{Vec2(1, 0), Variance::UDual}, Direction::Sharp),
                    degenerate_form_error);
}

TEST_CASE("normalized hermitian form") {
    CHECK(HermitianForm{}.normalized());
    CHECK_FALSE(HermitianForm{Mat2(2.0 * Mat2::Identity())}.normalized());
    CHECK_FALSE(HermitianForm{Mat2(-Mat2::Identity())}.normalized());
}
