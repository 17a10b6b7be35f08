#pragma once

#include "spinorforge/dirac.hpp"

#include <cstdint>
#include <random>

namespace spinorforge {

// Seeded source for every random draw of a run.
struct Sampler {
    std::mt19937_64 gen;
    std::normal_distribution<double> nd{0.0, 1.0};
    explicit Sampler(std::uint64_t seed) : gen(seed) {}

    double real() { return nd(gen); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
    cplx complex() { return {nd(gen), nd(gen)}; }
    Vec2 vec2() { return {complex(), complex()}; }
    Mat2 mat2() {
        Mat2 m;
        m << complex(), complex(), complex(), complex();
        return m;
    }
    Mat2 hermitian() {
        Mat2 m = mat2();
        return 0.5 * (m + m.adjoint());
    }
    Mat2 sl2c() {
        Mat2 m = mat2();
        return m / std::sqrt(det2(m));
    }
    EndW endw() { return EndW{mat2(), mat2(), mat2(), mat2()}; }
    DiracSpinor spinor() { return DiracSpinor{vec2(), vec2()}; }
};

}  // namespace spinorforge
