#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace spinorforge {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2cd;
using Vec4 = Eigen::Vector4cd;
using Mat4 = Eigen::Matrix4cd;
using RVec4 = Eigen::Vector4d;
using RMat4 = Eigen::Matrix4d;

inline constexpr cplx I{0.0, 1.0};

// Default comparison tolerances for small fixed-size complex algebra.
inline constexpr double kRelTol = 1e-10;
inline constexpr double kAbsTol = 1e-12;

// Precondition not met by the caller (wrong variance, non-Hermitian input...).
struct contract_violation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct degenerate_form_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct frame_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct stencil_error : std::out_of_range {
    using std::out_of_range::out_of_range;
};

bool approx_equal(cplx a, cplx b, double rel = kRelTol, double abs = kAbsTol);

template <class A, class B>
double max_abs_diff(const A& a, const B& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

template <class A>
double max_abs(const A& a) {
    return a.cwiseAbs().maxCoeff();
}

// Relative distance scaled by the larger operand, floored at one.
template <class A, class B>
double rel_diff(const A& a, const B& b) {
    double scale = std::max({1.0, max_abs(a), max_abs(b)});
    return max_abs_diff(a, b) / scale;
}

bool is_hermitian(const Mat2& w, double tol = kAbsTol);

inline cplx det2(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

// Adjugate: adj(m) m = m adj(m) = det(m) 1.
inline Mat2 adj2(const Mat2& m) {
    Mat2 r;
    r << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return r;
}

}  // namespace spinorforge
