#include "spinorforge/minkowski.hpp"

#include "spinorforge/clifford_group.hpp"

#include <cmath>

namespace spinorforge {

const std::array<Mat2, 4>& pauli_sigma() {
    static const std::array<Mat2, 4> s = [] {
        std::array<Mat2, 4> r;
        r[0] << 1, 0, 0, 1;
        r[1] << 0, 1, 1, 0;
        r[2] << 0, -I, I, 0;
        r[3] << 1, 0, 0, -1;
        return r;
    }();
    return s;
}

Mat2 tau(int lambda) { return pauli_sigma()[lambda] / std::sqrt(2.0); }

const RMat4& eta() {
    static const RMat4 e = RVec4(1, -1, -1, -1).asDiagonal();
    return e;
}

Mat2 pauli_to_matrix(const RVec4& x) {
    Mat2 w = Mat2::Zero();
    for (int l = 0; l < 4; ++l) w += x(l) * pauli_sigma()[l];
    return w / std::sqrt(2.0);
}

Vec4 pauli_components_complex(const Mat2& w) {
    Vec4 x;
    for (int l = 0; l < 4; ++l) x(l) = (pauli_sigma()[l] * w).trace() / std::sqrt(2.0);
    return x;
}

RVec4 pauli_to_components(const Mat2& w) {
    if (!is_hermitian(w, 1e-12)) throw contract_violation("pauli_to_components needs a Hermitian tensor");
    return pauli_components_complex(w).real();
}

cplx metric_g(const Mat2& w1, const Mat2& w2) { return det2(w1 + w2) - det2(w1) - det2(w2); }

const char* to_string(CausalClass c) {
    switch (c) {
        case CausalClass::NullFuture: return "null_future";
        case CausalClass::NullPast: return "null_past";
        case CausalClass::TimelikeFuture: return "timelike_future";
        case CausalClass::TimelikePast: return "timelike_past";
        case CausalClass::Spacelike: return "spacelike";
        case CausalClass::Zero: return "zero";
    }
    return "?";
}

CausalResult causal_classify(const Mat2& w) {
    if (!is_hermitian(w, 1e-12)) throw contract_violation("causal_classify needs a Hermitian tensor");
    CausalResult r;
    double scale = w.norm();
    if (scale < 1e-12) return r;
    double q = 2.0 * det2(w).real();
    double t = w.trace().real();
    double tol = 1e-12 * scale * scale;
    if (q > tol) {
        r.cls = t > 0 ? CausalClass::TimelikeFuture : CausalClass::TimelikePast;
        r.sign = t > 0 ? 1 : -1;
    } else if (q < -tol) {
        r.cls = CausalClass::Spacelike;
    } else {
        r.sign = t > 0 ? 1 : -1;
        r.cls = t > 0 ? CausalClass::NullFuture : CausalClass::NullPast;
        Mat2 psd = 0.5 * (w + w.adjoint()) * double(r.sign);
        Eigen::SelfAdjointEigenSolver<Mat2> es(psd);
        // Rank one: the dominant eigenvector carries the whole trace.
        Vec2 v = es.eigenvectors().col(1);
        int k = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
        v *= std::abs(v(k)) / v(k);
        r.factor = v * std::sqrt(psd.trace().real());
    }
    return r;
}

RMat4 frame_matrix(const std::array<Mat2, 4>& frame) {
    RMat4 L;
    for (int m = 0; m < 4; ++m) L.col(m) = pauli_to_components(frame[m]);
    return L;
}

Mat2 basis_from_frame(const std::array<Mat2, 4>& frame) {
    for (const auto& e : frame)
        if (!is_hermitian(e, 1e-10)) throw frame_error("frame vectors must be Hermitian");
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (std::abs(metric_g(frame[a], frame[b]) - eta()(a, b)) > 1e-10)
                throw frame_error("frame is not g-orthonormal");
    RMat4 L = frame_matrix(frame);
    if (L.determinant() <= 0) throw frame_error("frame has negative orientation");
    if (L(0, 0) < 1.0 - 1e-10) throw frame_error("frame time vector is past-pointing");
    return lorentz_to_sl(L);
}

}  // namespace spinorforge

namespace spinorforge {

int levi_civita(int a, int b, int c, int d) {
    int p[4] = {a, b, c, d};
    int sign = 1;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            if (p[i] == p[j]) return 0;
            if (p[i] > p[j]) sign = -sign;
        }
    return sign;
}

}  // namespace spinorforge
