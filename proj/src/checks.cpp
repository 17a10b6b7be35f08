#include "spinorforge/checks.hpp"

#include "spinorforge/clifford_group.hpp"
#include "spinorforge/field_theory.hpp"
#include "spinorforge/minkowski.hpp"
#include "spinorforge/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spinorforge {

namespace {

// Accumulates one CheckResult. Residual parts keep the worst value, counting parts
// the number of failed samples.
class Part {
public:
    Part(std::string name, double pinned, const CheckOptions& opt) : name_(std::move(name)), tol_(opt.tol.value_or(pinned)) {}
    static Part counting(std::string name) {
        Part p(std::move(name), 0.0, CheckOptions{});
        p.counting_ = true;
        return p;
    }

    void add(double r) {
        ++n_;
        if (std::isnan(r))
            worst_ = r;
        else if (r > worst_)
            worst_ = r;
        if (!(r <= tol_)) ++fails_;
    }
    void flag(bool ok) {
        ++n_;
        if (!ok) ++fails_;
    }
    double tol() const { return tol_; }

    CheckResult done(std::string detail = {}) const {
        CheckResult r;
        r.name = name_;
        r.samples = n_;
        r.tol = tol_;
        r.max_residual = counting_ ? fails_ : worst_;
        r.pass = fails_ == 0 && n_ > 0;
        r.detail = std::move(detail);
        return r;
    }

private:
    std::string name_;
    double tol_;
    double worst_ = 0.0;
    int n_ = 0, fails_ = 0;
    bool counting_ = false;
};

double floor1(double x) { return std::max(1.0, x); }

// Non-null Hermitian vector.
Mat2 vector_in_hdot(Sampler& rng) {
    for (;;) {
        Mat2 y = rng.hermitian();
        if (std::abs(det2(y)) > 1e-2) return y;
    }
}

Mat2 timelike_future(Sampler& rng, double spatial = 1.0) {
    RVec4 x(0, spatial * rng.real(), spatial * rng.real(), spatial * rng.real());
    x(0) = x.tail<3>().norm() + 0.1 + std::abs(rng.real());
    return pauli_to_matrix(x);
}

U2Params random_u2(Sampler& rng) {
    Vec2 ab = rng.vec2().normalized();
    return U2Params{ab(0), ab(1), std::polar(1.0, rng.uniform(-3.0, 3.0))};
}

// Rotates u so that the pairing becomes real with the chosen sign.
DiracSpinor signed_stratum(DiracSpinor psi, bool positive) {
    psi.u *= std::polar(positive ? 1.0 : -1.0, -std::arg(momentum_project(psi).pairing));
    return psi;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

Grid4 cube(int n, double h) {
    Grid4 g;
    g.shape = {n, n, n, n};
    g.spacing = {h, h, h, h};
    return g;
}

}  // namespace

Checks check_clifford_relation(Sampler& rng, const CheckOptions& opt) {
    Part p("clifford_relation", 1e-12, opt);
    for (int n = 0; n < opt.samples; ++n) {
        Mat2 y = rng.hermitian(), z = rng.hermitian();
        Mat4 lhs = (gamma_of(y) * gamma_of(z) + gamma_of(z) * gamma_of(y)).to_matrix();
        Mat4 rhs = 2.0 * metric_g(y, z) * Mat4::Identity();
        p.add(max_abs_diff(lhs, rhs) / floor1(max_abs(rhs)));
    }
    return {p.done()};
}

Checks check_signatures(const CheckOptions& opt) {
    Part pauli("pauli_gram", 1e-14, opt), dirac("dirac_k_gram", 1e-14, opt);
    for (int l = 0; l < 4; ++l)
        for (int m = 0; m < 4; ++m) pauli.add(std::abs(metric_g(tau(l), tau(m)) - eta()(l, m)));
    Mat4 d = Mat4::Zero();
    d.diagonal() << 1, 1, -1, -1;
    Mat4 k = k_gram(SpinorBasisKind::Dirac);
    for (int i = 0; i < 16; ++i) dirac.add(std::abs(k(i / 4, i % 4) - d(i / 4, i % 4)));
    return {pauli.done(), dirac.done()};
}

Checks check_block_det_inverse(Sampler& rng, const CheckOptions& opt) {
    Part det("block_det", 1e-10, opt), inv("block_inverse", 1e-10, opt);
    for (int n = 0; n < opt.samples; ++n) {
        EndW phi = rng.endw();
        Mat4 m = phi.to_matrix();
        auto r = block_det_inverse(phi);
        cplx d = m.determinant();
        det.add(std::abs(r.det - d) / floor1(std::abs(d)));
        if (r.inverse)
            inv.add(rel_diff(r.inverse->to_matrix(), Mat4(m.inverse())));
        else
            inv.add(INFINITY);
    }
    return {det.done(), inv.done()};
}

Checks check_eps_transpose(Sampler& rng, const CheckOptions& opt) {
    Part inv("eps_tilde_involution", 1e-12, opt), prod("eps_tilde_product", 1e-12, opt),
        adj("eps_tilde_adjugate", 1e-12, opt), sum("det_of_sum", 1e-12, opt);
    for (int n = 0; n < opt.samples; ++n) {
        Mat2 x = rng.mat2(), y = rng.mat2();
        inv.add(max_abs_diff(eps_transpose(eps_transpose(x)), x) / floor1(max_abs(x)));
        Mat2 xy = x * y;
        prod.add(max_abs_diff(eps_transpose(xy), eps_transpose(x) * eps_transpose(y)) / floor1(max_abs(xy)));
        cplx dx = det2(x);
        adj.add(max_abs_diff(Mat2(eps_transpose(x) * x.transpose()), Mat2(dx * Mat2::Identity())) / floor1(std::abs(dx)));
        cplx lhs = det2(x + y);
        cplx rhs = det2(x) + det2(y) + (eps_transpose(x).transpose() * y).trace();
        sum.add(std::abs(lhs - rhs) / floor1(std::abs(lhs)));
    }
    return {inv.done(), prod.done(), adj.done(), sum.done()};
}

Checks check_vector_products(Sampler& rng, const CheckOptions& opt) {
    Part member = Part::counting("product_membership"), parity = Part::counting("product_parity");
    Part norm("product_norm", 1e-10, opt);
    for (int n = 0; n < opt.samples; ++n) {
        int count = rng.integer(1, 6);
        EndW phi = EndW::identity();
        double nu = 1.0;
        for (int k = 0; k < count; ++k) {
            Mat2 y = vector_in_hdot(rng);
            phi = phi * gamma_of(y);
            nu *= metric_g(y, y).real();
        }
        auto m = clifford_membership(phi);
        member.flag(m.accepted());
        if (!m.accepted()) continue;
        parity.flag(m.element->parity == (count % 2 ? Parity::Odd : Parity::Even));
        norm.add(std::abs(m.element->nu - nu) / floor1(std::abs(nu)));
    }
    return {member.done(), parity.done(), norm.done()};
}

Checks check_double_cover(Sampler& rng, const CheckOptions& opt) {
    Part spin = Part::counting("spin_up_membership");
    Part iso("lorentz_isometry", 1e-11, opt), det("lorentz_det", 1e-11, opt);
    Part ortho = Part::counting("orthochronous"), sign("sign_invariance", 0.0, opt);
    Part trip("lorentz_roundtrip", 1e-10, opt);
    for (int n = 0; n < opt.samples; ++n) {
        Mat2 K = rng.sl2c();
        auto m = clifford_membership(spin_from_sl(K));
        spin.flag(m.accepted() && is_spin_up(*m.element));
        if (!m.accepted()) continue;
        RMat4 L = adjoint_matrix(*m.element);
        iso.add(max_abs_diff(RMat4(L.transpose() * eta() * L), eta()));
        det.add(std::abs(L.determinant() - 1.0));
        ortho.flag(L(0, 0) >= 1.0 - 1e-12);
        sign.add(max_abs_diff(sl_to_lorentz(K), sl_to_lorentz(Mat2(-K))));
        trip.add(max_abs_diff(sl_to_lorentz(lorentz_to_sl(L)), L));
    }
    return {spin.done(), iso.done(), det.done(), ortho.done(), sign.done(), trip.done()};
}

Checks check_hermitian_factorization(Sampler& rng, const CheckOptions& opt) {
    Part res("factor_residual", 1e-9, opt), shape = Part::counting("factor_shape"),
        signal = Part::counting("failure_signalled");
    int ok = 0;
    for (int n = 0; n < opt.samples; ++n) {
        Mat2 M = rng.sl2c() * rng.uniform(0.5, 2.0);
        if (n % 3 == 0) M *= -1.0 * I;  // negative determinant
        auto f = hermitian_factorization(M, rng.gen());
        if (!f.ok) {
            signal.flag(!f.message.empty());
            continue;
        }
        ++ok;
        bool good = f.factors.size() <= 3;
        Mat2 prod = Mat2::Identity();
        for (const Mat2& h : f.factors) {
            good = good && is_hermitian(h, 1e-12) && std::abs(det2(h)) > 1e-12;
            prod = prod * h;
        }
        shape.flag(good);
        res.add(max_abs_diff(prod, M) / floor1(max_abs(M)));
    }
    double rate = opt.samples ? double(ok) / opt.samples : 0.0;
    CheckResult success;
    success.name = "factor_success_rate";
    success.samples = opt.samples;
    success.max_residual = 1.0 - rate;
    success.tol = 0.01;
    success.pass = opt.samples > 0 && rate >= 0.99;
    success.detail = std::to_string(ok) + "/" + std::to_string(opt.samples) + " factored";
    Checks out{res.done(), shape.done(), success};
    // Only present when the fallback gave up at least once.
    if (ok < opt.samples) out.push_back(signal.done());
    return out;
}

Checks check_momentum_fibration(Sampler& rng, const CheckOptions& opt) {
    Part on = Part::counting("conditions_agree_on_fibre"), off = Part::counting("conditions_agree_off_fibre");
    Part boost("boost_section_cover", 1e-11, opt), fibre("u2_roundtrip", 1e-10, opt);
    Part strata = Part::counting("su2_preserves_strata");
    for (int n = 0; n < opt.samples; ++n) {
        DiracSpinor psi = rng.spinor();
        auto pr = momentum_project(psi);
        auto rep = pgen_verify(psi, pr.point);
        on.flag(rep.all_agree() && rep.all_pass());
        auto neg = pgen_verify(rng.spinor(), pr.point);
        off.flag(neg.all_agree() && !neg.all_pass());
    }
    for (int n = 0; n < opt.samples; ++n) {
        auto mp = momentum_point(timelike_future(rng));
        RVec4 e0 = sl_to_lorentz(boost_section(mp)).col(0);
        boost.add(max_abs_diff(e0, RVec4(pauli_to_components(mp.p) / mp.mu)) / floor1(max_abs(e0)));
    }
    for (int n = 0; n < opt.samples; ++n) {
        DiracSpinor psi = rng.spinor();
        U2Params m = random_u2(rng);
        auto tr = fiber_transporter(psi, u2_act(psi, m));
        fibre.add(max_abs_diff(tr.params.matrix(), m.matrix()));
    }
    for (int n = 0; n < opt.samples; ++n) {
        DiracSpinor psi = signed_stratum(rng.spinor(), n % 2 == 0);
        auto s0 = momentum_project(psi).stratum;
        U2Params su = random_u2(rng);
        su.c = 1.0;
        strata.flag((s0 == SpinorStratum::Wplus || s0 == SpinorStratum::Wminus) &&
                    momentum_project(u2_act(psi, su)).stratum == s0);
    }
    return {on.done(), off.done(), boost.done(), fibre.done(), strata.done()};
}

Checks check_flat_vacuum(const CheckOptions& opt) {
    Part el("flat_vacuum_components", 1e-12, opt), dens("flat_vacuum_densities", 1e-12, opt);
    FieldConfig cfg = FieldConfig::flat_vacuum(cube(6, 0.1), Constants{1.0, 0.5, 0.3});
    for (const auto& st : summarize(evaluate_field(cfg))) {
        if (st.name.rfind("density", 0) == 0)
            dens.add(st.max);
        else
            el.add(st.max);
    }
    return {el.done(), dens.done()};
}

Checks check_plane_wave(Sampler& rng, const CheckOptions& opt) {
    Part res("plane_wave_residual", 1e-9, opt), dens("plane_wave_density", 1e-9, opt);
    Part stratum = Part::counting("plane_wave_in_wplus");
    for (int n = 0; n < opt.samples; ++n) {
        auto mp = momentum_point(timelike_future(rng, 0.5));
        DiracSpinor psi0 = fiber_origin(mp);
        // The fibre origin has a negative pairing; flipping chi keeps p and moves it to W+.
        if (momentum_project(psi0).stratum == SpinorStratum::Wminus) psi0.chi = -psi0.chi;
        bool plus = momentum_project(psi0).stratum == SpinorStratum::Wplus;
        stratum.flag(plus);
        if (!plus) continue;
        FieldConfig cfg = plane_wave_config(cube(5, 0.1), psi0);
        for (const auto& st : summarize(evaluate_field(cfg))) {
            if (st.name == "dirac_residual") res.add(st.max);
            if (st.name == "density_dirac") dens.add(st.max);
        }
    }
    return {stratum.done(), res.done(), dens.done()};
}

Checks check_oracle_convergence(Sampler& rng, const CheckOptions& opt, double h) {
    const double C = opt.tol.value_or(kOracleErrorConstant);
    const double hf = h / 1.5;
    const std::uint64_t seed = rng.gen();
    FieldConfig coarse = smooth_random_config(cube(8, h), seed), fine = smooth_random_config(cube(12, hf), seed);

    std::vector<std::array<int, 4>> candidates;
    for (int i = 0; i < 16; ++i) candidates.push_back({2 + 2 * (i >> 3 & 1), 2 + 2 * (i >> 2 & 1), 2 + 2 * (i >> 1 & 1), 2 + 2 * (i & 1)});
    std::shuffle(candidates.begin(), candidates.end(), rng.gen);
    candidates.resize(std::clamp(opt.samples, 0, 16));

    const FieldKind kinds[] = {FieldKind::Theta, FieldKind::Gamma, FieldKind::A, FieldKind::Ftilde, FieldKind::Ubar, FieldKind::Chibar};
    double e1[6] = {}, e2[6] = {};
    for (const auto& c : candidates) {
        std::array<int, 4> cf;
        for (int a = 0; a < 4; ++a) cf[a] = c[a] * 3 / 2;
        std::size_t s1 = coarse.grid.index(c), s2 = fine.grid.index(cf);
        ELComponents a1 = euler_lagrange_eval(coarse, s1), a2 = euler_lagrange_eval(fine, s2);
        for (int k = 0; k < 6; ++k) {
            auto comps = components_of(kinds[k]);
            auto o1 = variational_oracle(coarse, comps, s1), o2 = variational_oracle(fine, comps, s2);
            for (std::size_t j = 0; j < comps.size(); ++j) {
                e1[k] = std::max(e1[k], std::abs(o1[j] - analytic_component(a1, comps[j])));
                e2[k] = std::max(e2[k], std::abs(o2[j] - analytic_component(a2, comps[j])));
            }
        }
    }

    const double b1 = std::max(kOracleErrorFloor, C * h * h), b2 = std::max(kOracleErrorFloor, C * hf * hf);
    Checks out;
    for (int k = 0; k < 6; ++k) {
        CheckResult r;
        r.name = std::string("oracle_") + to_string(kinds[k]);
        r.samples = static_cast<int>(candidates.size());
        r.max_residual = e1[k];
        r.tol = b1;
        r.pass = !candidates.empty() && e1[k] <= b1 && e2[k] <= b2;
        r.detail = "coarse " + fmt(e1[k]) + ", fine " + fmt(e2[k]);
        if (e1[k] > kOracleErrorFloor) {
            double p = std::log(e1[k] / e2[k]) / std::log(1.5);
            r.pass = r.pass && p >= kOrderLow && p <= kOrderHigh;
            std::ostringstream os;
            os.precision(3);
            os << ", order " << p;
            r.detail += os.str();
        } else {
            r.detail += ", exact to the floor";
        }
        out.push_back(r);
    }
    return out;
}

bool SuiteReport::pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"algebra", "clifford", "momentum", "field"};
    return names;
}

namespace {

void append(Checks& to, Checks from) { to.insert(to.end(), from.begin(), from.end()); }

void run_one(const std::string& suite, Sampler& rng, int samples, std::optional<double> tol, Checks& out) {
    CheckOptions opt{samples, tol};
    if (suite == "algebra") {
        append(out, check_clifford_relation(rng, opt));
        append(out, check_signatures(opt));
        append(out, check_block_det_inverse(rng, opt));
        append(out, check_eps_transpose(rng, opt));
    } else if (suite == "clifford") {
        append(out, check_vector_products(rng, opt));
        append(out, check_double_cover(rng, opt));
        append(out, check_hermitian_factorization(rng, opt));
    } else if (suite == "momentum") {
        append(out, check_momentum_fibration(rng, opt));
    } else if (suite == "field") {
        append(out, check_flat_vacuum(opt));
        // Field checks build whole grids per sample, so the count is capped.
        append(out, check_plane_wave(rng, CheckOptions{std::min(samples, 20), tol}));
        append(out, check_oracle_convergence(rng, CheckOptions{std::min(samples, 10), {}}));
    } else {
        throw std::invalid_argument("unknown suite '" + suite + "'");
    }
}

}  // namespace

SuiteReport run_suite(const std::string& suite, std::uint64_t seed, int samples, std::optional<double> tol) {
    SuiteReport rep;
    rep.suite = suite;
    rep.seed = seed;
    rep.samples = samples;
    Sampler rng(seed);
    if (suite == "all")
        for (const auto& s : suite_names()) run_one(s, rng, samples, tol, rep.checks);
    else
        run_one(suite, rng, samples, tol, rep.checks);
    return rep;
}

}  // namespace spinorforge
