#pragma once

#include "spinorforge/dirac.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spinorforge {

enum class Boundary { Periodic, Interior };
const char* to_string(Boundary b);

// Single chart sampled on a regular grid; x^3 varies fastest in the site index.
struct Grid4 {
    std::array<int, 4> shape{8, 8, 8, 8};
    std::array<double, 4> spacing{0.1, 0.1, 0.1, 0.1};
    Boundary boundary = Boundary::Interior;

    std::size_t size() const;
    std::size_t index(const std::array<int, 4>& i) const;
    std::array<int, 4> coords(std::size_t site) const;
    // One step along axis a; empty when it leaves an interior-only grid.
    std::optional<std::size_t> neighbor(std::size_t site, int a, int dir) const;
    // True when a central stencil of the given depth fits around the site.
    bool interior(std::size_t site, int depth = 1) const;
    double cell_volume() const;
    RVec4 position(std::size_t site) const;
};

struct Constants {
    double k = 1.0;
    double m = 0.0;
    double q = 0.0;
};

struct FieldConfig {
    Grid4 grid;
    // theta[s](a, lambda) = Theta_a^lambda
    std::vector<RMat4> theta;
    // Spinor connection without the electromagnetic trace; the evaluator uses cs_a + i q A_a.
    std::vector<std::array<Mat2, 4>> cs;
    std::vector<RVec4> a;
    // ftilde[s](lambda, mu) = F~_{lambda mu}
    std::vector<RMat4> ftilde;
    std::vector<DiracSpinor> psi;
    Constants constants;

    // Flat vacuum: Theta = 1, everything else zero.
    static FieldConfig flat_vacuum(const Grid4& grid, const Constants& c = {});
    // Throws contract_violation on wrong sizes or non-antisymmetric F~.
    void validate() const;
};

// Malformed field-config JSON; key names the offending entry.
struct config_error : std::runtime_error {
    std::string key;
    config_error(std::string k, const std::string& what) : std::runtime_error(what), key(std::move(k)) {}
};

FieldConfig parse_field_config(const std::string& json_text);
FieldConfig load_field_config(const std::string& path);
std::string dump_field_config(const FieldConfig& cfg);

// ---- pointwise geometry ----

struct ConnectionPart {
    RVec4 G = RVec4::Zero();
    RVec4 Y = RVec4::Zero();
    // gamma[a](lambda, mu) = Gamma~_a^lambda_mu
    std::array<RMat4, 4> gamma{};
};
ConnectionPart induced_connections(const std::array<Mat2, 4>& conn);

// (G + iY) 1 + 1/2 Gamma~^{A Adot}_{B Adot}
Mat2 reconstruct_connection(double G, double Y, const RMat4& gamma);
// 1/4 Gamma~^{lambda mu} gamma_lambda gamma_mu
EndW four_spinor_connection(const RMat4& gamma);

// Antisymmetric pair ordering used for F~ and Gamma~ components.
inline constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// C2[a][b][lambda][mu] = 1/2 eps^{abcd} eps_{lambda mu nu rho} Theta_c^nu Theta_d^rho
using Tensor4 = std::array<double, 256>;
inline constexpr int t4(int a, int b, int l, int m) { return ((a * 4 + b) * 4 + l) * 4 + m; }

struct MetricPart {
    RMat4 g = RMat4::Zero();
    double det = 0.0;
    // cotetrad(a, lambda) = 1/3! eps^{abcd} eps_{lambda mu nu rho} Theta_b^mu Theta_c^nu Theta_d^rho
    RMat4 cotetrad = RMat4::Zero();
    Tensor4 cotetrad2{};
    bool nondegenerate = false;
    // Present only when nondegenerate.
    std::optional<RMat4> g_inv;
    std::optional<RMat4> theta_inv;  // theta_inv(a, lambda) = Theta^a_lambda
};
MetricPart geometry_from_tetrad(const RMat4& theta, double degenerate_tol = 1e-12);

// Cotetrad as a matrix acting on U: sum_lambda cotetrad(a, lambda) tau_lambda.
Mat2 cotetrad_matrix(const RMat4& cotetrad, int a);

// ---- stencil quantities ----

struct CurvatureTorsion {
    // spinor[a][b] = R_ab^A_B, rtilde[a][b](lambda, mu) = R~_ab^lambda_mu
    std::array<std::array<Mat2, 4>, 4> spinor{};
    std::array<std::array<RMat4, 4>, 4> rtilde{};
    // theta_torsion[a][b](lambda) = Theta_c^lambda T^c_ab, always available
    std::array<std::array<RVec4, 4>, 4> theta_torsion{};
    // torsion[c](a, b) = T^c_ab and trace T_a = T^b_ab, nondegenerate only
    std::optional<std::array<RMat4, 4>> torsion;
    std::optional<RVec4> trace;
    // R~_ab^{lambda mu} Theta^a_lambda Theta^b_mu, nondegenerate only
    std::optional<double> scalar;
};
CurvatureTorsion curvature_torsion(const FieldConfig& cfg, std::size_t site);

// Cotetrad-contracted Dirac operator (a 4-form coefficient).
DiracSpinor dirac_operator_apply(const FieldConfig& cfg, std::size_t site);
// gamma^a nabla_a psi times det Theta; nondegenerate only.
std::optional<DiracSpinor> dirac_operator_inverse_form(const FieldConfig& cfg, std::size_t site);

struct Densities {
    double g = 0.0, em = 0.0, d = 0.0;
    // Imaginary part of the Dirac density; zero up to rounding.
    double d_imag = 0.0;
    double total() const { return g + em + d; }
};
Densities lagrangian_eval(const FieldConfig& cfg, std::size_t site);

using PairArray = std::array<double, 6>;

struct ELComponents {
    // Theta components (c, nu)
    RMat4 theta_g = RMat4::Zero(), theta_em = RMat4::Zero(), theta_d = RMat4::Zero();
    // Gamma~ components per a and independent pair lambda < mu
    std::array<PairArray, 4> gamma_g{}, gamma_d{};
    // As displayed, before the pair normalization (gamma_g = kGammaPairFactor * display),
    // and the torsion rewriting of the same display.
    std::array<PairArray, 4> gamma_g_display{}, gamma_g_torsion{};
    // Transcribed index formula for the Dirac Gamma~ component; gamma_d = kDiracGammaDisplayFactor * this.
    std::array<PairArray, 4> gamma_d_display{};
    // A components; a_em = kEmCurrentFactor * a_em_display
    RVec4 a_em = RVec4::Zero(), a_em_display = RVec4::Zero(), a_d = RVec4::Zero();
    // F~ components per independent pair, upper indices (derivative by F~_{lambda mu})
    PairArray ftilde{};
    // u-bar and chi-bar components: torsion form when nondegenerate, divergence form otherwise
    Vec2 ubar = Vec2::Zero(), chibar = Vec2::Zero();
    Vec2 ubar_divergence = Vec2::Zero(), chibar_divergence = Vec2::Zero();
    bool torsion_form = false;

    RMat4 theta() const { return theta_g + theta_em + theta_d; }
    RVec4 a() const { return a_em + a_d; }
    double gamma(int a, int pair) const { return gamma_g[a][pair] + gamma_d[a][pair]; }
};

// Ratio of the variational derivative to the displayed formula.
inline constexpr double kEmCurrentFactor = -0.5;
inline constexpr double kGammaPairFactor = -2.0;
inline constexpr double kDiracGammaDisplayFactor = 2.0;

ELComponents euler_lagrange_eval(const FieldConfig& cfg, std::size_t site);

// (E^A, E_Adot) / det Theta; empty on degenerate sites.
std::optional<Vec4> dirac_equation_residual(const FieldConfig& cfg, std::size_t site);

// ---- variational oracle ----

enum class FieldKind { Theta, Gamma, A, Ftilde, Ubar, Chibar };
const char* to_string(FieldKind k);

struct FieldComponent {
    FieldKind kind = FieldKind::Theta;
    // Theta: (c, nu); Gamma: (a, pair); A: (a); Ftilde: (pair); Ubar, Chibar: (spinor index)
    int i = 0, j = 0;
    std::string label() const;
};
std::vector<FieldComponent> components_of(FieldKind kind);

// Central-difference derivative of the local action by one field value, divided by the cell volume.
// Complex fields use the Wirtinger derivative with respect to the conjugate.
cplx variational_oracle(const FieldConfig& cfg, const FieldComponent& which, std::size_t site, double delta = 1e-4);
// Same, copying the configuration once for the whole batch.
std::vector<cplx> variational_oracle(const FieldConfig& cfg, const std::vector<FieldComponent>& which,
                                     std::size_t site, double delta = 1e-4);
cplx analytic_component(const ELComponents& el, const FieldComponent& which);

// ---- whole-grid evaluation ----

enum class ExecPolicy { Serial, OpenMP };

// Thread cap from SPINORFORGE_THREADS, else the OpenMP default.
int configured_threads();

struct SiteResult {
    bool evaluated = false;
    Densities dens;
    ELComponents el;
    std::optional<Vec4> residual;
};

struct FieldEvaluation {
    std::vector<SiteResult> sites;
    double action = 0.0;
};
FieldEvaluation evaluate_field(const FieldConfig& cfg, ExecPolicy policy = ExecPolicy::OpenMP);

struct ComponentStats {
    std::string name;
    double max = 0.0, mean = 0.0;
};
std::vector<ComponentStats> summarize(const FieldEvaluation& ev);

// ---- synthetic configurations ----

struct SmoothOptions {
    double tetrad_amplitude = 0.15;
    double connection_amplitude = 0.3;
    double potential_amplitude = 0.3;
    double ftilde_amplitude = 0.3;
    double spinor_amplitude = 0.5;
    Constants constants{1.0, 0.7, 0.5};
};
// Smooth fields defined as functions of position, so different grids on the same domain see the same fields.
FieldConfig smooth_random_config(const Grid4& grid, std::uint64_t seed, const SmoothOptions& opt = {});

// Flat background plane wave exp(-i k.x) psi0 with psi0 in W+, m = mu(psi0), and k lattice-corrected
// so the central difference reproduces p(psi0) exactly.
FieldConfig plane_wave_config(const Grid4& grid, const DiracSpinor& psi0);

}  // namespace spinorforge
