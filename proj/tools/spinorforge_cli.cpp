#include "spinorforge/checks.hpp"
#include "spinorforge/clifford_group.hpp"
#include "spinorforge/field_theory.hpp"
#include "spinorforge/minkowski.hpp"
#include "spinorforge/momentum.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace spinorforge;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Bad user input: exit 2. key names the offending entry when there is one.
struct input_error : std::runtime_error {
    std::string key;
    input_error(std::string k, const std::string& what) : std::runtime_error(what), key(std::move(k)) {}
};

// ---- JSON helpers ----

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

json mat2_json(const Mat2& m) {
    return json::array({json::array({cj(m(0, 0)), cj(m(0, 1))}), json::array({cj(m(1, 0)), cj(m(1, 1))})});
}

json vec2_json(const Vec2& v) { return json::array({cj(v(0)), cj(v(1))}); }

json rmat4_json(const RMat4& m) {
    json j = json::array();
    for (int r = 0; r < 4; ++r) j.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
    return j;
}

json mat4_json(const Mat4& m) {
    json j = json::array();
    for (int r = 0; r < 4; ++r) j.push_back({cj(m(r, 0)), cj(m(r, 1)), cj(m(r, 2)), cj(m(r, 3))});
    return j;
}

const json& need(const json& j, const std::string& key) {
    if (!j.is_object() || !j.contains(key)) throw input_error(key, "missing key '" + key + "'");
    return j.at(key);
}

double jnum(const json& j, const std::string& path) {
    if (!j.is_number()) throw input_error(path, "expected a number at '" + path + "'");
    return j.get<double>();
}

cplx jcplx(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw input_error(path, "expected [re, im] at '" + path + "'");
    return {jnum(j[0], path + "[0]"), jnum(j[1], path + "[1]")};
}

void need_len(const json& j, std::size_t n, const std::string& path) {
    if (!j.is_array() || j.size() != n)
        throw input_error(path, "expected an array of length " + std::to_string(n) + " at '" + path + "'");
}

std::string at(const std::string& p, int i) { return p + "[" + std::to_string(i) + "]"; }

Vec2 parse_vec2(const json& j, const std::string& path) {
    need_len(j, 2, path);
    return {jcplx(j[0], at(path, 0)), jcplx(j[1], at(path, 1))};
}

template <int N, class M, class F>
M parse_square(const json& j, const std::string& path, F entry) {
    need_len(j, N, path);
    M m;
    for (int r = 0; r < N; ++r) {
        need_len(j[r], N, at(path, r));
        for (int c = 0; c < N; ++c) m(r, c) = entry(j[r][c], at(at(path, r), c));
    }
    return m;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw input_error("", "invalid JSON in '" + path + "': " + e.what());
    }
}

std::string timestamp_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Deterministic content under "report", run-dependent values under "meta".
json envelope(json report, double wall) {
    return json{{"report", std::move(report)}, {"meta", {{"timestamp", timestamp_utc()}, {"wall_time_s", wall}}}};
}

void emit(const json& doc, const std::string& path) {
    std::string text = doc.dump(2) + "\n";
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw input_error("", "cannot write '" + path + "'");
    out << text;
}

json checks_json(const Checks& checks) {
    json arr = json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"max_residual", c.max_residual},
                       {"tol", c.tol},
                       {"samples", c.samples},
                       {"detail", c.detail}});
    return arr;
}

void print_checks(const Checks& checks) {
    for (const auto& c : checks)
        std::printf("  %-4s %-28s max %.3e  tol %.1e  n=%d%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.max_residual, c.tol, c.samples, c.detail.empty() ? "" : "  ", c.detail.c_str());
}

bool all_pass(const Checks& checks) {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- verify ----

struct VerifyArgs {
    std::string suite = "all";
    std::uint64_t seed = 42;
    int samples = 200;
    std::optional<double> tol;
};

int run_verify(const VerifyArgs& a, bool as_json) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport rep = run_suite(a.suite, a.seed, a.samples, a.tol);
    double wall = seconds_since(t0);
    if (as_json) {
        json r{{"suite", rep.suite}, {"seed", rep.seed}, {"samples", rep.samples}, {"pass", rep.pass()},
               {"checks", checks_json(rep.checks)}};
        if (a.tol) r["tol_override"] = *a.tol;
        emit(envelope(r, wall), "");
    } else {
        std::printf("suite %s  seed %llu  samples %d\n", rep.suite.c_str(), static_cast<unsigned long long>(rep.seed),
                    rep.samples);
        print_checks(rep.checks);
        std::printf("%s (%.2f s)\n", rep.pass() ? "PASS" : "FAIL", wall);
    }
    return rep.pass() ? kExitPass : kExitFail;
}

// ---- cover ----

CoverForm cover_form(const std::string& s) {
    if (s == "sl") return CoverForm::SL;
    if (s == "spin") return CoverForm::Spin;
    return CoverForm::Lorentz;
}

const char* cover_key(CoverForm f) {
    switch (f) {
        case CoverForm::SL: return "K";
        case CoverForm::Spin: return "spin";
        case CoverForm::Lorentz: return "L";
    }
    return "";
}

int run_cover(const std::string& input, const std::string& from, const std::string& to, bool as_json) {
    CoverForm f = cover_form(from), t = cover_form(to);
    CoverValue in;
    // Without an input file the identity of the source form is converted.
    json doc = input.empty() ? json::object() : read_json_file(input);
    const std::string key = cover_key(f);
    if (!input.empty()) need(doc, key);
    switch (f) {
        case CoverForm::SL:
            in.K = input.empty() ? Mat2::Identity() : parse_square<2, Mat2>(doc[key], key, jcplx);
            break;
        case CoverForm::Spin:
            in.spin = input.empty() ? EndW::identity() : EndW::from_matrix(parse_square<4, Mat4>(doc[key], key, jcplx));
            break;
        case CoverForm::Lorentz:
            in.L = input.empty() ? RMat4::Identity() : parse_square<4, RMat4>(doc[key], key, jnum);
            break;
    }
    CoverValue out = covering_maps(in, f, t);
    json r{{"from", from}, {"to", to}};
    if (out.K) r["K"] = mat2_json(*out.K);
    if (out.spin) r["spin"] = mat4_json(out.spin->to_matrix());
    if (out.L) r["L"] = rmat4_json(*out.L);
    if (as_json) {
        std::cout << r.dump(2) << "\n";
    } else {
        std::cout << from << " -> " << to << "\n";
        for (const char* k : {"K", "spin", "L"})
            if (r.contains(k)) std::cout << k << " = " << r[k].dump() << "\n";
    }
    return kExitPass;
}

// ---- momentum ----

int run_momentum(const std::string& path, bool as_json) {
    json doc = read_json_file(path);
    DiracSpinor psi{parse_vec2(need(doc, "u"), "u"), parse_vec2(need(doc, "chi"), "chi")};
    SymplecticForm form = doc.contains("phase_angle") ? SymplecticForm::from_angle(jnum(doc["phase_angle"], "phase_angle"))
                                                      : SymplecticForm{};
    Projection pr = momentum_project(psi, form);
    // The equivalent conditions need a nonzero pairing; on W0 only the projection is reported.
    std::optional<PgenReport> rep;
    if (std::abs(pr.pairing) > 0.0) rep = pgen_verify(psi, pr.point, form);
    RVec4 pc = pauli_to_components(pr.point.p);
    json r{{"p", mat2_json(pr.point.p)},
           {"p_components", {pc(0), pc(1), pc(2), pc(3)}},
           {"mu", pr.point.mu},
           {"stratum", to_string(pr.stratum)},
           {"pairing", cj(pr.pairing)},
           {"v", vec2_json(pr.v)},
           {"conditions", nullptr},
           {"conditions_agree", nullptr}};
    if (rep) {
        r["conditions"] = {{"i", rep->i}, {"ii", rep->ii}, {"iii", rep->iii}, {"iv", rep->iv}, {"v", rep->v}, {"v_prime", rep->vprime}};
        r["conditions_agree"] = rep->all_agree();
        r["theta"] = rep->theta;
    }
    if (pr.point.h) r["h"] = mat2_json(*pr.point.h);
    if (as_json) {
        std::cout << r.dump(2) << "\n";
    } else {
        std::printf("p components   %.12g %.12g %.12g %.12g\n", pc(0), pc(1), pc(2), pc(3));
        std::printf("mu             %.12g\n", pr.point.mu);
        std::printf("stratum        %s\n", to_string(pr.stratum));
        std::printf("pairing        %.12g %+.12gi\n", pr.pairing.real(), pr.pairing.imag());
        if (rep) {
            std::printf("conditions     i=%d ii=%d iii=%d iv=%d v=%d v'=%d\n", rep->i, rep->ii, rep->iii, rep->iv, rep->v,
                        rep->vprime);
            std::printf("%s\n", rep->all_agree() ? "conditions agree" : "conditions DISAGREE");
        } else {
            std::printf("conditions     not applicable (zero pairing)\n");
        }
    }
    return !rep || rep->all_agree() ? kExitPass : kExitFail;
}

// ---- field ----

FieldConfig load_config(const std::string& path) {
    try {
        FieldConfig cfg = load_field_config(path);
        cfg.validate();
        return cfg;
    } catch (const config_error& e) {
        throw input_error(e.key, e.what());
    }
}

bool is_component_stat(const std::string& n) { return n.rfind("el_", 0) == 0 || n == "dirac_residual"; }

int run_field_eval(const std::string& path, const std::string& report, double tol, bool serial, bool as_json) {
    FieldConfig cfg = load_config(path);
    auto t0 = std::chrono::steady_clock::now();
    FieldEvaluation ev = evaluate_field(cfg, serial ? ExecPolicy::Serial : ExecPolicy::OpenMP);
    double wall = seconds_since(t0);
    auto stats = summarize(ev);

    Checks checks;
    std::size_t evaluated = 0;
    for (const auto& s : ev.sites) evaluated += s.evaluated;
    for (const auto& st : stats) {
        // Euler-Lagrange residuals the configuration must satisfy, plus two identities
        // that hold for any configuration.
        bool identity = st.name == "density_dirac_imag" || st.name == "torsion_rewrite";
        if (!is_component_stat(st.name) && !identity) continue;
        CheckResult c;
        c.name = st.name;
        c.max_residual = st.max;
        c.tol = identity ? 1e-9 : tol;
        c.samples = static_cast<int>(evaluated);
        c.pass = evaluated > 0 && st.max < c.tol;
        checks.push_back(c);
    }
    bool pass = all_pass(checks);

    json st = json::array();
    for (const auto& s : stats) st.push_back({{"name", s.name}, {"max", s.max}, {"mean", s.mean}});
    json r{{"command", "field eval"},
           {"grid", {{"shape", cfg.grid.shape}, {"spacing", cfg.grid.spacing}, {"boundary", to_string(cfg.grid.boundary)}}},
           {"constants", {{"k", cfg.constants.k}, {"m", cfg.constants.m}, {"q", cfg.constants.q}}},
           {"sites_evaluated", evaluated},
           {"action", ev.action},
           {"stats", st},
           {"checks", checks_json(checks)},
           {"tol", tol},
           {"pass", pass}};
    json doc = envelope(r, wall);
    doc["meta"]["threads"] = serial ? 1 : configured_threads();
    if (!report.empty()) emit(doc, report);
    if (as_json) {
        emit(doc, "");
    } else {
        std::printf("%zu sites evaluated, action %.12g\n", evaluated, ev.action);
        for (const auto& s : stats) std::printf("  %-20s max %.3e  mean %.3e\n", s.name.c_str(), s.max, s.mean);
        print_checks(checks);
        std::printf("%s\n", pass ? "PASS" : "FAIL");
    }
    return pass ? kExitPass : kExitFail;
}

std::array<int, 4> parse_site(const std::string& s, const Grid4& g) {
    std::array<int, 4> i{};
    std::stringstream ss(s);
    std::string part;
    int n = 0;
    while (std::getline(ss, part, ',')) {
        if (n == 4) throw input_error("site", "--site takes four comma-separated indices");
        try {
            std::size_t used = 0;
            i[n] = std::stoi(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::logic_error&) {
            throw input_error("site", "--site index '" + part + "' is not an integer");
        }
        if (i[n] < 0 || i[n] >= g.shape[n]) throw input_error("site", "--site index " + std::to_string(n) + " is outside the grid");
        ++n;
    }
    if (n != 4) throw input_error("site", "--site takes four comma-separated indices");
    return i;
}

std::vector<FieldKind> field_kinds(const std::string& f) {
    if (f == "A") return {FieldKind::A};
    if (f == "psi") return {FieldKind::Ubar, FieldKind::Chibar};
    if (f == "theta") return {FieldKind::Theta};
    if (f == "gamma") return {FieldKind::Gamma};
    return {FieldKind::Ftilde};
}

int run_field_oracle(const std::string& path, const std::string& site_s, const std::string& field,
                     std::optional<double> tol_opt, bool as_json) {
    FieldConfig cfg = load_config(path);
    std::array<int, 4> idx = parse_site(site_s, cfg.grid);
    std::size_t site = cfg.grid.index(idx);
    double h = *std::max_element(cfg.grid.spacing.begin(), cfg.grid.spacing.end());
    double tol = tol_opt.value_or(std::max(kOracleErrorFloor, kOracleErrorConstant * h * h));

    std::vector<FieldComponent> comps;
    for (FieldKind k : field_kinds(field)) {
        auto c = components_of(k);
        comps.insert(comps.end(), c.begin(), c.end());
    }
    std::vector<cplx> oracle;
    try {
        oracle = variational_oracle(cfg, comps, site);
    } catch (const stencil_error& e) {
        throw input_error("site", e.what());
    }
    ELComponents el = euler_lagrange_eval(cfg, site);

    json rows = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        cplx an = analytic_component(el, comps[i]);
        double d = std::abs(oracle[i] - an);
        worst = std::max(worst, d);
        rows.push_back({{"component", comps[i].label()}, {"oracle", cj(oracle[i])}, {"analytic", cj(an)}, {"abs_diff", d}});
    }
    bool pass = worst <= tol;
    if (as_json) {
        std::cout << json{{"site", idx}, {"field", field}, {"components", rows}, {"max_abs_diff", worst}, {"tol", tol},
                          {"pass", pass}}
                         .dump(2)
                  << "\n";
    } else {
        for (const auto& r : rows)
            std::printf("  %-16s oracle %+.9e %+.9ei  analytic %+.9e %+.9ei  diff %.2e\n",
                        r["component"].get<std::string>().c_str(), r["oracle"][0].get<double>(),
                        r["oracle"][1].get<double>(), r["analytic"][0].get<double>(), r["analytic"][1].get<double>(),
                        r["abs_diff"].get<double>());
        std::printf("max diff %.3e  tol %.1e  %s\n", worst, tol, pass ? "PASS" : "FAIL");
    }
    return pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spinorforge: two-spinor algebra, Clifford group, momentum fibration and field-equation checks"};
    app.require_subcommand(1);
    // Lets --json follow the subcommand; inherited by the subcommands below.
    app.fallthrough();
    bool as_json = false;
    app.add_flag("--json", as_json, "Machine-readable output");

    VerifyArgs va;
    double tol_value = 0.0;
    auto* verify = app.add_subcommand("verify", "Run seeded invariant suites");
    verify->add_option("--suite", va.suite)->check(CLI::IsMember({"algebra", "clifford", "momentum", "field", "all"}));
    verify->add_option("--seed", va.seed, "Seed for the single generator of this run")->capture_default_str();
    verify->add_option("--samples", va.samples)->check(CLI::PositiveNumber)->capture_default_str();
    auto* verify_tol = verify->add_option("--tol", tol_value, "Replace every pinned residual tolerance")->check(CLI::PositiveNumber);

    std::string cover_in, cover_from, cover_to;
    auto* cover = app.add_subcommand("cover", "Convert between SL(2,C), Spin-up and Lor+up");
    cover->add_option("--input", cover_in, "JSON with key K, spin or L; identity when omitted");
    cover->add_option("--from", cover_from)->required()->check(CLI::IsMember({"sl", "spin", "lorentz"}));
    cover->add_option("--to", cover_to)->required()->check(CLI::IsMember({"sl", "spin", "lorentz"}));

    std::string psi_path;
    auto* momentum = app.add_subcommand("momentum", "Momentum projection, stratum and equivalent conditions");
    momentum->add_option("--psi", psi_path, "JSON with u and chi")->required();

    auto* field = app.add_subcommand("field", "Field-configuration evaluation");
    field->require_subcommand(1);
    std::string cfg_path, report_path, site_s, field_name;
    double eval_tol = 1e-9;
    bool serial = false;
    auto* eval = field->add_subcommand("eval", "Densities, Euler-Lagrange components and Dirac residual");
    eval->add_option("--config", cfg_path)->required();
    eval->add_option("--report", report_path, "Write the JSON report here");
    eval->add_option("--tol", eval_tol, "Bound on Euler-Lagrange residuals")->capture_default_str();
    eval->add_flag("--serial", serial, "Use the serial reference evaluator");
    auto* oracle = field->add_subcommand("oracle", "Variational oracle against the analytic components at one site");
    double oracle_tol_value = 0.0;
    oracle->add_option("--config", cfg_path)->required();
    oracle->add_option("--site", site_s, "i,j,k,l")->required();
    oracle->add_option("--field", field_name)->required()->check(CLI::IsMember({"A", "psi", "theta", "gamma", "ftilde"}));
    auto* oracle_tol = oracle->add_option("--tol", oracle_tol_value, "Default max(1e-6, h^2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (*verify) {
            if (*verify_tol) va.tol = tol_value;
            return run_verify(va, as_json);
        }
        if (*cover) return run_cover(cover_in, cover_from, cover_to, as_json);
        if (*momentum) return run_momentum(psi_path, as_json);
        if (*eval) return run_field_eval(cfg_path, report_path, eval_tol, serial, as_json);
        if (*oracle)
            return run_field_oracle(cfg_path, site_s, field_name,
                                    *oracle_tol ? std::optional<double>(oracle_tol_value) : std::nullopt, as_json);
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!e.key.empty()) std::cerr << "offending key: " << e.key << "\n";
        return kExitUsage;
    } catch (const contract_violation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
