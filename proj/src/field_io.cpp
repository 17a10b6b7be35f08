#include "spinorforge/field_theory.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace spinorforge {

namespace {

using nlohmann::json;

const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw config_error(path + key, "missing key '" + path + key + "'");
    return j.at(key);
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) throw config_error(path, "expected a number at '" + path + "'");
    return j.get<double>();
}

cplx cnum(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw config_error(path, "expected [re, im] at '" + path + "'");
    return {num(j[0], path + "[0]"), num(j[1], path + "[1]")};
}

void need_array(const json& j, std::size_t n, const std::string& path) {
    if (!j.is_array() || j.size() != n)
        throw config_error(path, "expected an array of length " + std::to_string(n) + " at '" + path + "'");
}

RMat4 rmat4(const json& j, const std::string& path) {
    need_array(j, 4, path);
    RMat4 m;
    for (int r = 0; r < 4; ++r) {
        std::string pr = path + "[" + std::to_string(r) + "]";
        need_array(j[r], 4, pr);
        for (int c = 0; c < 4; ++c) m(r, c) = num(j[r][c], pr + "[" + std::to_string(c) + "]");
    }
    return m;
}

Vec2 cvec2(const json& j, const std::string& path) {
    need_array(j, 2, path);
    return Vec2(cnum(j[0], path + "[0]"), cnum(j[1], path + "[1]"));
}

Mat2 cmat2(const json& j, const std::string& path) {
    need_array(j, 2, path);
    Mat2 m;
    for (int r = 0; r < 2; ++r) {
        std::string pr = path + "[" + std::to_string(r) + "]";
        need_array(j[r], 2, pr);
        for (int c = 0; c < 2; ++c) m(r, c) = cnum(j[r][c], pr + "[" + std::to_string(c) + "]");
    }
    return m;
}

// Per-site array; a single entry is broadcast to every site.
template <class T, class F>
std::vector<T> per_site(const json& root, const std::string& key, std::size_t n, F parse) {
    const json& j = need(root, key, "");
    if (!j.is_array() || (j.size() != n && j.size() != 1))
        throw config_error(key, "'" + key + "' must have one entry per site (" + std::to_string(n) + ") or exactly one");
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t s = 0; s < j.size(); ++s) out.push_back(parse(j[s], key + "[" + std::to_string(s) + "]"));
    if (j.size() == 1 && n > 1) out.assign(n, out.front());
    return out;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json rmat_json(const RMat4& m) {
    json j = json::array();
    for (int r = 0; r < 4; ++r) j.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
    return j;
}

json cmat_json(const Mat2& m) {
    return json::array({json::array({cjson(m(0, 0)), cjson(m(0, 1))}), json::array({cjson(m(1, 0)), cjson(m(1, 1))})});
}

}  // namespace

FieldConfig parse_field_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error("", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw config_error("", "field config must be a JSON object");

    FieldConfig cfg;
    const json& g = need(root, "grid", "");
    const json& shape = need(g, "shape", "grid.");
    const json& spacing = need(g, "spacing", "grid.");
    need_array(shape, 4, "grid.shape");
    need_array(spacing, 4, "grid.spacing");
    for (int a = 0; a < 4; ++a) {
        std::string p = "grid.shape[" + std::to_string(a) + "]";
        if (!shape[a].is_number_integer() || shape[a].get<int>() < 1)
            throw config_error(p, "expected a positive integer at '" + p + "'");
        cfg.grid.shape[a] = shape[a].get<int>();
        cfg.grid.spacing[a] = num(spacing[a], "grid.spacing[" + std::to_string(a) + "]");
        if (!(cfg.grid.spacing[a] > 0))
            throw config_error("grid.spacing[" + std::to_string(a) + "]", "grid spacing must be positive");
    }
    if (g.contains("boundary")) {
        const json& b = g.at("boundary");
        if (b == "periodic")
            cfg.grid.boundary = Boundary::Periodic;
        else if (b == "interior")
            cfg.grid.boundary = Boundary::Interior;
        else
            throw config_error("grid.boundary", "grid.boundary must be 'periodic' or 'interior'");
    }

    const json& c = need(root, "constants", "");
    cfg.constants.k = num(need(c, "k", "constants."), "constants.k");
    cfg.constants.m = num(need(c, "m", "constants."), "constants.m");
    cfg.constants.q = num(need(c, "q", "constants."), "constants.q");
    if (cfg.constants.k == 0.0) throw config_error("constants.k", "constants.k must be nonzero");

    const std::size_t n = cfg.grid.size();
    cfg.theta = per_site<RMat4>(root, "theta", n, rmat4);
    cfg.cs = per_site<std::array<Mat2, 4>>(root, "cs", n, [](const json& j, const std::string& p) {
        need_array(j, 4, p);
        std::array<Mat2, 4> out;
        for (int a = 0; a < 4; ++a) out[a] = cmat2(j[a], p + "[" + std::to_string(a) + "]");
        return out;
    });
    cfg.a = per_site<RVec4>(root, "a", n, [](const json& j, const std::string& p) {
        need_array(j, 4, p);
        RVec4 v;
        for (int a = 0; a < 4; ++a) v(a) = num(j[a], p + "[" + std::to_string(a) + "]");
        return v;
    });
    cfg.ftilde = per_site<RMat4>(root, "ftilde", n, [](const json& j, const std::string& p) {
        RMat4 m = rmat4(j, p);
        if (max_abs(RMat4(m + m.transpose())) > 1e-12) throw config_error(p, "'" + p + "' must be antisymmetric");
        return m;
    });
    cfg.psi = per_site<DiracSpinor>(root, "psi", n, [](const json& j, const std::string& p) {
        DiracSpinor s;
        s.u = cvec2(need(j, "u", p + "."), p + ".u");
        s.chi = cvec2(need(j, "chi", p + "."), p + ".chi");
        return s;
    });
    return cfg;
}

FieldConfig load_field_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("", "cannot open field config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_field_config(ss.str());
}

std::string dump_field_config(const FieldConfig& cfg) {
    json root;
    root["grid"] = {{"shape", cfg.grid.shape}, {"spacing", cfg.grid.spacing}, {"boundary", to_string(cfg.grid.boundary)}};
    root["constants"] = {{"k", cfg.constants.k}, {"m", cfg.constants.m}, {"q", cfg.constants.q}};
    json th = json::array(), cs = json::array(), a = json::array(), ft = json::array(), ps = json::array();
    for (std::size_t s = 0; s < cfg.grid.size(); ++s) {
        th.push_back(rmat_json(cfg.theta[s]));
        json c = json::array();
        for (int b = 0; b < 4; ++b) c.push_back(cmat_json(cfg.cs[s][b]));
        cs.push_back(c);
        a.push_back({cfg.a[s](0), cfg.a[s](1), cfg.a[s](2), cfg.a[s](3)});
        ft.push_back(rmat_json(cfg.ftilde[s]));
        ps.push_back({{"u", {cjson(cfg.psi[s].u(0)), cjson(cfg.psi[s].u(1))}},
                      {"chi", {cjson(cfg.psi[s].chi(0)), cjson(cfg.psi[s].chi(1))}}});
    }
    root["theta"] = th;
    root["cs"] = cs;
    root["a"] = a;
    root["ftilde"] = ft;
    root["psi"] = ps;
    return root.dump();
}

}  // namespace spinorforge
