#include "ncalc/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ncalc/affine.hpp"
#include "ncalc/errors.hpp"
#include "ncalc/formal.hpp"
#include "ncalc/one_form.hpp"
#include "ncalc/report.hpp"
#include "ncalc/space.hpp"

namespace ncalc {
namespace {

struct LoadedFile {
    std::string path;
    std::string bytes;
    nlohmann::json json;
};

LoadedFile load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    LoadedFile f{path, ss.str(), {}};
    try {
        f.json = nlohmann::json::parse(f.bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return f;
}

// Prefixes validation errors with the offending file so a command that reads
// several inputs still points at the right one.
template <class F>
auto parse_as(const LoadedFile& f, F&& parse) {
    try {
        return parse(f.json);
    } catch (const ParseError& e) {
        throw ParseError(f.path + ": " + e.what());
    }
}

std::string join_args(const std::vector<std::string>& args) {
    std::string out;
    for (size_t i = 0; i < args.size(); ++i) {
        if (i)
            out += ' ';
        out += args[i];
    }
    return out;
}

std::string rat_str(const Rational& r) {
    std::ostringstream o;
    o << r;
    return o.str();
}

std::string idx_key(std::initializer_list<int> zero_based) {
    std::string out;
    for (int i : zero_based) {
        if (!out.empty())
            out += '|';
        out += std::to_string(i + 1);
    }
    return out;
}

nlohmann::json names_json(const NeighborSpace& s, const std::vector<int>& vs) {
    nlohmann::json a = nlohmann::json::array();
    for (int v : vs)
        a.push_back(s.name(v));
    return a;
}

nlohmann::json matrix_or_zero(const MatrixSeries& m) {
    if (m.is_zero())
        return "0";
    return m.to_json();
}

nlohmann::json point_or_zero(const std::vector<TruncatedSeries>& p) {
    bool zero = true;
    for (const auto& s : p)
        if (!s.is_zero())
            zero = false;
    if (zero)
        return "0";
    nlohmann::json a = nlohmann::json::array();
    for (const auto& s : p)
        a.push_back(s.to_json());
    return a;
}

// ---------------------------------------------------------------- jet orders

int jet_order_cap() {
    int cap = 10;
    if (const char* env = std::getenv("NCALC_MAX_ORDER")) {
        std::string s = env;
        size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(s, &pos);
        } catch (...) {
            pos = 0;
        }
        if (pos != s.size() || v < 1)
            throw ParseError("NCALC_MAX_ORDER must be a positive integer, got '" +
                             s + "'");
        cap = v;
    }
    return cap;
}

int resolve_order(int requested) {
    int cap = jet_order_cap();
    if (requested < 0)
        return std::min(6, cap);
    if (requested < 1 || requested > cap)
        throw ParseError("order " + std::to_string(requested) +
                         " outside the supported range 1.." + std::to_string(cap));
    return requested;
}

CoordOneForm truncate_form(const CoordOneForm& om, int order) {
    CoordOneForm f;
    f.dim = om.dim;
    f.size = om.size;
    f.order = order;
    for (const auto& m : om.omega)
        f.omega.push_back(m.truncated(order));
    return f;
}

// ---------------------------------------------------------------- handlers

void run_space_check(Report& r, const std::string& file) {
    LoadedFile f = load_file(file);
    r.inputs["space"] = digest_string(f.bytes);
    auto sp = parse_as(f, [](const nlohmann::json& j) { return NeighborSpace::from_json(j); });
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& comp : sp->components())
        comps.push_back(names_json(*sp, comp));
    r.witnesses["component_count"] = comps.size();
    r.witnesses["components"] = comps;
    r.witnesses["normalized"] = sp->to_json();
    r.outcome = "pass";
}

struct FormInputs {
    std::shared_ptr<const NeighborSpace> space;
    OneForm omega;
    int base;
};

FormInputs load_form_inputs(Report& r, const std::string& space_file,
                            const std::string& form_file,
                            const std::string& base_name) {
    LoadedFile sf = load_file(space_file);
    r.inputs["space"] = digest_string(sf.bytes);
    auto sp = parse_as(sf, [](const nlohmann::json& j) { return NeighborSpace::from_json(j); });
    LoadedFile ff = load_file(form_file);
    r.inputs["form"] = digest_string(ff.bytes);
    OneForm omega = parse_as(ff, [&](const nlohmann::json& j) { return OneForm::from_json(sp, j); });
    if (sp->size() == 0)
        throw ParseError("space has no vertices");
    int base = base_name.empty() ? 0 : sp->index_of(base_name);
    return FormInputs{sp, std::move(omega), base};
}

void run_form_check(Report& r, const std::string& space_file,
                    const std::string& form_file, const std::string& base_name,
                    int max_len) {
    FormInputs in = load_form_inputs(r, space_file, form_file, base_name);
    const NeighborSpace& sp = *in.space;
    const Group& grp = in.omega.group();
    r.witnesses["base"] = sp.name(in.base);
    r.witnesses["max_len"] = max_len;

    auto triples = closedness_violations(in.omega);
    r.witnesses["closed"] = triples.empty();
    if (!triples.empty()) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& t : triples)
            a.push_back({{"x", sp.name(t.x)},
                         {"y", sp.name(t.y)},
                         {"z", sp.name(t.z)},
                         {"lhs", grp.element_to_json(t.lhs)},
                         {"rhs", grp.element_to_json(t.rhs)}});
        r.witnesses["closedness_violations"] = a;
    }

    // Proper quadrangles x ~ y1, y2 ~ z with all four vertices distinct.
    GroupElement one = grp.identity();
    nlohmann::json defects = nlohmann::json::array();
    long quads = 0;
    for (int x = 0; x < sp.size(); ++x) {
        const auto& nb = sp.neighbors(x);
        for (size_t i = 0; i < nb.size(); ++i)
            for (size_t j = i + 1; j < nb.size(); ++j) {
                int y1 = nb[i], y2 = nb[j];
                for (int z : sp.neighbors(y1)) {
                    if (z == x || z == y2 || !sp.related(y2, z))
                        continue;
                    ++quads;
                    GroupElement d = quadrangle_defect(in.omega, x, y1, y2, z);
                    if (!(d == one))
                        defects.push_back({{"x", sp.name(x)},
                                           {"y1", sp.name(y1)},
                                           {"y2", sp.name(y2)},
                                           {"z", sp.name(z)},
                                           {"defect", grp.element_to_json(d)}});
                }
            }
    }
    r.witnesses["quadrangles_checked"] = quads;
    r.witnesses["quadrangle_ok"] = defects.empty();
    if (!defects.empty())
        r.witnesses["quadrangle_defects"] = defects;

    bool independent = true;
    long pairs = 0, unreached = 0;
    for (int y : sp.infinity_monad(in.base)) {
        if (y == in.base)
            continue;
        PathIndependence pi = path_independence_check(in.omega, in.base, y, max_len);
        if (pi.outcome == PathIndependence::Outcome::Unreachable) {
            ++unreached;
            continue;
        }
        ++pairs;
        if (pi.outcome == PathIndependence::Outcome::Witness && independent) {
            independent = false;
            r.witnesses["path_witness"] = {
                {"to", sp.name(y)},
                {"path1", names_json(sp, pi.witness_paths->first.points())},
                {"path2", names_json(sp, pi.witness_paths->second.points())},
                {"value1", grp.element_to_json(pi.witness_values->first)},
                {"value2", grp.element_to_json(pi.witness_values->second)}};
        }
    }
    r.witnesses["pairs_checked"] = pairs;
    r.witnesses["unreached_within_bound"] = unreached;
    r.witnesses["path_independent"] = independent;

    r.outcome = (triples.empty() && defects.empty() && independent) ? "pass"
                                                                    : "fail";
}

void run_form_integrate(Report& r, const std::string& space_file,
                        const std::string& form_file,
                        const std::string& base_name) {
    FormInputs in = load_form_inputs(r, space_file, form_file, base_name);
    const NeighborSpace& sp = *in.space;
    const Group& grp = in.omega.group();
    r.witnesses["base"] = sp.name(in.base);
    PrimitiveResult res = primitive(in.omega, in.base);
    if (res.ok()) {
        nlohmann::json table = nlohmann::json::object();
        for (int v = 0; v < sp.size(); ++v)
            if (res.values[v].has_value())
                table[sp.name(v)] = grp.element_to_json(*res.values[v]);
        r.witnesses["primitive"] = table;
        r.outcome = "pass";
    } else {
        const PrimitiveConflict& c = *res.conflict;
        r.witnesses["conflict"] = {
            {"edge", nlohmann::json::array({sp.name(c.y), sp.name(c.z)})},
            {"expected", grp.element_to_json(c.expected)},
            {"actual", grp.element_to_json(c.actual)},
            {"path_y", names_json(sp, c.path_y)},
            {"path_z", names_json(sp, c.path_z)}};
        r.outcome = "fail";
    }
}

AffineConnection load_conn(Report& r, const std::string& conn_file) {
    LoadedFile cf = load_file(conn_file);
    r.inputs["conn"] = digest_string(cf.bytes);
    std::filesystem::path dir =
        std::filesystem::path(conn_file).parent_path();
    auto load_ref = [&](const std::string& ref) {
        LoadedFile sf = load_file((dir / ref).string());
        r.inputs["space"] = digest_string(sf.bytes);
        return sf.json;
    };
    return parse_as(cf, [&](const nlohmann::json& j) {
        return AffineConnection::from_json(j, load_ref);
    });
}

nlohmann::json axiom_violations_json(const NeighborSpace& sp,
                                     const std::vector<AxiomViolation>& vs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& v : vs)
        a.push_back({{"z", sp.name(v.z)},
                     {"x", sp.name(v.x)},
                     {"y", sp.name(v.y)},
                     {"axiom", v.axiom}});
    return a;
}

void run_affine_check(Report& r, const std::string& conn_file) {
    AffineConnection conn = load_conn(r, conn_file);
    const NeighborSpace& sp = conn.space();
    AxiomReport ax = validate_axioms(conn);
    r.witnesses["axioms"] = {{"core_ok", ax.core_ok()},
                             {"inversion_skipped", ax.inversion_skipped}};
    if (!ax.core.empty())
        r.witnesses["axioms"]["violations"] = axiom_violations_json(sp, ax.core);
    r.witnesses["symmetric"] = ax.symmetric();
    if (!ax.symmetric())
        r.witnesses["symmetry_violations"] =
            axiom_violations_json(sp, ax.symmetry);
    bool flat = false;
    if (ax.core_ok() && ax.symmetric()) {
        WeakFlatnessReport wf = weak_flatness_check(conn);
        flat = wf.flat();
        nlohmann::json w = {{"flat", flat}};
        auto quads = [&](const std::vector<WeakFlatnessQuad>& qs) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& q : qs) {
                nlohmann::json e = {{"x0", sp.name(q.x0)},
                                    {"x1", sp.name(q.x1)},
                                    {"x2", sp.name(q.x2)},
                                    {"z", sp.name(q.z)}};
                e["lhs"] = q.lhs ? nlohmann::json(sp.name(*q.lhs))
                                 : nlohmann::json();
                e["rhs"] = q.rhs ? nlohmann::json(sp.name(*q.rhs))
                                 : nlohmann::json();
                a.push_back(e);
            }
            return a;
        };
        if (!wf.violations.empty())
            w["violations"] = quads(wf.violations);
        if (!wf.undefined.empty())
            w["undefined"] = quads(wf.undefined);
        r.witnesses["weak_flatness"] = w;
    }
    r.outcome = (ax.core_ok() && ax.symmetric() && flat) ? "pass" : "fail";
}

void run_affine_grid(Report& r, const std::string& conn_file,
                     const std::string& from, const std::string& yend,
                     const std::string& zend, int max_len) {
    AffineConnection conn = load_conn(r, conn_file);
    const NeighborSpace& sp = conn.space();
    GridInvariance gi = grid2_codomain_invariance(
        conn, sp.index_of(from), sp.index_of(yend), sp.index_of(zend), max_len);
    r.witnesses["max_len"] = max_len;
    r.witnesses["undefined_pairs"] = gi.undefined_pairs;
    switch (gi.outcome) {
    case GridInvariance::Outcome::Common:
        r.witnesses["codomain"] = sp.name(*gi.common);
        r.outcome = "pass";
        break;
    case GridInvariance::Outcome::Witness:
        r.witnesses["witness"] = {
            {"y1", names_json(sp, (*gi.witness)[0])},
            {"z1", names_json(sp, (*gi.witness)[1])},
            {"y2", names_json(sp, (*gi.witness)[2])},
            {"z2", names_json(sp, (*gi.witness)[3])},
            {"codomains",
             nlohmann::json::array({sp.name(gi.witness_codomains->first),
                                    sp.name(gi.witness_codomains->second)})}};
        r.outcome = "fail";
        break;
    case GridInvariance::Outcome::Unreachable:
        r.witnesses["reason"] = "no grid within the path-length bound";
        r.outcome = "untestable";
        break;
    }
}

void run_affine_cube(Report& r, const std::string& conn_file,
                     const std::string& p0, const std::string& p1,
                     const std::string& p2, const std::string& p4) {
    AffineConnection conn = load_conn(r, conn_file);
    const NeighborSpace& sp = conn.space();
    CubeReport cr = cube_check(conn, sp.index_of(p0), sp.index_of(p1),
                               sp.index_of(p2), sp.index_of(p4));
    nlohmann::json exprs = nlohmann::json::array();
    for (const auto& e : cr.exprs)
        exprs.push_back(e ? nlohmann::json(sp.name(*e)) : nlohmann::json());
    r.witnesses["expressions"] = exprs;
    nlohmann::json eqs = nlohmann::json::object();
    nlohmann::json failing = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
        std::string key = "eq" + std::to_string(i);
        eqs[key] = {{"defined", cr.eq_defined[i]}, {"holds", cr.eq_holds[i]}};
        if (!cr.eq_holds[i])
            failing.push_back(key);
    }
    r.witnesses["equations"] = eqs;
    r.witnesses["all_equal"] = cr.all_equal;
    if (!cr.all_equal)
        r.witnesses["failing"] = failing;
    if (cr.cube) {
        nlohmann::json cube = nlohmann::json::array();
        for (int v : *cr.cube)
            cube.push_back(sp.name(v));
        r.witnesses["cube"] = cube;
    }
    r.outcome = cr.all_equal ? "pass" : "fail";
}

/// Group-law, bracket-compatibility and base-change verification driver.
struct HeapChecker {
    const AffineConnection& conn;
    const NeighborSpace& sp;
    Heap heap;
    nlohmann::json violation;
    long checks = 0;

    explicit HeapChecker(const AffineConnection& c)
        : conn(c), sp(c.space()), heap(c) {}

    bool ok() const { return violation.is_null(); }

    bool expect(bool cond, const char* law, std::initializer_list<int> pts,
                int lhs, int rhs) {
        ++checks;
        if (cond)
            return true;
        nlohmann::json e = {{"law", law},
                            {"lhs", sp.name(lhs)},
                            {"rhs", sp.name(rhs)}};
        nlohmann::json ps = nlohmann::json::array();
        for (int p : pts)
            ps.push_back(sp.name(p));
        e["points"] = ps;
        violation = e;
        return false;
    }

    bool laws_at(int o, const std::vector<int>& K) {
        for (int x : K) {
            int l = heap.add(o, o, x);
            if (!expect(l == x, "unit-left", {o, x}, l, x))
                return false;
            l = heap.add(o, x, o);
            if (!expect(l == x, "unit-right", {o, x}, l, x))
                return false;
            int ix = heap.inverse(o, x);
            l = heap.add(o, x, ix);
            if (!expect(l == o, "inverse", {o, x, ix}, l, o))
                return false;
        }
        for (size_t i = 0; i < K.size(); ++i)
            for (size_t j = i; j < K.size(); ++j) {
                int l = heap.add(o, K[i], K[j]);
                int rr = heap.add(o, K[j], K[i]);
                if (!expect(l == rr, "commutativity", {o, K[i], K[j]}, l, rr))
                    return false;
            }
        for (int x : K)
            for (int y : K)
                for (int w : K) {
                    int l = heap.add(o, heap.add(o, x, y), w);
                    int rr = heap.add(o, x, heap.add(o, y, w));
                    if (!expect(l == rr, "associativity", {o, x, y, w}, l, rr))
                        return false;
                }
        return true;
    }

    bool bracket_all() {
        for (int x = 0; x < sp.size(); ++x)
            for (int z : sp.monad(x))
                for (int y : sp.monad(x)) {
                    auto direct = conn.eval(z, x, y);
                    if (!direct)
                        continue;
                    int ext = heap.add(x, z, y);
                    if (!expect(ext == *direct, "bracket", {z, x, y}, ext,
                                *direct))
                        return false;
                }
        return true;
    }

    bool base_change_all(const std::vector<int>& origins,
                         const std::vector<int>& K) {
        for (int o : origins)
            for (int o2 : K) {
                std::map<int, int> h;
                std::set<int> image;
                for (int x : K) {
                    h[x] = heap.change_base(o, o2, x);
                    image.insert(h[x]);
                }
                ++checks;
                if (image.size() != K.size()) {
                    violation = {{"law", "base-change-bijectivity"},
                                 {"o", sp.name(o)},
                                 {"o2", sp.name(o2)}};
                    return false;
                }
                for (int x : K)
                    for (int y : K) {
                        int l = h[heap.add(o, x, y)];
                        int rr = heap.add(o2, h[x], h[y]);
                        if (!expect(l == rr, "base-change-homomorphism",
                                    {o, o2, x, y}, l, rr))
                            return false;
                    }
            }
        return true;
    }
};

void run_affine_heap(Report& r, const std::string& conn_file,
                     const std::string& base_name, uint64_t seed) {
    AffineConnection conn = load_conn(r, conn_file);
    const NeighborSpace& sp = conn.space();
    HeapChecker hc(conn);
    bool exhaustive = sp.size() <= 30;
    r.witnesses["mode"] = exhaustive ? "exhaustive" : "sampled";

    std::vector<std::vector<int>> comps = sp.components();
    if (!base_name.empty()) {
        int b = sp.index_of(base_name);
        for (auto& c : comps)
            if (std::find(c.begin(), c.end(), b) != c.end()) {
                comps = {c};
                break;
            }
        r.witnesses["base"] = base_name;
    }

    bool good = true;
    if (exhaustive) {
        for (const auto& K : comps) {
            std::vector<int> origins =
                base_name.empty() ? K : std::vector<int>{sp.index_of(base_name)};
            for (int o : origins)
                if (!(good = hc.laws_at(o, K)))
                    break;
            if (good)
                good = hc.base_change_all(origins, K);
            if (!good)
                break;
        }
        if (good)
            good = hc.bracket_all();
    } else {
        r.witnesses["seed"] = seed;
        std::mt19937_64 rng(seed);
        auto pick = [&](const std::vector<int>& v) {
            return v[rng() % v.size()];
        };
        for (const auto& K : comps) {
            std::vector<int> origins =
                base_name.empty() ? K : std::vector<int>{sp.index_of(base_name)};
            for (int s = 0; s < 200 && good; ++s) {
                int o = pick(origins), x = pick(K), y = pick(K), w = pick(K);
                good = hc.laws_at(o, {x, y, w});
            }
            for (int s = 0; s < 50 && good; ++s) {
                int o = pick(origins), o2 = pick(K);
                std::vector<int> sub;
                for (int t = 0; t < 10; ++t)
                    sub.push_back(pick(K));
                // Sampled mode checks the homomorphism law only; bijectivity
                // needs the full component.
                for (int x : sub)
                    for (int y : sub) {
                        int hx = hc.heap.change_base(o, o2, x);
                        int hy = hc.heap.change_base(o, o2, y);
                        int l = hc.heap.change_base(o, o2, hc.heap.add(o, x, y));
                        int rr = hc.heap.add(o2, hx, hy);
                        if (!(good = hc.expect(l == rr,
                                               "base-change-homomorphism",
                                               {o, o2, x, y}, l, rr)))
                            break;
                    }
            }
            if (!good)
                break;
        }
        if (good) {
            for (int s = 0; s < 200 && good; ++s) {
                int x = static_cast<int>(rng() % sp.size());
                std::vector<int> m = sp.monad(x);
                int z = pick(m), y = pick(m);
                auto direct = conn.eval(z, x, y);
                if (!direct)
                    continue;
                int ext = hc.heap.add(x, z, y);
                good = hc.expect(ext == *direct, "bracket", {z, x, y}, ext,
                                 *direct);
            }
        }
    }
    r.witnesses["checks"] = hc.checks;
    if (!hc.ok())
        r.witnesses["violation"] = hc.violation;
    r.outcome = good ? "pass" : "fail";
}

void verify_form_checks(Report& r, const CoordOneForm& om, int order) {
    r.witnesses["order"] = order;

    MatrixSeries basicx = basicx_residual(om);
    r.witnesses["basicx_residual"] = matrix_or_zero(basicx);

    ClosednessReport tensor = closedness_residual(om);
    ClosednessReport pairs = closedness_residual_pairring(om);
    bool agree = tensor.residual.size() == pairs.residual.size();
    for (size_t i = 0; agree && i < tensor.residual.size(); ++i)
        agree = tensor.residual[i] == pairs.residual[i];

    nlohmann::json cl;
    cl["order"] = tensor.order;
    cl["closed"] = tensor.closed();
    cl["routes_agree"] = agree;
    if (tensor.closed()) {
        cl["residual"] = "0";
    } else {
        nlohmann::json res = nlohmann::json::object();
        for (size_t i = 0; i < tensor.index.size(); ++i)
            if (!tensor.residual[i].is_zero())
                res[idx_key({tensor.index[i].first, tensor.index[i].second})] =
                    tensor.residual[i].to_json();
        cl["residual"] = res;
        auto fv = tensor.first_violation();
        cl["first_violation"] = idx_key({fv->first, fv->second});
    }
    r.witnesses["closedness"] = cl;

    r.outcome =
        (basicx.is_zero() && tensor.closed() && agree) ? "pass" : "fail";
}

void run_jet_verify_omega(Report& r, const std::string& omega_file, int order) {
    LoadedFile f = load_file(omega_file);
    r.inputs["omega"] = digest_string(f.bytes);
    CoordOneForm om = parse_as(f, [](const nlohmann::json& j) { return CoordOneForm::from_json(j); });
    if (om.order < order)
        throw UntestableError("omega file order " + std::to_string(om.order) +
                              " is below the requested order " +
                              std::to_string(order));
    verify_form_checks(r, truncate_form(om, order), order);
}

// A map file names an invertible formal map; its Darboux derivative is then
// put through the same battery as a directly supplied form.
void run_jet_verify_map(Report& r, const std::string& map_file, int order) {
    LoadedFile f = load_file(map_file);
    r.inputs["map"] = digest_string(f.bytes);
    MatrixSeries m = parse_as(f, [](const nlohmann::json& j) { return MatrixSeries::from_json(j); });
    if (m.order() < order)
        throw UntestableError("map file order " + std::to_string(m.order()) +
                              " is below the requested order " +
                              std::to_string(order));
    CoordOneForm om = maurer_cartan_from_map(m.truncated(order));
    r.witnesses["derived_from_map"] = true;
    verify_form_checks(r, om, order);
}

void run_jet_verify_gamma(Report& r, const std::string& gamma_file, int order) {
    LoadedFile f = load_file(gamma_file);
    r.inputs["gamma"] = digest_string(f.bytes);
    ChristoffelField G = parse_as(f, [](const nlohmann::json& j) { return ChristoffelField::from_json(j); });
    if (G.order < order)
        throw UntestableError("gamma file order " + std::to_string(G.order) +
                              " is below the requested order " +
                              std::to_string(order));
    G = G.truncated(order);
    r.witnesses["order"] = order;

    SymmetryReport sym = symmetry_check(G);
    r.witnesses["symmetric"] = sym.symmetric;
    if (!sym.symmetric) {
        r.witnesses["torsion_witness"] = idx_key({sym.c, sym.a, sym.b});
        r.outcome = "fail";
        return;
    }

    std::vector<TruncatedSeries> res = affine_flatness_residual(G);
    bool flat_res = true;
    for (const auto& s : res)
        if (!s.is_zero())
            flat_res = false;
    r.witnesses["flatness_residual"] = point_or_zero(res);

    CurvatureTensor R = curvature_tensor(G);
    bool flat_R = R.is_zero();
    if (flat_R) {
        r.witnesses["curvature"] = "0";
    } else {
        nlohmann::json cur = nlohmann::json::object();
        for (int d = 0; d < G.dim; ++d)
            for (int c = 0; c < G.dim; ++c)
                for (int a = 0; a < G.dim; ++a)
                    for (int b = 0; b < G.dim; ++b)
                        if (!R.at(d, c, a, b).is_zero())
                            cur[idx_key({d, c, a, b})] =
                                R.at(d, c, a, b).to_json();
        r.witnesses["curvature"] = cur;
    }
    r.witnesses["conventions_agree"] = (flat_res == flat_R);

    auto ex = cube_expressions(G);
    bool all_equal = true;
    nlohmann::json eqs = nlohmann::json::object();
    nlohmann::json failing = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
        bool holds = true;
        for (size_t c = 0; c < ex[2 * i].size(); ++c)
            if (!(ex[2 * i][c] == ex[2 * i + 1][c]))
                holds = false;
        eqs["eq" + std::to_string(i)] = holds;
        if (!holds) {
            failing.push_back("eq" + std::to_string(i));
            all_equal = false;
        }
    }
    for (int i = 1; i < 6 && all_equal; ++i)
        for (size_t c = 0; c < ex[0].size(); ++c)
            if (!(ex[i][c] == ex[0][c]))
                all_equal = false;
    nlohmann::json cube = {{"all_equal", all_equal}, {"equations", eqs}};
    if (!failing.empty())
        cube["failing"] = failing;
    r.witnesses["cube"] = cube;

    bool scalar_ok = true;
    nlohmann::json sc = nlohmann::json::object();
    for (const Rational& t :
         {Rational(1, 2), Rational(2), Rational(-1)}) {
        std::vector<TruncatedSeries> sres = second_order_scalar_residual(G, t);
        bool zero = true;
        for (const auto& s : sres)
            if (!s.is_zero())
                zero = false;
        sc[rat_str(t)] = point_or_zero(sres);
        if (!zero)
            scalar_ok = false;
    }
    r.witnesses["scalar_law"] = sc;

    r.outcome = (flat_res && flat_R && all_equal && scalar_ok) ? "pass" : "fail";
}

void run_jet_primitive(Report& r, const std::string& omega_file, int order) {
    LoadedFile f = load_file(omega_file);
    r.inputs["omega"] = digest_string(f.bytes);
    CoordOneForm om = parse_as(f, [](const nlohmann::json& j) { return CoordOneForm::from_json(j); });
    if (om.order < order - 1)
        throw UntestableError("omega file order " + std::to_string(om.order) +
                              " cannot support primitive order " +
                              std::to_string(order));
    om = truncate_form(om, order > 0 ? order - 1 : 0);
    r.witnesses["order"] = order;
    JetPrimitiveResult res = formal_primitive(om, order);
    if (res.ok()) {
        r.witnesses["f"] = res.f->to_json();
        r.outcome = "pass";
    } else {
        r.witnesses["obstruction"] = {{"degree", res.degree},
                                      {"pair", idx_key({res.a, res.b})}};
        r.outcome = "fail";
    }
}

void run_jet_chart(Report& r, const std::string& gamma_file, int order) {
    LoadedFile f = load_file(gamma_file);
    r.inputs["gamma"] = digest_string(f.bytes);
    ChristoffelField G = parse_as(f, [](const nlohmann::json& j) { return ChristoffelField::from_json(j); });
    if (G.order < order - 2)
        throw UntestableError("gamma file order " + std::to_string(G.order) +
                              " cannot support chart order " +
                              std::to_string(order));
    G = G.truncated(order >= 2 ? order - 2 : 0);
    r.witnesses["order"] = order;
    ChartResult res = formal_chart(G, order);
    if (res.ok()) {
        r.witnesses["phi"] = res.chart->to_json();
        r.outcome = "pass";
    } else {
        r.witnesses["obstruction"] = {
            {"degree", res.degree},
            {"component", idx_key({res.c, res.a, res.b})}};
        r.outcome = "fail";
    }
}

} // namespace

CliResult run_cli(const std::vector<std::string>& args) {
    CliResult result;
    Report report;
    report.command = join_args(args);

    CLI::App app{"exact neighbor-graph and formal-jet calculus", "ncalc"};
    app.require_subcommand(1);

    // space check <file>
    auto* space_cmd = app.add_subcommand("space", "neighbor space operations");
    space_cmd->require_subcommand(1);
    auto* space_check = space_cmd->add_subcommand("check", "validate a space file");
    std::string space_file;
    space_check->add_option("file", space_file, "space file")->required();
    space_check->callback([&] { run_space_check(report, space_file); });

    // form check|integrate --space --form [--base] [--max-len]
    auto* form_cmd = app.add_subcommand("form", "group-valued 1-form operations");
    form_cmd->require_subcommand(1);
    std::string f_space, f_form, f_base;
    int f_maxlen = 4;
    auto* form_check = form_cmd->add_subcommand(
        "check", "closedness, quadrangle defects and path independence");
    auto* form_integrate =
        form_cmd->add_subcommand("integrate", "primitive table from a base");
    for (CLI::App* c : {form_check, form_integrate}) {
        c->add_option("--space", f_space, "space file")->required();
        c->add_option("--form", f_form, "form file")->required();
        c->add_option("--base", f_base, "base vertex (default: first)");
    }
    form_check->add_option("--max-len", f_maxlen,
                           "path length bound (default 4)");
    form_check->callback(
        [&] { run_form_check(report, f_space, f_form, f_base, f_maxlen); });
    form_integrate->callback(
        [&] { run_form_integrate(report, f_space, f_form, f_base); });

    // affine check|grid|cube|heap --conn [args]
    auto* affine_cmd =
        app.add_subcommand("affine", "affine connection operations");
    affine_cmd->require_subcommand(1);
    std::string a_conn, a_from, a_yend, a_zend, a_p0, a_p1, a_p2, a_p4, a_base;
    int a_maxlen = 4;
    uint64_t a_seed = 1;
    auto* affine_check =
        affine_cmd->add_subcommand("check", "axioms, symmetry, weak flatness");
    auto* affine_grid = affine_cmd->add_subcommand(
        "grid", "2D grid codomain invariance between endpoints");
    auto* affine_cube =
        affine_cmd->add_subcommand("cube", "the six cube expressions");
    auto* affine_heap = affine_cmd->add_subcommand(
        "heap", "group laws and base change of the extracted heap");
    for (CLI::App* c : {affine_check, affine_grid, affine_cube, affine_heap})
        c->add_option("--conn", a_conn, "connection file")->required();
    affine_grid->add_option("--from", a_from, "common domain vertex")->required();
    affine_grid->add_option("--yend", a_yend, "y-path endpoint")->required();
    affine_grid->add_option("--zend", a_zend, "z-path endpoint")->required();
    affine_grid->add_option("--max-len", a_maxlen,
                            "path length bound (default 4)");
    affine_cube->add_option("--p0", a_p0, "base vertex")->required();
    affine_cube->add_option("--p1", a_p1, "first neighbor")->required();
    affine_cube->add_option("--p2", a_p2, "second neighbor")->required();
    affine_cube->add_option("--p4", a_p4, "third neighbor")->required();
    affine_heap->add_option("--base", a_base, "restrict origins to one vertex");
    affine_heap->add_option("--seed", a_seed,
                            "sampling seed for spaces over 30 vertices");
    affine_check->callback([&] { run_affine_check(report, a_conn); });
    affine_grid->callback(
        [&] { run_affine_grid(report, a_conn, a_from, a_yend, a_zend, a_maxlen); });
    affine_cube->callback(
        [&] { run_affine_cube(report, a_conn, a_p0, a_p1, a_p2, a_p4); });
    affine_heap->callback(
        [&] { run_affine_heap(report, a_conn, a_base, a_seed); });

    // jet verify|primitive|chart [--order] --omega|--gamma|--map
    auto* jet_cmd = app.add_subcommand("jet", "formal jet operations");
    jet_cmd->require_subcommand(1);
    std::string j_omega, j_gamma, j_map;
    int j_order = -1;
    auto* jet_verify = jet_cmd->add_subcommand(
        "verify", "identities and residuals of a form or connection");
    auto* jet_primitive = jet_cmd->add_subcommand(
        "primitive", "solve df = f Omega with f(0) = 1");
    auto* jet_chart =
        jet_cmd->add_subcommand("chart", "trivializing chart of a flat gamma");
    for (CLI::App* c : {jet_verify, jet_primitive, jet_chart})
        c->add_option("--order", j_order, "truncation order (default 6)");
    auto* vo = jet_verify->add_option("--omega", j_omega, "coordinate 1-form file");
    auto* vg = jet_verify->add_option("--gamma", j_gamma, "christoffel file");
    auto* vm = jet_verify->add_option("--map", j_map,
                                      "invertible matrix map file");
    vo->excludes(vg)->excludes(vm);
    vg->excludes(vo)->excludes(vm);
    vm->excludes(vo)->excludes(vg);
    jet_primitive->add_option("--omega", j_omega, "coordinate 1-form file")
        ->required();
    jet_chart->add_option("--gamma", j_gamma, "christoffel file")->required();
    jet_verify->callback([&] {
        int n = resolve_order(j_order);
        if (!j_omega.empty())
            run_jet_verify_omega(report, j_omega, n);
        else if (!j_gamma.empty())
            run_jet_verify_gamma(report, j_gamma, n);
        else if (!j_map.empty())
            run_jet_verify_map(report, j_map, n);
        else
            throw CLI::RequiredError("--omega, --gamma or --map");
    });
    jet_primitive->callback(
        [&] { run_jet_primitive(report, j_omega, resolve_order(j_order)); });
    jet_chart->callback(
        [&] { run_jet_chart(report, j_gamma, resolve_order(j_order)); });

    auto t0 = std::chrono::steady_clock::now();
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        result.out = report.render();
        result.exit_code = report.outcome == "pass" ? 0
                           : report.outcome == "fail" ? 1
                                                      : 3;
    } catch (const CLI::CallForHelp&) {
        result.out = app.help();
        result.exit_code = 0;
    } catch (const CLI::ParseError& e) {
        result.err = std::string("usage error: ") + e.what() +
                     "\nRun with --help for usage.\n";
        result.exit_code = 2;
    } catch (const ParseError& e) {
        result.err = std::string("parse error: ") + e.what() + "\n";
        result.exit_code = 2;
    } catch (const UntestableError& e) {
        report.outcome = "untestable";
        report.witnesses["reason"] = e.what();
        result.out = report.render();
        result.exit_code = 3;
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    result.err += "time_ms=" + std::to_string(ms) + "\n";
    return result;
}

} // namespace ncalc
