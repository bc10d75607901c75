#include "ncalc/affine.hpp"

#include <algorithm>

#include "ncalc/errors.hpp"

namespace ncalc {

namespace {

int mod_norm(int x, int m) {
    int r = x % m;
    return r < 0 ? r + m : r;
}

std::string coord_name(const std::vector<int>& c) {
    std::string out;
    for (size_t i = 0; i < c.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(c[i]);
    }
    return out;
}

std::shared_ptr<const NeighborSpace> lattice_space(int modulus, int dim) {
    if (modulus < 2 || dim < 1)
        throw ParseError("lattice: need modulus >= 2 and dim >= 1");
    int total = 1;
    for (int i = 0; i < dim; ++i) {
        if (total > 100000 / modulus)
            throw ParseError("lattice: too many vertices");
        total *= modulus;
    }
    std::vector<std::string> names(total);
    std::vector<int> c(dim, 0);
    for (int v = 0; v < total; ++v) {
        names[v] = coord_name(c);
        for (int i = dim - 1; i >= 0; --i) {
            if (++c[i] < modulus)
                break;
            c[i] = 0;
        }
    }
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<int> cc(dim, 0);
    for (int v = 0; v < total; ++v) {
        for (int i = 0; i < dim; ++i) {
            auto step = cc;
            step[i] = mod_norm(step[i] + 1, modulus);
            edges.emplace_back(names[v], coord_name(step));
        }
        for (int i = dim - 1; i >= 0; --i) {
            if (++cc[i] < modulus)
                break;
            cc[i] = 0;
        }
    }
    return NeighborSpace::build(std::move(names), edges);
}

} // namespace

AffineConnection AffineConnection::lattice(int modulus, int dim) {
    AffineConnection c;
    c.kind_ = Kind::Lattice;
    c.space_ = lattice_space(modulus, dim);
    c.modulus_ = modulus;
    c.dim_ = dim;
    return c;
}

AffineConnection AffineConnection::twisted(int modulus, int dim,
                                           std::vector<int> perm) {
    AffineConnection base = lattice(modulus, dim);
    const auto& ls = *base.space_;
    if (static_cast<int>(perm.size()) != ls.size())
        throw ParseError("twisted: perm must list all " + std::to_string(ls.size()) +
                         " vertex indices");
    std::vector<int> inv(perm.size(), -1);
    for (size_t i = 0; i < perm.size(); ++i) {
        int p = perm[i];
        if (p < 0 || p >= ls.size() || inv[p] != -1)
            throw ParseError("twisted: perm is not a permutation of vertex indices");
        inv[p] = static_cast<int>(i);
    }

    // Transport the relation along sigma; vertex names and order unchanged.
    std::vector<std::string> names;
    for (int v = 0; v < ls.size(); ++v)
        names.push_back(ls.name(v));
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [i, j] : ls.edges())
        edges.emplace_back(ls.name(perm[i]), ls.name(perm[j]));

    AffineConnection c;
    c.kind_ = Kind::Twisted;
    c.space_ = NeighborSpace::build(std::move(names), edges);
    c.modulus_ = modulus;
    c.dim_ = dim;
    c.perm_ = std::move(perm);
    c.perm_inv_ = std::move(inv);
    return c;
}

AffineConnection
AffineConnection::table(std::shared_ptr<const NeighborSpace> space,
                        std::map<std::tuple<int, int, int>, int> entries) {
    AffineConnection c;
    c.kind_ = Kind::Table;
    c.space_ = std::move(space);
    for (const auto& [key, w] : entries) {
        auto [z, x, y] = key;
        if (!c.admissible(z, x, y))
            throw ParseError("table: entry (" + c.space_->name(z) + "|" +
                             c.space_->name(x) + "|" + c.space_->name(y) +
                             ") is not an admissible triple");
        if (w < 0 || w >= c.space_->size())
            throw ParseError("table: entry value out of range");
    }
    c.entries_ = std::move(entries);
    return c;
}

AffineConnection AffineConnection::from_json(
    const nlohmann::json& j,
    const std::function<nlohmann::json(const std::string&)>& load_ref) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ParseError("connection: expected object with a \"kind\" string");
    const std::string kind = j.at("kind").get<std::string>();
    auto get_int = [&](const char* field) {
        if (!j.contains(field) || !j.at(field).is_number_integer())
            throw ParseError(std::string("connection: missing integer \"") + field +
                             "\"");
        return j.at(field).get<int>();
    };
    if (kind == "lattice")
        return lattice(get_int("modulus"), get_int("dim"));
    if (kind == "twisted") {
        if (!j.contains("perm") || !j.at("perm").is_array())
            throw ParseError("connection: twisted needs a \"perm\" array");
        std::vector<int> perm;
        for (const auto& p : j.at("perm")) {
            if (!p.is_number_integer())
                throw ParseError("connection: perm entries must be integers");
            perm.push_back(p.get<int>());
        }
        return twisted(get_int("modulus"), get_int("dim"), std::move(perm));
    }
    if (kind == "table") {
        if (!j.contains("space"))
            throw ParseError("connection: table needs a \"space\"");
        nlohmann::json space_json;
        if (j.at("space").is_string())
            space_json = load_ref(j.at("space").get<std::string>());
        else
            space_json = j.at("space"); // inline space object
        auto space = NeighborSpace::from_json(space_json);
        if (!j.contains("entries") || !j.at("entries").is_object())
            throw ParseError("connection: table needs an \"entries\" object");
        std::map<std::tuple<int, int, int>, int> entries;
        for (const auto& [key, val] : j.at("entries").items()) {
            auto bar1 = key.find('|');
            auto bar2 = (bar1 == std::string::npos) ? std::string::npos
                                                    : key.find('|', bar1 + 1);
            if (bar1 == std::string::npos || bar2 == std::string::npos ||
                key.find('|', bar2 + 1) != std::string::npos)
                throw ParseError("connection: bad entry key \"" + key +
                                 "\" (want \"z|x|y\")");
            if (!val.is_string())
                throw ParseError("connection: entry values must be vertex ids");
            int z = space->index_of(key.substr(0, bar1));
            int x = space->index_of(key.substr(bar1 + 1, bar2 - bar1 - 1));
            int y = space->index_of(key.substr(bar2 + 1));
            entries[{z, x, y}] = space->index_of(val.get<std::string>());
        }
        return table(std::move(space), std::move(entries));
    }
    throw ParseError("connection: unknown kind \"" + kind + "\"");
}

nlohmann::json AffineConnection::to_json() const {
    switch (kind_) {
    case Kind::Lattice:
        return {{"kind", "lattice"}, {"modulus", modulus_}, {"dim", dim_}};
    case Kind::Twisted:
        return {{"kind", "twisted"}, {"modulus", modulus_}, {"dim", dim_},
                {"perm", perm_}};
    case Kind::Table: {
        nlohmann::json entries = nlohmann::json::object();
        for (const auto& [key, w] : entries_) {
            auto [z, x, y] = key;
            entries[space_->name(z) + "|" + space_->name(x) + "|" + space_->name(y)] =
                space_->name(w);
        }
        return {{"kind", "table"}, {"space", space_->to_json()},
                {"entries", std::move(entries)}};
    }
    }
    throw std::logic_error("unreachable");
}

bool AffineConnection::admissible(int z, int x, int y) const {
    return space_->related(x, y) && space_->related(x, z);
}

std::vector<int> AffineConnection::coords(int v) const {
    if (kind_ == Kind::Table)
        throw ParseError("connection: coordinates exist for lattice kinds only");
    std::vector<int> c(dim_);
    for (int i = dim_ - 1; i >= 0; --i) {
        c[i] = v % modulus_;
        v /= modulus_;
    }
    return c;
}

std::optional<int> AffineConnection::eval(int z, int x, int y) const {
    if (!admissible(z, x, y))
        return std::nullopt;
    switch (kind_) {
    case Kind::Lattice: {
        auto cz = coords(z), cx = coords(x), cy = coords(y);
        int idx = 0;
        for (int i = 0; i < dim_; ++i)
            idx = idx * modulus_ + mod_norm(cz[i] - cx[i] + cy[i], modulus_);
        return idx;
    }
    case Kind::Twisted: {
        // sigma . lambda . sigma^-1, componentwise on coordinates.
        auto cz = coords(perm_inv_[z]), cx = coords(perm_inv_[x]),
             cy = coords(perm_inv_[y]);
        int idx = 0;
        for (int i = 0; i < dim_; ++i)
            idx = idx * modulus_ + mod_norm(cz[i] - cx[i] + cy[i], modulus_);
        return perm_[idx];
    }
    case Kind::Table: {
        auto it = entries_.find({z, x, y});
        if (it == entries_.end())
            return std::nullopt;
        return it->second;
    }
    }
    throw std::logic_error("unreachable");
}

AxiomReport validate_axioms(const AffineConnection& conn) {
    const auto& s = conn.space();
    AxiomReport rep;
    auto must_eval = [&](int z, int x, int y) {
        auto w = conn.eval(z, x, y);
        if (!w)
            throw ParseError("connection: op missing on admissible triple (" +
                             s.name(z) + "|" + s.name(x) + "|" + s.name(y) + ")");
        return *w;
    };
    for (int x = 0; x < s.size(); ++x) {
        auto mon = s.monad(x);
        for (int z : mon)
            for (int y : mon) {
                int w = must_eval(z, x, y);
                if (!s.related(w, y))
                    rep.core.push_back({z, x, y, "bookkeeping-y"});
                if (!s.related(w, z))
                    rep.core.push_back({z, x, y, "bookkeeping-z"});
                if (y == x && w != z)
                    rep.core.push_back({z, x, y, "unit-zxx"});
                if (z == x && w != y)
                    rep.core.push_back({z, x, y, "unit-xxy"});
                // Inversion [[zxy]yx] = z needs y ~ [zxy] (book-keeping)
                // and y ~ x (admissibility, given).
                if (s.related(y, w) && s.related(y, x)) {
                    auto back = conn.eval(w, y, x);
                    if (!back)
                        must_eval(w, y, x); // table totality failure
                    else if (*back != z)
                        rep.core.push_back({z, x, y, "inversion"});
                } else {
                    ++rep.inversion_skipped;
                }
                int w2 = must_eval(y, x, z);
                if (w2 != w)
                    rep.symmetry.push_back({z, x, y, "symmetry"});
            }
    }
    return rep;
}

WeakFlatnessReport weak_flatness_check(const AffineConnection& conn) {
    AxiomReport ax = validate_axioms(conn);
    if (!ax.symmetric())
        throw UntestableError("weak flatness: connection is not symmetric");
    const auto& s = conn.space();
    WeakFlatnessReport rep;
    auto nested = [&](int z, int x0, int a, int b) -> std::optional<int> {
        // [[z x0 a] a [a x0 b]]
        auto inner1 = conn.eval(z, x0, a);
        auto inner2 = conn.eval(a, x0, b);
        if (!inner1 || !inner2)
            return std::nullopt;
        return conn.eval(*inner1, a, *inner2);
    };
    for (int x0 = 0; x0 < s.size(); ++x0) {
        auto mon = s.monad(x0);
        for (int x1 : mon)
            for (int x2 : mon)
                for (int z : mon) {
                    auto lhs = nested(z, x0, x1, x2);
                    auto rhs = nested(z, x0, x2, x1);
                    if (!lhs || !rhs)
                        rep.undefined.push_back({x0, x1, x2, z, lhs, rhs});
                    else if (*lhs != *rhs)
                        rep.violations.push_back({x0, x1, x2, z, lhs, rhs});
                }
    }
    return rep;
}

Connection hat(const AffineConnection& conn) {
    auto gpd = Groupoid::gl(conn.space_ptr());
    const auto& s = conn.space();
    return Connection(gpd, [&](int x, int y) {
        std::vector<int> img;
        for (int z : s.monad(x)) {
            auto w = conn.eval(z, x, y);
            if (!w)
                throw UntestableError("hat: [" + s.name(z) + "|" + s.name(x) + "|" +
                                      s.name(y) + "] undefined");
            img.push_back(*w);
        }
        return Arrow{x, y, std::move(img)};
    });
}

Grid2D grid2(const AffineConnection& conn, const NPath& ypath, const NPath& zpath) {
    if (ypath.domain() != zpath.domain())
        throw ParseError("grid2: generating paths must share their domain");
    const auto& s = conn.space();
    int m = zpath.length(), n = ypath.length();
    Grid2D g;
    g.u.assign(m + 1, std::vector<int>(n + 1, -1));
    for (int j = 0; j <= n; ++j)
        g.u[0][j] = ypath.points()[j];
    for (int i = 0; i <= m; ++i)
        g.u[i][0] = zpath.points()[i];
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            auto w = conn.eval(g.u[i + 1][j], g.u[i][j], g.u[i][j + 1]);
            if (!w)
                throw UntestableError(
                    "grid2: cell (" + std::to_string(i + 1) + "," +
                    std::to_string(j + 1) + "): [" + s.name(g.u[i + 1][j]) + "|" +
                    s.name(g.u[i][j]) + "|" + s.name(g.u[i][j + 1]) + "] undefined");
            g.u[i + 1][j + 1] = *w;
        }
    return g;
}

GridInvariance grid2_codomain_invariance(const AffineConnection& conn, int x,
                                         int yend, int zend, int max_len) {
    const auto& s = conn.space();
    std::vector<std::vector<int>> ypaths, zpaths;
    for_each_path(s, x, yend, max_len, [&](const std::vector<int>& p) {
        ypaths.push_back(p);
        return true;
    });
    for_each_path(s, x, zend, max_len, [&](const std::vector<int>& p) {
        zpaths.push_back(p);
        return true;
    });

    GridInvariance rep;
    std::optional<std::array<std::vector<int>, 2>> first_pair;
    std::optional<int> first_cod;
    for (const auto& yp : ypaths)
        for (const auto& zp : zpaths) {
            std::optional<int> cod;
            try {
                cod = grid2(conn, NPath(s, yp), NPath(s, zp)).codomain();
            } catch (const UntestableError&) {
                ++rep.undefined_pairs;
                continue;
            }
            if (!first_cod) {
                first_pair = {yp, zp};
                first_cod = cod;
                continue;
            }
            if (*cod != *first_cod) {
                rep.outcome = GridInvariance::Outcome::Witness;
                rep.witness = {(*first_pair)[0], (*first_pair)[1], yp, zp};
                rep.witness_codomains = {*first_cod, *cod};
                return rep;
            }
        }
    if (!first_cod) {
        rep.outcome = GridInvariance::Outcome::Unreachable;
        return rep;
    }
    rep.outcome = GridInvariance::Outcome::Common;
    rep.common = *first_cod;
    return rep;
}

CubeReport cube_check(const AffineConnection& conn, int p0, int p1, int p2, int p4) {
    const auto& s = conn.space();
    for (int p : {p1, p2, p4})
        if (!s.related(p0, p))
            throw UntestableError("cube: " + s.name(p) + " is not in monad(" +
                                  s.name(p0) + ")");
    // e(a, b, c) = [abc] with the digit shorthand over {p0, p1, p2, p4}.
    auto e = [&](std::optional<int> a, std::optional<int> b,
                 std::optional<int> c) -> std::optional<int> {
        if (!a || !b || !c)
            return std::nullopt;
        return conn.eval(*a, *b, *c);
    };
    CubeReport rep;
    // [[401]1[102]] and [[402]2[201]]
    rep.exprs[0] = e(e(p4, p0, p1), p1, e(p1, p0, p2));
    rep.exprs[1] = e(e(p4, p0, p2), p2, e(p2, p0, p1));
    // [[204]4[401]] and [[201]1[104]]
    rep.exprs[2] = e(e(p2, p0, p4), p4, e(p4, p0, p1));
    rep.exprs[3] = e(e(p2, p0, p1), p1, e(p1, p0, p4));
    // [[102]2[204]] and [[104]4[402]]
    rep.exprs[4] = e(e(p1, p0, p2), p2, e(p2, p0, p4));
    rep.exprs[5] = e(e(p1, p0, p4), p4, e(p4, p0, p2));

    rep.all_defined = true;
    for (const auto& v : rep.exprs)
        if (!v)
            rep.all_defined = false;
    for (int eq = 0; eq < 3; ++eq) {
        const auto& l = rep.exprs[2 * eq];
        const auto& r = rep.exprs[2 * eq + 1];
        rep.eq_defined[eq] = l.has_value() && r.has_value();
        rep.eq_holds[eq] = rep.eq_defined[eq] && *l == *r;
    }
    rep.all_equal = rep.all_defined;
    for (int i = 1; i < 6 && rep.all_equal; ++i)
        if (*rep.exprs[i] != *rep.exprs[0])
            rep.all_equal = false;
    if (rep.all_equal) {
        int v3 = *conn.eval(p1, p0, p2);
        int v5 = *conn.eval(p1, p0, p4);
        int v6 = *conn.eval(p2, p0, p4);
        rep.cube = {p0, p1, p2, v3, p4, v5, v6, *rep.exprs[0]};
    }
    return rep;
}

Grid3D grid3(const AffineConnection& conn, const NPath& xpath, const NPath& ypath,
             const NPath& zpath) {
    if (xpath.domain() != ypath.domain() || xpath.domain() != zpath.domain())
        throw ParseError("grid3: generating paths must share their domain");
    int n = xpath.length(), m = ypath.length(), k = zpath.length();
    Grid3D g;
    g.w.assign(n + 1, std::vector<std::vector<int>>(m + 1,
                                                    std::vector<int>(k + 1, -1)));
    // Coordinate planes are 2D grids of the corresponding path pairs.
    Grid2D xy = grid2(conn, ypath, xpath); // rows x, cols y
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j)
            g.w[i][j][0] = xy.u[i][j];
    Grid2D xz = grid2(conn, zpath, xpath); // rows x, cols z
    for (int i = 0; i <= n; ++i)
        for (int l = 0; l <= k; ++l)
            g.w[i][0][l] = xz.u[i][l];
    Grid2D yz = grid2(conn, zpath, ypath); // rows y, cols z
    for (int j = 0; j <= m; ++j)
        for (int l = 0; l <= k; ++l)
            g.w[0][j][l] = yz.u[j][l];

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            for (int l = 0; l < k; ++l) {
                CubeReport cr = cube_check(conn, g.w[i][j][l], g.w[i + 1][j][l],
                                           g.w[i][j + 1][l], g.w[i][j][l + 1]);
                if (!cr.all_equal)
                    throw UntestableError("grid3: cube disagreement in cell (" +
                                          std::to_string(i) + "," + std::to_string(j) +
                                          "," + std::to_string(l) + ")");
                g.w[i + 1][j + 1][l + 1] = (*cr.cube)[7];
            }
    return g;
}

Heap::Heap(const AffineConnection& conn) : conn_(conn) {
    AxiomReport ax = validate_axioms(conn);
    if (!ax.core_ok())
        throw UntestableError("heap: connection fails the core axioms (" +
                              ax.core.front().axiom + " at [" +
                              conn.space().name(ax.core.front().z) + "|" +
                              conn.space().name(ax.core.front().x) + "|" +
                              conn.space().name(ax.core.front().y) + "])");
    if (!ax.symmetric())
        throw UntestableError("heap: connection is not symmetric");
    WeakFlatnessReport wf = weak_flatness_check(conn);
    if (!wf.violations.empty())
        throw UntestableError("heap: connection is not weakly flat");
    if (!wf.undefined.empty())
        throw UntestableError(
            "heap: weak flatness not fully evaluatable (insufficient quadrangles)");
}

const std::vector<int>& Heap::canonical_path(int from, int to) {
    auto key = std::pair{from, to};
    auto it = path_cache_.find(key);
    if (it != path_cache_.end())
        return it->second;
    auto path = shortest_path(conn_.space(), from, to);
    if (path.empty())
        throw UntestableError("heap: " + conn_.space().name(from) + " and " +
                              conn_.space().name(to) +
                              " lie in different components");
    return path_cache_.emplace(key, std::move(path)).first->second;
}

int Heap::extended(int z, int x, int y) {
    auto key = std::tuple{z, x, y};
    auto it = memo_.find(key);
    if (it != memo_.end())
        return it->second;
    const auto& s = conn_.space();
    NPath yp(s, canonical_path(x, y));
    NPath zp(s, canonical_path(x, z));
    int out = grid2(conn_, yp, zp).codomain();
    memo_.emplace(key, out);
    return out;
}

int Heap::add(int o, int x, int y) { return extended(x, o, y); }

int Heap::inverse(int o, int x) { return extended(o, x, o); }

int Heap::change_base(int o, int o2, int x) { return extended(x, o, o2); }

} // namespace ncalc
