#include "ncalc/formal.hpp"

#include <sstream>
#include <stdexcept>

#include "ncalc/errors.hpp"

namespace ncalc {

namespace {

BlockSpec base_spec(int dim) {
    BlockSpec s;
    s.base_vars = dim;
    return s;
}

BlockSpec blocked_spec(int dim, int blocks,
                       std::set<std::pair<int, int>> pairs = {}) {
    BlockSpec s;
    s.base_vars = dim;
    s.block_count = blocks;
    s.pairs = std::move(pairs);
    return s;
}

/// Re-host a series in another ring over the same base variables.  Terms of
/// base degree beyond the target order are dropped; the stored terms are
/// otherwise taken verbatim (the series is treated as the polynomial it
/// stores).
TruncatedSeries with_ring(const TruncatedSeries& s, const BlockSpec& spec,
                          int order) {
    if (s.spec().base_vars != spec.base_vars)
        throw std::logic_error("with_ring: base variable count mismatch");
    TruncatedSeries t = s.order() > order ? s.truncated(order) : s;
    nlohmann::json j = t.to_json();
    j["order"] = order;
    j["blocks"] = blockspec_to_json(spec);
    return TruncatedSeries::from_json(j);
}

MatrixSeries with_ring_m(const MatrixSeries& m, const BlockSpec& spec,
                         int order) {
    MatrixSeries out(spec, order, m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            out.at(r, c) = with_ring(m.at(r, c), spec, order);
    return out;
}

MatrixSeries compose_m(const MatrixSeries& m,
                       const std::vector<TruncatedSeries>& args) {
    MatrixSeries out(args.at(0).spec(), args.at(0).order(), m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            out.at(r, c) = m.at(r, c).compose(args);
    return out;
}

MatrixSeries homogeneous_m(const MatrixSeries& m, int d) {
    MatrixSeries out(m.spec(), m.order(), m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            out.at(r, c) = m.at(r, c).homogeneous_part(d);
    return out;
}

std::vector<TruncatedSeries> point_add(std::vector<TruncatedSeries> a,
                                       const std::vector<TruncatedSeries>& b) {
    for (size_t i = 0; i < a.size(); ++i)
        a[i] += b[i];
    return a;
}

std::vector<TruncatedSeries> point_sub(std::vector<TruncatedSeries> a,
                                       const std::vector<TruncatedSeries>& b) {
    for (size_t i = 0; i < a.size(); ++i)
        a[i] -= b[i];
    return a;
}

void check_series_shape(const TruncatedSeries& s, int dim, int order,
                        const std::string& what) {
    if (s.spec().base_vars != dim)
        throw ParseError(what + ": series has " +
                         std::to_string(s.spec().base_vars) +
                         " variables, expected " + std::to_string(dim));
    if (s.spec().block_count != 0)
        throw ParseError(what + ": series must not use generator blocks");
    if (s.order() != order)
        throw ParseError(what + ": series order " + std::to_string(s.order()) +
                         " does not match declared order " +
                         std::to_string(order));
}

int require_int(const nlohmann::json& j, const char* key,
                const std::string& what) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw ParseError(what + ": missing integer field \"" + key + "\"");
    return j.at(key).get<int>();
}

} // namespace

// ---------------------------------------------------------------------------
// CoordOneForm

nlohmann::json CoordOneForm::to_json() const {
    nlohmann::json om = nlohmann::json::object();
    for (int a = 0; a < dim; ++a)
        if (!omega.at(a).is_zero())
            om[std::to_string(a + 1)] = omega.at(a).to_json();
    return {{"dim", dim}, {"size", size}, {"order", order}, {"omega", om}};
}

CoordOneForm CoordOneForm::from_json(const nlohmann::json& j) {
    CoordOneForm f;
    f.dim = require_int(j, "dim", "one-form");
    f.size = require_int(j, "size", "one-form");
    f.order = require_int(j, "order", "one-form");
    if (f.dim < 1 || f.size < 1 || f.order < 0)
        throw ParseError("one-form: dim/size must be positive, order >= 0");
    BlockSpec spec = base_spec(f.dim);
    f.omega.assign(f.dim, MatrixSeries(spec, f.order, f.size, f.size));
    if (!j.contains("omega") || !j.at("omega").is_object())
        throw ParseError("one-form: missing \"omega\" object");
    for (const auto& [key, val] : j.at("omega").items()) {
        int a = 0;
        try {
            size_t used = 0;
            a = std::stoi(key, &used);
            if (used != key.size())
                throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw ParseError("one-form: bad direction key \"" + key + "\"");
        }
        if (a < 1 || a > f.dim)
            throw ParseError("one-form: direction " + key + " out of range");
        MatrixSeries m = MatrixSeries::from_json(val);
        if (m.rows() != f.size || m.cols() != f.size)
            throw ParseError("one-form: omega[" + key + "] is " +
                             std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected " +
                             std::to_string(f.size) + "x" +
                             std::to_string(f.size));
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                check_series_shape(m.at(r, c), f.dim, f.order,
                                   "one-form omega[" + key + "]");
        f.omega[a - 1] = m;
    }
    return f;
}

// ---------------------------------------------------------------------------
// ChristoffelField

ChristoffelField ChristoffelField::zero(int dim, int order) {
    ChristoffelField g;
    g.dim = dim;
    g.order = order;
    g.gamma.assign(static_cast<size_t>(dim) * dim * dim,
                   TruncatedSeries(base_spec(dim), order));
    return g;
}

const TruncatedSeries& ChristoffelField::at(int c, int a, int b) const {
    return gamma.at((static_cast<size_t>(c) * dim + a) * dim + b);
}

TruncatedSeries& ChristoffelField::at(int c, int a, int b) {
    return gamma.at((static_cast<size_t>(c) * dim + a) * dim + b);
}

ChristoffelField ChristoffelField::truncated(int new_order) const {
    ChristoffelField g = zero(dim, new_order);
    for (size_t i = 0; i < gamma.size(); ++i)
        g.gamma[i] = gamma[i].truncated(new_order);
    return g;
}

bool ChristoffelField::is_zero() const {
    for (const auto& s : gamma)
        if (!s.is_zero())
            return false;
    return true;
}

bool ChristoffelField::operator==(const ChristoffelField& o) const {
    return dim == o.dim && order == o.order && gamma == o.gamma;
}

nlohmann::json ChristoffelField::to_json() const {
    nlohmann::json g = nlohmann::json::object();
    for (int c = 0; c < dim; ++c)
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
                if (!at(c, a, b).is_zero())
                    g[std::to_string(c + 1) + "|" + std::to_string(a + 1) + "|" +
                      std::to_string(b + 1)] = at(c, a, b).to_json();
    return {{"dim", dim}, {"order", order}, {"gamma", g}};
}

ChristoffelField ChristoffelField::from_json(const nlohmann::json& j) {
    int dim = require_int(j, "dim", "christoffel");
    int order = require_int(j, "order", "christoffel");
    if (dim < 1 || order < 0)
        throw ParseError("christoffel: dim must be positive, order >= 0");
    ChristoffelField g = zero(dim, order);
    if (!j.contains("gamma") || !j.at("gamma").is_object())
        throw ParseError("christoffel: missing \"gamma\" object");
    for (const auto& [key, val] : j.at("gamma").items()) {
        std::istringstream in(key);
        std::string part;
        std::vector<int> idx;
        while (std::getline(in, part, '|')) {
            try {
                size_t used = 0;
                idx.push_back(std::stoi(part, &used));
                if (used != part.size())
                    throw std::invalid_argument(part);
            } catch (const std::exception&) {
                idx.clear();
                break;
            }
        }
        if (idx.size() != 3)
            throw ParseError("christoffel: bad index key \"" + key +
                             "\" (want \"c|a|b\")");
        for (int v : idx)
            if (v < 1 || v > dim)
                throw ParseError("christoffel: index in \"" + key +
                                 "\" out of range");
        TruncatedSeries s = TruncatedSeries::from_json(val);
        check_series_shape(s, dim, order, "christoffel gamma[" + key + "]");
        g.at(idx[0] - 1, idx[1] - 1, idx[2] - 1) = s;
    }
    return g;
}

// ---------------------------------------------------------------------------
// FormalChart

void FormalChart::validate() const {
    if (dim < 1 || order < 1)
        throw ParseError("chart: dim and order must be positive");
    if (static_cast<int>(phi.size()) != dim)
        throw ParseError("chart: expected " + std::to_string(dim) +
                         " components");
    for (int c = 0; c < dim; ++c) {
        check_series_shape(phi[c], dim, order, "chart phi");
        if (phi[c].constant_term() != 0)
            throw ParseError("chart: phi(0) must be 0");
        TruncatedSeries lin = phi[c].homogeneous_part(1);
        TruncatedSeries want = TruncatedSeries::variable(phi[c].spec(), order, c);
        if (!(lin == want))
            throw ParseError("chart: linear part must be the identity");
    }
}

bool FormalChart::operator==(const FormalChart& o) const {
    return dim == o.dim && order == o.order && phi == o.phi;
}

nlohmann::json FormalChart::to_json() const {
    nlohmann::json ph = nlohmann::json::array();
    for (const auto& s : phi)
        ph.push_back(s.to_json());
    return {{"dim", dim}, {"order", order}, {"phi", ph}};
}

FormalChart FormalChart::from_json(const nlohmann::json& j) {
    FormalChart f;
    f.dim = require_int(j, "dim", "chart");
    f.order = require_int(j, "order", "chart");
    if (!j.contains("phi") || !j.at("phi").is_array())
        throw ParseError("chart: missing \"phi\" array");
    for (const auto& v : j.at("phi"))
        f.phi.push_back(TruncatedSeries::from_json(v));
    f.validate();
    return f;
}

// ---------------------------------------------------------------------------
// Group-valued forms

std::vector<TruncatedSeries> identity_point(const BlockSpec& spec, int order) {
    std::vector<TruncatedSeries> p;
    for (int a = 0; a < spec.base_vars; ++a)
        p.push_back(TruncatedSeries::variable(spec, order, a));
    return p;
}

MatrixSeries eval_form(const CoordOneForm& om,
                       const std::vector<TruncatedSeries>& p, int block) {
    if (static_cast<int>(p.size()) != om.dim)
        throw ParseError("eval_form: point dimension mismatch");
    const BlockSpec& spec = p.at(0).spec();
    int order = p.at(0).order();
    // Stored coefficients above the ring order still reach base degree
    // <= order after blocked arguments absorb them, hence the ambient lift.
    int ambient = order + spec.block_count;
    std::vector<TruncatedSeries> pl;
    for (const auto& s : p)
        pl.push_back(with_ring(s, spec, ambient));
    MatrixSeries out = MatrixSeries::identity(spec, ambient, om.size);
    for (int a = 0; a < om.dim; ++a) {
        if (om.omega[a].is_zero())
            continue;
        MatrixSeries oa = compose_m(with_ring_m(om.omega[a], spec, ambient), pl);
        out += oa.scaled(TruncatedSeries::generator(spec, ambient, block, a));
    }
    return out.truncated(order);
}

MatrixSeries basicx_residual(const CoordOneForm& om) {
    BlockSpec spec = blocked_spec(om.dim, 2);
    int O = om.order;
    std::vector<TruncatedSeries> x = identity_point(spec, O);
    std::vector<TruncatedSeries> xd1 = x;
    for (int a = 0; a < om.dim; ++a)
        xd1[a] += TruncatedSeries::generator(spec, O, 0, a);

    MatrixSeries lhs = eval_form(om, x, 0) * eval_form(om, xd1, 1);

    std::vector<MatrixSeries> omx;
    for (int a = 0; a < om.dim; ++a)
        omx.push_back(with_ring_m(om.omega[a], spec, O));
    MatrixSeries rhs = MatrixSeries::identity(spec, O, om.size);
    MatrixSeries cross(spec, O, om.size, om.size);
    MatrixSeries left(spec, O, om.size, om.size);
    MatrixSeries right(spec, O, om.size, om.size);
    for (int a = 0; a < om.dim; ++a) {
        TruncatedSeries e1 = TruncatedSeries::generator(spec, O, 0, a);
        TruncatedSeries e2 = TruncatedSeries::generator(spec, O, 1, a);
        rhs += omx[a].scaled(e1 + e2); // Omega(x; d1+d2)
        left += omx[a].scaled(e1);
        right += omx[a].scaled(e2);
        for (int b = 0; b < om.dim; ++b) // dOmega(x; d1, d2)
            cross += omx[b].derivative(a).scaled(
                e1 * TruncatedSeries::generator(spec, O, 1, b));
    }
    rhs += cross + left * right;
    return lhs - rhs;
}

bool ClosednessReport::closed() const {
    for (const auto& m : residual)
        if (!m.is_zero())
            return false;
    return true;
}

std::optional<std::pair<int, int>> ClosednessReport::first_violation() const {
    for (size_t i = 0; i < residual.size(); ++i)
        if (!residual[i].is_zero())
            return index[i];
    return std::nullopt;
}

ClosednessReport closedness_residual(const CoordOneForm& om) {
    BlockSpec spec = base_spec(om.dim);
    int M = om.order > 0 ? om.order - 1 : 0;
    ClosednessReport rep;
    rep.order = M;
    for (int a = 0; a < om.dim; ++a)
        for (int b = a + 1; b < om.dim; ++b) {
            MatrixSeries r = om.omega[b].derivative(a) -
                             om.omega[a].derivative(b) +
                             om.omega[a] * om.omega[b] -
                             om.omega[b] * om.omega[a];
            rep.index.emplace_back(a, b);
            rep.residual.push_back(with_ring_m(r.truncated(M), spec, M));
        }
    return rep;
}

ClosednessReport closedness_residual_pairring(const CoordOneForm& om) {
    BlockSpec spec = blocked_spec(om.dim, 2, {{0, 1}});
    int O = om.order;
    int M = O > 0 ? O - 1 : 0;
    std::vector<TruncatedSeries> x = identity_point(spec, O);
    std::vector<TruncatedSeries> xd1 = x;
    for (int a = 0; a < om.dim; ++a)
        xd1[a] += TruncatedSeries::generator(spec, O, 0, a);

    // omega(x, x+d1) * omega(x+d1, x+d1+d2) - omega(x, x+d1+d2)
    MatrixSeries d = eval_form(om, x, 0) * eval_form(om, xd1, 1);
    d -= MatrixSeries::identity(spec, O, om.size);
    for (int a = 0; a < om.dim; ++a)
        d -= with_ring_m(om.omega[a], spec, O)
                 .scaled(TruncatedSeries::generator(spec, O, 0, a) +
                         TruncatedSeries::generator(spec, O, 1, a));

    BlockSpec flat = base_spec(om.dim);
    ClosednessReport rep;
    rep.order = M;
    for (int a = 0; a < om.dim; ++a)
        for (int b = a + 1; b < om.dim; ++b) {
            MatrixSeries r(flat, M, om.size, om.size);
            for (int i = 0; i < om.size; ++i)
                for (int j = 0; j < om.size; ++j)
                    r.at(i, j) = with_ring(
                        d.at(i, j).block_coefficient({{0, a}, {1, b}}).truncated(M),
                        flat, M);
            rep.index.emplace_back(a, b);
            rep.residual.push_back(r);
        }
    return rep;
}

CoordOneForm maurer_cartan_from_map(const MatrixSeries& f) {
    if (f.rows() != f.cols())
        throw ParseError("darboux derivative: map must be square");
    if (f.spec().block_count != 0)
        throw ParseError("darboux derivative: map must be block-free");
    MatrixSeries finv = f.inverse();
    CoordOneForm om;
    om.dim = f.spec().base_vars;
    om.size = f.rows();
    om.order = f.order();
    for (int a = 0; a < om.dim; ++a)
        om.omega.push_back(finv * f.derivative(a));
    return om;
}

JetPrimitiveResult formal_primitive(const CoordOneForm& om, int order) {
    if (om.order < order - 1)
        throw UntestableError("primitive: input order " +
                              std::to_string(om.order) +
                              " cannot support output order " +
                              std::to_string(order));
    BlockSpec spec = base_spec(om.dim);
    std::vector<MatrixSeries> omx;
    for (int a = 0; a < om.dim; ++a)
        omx.push_back(with_ring_m(om.omega[a], spec, order));
    std::vector<TruncatedSeries> xv = identity_point(spec, order);

    MatrixSeries f = MatrixSeries::identity(spec, order, om.size);
    for (int k = 0; k + 1 <= order; ++k) {
        std::vector<MatrixSeries> r;
        for (int a = 0; a < om.dim; ++a)
            r.push_back(homogeneous_m(f * omx[a], k));
        // Mixed-partial consistency of df = r at this degree; the defect is
        // the closedness residual, so on failure report the pair.
        for (int a = 0; a < om.dim; ++a)
            for (int b = a + 1; b < om.dim; ++b)
                if (!(r[a].derivative(b) == r[b].derivative(a))) {
                    JetPrimitiveResult res;
                    res.degree = k;
                    res.a = a;
                    res.b = b;
                    return res;
                }
        MatrixSeries u(spec, order, om.size, om.size);
        for (int a = 0; a < om.dim; ++a)
            u += r[a].scaled(xv[a]);
        u = u.scaled(TruncatedSeries::constant(spec, order, Rational(1, k + 1)));
        for (int a = 0; a < om.dim; ++a)
            if (!(u.derivative(a) == r[a]))
                throw std::logic_error("primitive: Euler integration failed");
        f += u;
    }
    int M = order > 0 ? order - 1 : 0;
    MatrixSeries finv = f.inverse();
    for (int a = 0; a < om.dim; ++a)
        if (!((finv * f.derivative(a)).truncated(M) ==
              omx[a].truncated(M)))
            throw std::logic_error("primitive: verification failed");
    JetPrimitiveResult res;
    res.f = f;
    return res;
}

// ---------------------------------------------------------------------------
// Affine connections in coordinates

std::vector<TruncatedSeries> lambda_coord(const ChristoffelField& G,
                                          const std::vector<TruncatedSeries>& x,
                                          const std::vector<TruncatedSeries>& z,
                                          const std::vector<TruncatedSeries>& y) {
    if (static_cast<int>(x.size()) != G.dim || z.size() != x.size() ||
        y.size() != x.size())
        throw ParseError("lambda: point dimension mismatch");
    const BlockSpec& spec = x.at(0).spec();
    int O = x.at(0).order();
    if (spec.base_vars != G.dim)
        throw ParseError("lambda: ring has " + std::to_string(spec.base_vars) +
                         " variables, expected " + std::to_string(G.dim));
    if (G.order < O - 2)
        throw UntestableError("lambda: gamma order " + std::to_string(G.order) +
                              " insufficient for ring order " +
                              std::to_string(O));

    // Stored gamma coefficients above the ring order still reach base degree
    // <= O once arguments carrying bare epsilons are substituted, so the whole
    // evaluation runs at an ambient order and is truncated at the end.
    int A = O + spec.block_count;
    auto lift = [&](const std::vector<TruncatedSeries>& p) {
        std::vector<TruncatedSeries> out;
        for (const auto& s : p)
            out.push_back(with_ring(s, spec, A));
        return out;
    };
    std::vector<TruncatedSeries> xl = lift(x), zl = lift(z), yl = lift(y);

    // Split off any rational constant part of x so Gamma can be composed.
    std::vector<Rational> c(G.dim);
    std::vector<TruncatedSeries> xs = xl;
    bool shifted = false;
    for (int a = 0; a < G.dim; ++a) {
        c[a] = xl[a].constant_term();
        if (c[a] != 0) {
            shifted = true;
            xs[a] -= TruncatedSeries::constant(spec, A, c[a]);
        }
    }

    std::vector<TruncatedSeries> dz = point_sub(zl, xl);
    std::vector<TruncatedSeries> dy = point_sub(yl, xl);
    std::vector<TruncatedSeries> out;
    for (int cc = 0; cc < G.dim; ++cc) {
        TruncatedSeries v = zl[cc] - xl[cc] + yl[cc];
        for (int a = 0; a < G.dim; ++a)
            for (int b = 0; b < G.dim; ++b) {
                const TruncatedSeries& g = G.at(cc, a, b);
                if (g.is_zero())
                    continue;
                TruncatedSeries gl =
                    with_ring(shifted ? g.recenter(c) : g, spec, A);
                v += gl.compose(xs) * dz[a] * dy[b];
            }
        out.push_back(v.truncated(O));
    }
    return out;
}

ChristoffelField torsion(const ChristoffelField& G) {
    ChristoffelField t = ChristoffelField::zero(G.dim, G.order);
    for (int c = 0; c < G.dim; ++c)
        for (int a = 0; a < G.dim; ++a)
            for (int b = 0; b < G.dim; ++b)
                t.at(c, a, b) = G.at(c, a, b) - G.at(c, b, a);
    return t;
}

SymmetryReport symmetry_check(const ChristoffelField& G) {
    for (int c = 0; c < G.dim; ++c)
        for (int a = 0; a < G.dim; ++a)
            for (int b = a + 1; b < G.dim; ++b)
                if (!(G.at(c, a, b) == G.at(c, b, a))) {
                    SymmetryReport r;
                    r.symmetric = false;
                    r.c = c;
                    r.a = a;
                    r.b = b;
                    return r;
                }
    return {};
}

namespace {

std::vector<TruncatedSeries> truncate_point(std::vector<TruncatedSeries> p,
                                            int order) {
    for (auto& s : p)
        s = s.truncated(order);
    return p;
}

void require_symmetric(const ChristoffelField& G, const std::string& what) {
    SymmetryReport sym = symmetry_check(G);
    if (!sym.symmetric)
        throw UntestableError(what + ": gamma must be symmetric (differs at c=" +
                              std::to_string(sym.c + 1) + ", a=" +
                              std::to_string(sym.a + 1) + ", b=" +
                              std::to_string(sym.b + 1) + ")");
}

} // namespace

std::vector<TruncatedSeries> affine_flatness_residual(const ChristoffelField& G) {
    require_symmetric(G, "flatness");
    BlockSpec spec = blocked_spec(G.dim, 3);
    int O = G.order;
    int M = O > 0 ? O - 1 : 0;
    std::vector<TruncatedSeries> x = identity_point(spec, O);
    auto shifted = [&](int block) {
        std::vector<TruncatedSeries> p = x;
        for (int a = 0; a < G.dim; ++a)
            p[a] += TruncatedSeries::generator(spec, O, block, a);
        return p;
    };
    std::vector<TruncatedSeries> x1 = shifted(0), x2 = shifted(1), z = shifted(2);

    // [[z x x1] x1 [x1 x x2]]  vs  [[z x x2] x2 [x2 x x1]]
    std::vector<TruncatedSeries> lhs = lambda_coord(
        G, x1, lambda_coord(G, x, z, x1), lambda_coord(G, x, x1, x2));
    std::vector<TruncatedSeries> rhs = lambda_coord(
        G, x2, lambda_coord(G, x, z, x2), lambda_coord(G, x, x2, x1));
    return truncate_point(point_sub(lhs, rhs), M);
}

const TruncatedSeries& CurvatureTensor::at(int d, int c, int a, int b) const {
    return r.at(((static_cast<size_t>(d) * dim + c) * dim + a) * dim + b);
}

bool CurvatureTensor::is_zero() const {
    for (const auto& s : r)
        if (!s.is_zero())
            return false;
    return true;
}

std::optional<int> CurvatureTensor::first_nonzero_degree() const {
    std::optional<int> best;
    for (const auto& s : r)
        for (const auto& [m, coef] : s.terms()) {
            (void)coef;
            int d = m.degree();
            if (!best || d < *best)
                best = d;
        }
    return best;
}

CurvatureTensor curvature_tensor(const ChristoffelField& G) {
    int O = G.order;
    int M = O > 0 ? O - 1 : 0;
    CurvatureTensor R;
    R.dim = G.dim;
    R.order = M;
    for (int d = 0; d < G.dim; ++d)
        for (int c = 0; c < G.dim; ++c)
            for (int a = 0; a < G.dim; ++a)
                for (int b = 0; b < G.dim; ++b) {
                    // Sign convention: the stored Gamma enters [zxy] with a
                    // plus sign, so it is minus the classical symbol and the
                    // quadratic terms flip relative to the textbook formula.
                    // Validated by residual == 0 iff R == 0 over the corpus.
                    TruncatedSeries v = G.at(d, b, c).derivative(a) -
                                        G.at(d, a, c).derivative(b);
                    for (int e = 0; e < G.dim; ++e)
                        v -= G.at(e, b, c) * G.at(d, a, e) -
                             G.at(e, a, c) * G.at(d, b, e);
                    R.r.push_back(v.truncated(M));
                }
    return R;
}

std::array<std::vector<TruncatedSeries>, 6> cube_expressions(
    const ChristoffelField& G) {
    require_symmetric(G, "cube");
    BlockSpec spec = blocked_spec(G.dim, 3);
    int O = G.order;
    int M = O > 0 ? O - 1 : 0;
    std::vector<TruncatedSeries> p0 = identity_point(spec, O);
    auto shifted = [&](int block) {
        std::vector<TruncatedSeries> p = p0;
        for (int a = 0; a < G.dim; ++a)
            p[a] += TruncatedSeries::generator(spec, O, block, a);
        return p;
    };
    std::vector<TruncatedSeries> p1 = shifted(0), p2 = shifted(1),
                                 p4 = shifted(2);
    // e(a, b, c) = [abc]
    auto e = [&](const std::vector<TruncatedSeries>& a,
                 const std::vector<TruncatedSeries>& b,
                 const std::vector<TruncatedSeries>& c) {
        return lambda_coord(G, b, a, c);
    };
    std::array<std::vector<TruncatedSeries>, 6> out;
    out[0] = e(e(p4, p0, p1), p1, e(p1, p0, p2)); // [[401]1[102]]
    out[1] = e(e(p4, p0, p2), p2, e(p2, p0, p1)); // [[402]2[201]]
    out[2] = e(e(p2, p0, p4), p4, e(p4, p0, p1)); // [[204]4[401]]
    out[3] = e(e(p2, p0, p1), p1, e(p1, p0, p4)); // [[201]1[104]]
    out[4] = e(e(p1, p0, p2), p2, e(p2, p0, p4)); // [[102]2[204]]
    out[5] = e(e(p1, p0, p4), p4, e(p4, p0, p2)); // [[104]4[402]]
    for (auto& v : out)
        v = truncate_point(v, M);
    return out;
}

FormalChart invert_chart(const FormalChart& psi, int order) {
    psi.validate();
    BlockSpec spec = base_spec(psi.dim);
    std::vector<TruncatedSeries> p;
    for (const auto& s : psi.phi)
        p.push_back(with_ring(s, spec, order));
    std::vector<TruncatedSeries> id = identity_point(spec, order);
    std::vector<TruncatedSeries> q = point_sub(p, id); // valuation >= 2
    std::vector<TruncatedSeries> g = id;
    for (int i = 0; i < order; ++i)
        g = point_sub(id, compose_map(q, g));
    if (!(compose_map(p, g) == id) || !(compose_map(g, p) == id))
        throw UntestableError("chart is not invertible to order " +
                              std::to_string(order));
    FormalChart inv;
    inv.dim = psi.dim;
    inv.order = order;
    inv.phi = g;
    return inv;
}

ChristoffelField pullback_connection(const FormalChart& psi,
                                     const ChristoffelField& G, int out_order) {
    psi.validate();
    if (psi.dim != G.dim)
        throw ParseError("pullback: dimension mismatch");
    if (G.order < out_order)
        throw UntestableError("pullback: gamma order " +
                              std::to_string(G.order) +
                              " below requested order " +
                              std::to_string(out_order));
    if (psi.order < out_order + 2)
        throw UntestableError("pullback: chart order " +
                              std::to_string(psi.order) + " must be at least " +
                              std::to_string(out_order + 2));
    int A = out_order + 2; // ambient order
    BlockSpec spec = blocked_spec(G.dim, 2);
    std::vector<TruncatedSeries> x = identity_point(spec, A);
    auto shifted = [&](int block) {
        std::vector<TruncatedSeries> p = x;
        for (int a = 0; a < G.dim; ++a)
            p[a] += TruncatedSeries::generator(spec, A, block, a);
        return p;
    };
    std::vector<TruncatedSeries> psil;
    for (const auto& s : psi.phi)
        psil.push_back(with_ring(s, spec, A));
    std::vector<TruncatedSeries> X = compose_map(psil, x);
    std::vector<TruncatedSeries> Z = compose_map(psil, shifted(0));
    std::vector<TruncatedSeries> Y = compose_map(psil, shifted(1));
    std::vector<TruncatedSeries> L = lambda_coord(G, X, Z, Y);

    FormalChart inv = invert_chart(psi, A);
    std::vector<TruncatedSeries> invl;
    for (const auto& s : inv.phi)
        invl.push_back(with_ring(s, spec, A));
    std::vector<TruncatedSeries> W = compose_map(invl, L);

    BlockSpec flat = base_spec(G.dim);
    ChristoffelField g = ChristoffelField::zero(G.dim, out_order);
    for (int c = 0; c < G.dim; ++c)
        for (int a = 0; a < G.dim; ++a)
            for (int b = 0; b < G.dim; ++b)
                g.at(c, a, b) = with_ring(
                    W[c].block_coefficient({{0, a}, {1, b}}).truncated(out_order),
                    flat, out_order);
    return g;
}

// ---------------------------------------------------------------------------
// Scalar combinations

std::vector<TruncatedSeries> scalar_combination(
    const std::vector<TruncatedSeries>& x, const std::vector<TruncatedSeries>& y,
    const Rational& t) {
    if (x.size() != y.size())
        throw ParseError("scalar combination: dimension mismatch");
    std::vector<TruncatedSeries> out;
    for (size_t i = 0; i < x.size(); ++i)
        out.push_back(x[i] + (y[i] - x[i]).scaled(t));
    return out;
}

std::vector<TruncatedSeries> second_order_scalar_value(const ChristoffelField& G,
                                                       const Rational& t) {
    require_symmetric(G, "scalar law");
    BlockSpec spec = blocked_spec(G.dim, 2);
    int O = G.order;
    std::vector<TruncatedSeries> x = identity_point(spec, O);
    std::vector<TruncatedSeries> d1, d2;
    for (int a = 0; a < G.dim; ++a) {
        d1.push_back(TruncatedSeries::generator(spec, O, 0, a));
        d2.push_back(TruncatedSeries::generator(spec, O, 1, a));
    }
    // Gamma(x; d1, d2), componentwise.
    std::vector<TruncatedSeries> gd(G.dim, TruncatedSeries(spec, O));
    for (int c = 0; c < G.dim; ++c)
        for (int a = 0; a < G.dim; ++a)
            for (int b = 0; b < G.dim; ++b)
                if (!G.at(c, a, b).is_zero())
                    gd[c] += with_ring(G.at(c, a, b), spec, O) * d1[a] * d2[b];

    std::vector<TruncatedSeries> y = point_add(x, d1);
    std::vector<TruncatedSeries> z = point_sub(point_add(x, d2), gd);
    std::vector<TruncatedSeries> yt = scalar_combination(x, y, t);
    std::vector<TruncatedSeries> zt = scalar_combination(x, z, t);
    return lambda_coord(G, x, zt, yt); // lambda(x, y_t, z_t)
}

std::vector<TruncatedSeries> second_order_scalar_residual(
    const ChristoffelField& G, const Rational& t) {
    std::vector<TruncatedSeries> val = second_order_scalar_value(G, t);
    const BlockSpec& spec = val.at(0).spec();
    int O = val.at(0).order();
    std::vector<TruncatedSeries> s; // d1 + d2
    for (int a = 0; a < G.dim; ++a)
        s.push_back(TruncatedSeries::generator(spec, O, 0, a) +
                    TruncatedSeries::generator(spec, O, 1, a));
    Rational half_tt = (t * t - t) / 2;
    std::vector<TruncatedSeries> closed = identity_point(spec, O);
    for (int c = 0; c < G.dim; ++c) {
        closed[c] += s[c].scaled(t);
        for (int a = 0; a < G.dim; ++a)
            for (int b = 0; b < G.dim; ++b)
                if (!G.at(c, a, b).is_zero())
                    closed[c] += (with_ring(G.at(c, a, b), spec, O) * s[a] * s[b])
                                     .scaled(half_tt);
    }
    return point_sub(val, closed);
}

// ---------------------------------------------------------------------------
// Charts

ChartResult formal_chart(const ChristoffelField& G, int order) {
    require_symmetric(G, "chart");
    if (G.order < order - 2)
        throw UntestableError("chart: gamma order " + std::to_string(G.order) +
                              " cannot support chart order " +
                              std::to_string(order));
    BlockSpec spec = base_spec(G.dim);
    std::vector<TruncatedSeries> gl;
    for (const auto& s : G.gamma)
        gl.push_back(with_ring(s, spec, order));
    auto glat = [&](int c, int a, int b) -> const TruncatedSeries& {
        return gl[(static_cast<size_t>(c) * G.dim + a) * G.dim + b];
    };
    std::vector<TruncatedSeries> xv = identity_point(spec, order);
    std::vector<TruncatedSeries> phi = xv;

    for (int m = 2; m <= order; ++m) {
        // PDE data at this degree: S^c_{ab} = -[sum_e d_e phi^c Gamma^e_{ab}],
        // homogeneous of degree m-2, from the part of phi already fixed.
        std::vector<TruncatedSeries> S(static_cast<size_t>(G.dim) * G.dim *
                                           G.dim,
                                       TruncatedSeries(spec, order));
        auto sat = [&](int c, int a, int b) -> TruncatedSeries& {
            return S[(static_cast<size_t>(c) * G.dim + a) * G.dim + b];
        };
        for (int c = 0; c < G.dim; ++c)
            for (int a = 0; a < G.dim; ++a)
                for (int b = 0; b < G.dim; ++b) {
                    TruncatedSeries tt(spec, order);
                    for (int e = 0; e < G.dim; ++e)
                        if (!glat(e, a, b).is_zero())
                            tt += phi[c].derivative(e) * glat(e, a, b);
                    sat(c, a, b) = -tt.homogeneous_part(m - 2);
                }
        // Double Euler integration, then verify the candidate actually
        // satisfies the equations; a mismatch is the flatness obstruction.
        std::vector<TruncatedSeries> phim;
        for (int c = 0; c < G.dim; ++c) {
            TruncatedSeries acc(spec, order);
            for (int a = 0; a < G.dim; ++a) {
                TruncatedSeries ga(spec, order);
                for (int b = 0; b < G.dim; ++b)
                    ga += xv[b] * sat(c, a, b);
                acc += xv[a] * ga.scaled(Rational(1, m - 1));
            }
            phim.push_back(acc.scaled(Rational(1, m)));
        }
        for (int c = 0; c < G.dim; ++c)
            for (int a = 0; a < G.dim; ++a)
                for (int b = 0; b < G.dim; ++b)
                    if (!(phim[c].derivative(a).derivative(b) == sat(c, a, b))) {
                        ChartResult res;
                        res.degree = m - 2;
                        res.a = a;
                        res.b = b;
                        res.c = c;
                        return res;
                    }
        for (int c = 0; c < G.dim; ++c)
            phi[c] += phim[c];
    }
    FormalChart f;
    f.dim = G.dim;
    f.order = order;
    f.phi = phi;
    f.validate();
    ChartResult res;
    res.chart = f;
    return res;
}

namespace {

// Blocked coordinates contribute bare epsilon factors at base degree zero, at
// most one per block, so a stored chart coefficient of polynomial degree up to
// order + block_count can still land at base degree <= order after
// substitution.  Evaluation therefore runs in an ambient ring at that raised
// order and only the final result is truncated back.
std::vector<TruncatedSeries> apply_poly_map(const std::vector<TruncatedSeries>& f,
                                            const std::vector<TruncatedSeries>& p,
                                            const BlockSpec& spec, int ambient) {
    std::vector<TruncatedSeries> fl, pl;
    for (const auto& s : f)
        fl.push_back(with_ring(s, spec, ambient));
    for (const auto& s : p)
        pl.push_back(with_ring(s, spec, ambient));
    return compose_map(fl, pl);
}

} // namespace

std::vector<TruncatedSeries> chart_apply(const FormalChart& phi,
                                         const std::vector<TruncatedSeries>& p) {
    if (static_cast<int>(p.size()) != phi.dim)
        throw ParseError("chart apply: dimension mismatch");
    const BlockSpec& spec = p.at(0).spec();
    int order = p.at(0).order();
    int ambient = order + spec.block_count;
    std::vector<TruncatedSeries> out;
    for (const auto& s : apply_poly_map(phi.phi, p, spec, ambient))
        out.push_back(s.truncated(order));
    return out;
}

std::vector<TruncatedSeries> heap_via_chart(const FormalChart& phi,
                                            const std::vector<TruncatedSeries>& o,
                                            const std::vector<TruncatedSeries>& x,
                                            const std::vector<TruncatedSeries>& y) {
    if (static_cast<int>(o.size()) != phi.dim ||
        static_cast<int>(x.size()) != phi.dim ||
        static_cast<int>(y.size()) != phi.dim)
        throw ParseError("heap via chart: dimension mismatch");
    const BlockSpec& spec = o.at(0).spec();
    int order = o.at(0).order();
    int ambient = order + spec.block_count;
    std::vector<TruncatedSeries> p =
        point_add(point_sub(apply_poly_map(phi.phi, x, spec, ambient),
                            apply_poly_map(phi.phi, o, spec, ambient)),
                  apply_poly_map(phi.phi, y, spec, ambient));
    FormalChart inv = invert_chart(phi, ambient);
    std::vector<TruncatedSeries> gl;
    for (const auto& s : inv.phi)
        gl.push_back(with_ring(s, spec, ambient));
    std::vector<TruncatedSeries> out;
    for (const auto& s : compose_map(gl, p))
        out.push_back(s.truncated(order));
    return out;
}

} // namespace ncalc
