// Acceptance gate: ten criteria, one line each, every check exact.
//
// Each criterion runs against frozen seeds, prints [PASS] or [FAIL] with its
// instance counts and elapsed time, and must finish inside its stated bound.
// The process exits nonzero if any line fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../tests/fixture_helpers.hpp"
#include "ncalc/affine.hpp"
#include "ncalc/formal.hpp"
#include "ncalc/one_form.hpp"
#include "ncalc/space.hpp"

using namespace ncalc;

namespace {

// ------------------------------------------------------------ shared helpers

BlockSpec base(int dim) {
    BlockSpec s;
    s.base_vars = dim;
    return s;
}

TruncatedSeries rnd_poly(const BlockSpec& spec, int order, std::mt19937& rng,
                         int max_deg, bool zero_const = false) {
    std::uniform_int_distribution<int> coef(-3, 3);
    std::uniform_int_distribution<int> den(1, 3);
    TruncatedSeries s(spec, order);
    std::vector<std::vector<int>> exps;
    std::vector<int> cur(spec.base_vars, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == spec.base_vars) {
            exps.push_back(cur);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            cur[pos] = e;
            self(self, pos + 1, left - e);
        }
        cur[pos] = 0;
    };
    rec(rec, 0, std::min(max_deg, order));
    for (const auto& ex : exps) {
        int dg = 0;
        for (int e : ex)
            dg += e;
        if (zero_const && dg == 0)
            continue;
        Rational c(coef(rng), den(rng));
        if (c == 0)
            continue;
        TruncatedSeries t = TruncatedSeries::constant(spec, order, c);
        for (int v = 0; v < spec.base_vars; ++v)
            for (int k = 0; k < ex[v]; ++k)
                t = t * TruncatedSeries::variable(spec, order, v);
        s += t;
    }
    return s;
}

CoordOneForm rnd_form(int dim, int size, int order, std::mt19937& rng,
                      int max_deg = 2) {
    CoordOneForm f;
    f.dim = dim;
    f.size = size;
    f.order = order;
    BlockSpec spec = base(dim);
    for (int a = 0; a < dim; ++a) {
        MatrixSeries m(spec, order, size, size);
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c)
                m.at(r, c) = rnd_poly(spec, order, rng, max_deg);
        f.omega.push_back(m);
    }
    return f;
}

MatrixSeries rnd_unipotent(int dim, int size, int order, std::mt19937& rng,
                           int max_deg = 2) {
    BlockSpec spec = base(dim);
    MatrixSeries f = MatrixSeries::identity(spec, order, size);
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
            f.at(r, c) += rnd_poly(spec, order, rng, max_deg, true);
    return f;
}

ChristoffelField rnd_symmetric_gamma(int dim, int order, std::mt19937& rng,
                                     int max_deg = 2) {
    ChristoffelField g = ChristoffelField::zero(dim, order);
    BlockSpec spec = base(dim);
    for (int c = 0; c < dim; ++c)
        for (int a = 0; a < dim; ++a)
            for (int b = a; b < dim; ++b) {
                TruncatedSeries s = rnd_poly(spec, order, rng, max_deg);
                g.at(c, a, b) = s;
                g.at(c, b, a) = s;
            }
    return g;
}

FormalChart rnd_chart(int dim, int order, std::mt19937& rng) {
    BlockSpec spec = base(dim);
    FormalChart psi;
    psi.dim = dim;
    psi.order = order;
    std::uniform_int_distribution<int> coef(-2, 2);
    for (int c = 0; c < dim; ++c) {
        TruncatedSeries s = TruncatedSeries::variable(spec, order, c);
        for (int a = 0; a < dim; ++a)
            for (int b = a; b < dim; ++b) {
                TruncatedSeries q =
                    TruncatedSeries::variable(spec, order, a) *
                    TruncatedSeries::variable(spec, order, b);
                s += q.scaled(Rational(coef(rng)));
                s += (q * TruncatedSeries::variable(spec, order, 0))
                         .scaled(Rational(coef(rng)));
            }
        psi.phi.push_back(s);
    }
    psi.validate();
    return psi;
}

ChristoffelField delta_gamma(int order) {
    ChristoffelField g = ChristoffelField::zero(2, order);
    BlockSpec spec = base(2);
    g.at(0, 0, 0) = TruncatedSeries::constant(spec, order, 2);
    g.at(1, 0, 1) = TruncatedSeries::constant(spec, order, 1);
    g.at(1, 1, 0) = TruncatedSeries::constant(spec, order, 1);
    return g;
}

CoordOneForm bracket_counterexample(int order) {
    BlockSpec spec = base(2);
    CoordOneForm om;
    om.dim = 2;
    om.size = 2;
    om.order = order;
    MatrixSeries e12(spec, order, 2, 2), e21(spec, order, 2, 2);
    e12.at(0, 1) = TruncatedSeries::constant(spec, order, 1);
    e21.at(1, 0) = TruncatedSeries::constant(spec, order, 1);
    om.omega.push_back(e12);
    om.omega.push_back(e21);
    return om;
}

bool point_is_zero(const std::vector<TruncatedSeries>& p) {
    for (const auto& s : p)
        if (!s.is_zero())
            return false;
    return true;
}

std::shared_ptr<const NeighborSpace>
random_connected_space(int n, std::mt19937_64& rng) {
    std::vector<std::string> names;
    for (int v = 0; v < n; ++v)
        names.push_back("v" + std::to_string(v));
    std::vector<std::pair<std::string, std::string>> edges;
    for (int v = 1; v < n; ++v)
        edges.emplace_back(names[v], names[rng() % v]);
    for (int e = 0; e < n / 2; ++e) {
        int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
        if (a != b)
            edges.emplace_back(names[a], names[b]);
    }
    return NeighborSpace::build(std::move(names), edges);
}

std::shared_ptr<const NeighborSpace> complete_space(int n) {
    std::vector<std::string> names;
    for (int v = 0; v < n; ++v)
        names.push_back("k" + std::to_string(v));
    std::vector<std::pair<std::string, std::string>> edges;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            edges.emplace_back(names[a], names[b]);
    return NeighborSpace::build(std::move(names), edges);
}

std::shared_ptr<const NeighborSpace> wheel_space(int rim) {
    std::vector<std::string> names{"h"};
    for (int v = 0; v < rim; ++v)
        names.push_back("r" + std::to_string(v));
    std::vector<std::pair<std::string, std::string>> edges;
    for (int v = 0; v < rim; ++v) {
        edges.emplace_back("h", names[v + 1]);
        edges.emplace_back(names[v + 1], names[(v + 1) % rim + 1]);
    }
    return NeighborSpace::build(std::move(names), edges);
}

std::vector<int> identity_perm_rotated(int n, int shift) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i)
        p[i] = (i + shift) % n;
    return p;
}

// --------------------------------------------------------------- criteria

bool crit_coboundary(std::ostream& detail) {
    std::mt19937_64 rng(9001);
    std::vector<std::shared_ptr<const Group>> groups = {
        symmetric_group(4), cyclic_group(12), matrix2_group(5)};
    for (int inst = 0; inst < 50; ++inst) {
        const auto& grp = groups[inst % 3];
        int n = 2 + static_cast<int>(rng() % 39); // up to 40 vertices
        auto sp = random_connected_space(n, rng);
        std::vector<GroupElement> f;
        for (int v = 0; v < n; ++v)
            f.push_back(grp->sample(rng));
        OneForm om = OneForm::coboundary(sp, grp, f);
        int x0 = static_cast<int>(rng() % n);

        PrimitiveResult a = primitive(om, x0);
        std::vector<int> reversed(n);
        for (int v = 0; v < n; ++v)
            reversed[v] = n - 1 - v;
        PrimitiveResult b = primitive(om, x0, reversed);
        if (!a.ok() || !b.ok()) {
            detail << "instance " << inst << ": integration conflict";
            return false;
        }
        GroupElement fx0inv = grp->invert(f[x0]);
        for (int v = 0; v < n; ++v) {
            GroupElement want = grp->compose(fx0inv, f[v]);
            if (!a.values[v] || !(*a.values[v] == want)) {
                detail << "instance " << inst << ": primitive differs from "
                       << "normalized potential at " << sp->name(v);
                return false;
            }
            if (!b.values[v] || !(*b.values[v] == *a.values[v])) {
                detail << "instance " << inst << ": scan orders disagree at "
                       << sp->name(v);
                return false;
            }
        }
    }
    detail << "50 instances over S4, Z12, M2(5), two scan orders each "
              "(seed 9001)";
    return true;
}

bool crit_path_independence(std::ostream& detail) {
    std::mt19937_64 rng(9002);
    struct Fixture {
        std::shared_ptr<const NeighborSpace> sp;
        std::shared_ptr<const Group> grp;
    };
    std::vector<Fixture> fixtures = {{complete_space(6), symmetric_group(4)},
                                     {wheel_space(8), cyclic_group(12)},
                                     {complete_space(5), matrix2_group(5)}};
    long pairs = 0;
    for (const auto& fix : fixtures) {
        int n = fix.sp->size();
        std::vector<GroupElement> f;
        for (int v = 0; v < n; ++v)
            f.push_back(fix.grp->sample(rng));
        OneForm om = OneForm::coboundary(fix.sp, fix.grp, f);
        for (int s = 0; s < 20; ++s) {
            int x = static_cast<int>(rng() % n);
            int y = static_cast<int>(rng() % n);
            if (x == y)
                y = (y + 1) % n;
            PathIndependence pi = path_independence_check(om, x, y, 5);
            if (pi.outcome != PathIndependence::Outcome::Common) {
                detail << "closed form not path independent between "
                       << fix.sp->name(x) << " and " << fix.sp->name(y);
                return false;
            }
            GroupElement want =
                fix.grp->compose(fix.grp->invert(f[x]), f[y]);
            if (!(*pi.common == want)) {
                detail << "common value differs from the potential";
                return false;
            }
            ++pairs;
        }
    }

    // Z3 holonomy around a 4-cycle must produce a witness pair.
    auto sq = NeighborSpace::build(
        {"a", "b", "c", "d"},
        {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"a", "d"}});
    auto z3 = cyclic_group(3);
    OneForm hol(sq, z3);
    hol.set_value(0, 1, GroupElement{{1}});
    PathIndependence pi = path_independence_check(hol, 0, 2, 5);
    if (pi.outcome != PathIndependence::Outcome::Witness) {
        detail << "holonomy cycle produced no witness";
        return false;
    }
    if (pi.witness_values->first == pi.witness_values->second) {
        detail << "witness values coincide";
        return false;
    }
    detail << pairs
           << " sampled pairs on 3 triangle-rich fixtures, all paths <= 5 "
              "agree; Z3 4-cycle yields a witness pair (seed 9002)";
    return true;
}

bool crit_cube(std::ostream& detail) {
    for (const auto& [label, conn] :
         {std::pair<std::string, AffineConnection>{
              "lattice", AffineConnection::lattice(5, 2)},
          {"twisted",
           AffineConnection::twisted(5, 2, identity_perm_rotated(25, 7))}}) {
        const NeighborSpace& sp = conn.space();
        long count = 0;
        for (int p0 = 0; p0 < sp.size(); ++p0) {
            std::vector<int> m = sp.monad(p0);
            for (int p1 : m)
                for (int p2 : m)
                    for (int p4 : m) {
                        CubeReport cr = cube_check(conn, p0, p1, p2, p4);
                        ++count;
                        if (!cr.all_defined || !cr.all_equal) {
                            detail << label << ": quadruple ("
                                   << sp.name(p0) << "," << sp.name(p1) << ","
                                   << sp.name(p2) << "," << sp.name(p4)
                                   << ") breaks the cube";
                            return false;
                        }
                    }
        }
        if (count != 25 * 125) {
            detail << label << ": expected 3125 quadruples, saw " << count;
            return false;
        }
    }

    // The deliberately non-flat table must fail, naming the broken equations.
    AffineConnection bad = ncalc_testing::nonflat_table();
    const NeighborSpace& sp = bad.space();
    long failures = 0;
    std::string first_break;
    for (int p0 = 0; p0 < sp.size(); ++p0) {
        std::vector<int> m = sp.monad(p0);
        for (int p1 : m)
            for (int p2 : m)
                for (int p4 : m) {
                    CubeReport cr = cube_check(bad, p0, p1, p2, p4);
                    if (!cr.all_defined)
                        continue;
                    bool broken = false;
                    std::string eqs;
                    for (int i = 0; i < 3; ++i)
                        if (!cr.eq_holds[i]) {
                            broken = true;
                            if (!eqs.empty())
                                eqs += ",";
                            eqs += "eq" + std::to_string(i);
                        }
                    if (broken) {
                        ++failures;
                        if (first_break.empty())
                            first_break = "(" + sp.name(p0) + "," +
                                          sp.name(p1) + "," + sp.name(p2) +
                                          "," + sp.name(p4) + ") breaks " +
                                          eqs;
                    }
                }
    }
    if (failures == 0) {
        detail << "non-flat table produced no failing quadruple";
        return false;
    }
    detail << "2x3125 quadruples exact on lattice and twisted Z5^2; non-flat "
              "table: "
           << failures << " failing quadruples, first " << first_break;
    return true;
}

bool crit_heap(std::ostream& detail) {
    std::ostringstream summary;
    for (const auto& [label, conn] :
         {std::pair<std::string, AffineConnection>{
              "Z3^2", AffineConnection::lattice(3, 2)},
          {"Z5^2", AffineConnection::lattice(5, 2)},
          {"twisted Z3^2",
           AffineConnection::twisted(3, 2, identity_perm_rotated(9, 2))},
          {"twisted Z5^2",
           AffineConnection::twisted(5, 2, identity_perm_rotated(25, 7))}}) {
        const NeighborSpace& sp = conn.space();
        Heap heap(conn);
        int n = sp.size();

        // Position-indexed add tables, one per origin.
        std::vector<std::vector<int>> add(n, std::vector<int>(n * n));
        for (int o = 0; o < n; ++o)
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    add[o][x * n + y] = heap.add(o, x, y);

        for (int o = 0; o < n; ++o) {
            for (int x = 0; x < n; ++x) {
                if (add[o][o * n + x] != x || add[o][x * n + o] != x) {
                    detail << label << ": unit law fails at o=" << sp.name(o)
                           << " x=" << sp.name(x);
                    return false;
                }
                if (add[o][x * n + heap.inverse(o, x)] != o) {
                    detail << label << ": inverse law fails at o="
                           << sp.name(o) << " x=" << sp.name(x);
                    return false;
                }
            }
            for (int x = 0; x < n; ++x)
                for (int y = x; y < n; ++y)
                    if (add[o][x * n + y] != add[o][y * n + x]) {
                        detail << label << ": commutativity fails at o="
                               << sp.name(o);
                        return false;
                    }
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    for (int w = 0; w < n; ++w)
                        if (add[o][add[o][x * n + y] * n + w] !=
                            add[o][x * n + add[o][y * n + w]]) {
                            detail << label << ": associativity fails at o="
                                   << sp.name(o);
                            return false;
                        }
        }

        long bracket = 0;
        for (int x = 0; x < n; ++x)
            for (int z : sp.monad(x))
                for (int y : sp.monad(x)) {
                    auto direct = conn.eval(z, x, y);
                    if (!direct)
                        continue;
                    ++bracket;
                    if (add[x][z * n + y] != *direct) {
                        detail << label << ": bracket mismatch at ("
                               << sp.name(z) << "," << sp.name(x) << ","
                               << sp.name(y) << ")";
                        return false;
                    }
                }

        for (int o = 0; o < n; ++o)
            for (int o2 = 0; o2 < n; ++o2) {
                std::vector<int> h(n);
                std::set<int> image;
                for (int x = 0; x < n; ++x) {
                    h[x] = heap.change_base(o, o2, x);
                    image.insert(h[x]);
                }
                if (static_cast<int>(image.size()) != n) {
                    detail << label << ": base change " << sp.name(o) << "->"
                           << sp.name(o2) << " is not bijective";
                    return false;
                }
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y)
                        if (h[add[o][x * n + y]] !=
                            add[o2][h[x] * n + h[y]]) {
                            detail << label << ": base change "
                                   << sp.name(o) << "->" << sp.name(o2)
                                   << " is not a homomorphism";
                            return false;
                        }
            }
        summary << (summary.tellp() > 0 ? "; " : "") << label << ": " << n
                << " origins, " << bracket << " brackets, " << n * n
                << " base changes";
    }
    detail << "exhaustive laws on " << summary.str();
    return true;
}

bool crit_basicx(std::ostream& detail) {
    std::mt19937 rng(9005);
    for (int i = 0; i < 20; ++i) {
        CoordOneForm om = rnd_form(2, 2, 4, rng);
        if (!basicx_residual(om).is_zero()) {
            detail << "instance " << i << ": nonzero residual";
            return false;
        }
    }
    detail << "20 random forms (n=2, w=2, N=4), residual exactly 0 "
              "(seed 9005)";
    return true;
}

bool crit_closedness(std::ostream& detail) {
    std::mt19937 rng(9006);
    for (int i = 0; i < 10; ++i) {
        CoordOneForm om = maurer_cartan_from_map(rnd_unipotent(2, 2, 5, rng));
        ClosednessReport tensor = closedness_residual(om);
        ClosednessReport pairs = closedness_residual_pairring(om);
        if (!tensor.closed()) {
            detail << "instance " << i << ": darboux derivative not closed";
            return false;
        }
        if (tensor.residual.size() != pairs.residual.size()) {
            detail << "instance " << i << ": route shapes differ";
            return false;
        }
        for (size_t k = 0; k < tensor.residual.size(); ++k)
            if (!(tensor.residual[k] == pairs.residual[k])) {
                detail << "instance " << i << ": routes disagree";
                return false;
            }
    }
    CoordOneForm bad = bracket_counterexample(4);
    ClosednessReport tensor = closedness_residual(bad);
    ClosednessReport pairs = closedness_residual_pairring(bad);
    if (tensor.closed()) {
        detail << "constant bracket counterexample reported closed";
        return false;
    }
    for (size_t k = 0; k < tensor.residual.size(); ++k)
        if (!(tensor.residual[k] == pairs.residual[k])) {
            detail << "routes disagree on the counterexample";
            return false;
        }
    detail << "10 darboux fixtures closed, routes agree everywhere; "
              "E12/E21 counterexample nonzero on both routes (seed 9006)";
    return true;
}

bool crit_formal_primitive(std::ostream& detail) {
    std::mt19937 rng(9007);
    for (int i = 0; i < 10; ++i) {
        MatrixSeries f = rnd_unipotent(2, 2, 5, rng);
        CoordOneForm om = maurer_cartan_from_map(f);
        JetPrimitiveResult res = formal_primitive(om, 5);
        if (!res.ok()) {
            detail << "instance " << i << ": unexpected obstruction at degree "
                   << res.degree;
            return false;
        }
        if (!(*res.f == f)) {
            detail << "instance " << i << ": recovered map differs from f0";
            return false;
        }
    }
    JetPrimitiveResult res = formal_primitive(bracket_counterexample(3), 4);
    if (res.ok() || res.degree != 1) {
        detail << "counterexample obstruction not at degree 1";
        return false;
    }
    detail << "10 fixtures recovered to order 5 exactly; counterexample "
              "obstructed at degree 1, pair ("
           << res.a + 1 << "," << res.b + 1 << ") (seed 9007)";
    return true;
}

bool crit_scalar(std::ostream& detail) {
    std::mt19937 rng(9008);
    const Rational ts[3] = {Rational(1, 2), Rational(2), Rational(-1)};
    for (int i = 0; i < 10; ++i) {
        ChristoffelField G = rnd_symmetric_gamma(2, 4, rng);
        for (const Rational& t : ts)
            if (!point_is_zero(second_order_scalar_residual(G, t))) {
                detail << "instance " << i << ": nonzero residual at t="
                       << t;
                return false;
            }
    }
    detail << "10 symmetric gammas (N=4) x t in {1/2, 2, -1}, residual "
              "exactly 0 (seed 9008)";
    return true;
}

bool crit_chart(std::ostream& detail) {
    std::mt19937 rng(9009);
    for (int i = 0; i < 10; ++i) {
        FormalChart psi = rnd_chart(2, 8, rng);
        ChristoffelField G =
            pullback_connection(psi, ChristoffelField::zero(2, 6), 6);
        ChartResult res = formal_chart(G, 6);
        if (!res.ok()) {
            detail << "instance " << i << ": unexpected obstruction";
            return false;
        }
        FormalChart want;
        want.dim = 2;
        want.order = 6;
        for (const auto& s : psi.phi)
            want.phi.push_back(s.truncated(6));
        if (res.chart->to_json().dump() != want.to_json().dump()) {
            detail << "instance " << i << ": recovered chart differs";
            return false;
        }
        ChristoffelField back = pullback_connection(
            *res.chart, ChristoffelField::zero(2, 4), 4);
        if (!(back == G.truncated(4))) {
            detail << "instance " << i << ": trivialization residual nonzero";
            return false;
        }
    }

    // Heap through the chart against a nilpotent two-step grid.
    {
        FormalChart psi = rnd_chart(2, 9, rng);
        ChristoffelField G =
            pullback_connection(psi, ChristoffelField::zero(2, 7), 7);
        ChartResult cr = formal_chart(G, 6);
        if (!cr.ok()) {
            detail << "grid fixture: chart obstructed";
            return false;
        }
        const FormalChart& phi = *cr.chart;
        BlockSpec spec3;
        spec3.base_vars = 2;
        spec3.block_count = 3;
        int N = 6;
        std::vector<TruncatedSeries> o = identity_point(spec3, N);
        auto shifted = [&](std::vector<int> blocks) {
            std::vector<TruncatedSeries> p = o;
            for (int blk : blocks)
                for (int a = 0; a < 2; ++a)
                    p[a] += TruncatedSeries::generator(spec3, N, blk, a);
            return p;
        };
        std::vector<TruncatedSeries> u01 = shifted({0});
        std::vector<TruncatedSeries> u02 = shifted({0, 1});
        std::vector<TruncatedSeries> u10 = shifted({2});
        std::vector<TruncatedSeries> u11 = lambda_coord(G, o, u10, u01);
        std::vector<TruncatedSeries> u12 = lambda_coord(G, u01, u11, u02);
        if (!(heap_via_chart(phi, o, u02, u10) == u12)) {
            detail << "heap via chart differs from the two-step grid";
            return false;
        }
    }

    ChartResult res = formal_chart(delta_gamma(4), 4);
    if (res.ok()) {
        detail << "curved example produced a chart";
        return false;
    }
    CurvatureTensor R = curvature_tensor(delta_gamma(4));
    if (!R.first_nonzero_degree() ||
        res.degree != *R.first_nonzero_degree() + 1) {
        detail << "obstruction degree does not track the curvature";
        return false;
    }
    detail << "10 pullback fixtures recovered byte-exactly to order 6 with "
              "zero trivialization residual; heap matches the 2-step grid; "
              "curved example obstructed (seed 9009)";
    return true;
}

bool crit_conventions(std::ostream& detail) {
    std::mt19937 rng(9010);
    int flat_count = 0, curved_count = 0;
    auto consistent = [&](const ChristoffelField& G) {
        bool res_zero = point_is_zero(affine_flatness_residual(G));
        bool r_zero = curvature_tensor(G).is_zero();
        if (res_zero != r_zero)
            return false;
        (res_zero ? flat_count : curved_count) += 1;
        return true;
    };
    for (int i = 0; i < 10; ++i)
        if (!consistent(rnd_symmetric_gamma(2, 4, rng))) {
            detail << "random instance " << i << ": conventions disagree";
            return false;
        }
    for (int i = 0; i < 13; ++i) {
        FormalChart psi = rnd_chart(2, 6, rng);
        if (!consistent(
                pullback_connection(psi, ChristoffelField::zero(2, 4), 4))) {
            detail << "pullback instance " << i << ": conventions disagree";
            return false;
        }
    }
    if (!consistent(delta_gamma(4))) {
        detail << "curved example: conventions disagree";
        return false;
    }
    if (!consistent(ChristoffelField::zero(2, 4))) {
        detail << "zero connection: conventions disagree";
        return false;
    }
    detail << "25 mixed instances agree (" << flat_count << " flat, "
           << curved_count << " curved) (seed 9010)";
    return true;
}

struct Criterion {
    std::string name;
    long bound_ms;
    std::function<bool(std::ostream&)> run;
};

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"coboundary round-trip", 10000, crit_coboundary},
        {"path independence", 30000, crit_path_independence},
        {"cube lemma", 30000, crit_cube},
        {"heap theorems", 60000, crit_heap},
        {"basic-x identity", 10000, crit_basicx},
        {"closedness routes", 10000, crit_closedness},
        {"formal primitive", 10000, crit_formal_primitive},
        {"scalar action", 10000, crit_scalar},
        {"formal chart", 30000, crit_chart},
        {"convention cross-check", 10000, crit_conventions},
    };

    bool all = true;
    for (size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        std::ostringstream detail;
        auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail << "exception: " << e.what();
        }
        long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        if (ok && ms >= c.bound_ms) {
            ok = false;
            detail << " (exceeded " << c.bound_ms << " ms bound)";
        }
        all = all && ok;
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << (i + 1) << ". " << c.name
                  << ": " << detail.str() << " [" << ms << " ms]\n";
    }
    return all ? 0 : 1;
}
