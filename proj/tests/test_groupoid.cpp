#include <doctest.h>

#include <random>

#include "ncalc/errors.hpp"
#include "ncalc/groupoid.hpp"

using namespace ncalc;

namespace {

std::shared_ptr<const NeighborSpace> triangle() {
    return NeighborSpace::build({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
}

std::shared_ptr<const NeighborSpace> four_cycle() {
    return NeighborSpace::build({"a", "b", "c", "d"},
                                {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}});
}

OneForm holonomy_form() {
    auto s = four_cycle();
    auto z3 = cyclic_group(3);
    OneForm w(s, z3);
    w.set_value(0, 1, GroupElement{{1}});
    w.set_value(1, 2, GroupElement{{1}});
    w.set_value(2, 3, GroupElement{{1}});
    w.set_value(3, 0, GroupElement{{1}});
    return w;
}

} // namespace

TEST_CASE("constant groupoid: category and inverse axioms on random arrows") {
    auto s = triangle();
    auto g = symmetric_group(4);
    auto gpd = Groupoid::constant(s, g);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        Arrow a{0, 1, g->sample(rng)};
        Arrow b{1, 2, g->sample(rng)};
        Arrow c{2, 0, g->sample(rng)};
        auto left = gpd->compose(gpd->compose(a, b), c);
        auto right = gpd->compose(a, gpd->compose(b, c));
        CHECK(left == right);
        CHECK(gpd->compose(gpd->identity(0), a) == a);
        CHECK(gpd->compose(a, gpd->identity(1)) == a);
        CHECK(gpd->compose(a, gpd->invert(a)) == gpd->identity(0));
    }
    CHECK_THROWS_AS(gpd->compose(Arrow{0, 1, g->identity()},
                                 Arrow{2, 0, g->identity()}),
                    ParseError);
}

TEST_CASE("gl groupoid: arrows are monad bijections fixing the marks") {
    auto s = four_cycle();
    auto gpd = Groupoid::gl(s);
    // monad(a) = {a, b, d} = {0, 1, 3}; monad(b) = {a, b, c} = {0, 1, 2}.
    auto arrows = gpd->arrows_between(0, 1);
    CHECK(arrows.size() == 2); // 2! ways to place the two unmarked points
    for (const auto& a : arrows) {
        CHECK_NOTHROW(gpd->check(a));
        CHECK(gpd->apply(a, 0) == 1); // marked point
    }
    // Identity arrow is a unit.
    Arrow id0 = gpd->identity(0);
    for (const auto& a : arrows) {
        CHECK(gpd->compose(id0, a) == a);
        CHECK(gpd->compose(a, gpd->identity(1)) == a);
        CHECK(gpd->compose(a, gpd->invert(a)) == id0);
    }
}

TEST_CASE("gl groupoid: one-point space has a single identity arrow") {
    auto s = NeighborSpace::build({"a"}, {});
    auto gpd = Groupoid::gl(s);
    auto arrows = gpd->arrows_between(0, 0);
    REQUIRE(arrows.size() == 1);
    CHECK(arrows[0] == gpd->identity(0));
}

TEST_CASE("gl arrow validation rejects malformed payloads") {
    auto s = four_cycle();
    auto gpd = Groupoid::gl(s);
    CHECK_THROWS_AS(gpd->check(Arrow{0, 1, std::vector<int>{0, 1}}), ParseError);
    CHECK_THROWS_AS(gpd->check(Arrow{0, 1, std::vector<int>{0, 0, 2}}), ParseError);
    // Marked point must go to the target: 0 -> 0 here, but dst is 1.
    CHECK_THROWS_AS(gpd->check(Arrow{0, 1, std::vector<int>{0, 1, 2}}), ParseError);
    // ... whereas sending 0 -> 1 with the rest permuted freely is fine.
    CHECK_NOTHROW(gpd->check(Arrow{0, 1, std::vector<int>{1, 0, 2}}));
}

TEST_CASE("from_one_form: flatness report matches closedness report") {
    auto t = triangle();
    auto g = symmetric_group(3);
    std::mt19937_64 rng(9);
    std::vector<GroupElement> f;
    for (int i = 0; i < t->size(); ++i)
        f.push_back(g->sample(rng));
    OneForm closed = OneForm::coboundary(t, g, f);
    CHECK(is_flat(from_one_form(closed)));

    // A non-closed form on the triangle: same violating triples both ways.
    OneForm bad(t, cyclic_group(2));
    for (const auto& [i, j] : t->edges())
        bad.set_value(i, j, GroupElement{{1}});
    auto cv = closedness_violations(bad);
    auto fv = flatness_violations(from_one_form(bad));
    REQUIRE(cv.size() == fv.size());
    for (size_t i = 0; i < cv.size(); ++i) {
        CHECK(cv[i].x == fv[i].x);
        CHECK(cv[i].y == fv[i].y);
        CHECK(cv[i].z == fv[i].z);
    }
}

TEST_CASE("from_one_form round-trips the form") {
    OneForm w = holonomy_form();
    OneForm back = to_one_form(from_one_form(w));
    for (const auto& [i, j] : w.space().edges())
        CHECK(back.value(i, j) == w.value(i, j));
}

TEST_CASE("transport_n: identification with the path integral") {
    OneForm w = holonomy_form();
    Connection c = from_one_form(w);
    const auto& s = w.space();
    NPath p(s, {0, 1, 2, 3});
    Arrow a = transport_n(c, p);
    CHECK(a.src == 0);
    CHECK(a.dst == 3);
    CHECK(std::get<GroupElement>(a.payload) == path_integral(w, p));

    NPath unit(s, {2});
    CHECK(transport_n(c, unit) == c.groupoid().identity(2));
}

TEST_CASE("transport_n is functorial over concat") {
    OneForm w = holonomy_form();
    Connection c = from_one_form(w);
    const auto& s = w.space();
    NPath p(s, {0, 1, 2});
    NPath q(s, {2, 3, 0, 1});
    CHECK(transport_n(c, NPath::concat(p, q)) ==
          c.groupoid().compose(transport_n(c, p), transport_n(c, q)));
}

TEST_CASE("connection inverse compatibility") {
    OneForm w = holonomy_form();
    Connection c = from_one_form(w);
    const auto& s = w.space();
    for (const auto& [i, j] : s.edges()) {
        CHECK(c.groupoid().compose(c.at(i, j), c.at(j, i)) ==
              c.groupoid().identity(i));
        CHECK(c.at(j, i) == c.groupoid().invert(c.at(i, j)));
    }
}

TEST_CASE("holonomous_check: flat form common arrow, holonomy form witness") {
    auto t = triangle();
    auto g = cyclic_group(6);
    OneForm closed = OneForm::coboundary(
        t, g, {GroupElement{{0}}, GroupElement{{2}}, GroupElement{{5}}});
    Connection cc = from_one_form(closed);
    auto rep = holonomous_check(cc, 0, 2, 3);
    REQUIRE(rep.outcome == HolonomyCheck::Outcome::Common);
    CHECK(std::get<GroupElement>(rep.common->payload) == GroupElement{{5}});

    Connection hc = from_one_form(holonomy_form());
    auto bad = holonomous_check(hc, 0, 2, 2);
    REQUIRE(bad.outcome == HolonomyCheck::Outcome::Witness);
    CHECK_FALSE(bad.witness_arrows->first == bad.witness_arrows->second);

    auto disc = NeighborSpace::build({"a", "b"}, {});
    OneForm empty(disc, cyclic_group(3));
    auto un = holonomous_check(from_one_form(empty), 0, 1, 4);
    CHECK(un.outcome == HolonomyCheck::Outcome::Unreachable);
}

TEST_CASE("identity connection is flat with identity holonomy") {
    auto s = four_cycle();
    OneForm w(s, symmetric_group(3)); // all values default to identity
    Connection c = from_one_form(w);
    CHECK(is_flat(c));
    auto rep = holonomous_check(c, 0, 2, 4);
    REQUIRE(rep.outcome == HolonomyCheck::Outcome::Common);
    CHECK(std::get<GroupElement>(rep.common->payload) ==
          w.group().identity());
}
