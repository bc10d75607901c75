#include <doctest.h>

#include <random>

#include "ncalc/errors.hpp"
#include "ncalc/group.hpp"

using namespace ncalc;
using nlohmann::json;

namespace {

void check_group_axioms(const Group& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 25; ++i) {
        GroupElement a = g.sample(rng);
        GroupElement b = g.sample(rng);
        GroupElement c = g.sample(rng);
        CHECK(g.compose(g.compose(a, b), c) == g.compose(a, g.compose(b, c)));
        CHECK(g.compose(a, g.identity()) == a);
        CHECK(g.compose(g.identity(), a) == a);
        CHECK(g.compose(a, g.invert(a)) == g.identity());
        CHECK(g.compose(g.invert(a), a) == g.identity());
    }
}

} // namespace

TEST_CASE("group axioms hold for all shipped instances") {
    check_group_axioms(*symmetric_group(4), 1);
    check_group_axioms(*cyclic_group(12), 2);
    check_group_axioms(*matrix2_group(5), 3);
}

TEST_CASE("symmetric: left-to-right composition on image arrays") {
    auto s3 = symmetric_group(3);
    GroupElement t01{{1, 0, 2}}; // (01)
    GroupElement c012{{1, 2, 0}}; // (012)
    // (01) then (012): 0->1->2, 1->0->1, 2->2->0
    CHECK(s3->compose(t01, c012) == GroupElement{{2, 1, 0}});
    CHECK(s3->invert(c012) == GroupElement{{2, 0, 1}});
    CHECK_THROWS_AS(s3->check(GroupElement{{0, 0, 1}}), ParseError);
    CHECK_THROWS_AS(s3->check(GroupElement{{0, 1}}), ParseError);
}

TEST_CASE("cyclic: addition mod m") {
    auto z5 = cyclic_group(5);
    CHECK(z5->compose(GroupElement{{3}}, GroupElement{{4}}) == GroupElement{{2}});
    CHECK(z5->invert(GroupElement{{2}}) == GroupElement{{3}});
    CHECK(z5->element_from_json(json(-1)) == GroupElement{{4}});
    CHECK_THROWS_AS(z5->check(GroupElement{{5}}), ParseError);
}

TEST_CASE("matrix2: multiplication, inverse, invertibility check") {
    auto m5 = matrix2_group(5);
    GroupElement a{{1, 2, 0, 1}};
    GroupElement b{{1, 0, 3, 1}};
    // a*b = [[1+6, 2], [3, 1]] = [[2, 2], [3, 1]] mod 5
    CHECK(m5->compose(a, b) == GroupElement{{2, 2, 3, 1}});
    CHECK(m5->compose(a, m5->invert(a)) == m5->identity());
    CHECK_THROWS_AS(m5->check(GroupElement{{1, 2, 2, 4}}), ParseError); // det 0
    CHECK_THROWS_AS(m5->check(GroupElement{{1, 2, 3}}), ParseError);
}

TEST_CASE("group json round-trips") {
    for (const json& desc : {json{{"kind", "symmetric"}, {"degree", 4}},
                             json{{"kind", "cyclic"}, {"modulus", 12}},
                             json{{"kind", "matrix2"}, {"modulus", 5}}}) {
        auto g = Group::from_json(desc);
        CHECK(g->to_json() == desc);
        std::mt19937_64 rng(7);
        GroupElement e = g->sample(rng);
        CHECK(g->element_from_json(g->element_to_json(e)) == e);
    }
    CHECK_THROWS_AS(Group::from_json(json{{"kind", "frieze"}}), ParseError);
}
