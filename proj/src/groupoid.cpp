#include "ncalc/groupoid.hpp"

#include <algorithm>
#include <numeric>

#include "ncalc/errors.hpp"

namespace ncalc {

std::shared_ptr<const Groupoid>
Groupoid::constant(std::shared_ptr<const NeighborSpace> space,
                   std::shared_ptr<const Group> group) {
    auto g = std::shared_ptr<Groupoid>(new Groupoid());
    g->kind_ = Kind::Constant;
    g->space_ = std::move(space);
    g->group_ = std::move(group);
    return g;
}

std::shared_ptr<const Groupoid>
Groupoid::gl(std::shared_ptr<const NeighborSpace> space) {
    auto g = std::shared_ptr<Groupoid>(new Groupoid());
    g->kind_ = Kind::GL;
    g->space_ = std::move(space);
    g->monads_.reserve(g->space_->size());
    for (int v = 0; v < g->space_->size(); ++v)
        g->monads_.push_back(g->space_->monad(v));
    return g;
}

const Group& Groupoid::group() const {
    if (kind_ != Kind::Constant)
        throw ParseError("groupoid: only the constant groupoid has a vertex group");
    return *group_;
}

std::shared_ptr<const Group> Groupoid::group_ptr() const {
    if (kind_ != Kind::Constant)
        throw ParseError("groupoid: only the constant groupoid has a vertex group");
    return group_;
}

int Groupoid::monad_pos(int v, int member) const {
    const auto& m = monads_.at(v);
    auto it = std::lower_bound(m.begin(), m.end(), member);
    if (it == m.end() || *it != member)
        throw ParseError("groupoid: " + space_->name(member) + " is not in monad(" +
                         space_->name(v) + ")");
    return static_cast<int>(it - m.begin());
}

Arrow Groupoid::identity(int x) const {
    if (x < 0 || x >= space_->size())
        throw ParseError("groupoid: vertex index out of range");
    if (kind_ == Kind::Constant)
        return Arrow{x, x, group_->identity()};
    return Arrow{x, x, monads_.at(x)};
}

void Groupoid::check(const Arrow& a) const {
    if (a.src < 0 || a.src >= space_->size() || a.dst < 0 || a.dst >= space_->size())
        throw ParseError("arrow: endpoint out of range");
    if (kind_ == Kind::Constant) {
        if (!std::holds_alternative<GroupElement>(a.payload))
            throw ParseError("arrow: constant groupoid expects a group element payload");
        group_->check(std::get<GroupElement>(a.payload));
        return;
    }
    if (!std::holds_alternative<std::vector<int>>(a.payload))
        throw ParseError("arrow: GL groupoid expects an image-list payload");
    const auto& img = std::get<std::vector<int>>(a.payload);
    const auto& dom = monads_.at(a.src);
    const auto& cod = monads_.at(a.dst);
    if (img.size() != dom.size() || dom.size() != cod.size())
        throw ParseError("arrow: image list must map monad(" + space_->name(a.src) +
                         ") onto monad(" + space_->name(a.dst) + ")");
    std::vector<char> hit(cod.size(), 0);
    for (size_t i = 0; i < img.size(); ++i) {
        auto it = std::lower_bound(cod.begin(), cod.end(), img[i]);
        if (it == cod.end() || *it != img[i])
            throw ParseError("arrow: image " + space_->name(img[i]) +
                             " is outside monad(" + space_->name(a.dst) + ")");
        size_t pos = it - cod.begin();
        if (hit[pos])
            throw ParseError("arrow: image list is not injective");
        hit[pos] = 1;
        if (dom[i] == a.src && img[i] != a.dst)
            throw ParseError("arrow: marked point must map src to dst");
    }
}

int Groupoid::apply(const Arrow& a, int z) const {
    if (kind_ != Kind::GL)
        throw ParseError("groupoid: apply is for GL arrows");
    return std::get<std::vector<int>>(a.payload).at(monad_pos(a.src, z));
}

Arrow Groupoid::compose(const Arrow& a, const Arrow& b) const {
    if (a.dst != b.src)
        throw ParseError("compose: middle objects differ (" + space_->name(a.dst) +
                         " vs " + space_->name(b.src) + ")");
    if (kind_ == Kind::Constant)
        return Arrow{a.src, b.dst,
                     group_->compose(std::get<GroupElement>(a.payload),
                                     std::get<GroupElement>(b.payload))};
    const auto& fa = std::get<std::vector<int>>(a.payload);
    std::vector<int> out;
    out.reserve(fa.size());
    for (int mid : fa)
        out.push_back(apply(b, mid));
    return Arrow{a.src, b.dst, std::move(out)};
}

Arrow Groupoid::invert(const Arrow& a) const {
    if (kind_ == Kind::Constant)
        return Arrow{a.dst, a.src, group_->invert(std::get<GroupElement>(a.payload))};
    const auto& img = std::get<std::vector<int>>(a.payload);
    const auto& dom = monads_.at(a.src);
    std::vector<int> out(img.size());
    for (size_t i = 0; i < img.size(); ++i)
        out[monad_pos(a.dst, img[i])] = dom[i];
    return Arrow{a.dst, a.src, std::move(out)};
}

std::vector<Arrow> Groupoid::arrows_between(int x, int y) const {
    if (kind_ != Kind::GL)
        throw ParseError("groupoid: arrow enumeration is provided for GL only");
    const auto& dom = monads_.at(x);
    const auto& cod = monads_.at(y);
    std::vector<Arrow> out;
    if (dom.size() != cod.size())
        return out;
    // Permute the non-marked codomain points; the marked point is pinned.
    std::vector<int> rest;
    for (int v : cod)
        if (v != y)
            rest.push_back(v);
    std::sort(rest.begin(), rest.end());
    do {
        std::vector<int> img;
        img.reserve(dom.size());
        size_t k = 0;
        for (int v : dom)
            img.push_back(v == x ? y : rest[k++]);
        out.push_back(Arrow{x, y, std::move(img)});
    } while (std::next_permutation(rest.begin(), rest.end()));
    std::sort(out.begin(), out.end(), [](const Arrow& a, const Arrow& b) {
        return std::get<std::vector<int>>(a.payload) <
               std::get<std::vector<int>>(b.payload);
    });
    return out;
}

nlohmann::json Groupoid::arrow_to_json(const Arrow& a) const {
    nlohmann::json j;
    j["src"] = space_->name(a.src);
    j["dst"] = space_->name(a.dst);
    if (kind_ == Kind::Constant) {
        j["element"] = group_->element_to_json(std::get<GroupElement>(a.payload));
    } else {
        nlohmann::json map = nlohmann::json::object();
        const auto& dom = monads_.at(a.src);
        const auto& img = std::get<std::vector<int>>(a.payload);
        for (size_t i = 0; i < dom.size(); ++i)
            map[space_->name(dom[i])] = space_->name(img[i]);
        j["map"] = std::move(map);
    }
    return j;
}

Connection::Connection(std::shared_ptr<const Groupoid> groupoid, const Assign& assign)
    : gpd_(std::move(groupoid)) {
    for (const auto& [i, j] : gpd_->space().edges()) {
        Arrow a = assign(i, j);
        if (a.src != i || a.dst != j)
            throw ParseError("connection: assigned arrow has wrong endpoints on (" +
                             gpd_->space().name(i) + ", " + gpd_->space().name(j) + ")");
        gpd_->check(a);
        stored_.emplace(std::pair{i, j}, std::move(a));
    }
}

Arrow Connection::at(int x, int y) const {
    if (x == y)
        return gpd_->identity(x);
    if (!gpd_->space().related(x, y))
        throw ParseError("connection: (" + gpd_->space().name(x) + ", " +
                         gpd_->space().name(y) + ") is not a neighbor pair");
    auto it = stored_.find({std::min(x, y), std::max(x, y)});
    return (x < y) ? it->second : gpd_->invert(it->second);
}

std::vector<FlatnessViolation> flatness_violations(const Connection& c) {
    const auto& s = c.space();
    std::vector<FlatnessViolation> out;
    for (int x = 0; x < s.size(); ++x)
        for (int y : s.neighbors(x)) {
            if (y <= x)
                continue;
            for (int z : s.neighbors(y)) {
                if (z <= y || !s.related(x, z))
                    continue;
                Arrow lhs = c.groupoid().compose(c.at(x, y), c.at(y, z));
                Arrow rhs = c.at(x, z);
                if (!(lhs == rhs))
                    out.push_back({x, y, z, lhs, rhs});
            }
        }
    return out;
}

bool is_flat(const Connection& c) { return flatness_violations(c).empty(); }

Arrow transport_n(const Connection& c, const NPath& p) {
    Arrow acc = c.groupoid().identity(p.domain());
    const auto& pts = p.points();
    for (size_t i = 0; i + 1 < pts.size(); ++i)
        acc = c.groupoid().compose(acc, c.at(pts[i], pts[i + 1]));
    return acc;
}

HolonomyCheck holonomous_check(const Connection& c, int x, int y, int max_len) {
    const auto& s = c.space();
    HolonomyCheck rep;
    std::optional<std::pair<NPath, Arrow>> first;
    bool clash = false;

    for_each_path(s, x, y, max_len, [&](const std::vector<int>& pts) {
        NPath p(s, pts);
        Arrow a = transport_n(c, p);
        if (!first) {
            first = {p, a};
            return true;
        }
        if (!(a == first->second)) {
            rep.outcome = HolonomyCheck::Outcome::Witness;
            rep.witness_paths = {first->first, p};
            rep.witness_arrows = {first->second, a};
            clash = true;
            return false;
        }
        return true;
    });

    if (clash)
        return rep;
    if (!first) {
        rep.outcome = HolonomyCheck::Outcome::Unreachable;
        return rep;
    }
    rep.outcome = HolonomyCheck::Outcome::Common;
    rep.common = first->second;
    return rep;
}

Connection from_one_form(const OneForm& omega) {
    auto gpd = Groupoid::constant(omega.space_ptr(), omega.group_ptr());
    return Connection(gpd, [&omega](int x, int y) {
        return Arrow{x, y, omega.value(x, y)};
    });
}

OneForm to_one_form(const Connection& c) {
    const auto& gpd = c.groupoid();
    OneForm omega(gpd.space_ptr(), gpd.group_ptr());
    for (const auto& [i, j] : gpd.space().edges())
        omega.set_value(i, j, std::get<GroupElement>(c.at(i, j).payload));
    return omega;
}

} // namespace ncalc
