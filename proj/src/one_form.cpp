#include "ncalc/one_form.hpp"

#include <algorithm>
#include <deque>

#include "ncalc/errors.hpp"

namespace ncalc {

OneForm::OneForm(std::shared_ptr<const NeighborSpace> space,
                 std::shared_ptr<const Group> group)
    : space_(std::move(space)), group_(std::move(group)) {}

OneForm OneForm::coboundary(std::shared_ptr<const NeighborSpace> space,
                            std::shared_ptr<const Group> group,
                            const std::vector<GroupElement>& f) {
    if (static_cast<int>(f.size()) != space->size())
        throw ParseError("coboundary: f must assign an element to every vertex");
    for (const auto& e : f)
        group->check(e);
    OneForm omega(space, group);
    for (const auto& [i, j] : omega.space_->edges())
        omega.values_[{i, j}] = group->compose(group->invert(f[i]), f[j]);
    return omega;
}

OneForm OneForm::from_json(std::shared_ptr<const NeighborSpace> space,
                           const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("group"))
        throw ParseError("form: expected object with \"group\"");
    auto group = Group::from_json(j.at("group"));
    OneForm omega(std::move(space), group);

    if (j.contains("values")) {
        if (!j.at("values").is_object())
            throw ParseError("form: \"values\" must be an object keyed \"x|y\"");
        for (const auto& [key, val] : j.at("values").items()) {
            auto bar = key.find('|');
            if (bar == std::string::npos || key.find('|', bar + 1) != std::string::npos)
                throw ParseError("form: bad pair key \"" + key + "\" (want \"x|y\")");
            int x = omega.space_->index_of(key.substr(0, bar));
            int y = omega.space_->index_of(key.substr(bar + 1));
            if (x == y)
                throw ParseError("form: key \"" + key +
                                 "\" names a reflexive pair; omega(x,x)=1 is implicit");
            if (!omega.space_->related(x, y))
                throw ParseError("form: key \"" + key + "\" is not a neighbor pair");
            GroupElement g = group->element_from_json(val);
            auto stored = std::minmax(x, y);
            std::pair<int, int> slot{stored.first, stored.second};
            GroupElement oriented = (x < y) ? g : group->invert(g);
            auto it = omega.values_.find(slot);
            if (it != omega.values_.end()) {
                if (it->second != oriented)
                    throw ParseError("form: both orientations of \"" + key +
                                     "\" given with inconsistent values");
            } else {
                omega.values_.emplace(slot, std::move(oriented));
            }
        }
    }
    return omega;
}

nlohmann::json OneForm::to_json() const {
    nlohmann::json vals = nlohmann::json::object();
    for (const auto& [pair, g] : values_) {
        if (g == group_->identity())
            continue; // identity is the default
        vals[space_->name(pair.first) + "|" + space_->name(pair.second)] =
            group_->element_to_json(g);
    }
    return {{"group", group_->to_json()}, {"values", std::move(vals)}};
}

GroupElement OneForm::value(int x, int y) const {
    if (x == y) {
        if (x < 0 || x >= space_->size())
            throw ParseError("form: vertex index out of range");
        return group_->identity();
    }
    if (!space_->related(x, y))
        throw ParseError("form: omega(" + space_->name(x) + ", " + space_->name(y) +
                         ") undefined; not a neighbor pair");
    auto it = values_.find({std::min(x, y), std::max(x, y)});
    if (it == values_.end())
        return group_->identity();
    return (x < y) ? it->second : group_->invert(it->second);
}

void OneForm::set_value(int x, int y, const GroupElement& g) {
    if (x == y || !space_->related(x, y))
        throw ParseError("form: can only set values on neighbor pairs x != y");
    group_->check(g);
    if (x < y)
        values_[{x, y}] = g;
    else
        values_[{y, x}] = group_->invert(g);
}

std::vector<TripleViolation> closedness_violations(const OneForm& omega) {
    const auto& s = omega.space();
    const auto& g = omega.group();
    std::vector<TripleViolation> out;
    for (int x = 0; x < s.size(); ++x) {
        for (int y : s.neighbors(x)) {
            if (y <= x)
                continue;
            for (int z : s.neighbors(y)) {
                if (z <= y || !s.related(x, z))
                    continue;
                GroupElement lhs = g.compose(omega.value(x, y), omega.value(y, z));
                GroupElement rhs = omega.value(x, z);
                if (lhs != rhs)
                    out.push_back({x, y, z, lhs, rhs});
            }
        }
    }
    return out;
}

bool is_closed(const OneForm& omega) { return closedness_violations(omega).empty(); }

GroupElement path_integral(const OneForm& omega, const NPath& p) {
    GroupElement acc = omega.group().identity();
    const auto& pts = p.points();
    for (size_t i = 0; i + 1 < pts.size(); ++i)
        acc = omega.group().compose(acc, omega.value(pts[i], pts[i + 1]));
    return acc;
}

GroupElement quadrangle_defect(const OneForm& omega, int x, int y1, int y2, int z) {
    const auto& s = omega.space();
    auto need = [&](int a, int b) {
        if (!s.related(a, b))
            throw ParseError("quadrangle: " + s.name(a) + " ~ " + s.name(b) +
                             " fails");
    };
    need(x, y1);
    need(y1, z);
    need(x, y2);
    need(y2, z);
    const auto& g = omega.group();
    GroupElement via1 = g.compose(omega.value(x, y1), omega.value(y1, z));
    GroupElement via2 = g.compose(omega.value(x, y2), omega.value(y2, z));
    return g.compose(via1, g.invert(via2));
}

PathIndependence path_independence_check(const OneForm& omega, int x, int y,
                                         int max_len) {
    const auto& s = omega.space();
    PathIndependence rep;
    std::optional<std::pair<NPath, GroupElement>> first;
    bool clash = false;

    for_each_path(s, x, y, max_len, [&](const std::vector<int>& pts) {
        NPath p(s, pts);
        GroupElement v = path_integral(omega, p);
        if (!first) {
            first = {p, v};
            return true;
        }
        if (v != first->second) {
            rep.outcome = PathIndependence::Outcome::Witness;
            rep.witness_paths = {first->first, p};
            rep.witness_values = {first->second, v};
            clash = true;
            return false;
        }
        return true;
    });

    if (clash)
        return rep;
    if (!first) {
        rep.outcome = PathIndependence::Outcome::Unreachable;
        return rep;
    }
    rep.outcome = PathIndependence::Outcome::Common;
    rep.common = first->second;
    return rep;
}

PrimitiveResult primitive(const OneForm& omega, int x0,
                          const std::vector<int>& scan_order) {
    const auto& s = omega.space();
    const auto& g = omega.group();
    if (x0 < 0 || x0 >= s.size())
        throw ParseError("primitive: base vertex index out of range");

    // rank[v] = position of v in the requested scan order.
    std::vector<int> rank(s.size());
    if (scan_order.empty()) {
        for (int i = 0; i < s.size(); ++i)
            rank[i] = i;
    } else {
        if (static_cast<int>(scan_order.size()) != s.size())
            throw ParseError("primitive: scan_order must permute all vertices");
        std::vector<char> seen(s.size(), 0);
        for (int i = 0; i < s.size(); ++i) {
            int v = scan_order[i];
            if (v < 0 || v >= s.size() || seen[v])
                throw ParseError("primitive: scan_order is not a permutation");
            seen[v] = 1;
            rank[v] = i;
        }
    }

    PrimitiveResult res;
    res.base = x0;
    res.values.assign(s.size(), std::nullopt);
    std::vector<int> parent(s.size(), -1);
    res.values[x0] = g.identity();

    std::deque<int> queue{x0};
    while (!queue.empty()) {
        int y = queue.front();
        queue.pop_front();
        std::vector<int> nbrs = s.neighbors(y);
        std::sort(nbrs.begin(), nbrs.end(),
                  [&](int a, int b) { return rank[a] < rank[b]; });
        for (int z : nbrs) {
            if (res.values[z])
                continue;
            res.values[z] = g.compose(*res.values[y], omega.value(y, z));
            parent[z] = y;
            queue.push_back(z);
        }
    }

    auto tree_path = [&](int v) {
        std::vector<int> path{v};
        while (parent[path.back()] != -1)
            path.push_back(parent[path.back()]);
        std::reverse(path.begin(), path.end());
        return path;
    };

    // Check every non-tree edge inside the component; report the
    // lexicographically least conflicting one.
    std::optional<PrimitiveConflict> conflict;
    for (int y = 0; y < s.size(); ++y) {
        if (!res.values[y])
            continue;
        for (int z : s.neighbors(y)) {
            if (z < y || parent[z] == y || parent[y] == z)
                continue;
            GroupElement expected = g.compose(*res.values[y], omega.value(y, z));
            if (expected != *res.values[z]) {
                conflict = PrimitiveConflict{y, z, expected, *res.values[z],
                                             tree_path(y), tree_path(z)};
                break;
            }
        }
        if (conflict)
            break;
    }
    res.conflict = std::move(conflict);
    return res;
}

} // namespace ncalc
