#include "ncalc/space.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>

#include "ncalc/errors.hpp"

namespace ncalc {

namespace {

std::unordered_map<std::string, int> index_names(const std::vector<std::string>& names) {
    std::unordered_map<std::string, int> out;
    for (int i = 0; i < static_cast<int>(names.size()); ++i) {
        auto [it, fresh] = out.emplace(names[i], i);
        if (!fresh)
            throw ParseError("duplicate vertex id \"" + names[i] + "\"");
    }
    return out;
}

} // namespace

std::shared_ptr<const NeighborSpace>
NeighborSpace::build(std::vector<std::string> vertices,
                     const std::vector<std::pair<std::string, std::string>>& edges) {
    auto idx = index_names(vertices);

    std::set<std::pair<int, int>> uniq;
    for (const auto& [a, b] : edges) {
        auto ia = idx.find(a);
        auto ib = idx.find(b);
        if (ia == idx.end())
            throw ParseError("edge endpoint \"" + a + "\" is not a declared vertex");
        if (ib == idx.end())
            throw ParseError("edge endpoint \"" + b + "\" is not a declared vertex");
        if (ia->second == ib->second)
            continue; // reflexivity is implicit
        uniq.emplace(std::min(ia->second, ib->second), std::max(ia->second, ib->second));
    }

    auto sp = std::shared_ptr<NeighborSpace>(new NeighborSpace());
    sp->names_ = std::move(vertices);
    sp->index_ = std::move(idx);
    sp->adj_.assign(sp->names_.size(), {});
    sp->edges_.assign(uniq.begin(), uniq.end());
    for (const auto& [i, j] : sp->edges_) {
        sp->adj_[i].push_back(j);
        sp->adj_[j].push_back(i);
    }
    for (auto& nbrs : sp->adj_)
        std::sort(nbrs.begin(), nbrs.end());
    return sp;
}

std::shared_ptr<const NeighborSpace> NeighborSpace::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("vertices") || !j.contains("edges"))
        throw ParseError("space: expected object with \"vertices\" and \"edges\"");
    std::vector<std::string> vertices;
    for (const auto& v : j.at("vertices")) {
        if (!v.is_string())
            throw ParseError("space: vertex ids must be strings");
        vertices.push_back(v.get<std::string>());
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            throw ParseError("space: each edge must be a pair of vertex ids");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return build(std::move(vertices), edges);
}

nlohmann::json NeighborSpace::to_json() const {
    nlohmann::json j;
    j["vertices"] = names_;
    auto arr = nlohmann::json::array();
    for (const auto& [i, k] : edges_)
        arr.push_back({names_[i], names_[k]});
    j["edges"] = std::move(arr);
    return j;
}

int NeighborSpace::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        throw ParseError("unknown vertex \"" + id + "\"");
    return it->second;
}

bool NeighborSpace::has_vertex(const std::string& id) const {
    return index_.count(id) > 0;
}

bool NeighborSpace::related(int a, int b) const {
    if (a < 0 || b < 0 || a >= size() || b >= size())
        throw ParseError("vertex index out of range");
    if (a == b)
        return true;
    const auto& nbrs = adj_[a];
    return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

std::vector<int> NeighborSpace::monad(int v) const {
    std::vector<int> out = neighbors(v);
    out.insert(std::lower_bound(out.begin(), out.end(), v), v);
    return out;
}

std::vector<int> NeighborSpace::infinity_monad(int v) const {
    std::vector<char> seen(size(), 0);
    std::deque<int> queue{v};
    seen.at(v) = 1;
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (int nb : adj_[cur])
            if (!seen[nb]) {
                seen[nb] = 1;
                queue.push_back(nb);
            }
    }
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (seen[i])
            out.push_back(i);
    return out;
}

std::vector<std::vector<int>> NeighborSpace::components() const {
    std::vector<char> done(size(), 0);
    std::vector<std::vector<int>> out;
    for (int v = 0; v < size(); ++v) {
        if (done[v])
            continue;
        auto comp = infinity_monad(v);
        for (int u : comp)
            done[u] = 1;
        out.push_back(std::move(comp));
    }
    return out;
}

NPath::NPath(const NeighborSpace& space, std::vector<int> points) {
    if (points.empty())
        throw ParseError("path: needs at least one point");
    for (size_t i = 0; i < points.size(); ++i) {
        if (points[i] < 0 || points[i] >= space.size())
            throw ParseError("path: vertex index out of range at position " +
                             std::to_string(i));
        if (i > 0 && !space.related(points[i - 1], points[i]))
            throw ParseError("path: step " + std::to_string(i) + " (" +
                             space.name(points[i - 1]) + " -> " + space.name(points[i]) +
                             ") is not a neighbor pair");
    }
    points_ = std::move(points);
}

NPath NPath::concat(const NPath& a, const NPath& b) {
    if (a.codomain() != b.domain())
        throw ParseError("path concat: codomain/domain mismatch");
    std::vector<int> pts = a.points_;
    pts.insert(pts.end(), b.points_.begin() + 1, b.points_.end());
    return NPath(Unchecked{}, std::move(pts));
}

bool for_each_path(const NeighborSpace& space, int from, int to, int max_len,
                   const std::function<bool(const std::vector<int>&)>& visit) {
    if (from < 0 || from >= space.size() || to < 0 || to >= space.size())
        throw ParseError("path enumeration: vertex index out of range");
    if (max_len < 0)
        throw ParseError("path enumeration: negative length bound");

    // Iterative deepening gives shortest-first order; within one target
    // length the DFS explores monads in ascending vertex order, which is
    // lexicographic order on the point strings.
    std::vector<int> stack;
    std::function<bool(int, int)> dfs = [&](int at, int remaining) {
        if (remaining == 0) {
            if (at != to)
                return true;
            return visit(stack);
        }
        for (int nb : space.monad(at)) {
            stack.push_back(nb);
            bool keep = dfs(nb, remaining - 1);
            stack.pop_back();
            if (!keep)
                return false;
        }
        return true;
    };

    for (int len = 0; len <= max_len; ++len) {
        stack.assign(1, from);
        if (!dfs(from, len))
            return false;
    }
    return true;
}

std::vector<NPath> enumerate_paths(const NeighborSpace& space, int from, int to,
                                   int max_len) {
    std::vector<NPath> out;
    for_each_path(space, from, to, max_len, [&](const std::vector<int>& pts) {
        out.emplace_back(space, pts);
        return true;
    });
    return out;
}

std::vector<int> shortest_path(const NeighborSpace& space, int from, int to) {
    // Distances to `to`, then a greedy descent taking the least-index
    // neighbor each step: the lexicographically least shortest path.
    std::vector<int> dist(space.size(), -1);
    std::deque<int> queue{to};
    dist.at(to) = 0;
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (int nb : space.neighbors(cur))
            if (dist[nb] < 0) {
                dist[nb] = dist[cur] + 1;
                queue.push_back(nb);
            }
    }
    if (dist.at(from) < 0)
        return {};
    std::vector<int> path{from};
    while (path.back() != to) {
        for (int nb : space.neighbors(path.back()))
            if (dist[nb] == dist[path.back()] - 1) {
                path.push_back(nb);
                break;
            }
    }
    return path;
}

} // namespace ncalc
