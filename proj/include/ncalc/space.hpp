#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ncalc {

/// Finite set with a reflexive, symmetric neighbor relation x ~ y.
///
/// Vertices are identified by strings externally and by dense indices
/// internally; the index order is the declaration order of the vertex list.
/// Self-loops in the input are tolerated (the relation is reflexive by fiat)
/// but never stored as edges.
class NeighborSpace {
public:
    static std::shared_ptr<const NeighborSpace>
    build(std::vector<std::string> vertices,
          const std::vector<std::pair<std::string, std::string>>& edges);

    static std::shared_ptr<const NeighborSpace> from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int v) const { return names_.at(v); }
    /// Throws ParseError on unknown vertex.
    int index_of(const std::string& id) const;
    bool has_vertex(const std::string& id) const;

    /// x ~ y (reflexive).
    bool related(int a, int b) const;
    /// Neighbors of v excluding v itself, ascending.
    const std::vector<int>& neighbors(int v) const { return adj_.at(v); }
    /// M(v): v together with its neighbors, ascending.
    std::vector<int> monad(int v) const;
    /// Reflexive-transitive closure of ~ from v, ascending.
    std::vector<int> infinity_monad(int v) const;
    /// Connected components, each ascending, ordered by least member.
    std::vector<std::vector<int>> components() const;

    /// Undirected edges as (i, j) with i < j, lexicographically sorted.
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

private:
    NeighborSpace() = default;

    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::vector<int>> adj_;
    std::vector<std::pair<int, int>> edges_;
};

/// An n-path: a finite string of consecutive neighbors.  The path
/// (x0, ..., xn) has length n; a single vertex is a 0-path.
class NPath {
public:
    /// Validates consecutiveness; throws ParseError naming the first bad step.
    NPath(const NeighborSpace& space, std::vector<int> points);

    int length() const { return static_cast<int>(points_.size()) - 1; }
    int domain() const { return points_.front(); }
    int codomain() const { return points_.back(); }
    const std::vector<int>& points() const { return points_; }

    /// Concatenation; requires a.codomain() == b.domain().
    static NPath concat(const NPath& a, const NPath& b);

    bool operator==(const NPath& other) const { return points_ == other.points_; }

private:
    struct Unchecked {};
    NPath(Unchecked, std::vector<int> points) : points_(std::move(points)) {}

    std::vector<int> points_;
};

/// Calls visit for every path from `from` to `to` of length <= max_len,
/// shortest first, lexicographic within a length.  Stops early when visit
/// returns false.  Returns false iff stopped early.
bool for_each_path(const NeighborSpace& space, int from, int to, int max_len,
                   const std::function<bool(const std::vector<int>&)>& visit);

/// Materialized variant of for_each_path, same order.
std::vector<NPath> enumerate_paths(const NeighborSpace& space, int from, int to,
                                   int max_len);

/// Shortest path from `from` to `to` along ~ (BFS, lowest-index tie-break),
/// or nothing when `to` is unreachable.
std::vector<int> shortest_path(const NeighborSpace& space, int from, int to);

} // namespace ncalc
