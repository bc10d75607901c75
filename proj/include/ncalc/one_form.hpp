#pragma once

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ncalc/group.hpp"
#include "ncalc/space.hpp"

namespace ncalc {

/// Group-valued 1-form: one group element per unordered neighbor pair.
/// omega(x,x) = 1 and omega(y,x) = omega(x,y)^-1 hold by construction; only
/// one orientation is stored.
class OneForm {
public:
    OneForm(std::shared_ptr<const NeighborSpace> space,
            std::shared_ptr<const Group> group);

    /// df(x,y) = f(x)^-1 * f(y) for a total vertex assignment f.
    static OneForm coboundary(std::shared_ptr<const NeighborSpace> space,
                              std::shared_ptr<const Group> group,
                              const std::vector<GroupElement>& f);

    /// Form file: {"group": {...}, "values": {"x|y": elem, ...}}.  Edges
    /// without an entry default to the identity.  Storing both orientations
    /// is an error unless they are mutually inverse.
    static OneForm from_json(std::shared_ptr<const NeighborSpace> space,
                             const nlohmann::json& j);
    nlohmann::json to_json() const;

    const NeighborSpace& space() const { return *space_; }
    std::shared_ptr<const NeighborSpace> space_ptr() const { return space_; }
    const Group& group() const { return *group_; }
    std::shared_ptr<const Group> group_ptr() const { return group_; }

    /// omega(x, y); requires x ~ y.
    GroupElement value(int x, int y) const;
    /// Overwrites the value on a neighbor pair (stored orientation handled).
    void set_value(int x, int y, const GroupElement& g);

private:
    std::shared_ptr<const NeighborSpace> space_;
    std::shared_ptr<const Group> group_;
    std::map<std::pair<int, int>, GroupElement> values_; // key (i, j), i < j
};

/// One failed closedness triple: omega(x,y)*omega(y,z) != omega(x,z).
struct TripleViolation {
    int x, y, z;
    GroupElement lhs, rhs;
    bool operator==(const TripleViolation&) const = default;
};

/// All mutual triples x < y < z with the closedness equation violated, in
/// lexicographic order.  Empty means closed.
std::vector<TripleViolation> closedness_violations(const OneForm& omega);
bool is_closed(const OneForm& omega);

/// Left-to-right product of omega along p; 1 for length-0 paths.
GroupElement path_integral(const OneForm& omega, const NPath& p);

/// (omega(x,y1)*omega(y1,z)) * (omega(x,y2)*omega(y2,z))^-1.
/// Requires x~y1~z and x~y2~z; names the failing pair otherwise.
GroupElement quadrangle_defect(const OneForm& omega, int x, int y1, int y2, int z);

/// Outcome of comparing the integral over every x->y path of length <= L.
struct PathIndependence {
    enum class Outcome { Common, Witness, Unreachable };
    Outcome outcome;
    std::optional<GroupElement> common;
    // First two paths found with distinct integrals, enumeration order.
    std::optional<std::pair<NPath, NPath>> witness_paths;
    std::optional<std::pair<GroupElement, GroupElement>> witness_values;
};

PathIndependence path_independence_check(const OneForm& omega, int x, int y,
                                         int max_len);

/// Primitive f on the component of x0 with f(x0) = 1, or the first
/// inconsistent closing edge found during BFS integration.
struct PrimitiveConflict {
    int y, z;                 // the closing edge, tree value vs. integrated value
    GroupElement expected;    // f(y) * omega(y, z)
    GroupElement actual;      // tree value f(z)
    std::vector<int> path_y, path_z; // tree paths from x0
};

struct PrimitiveResult {
    int base;
    // Value per vertex; empty optional outside infinity_monad(base).
    std::vector<std::optional<GroupElement>> values;
    std::optional<PrimitiveConflict> conflict;
    bool ok() const { return !conflict.has_value(); }
};

/// BFS integration from x0; `scan_order` permutes the vertex order used for
/// the BFS (identity = canonical).  Different orders give independent
/// spanning trees, which must agree for closed forms.
PrimitiveResult primitive(const OneForm& omega, int x0,
                          const std::vector<int>& scan_order = {});

} // namespace ncalc
