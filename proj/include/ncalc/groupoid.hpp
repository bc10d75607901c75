#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "ncalc/one_form.hpp"
#include "ncalc/space.hpp"

namespace ncalc {

/// Arrow of one of the two shipped groupoids.
///
/// Constant groupoid M x M x G: payload is a group element.
/// GL(M): payload maps the sorted monad of src to vertices of the sorted
/// monad of dst (images listed in domain order).
struct Arrow {
    int src = 0;
    int dst = 0;
    std::variant<GroupElement, std::vector<int>> payload;
    bool operator==(const Arrow&) const = default;
};

/// A groupoid over the vertex set of a NeighborSpace, composed left to right.
class Groupoid {
public:
    enum class Kind { Constant, GL };

    /// M x M x G with vertex group g.
    static std::shared_ptr<const Groupoid>
    constant(std::shared_ptr<const NeighborSpace> space,
             std::shared_ptr<const Group> group);

    /// Arrows x -> y are bijections monad(x) -> monad(y) taking x to y.
    static std::shared_ptr<const Groupoid>
    gl(std::shared_ptr<const NeighborSpace> space);

    Kind kind() const { return kind_; }
    const NeighborSpace& space() const { return *space_; }
    std::shared_ptr<const NeighborSpace> space_ptr() const { return space_; }
    /// Constant groupoids only.
    const Group& group() const;
    std::shared_ptr<const Group> group_ptr() const;

    Arrow identity(int x) const;
    /// Left-to-right: a then b; requires a.dst == b.src.
    Arrow compose(const Arrow& a, const Arrow& b) const;
    Arrow invert(const Arrow& a) const;
    /// Payload well-formed for this groupoid (GL: bijection fixing marks).
    void check(const Arrow& a) const;

    /// GL arrows: where z in monad(src) is sent.
    int apply(const Arrow& a, int z) const;

    /// All arrows x -> y, lexicographic by image list (GL) or element order
    /// (constant; only for groups small enough to enumerate is this used --
    /// provided for GL here, throws for constant).
    std::vector<Arrow> arrows_between(int x, int y) const;

    /// Canonical serialization of an arrow payload for reports.
    nlohmann::json arrow_to_json(const Arrow& a) const;

private:
    Groupoid() = default;

    Kind kind_ = Kind::Constant;
    std::shared_ptr<const NeighborSpace> space_;
    std::shared_ptr<const Group> group_; // constant only
    std::vector<std::vector<int>> monads_; // sorted, cached
    int monad_pos(int v, int member) const; // index of member in monads_[v]
};

/// Connection: an arrow x -> y per ordered neighbor pair, with
/// conn(x,x) = 1_x and conn(y,x) = conn(x,y)^-1 guaranteed by storing one
/// orientation.
class Connection {
public:
    using Assign = std::function<Arrow(int, int)>;

    /// assign is consulted once per x < y neighbor pair at construction; the
    /// other orientation is derived by inversion.  Arrows are checked
    /// (source, target, payload shape) eagerly, so a bad assignment fails
    /// here, not at first use.
    Connection(std::shared_ptr<const Groupoid> groupoid, const Assign& assign);

    const Groupoid& groupoid() const { return *gpd_; }
    std::shared_ptr<const Groupoid> groupoid_ptr() const { return gpd_; }
    const NeighborSpace& space() const { return gpd_->space(); }

    /// nabla(x, y); requires x ~ y.
    Arrow at(int x, int y) const;

private:
    std::shared_ptr<const Groupoid> gpd_;
    std::map<std::pair<int, int>, Arrow> stored_; // key (i, j), i < j
};

/// One failed flatness triple: nabla(x,y).nabla(y,z) != nabla(x,z).
struct FlatnessViolation {
    int x, y, z;
    Arrow lhs, rhs;
    bool operator==(const FlatnessViolation&) const = default;
};

/// All mutual triples x < y < z violating flatness, lexicographic order.
std::vector<FlatnessViolation> flatness_violations(const Connection& c);
bool is_flat(const Connection& c);

/// Composite transport along p; identity arrow for length-0 paths.
Arrow transport_n(const Connection& c, const NPath& p);

/// Endpoint-dependence of transport over all paths of length <= max_len.
struct HolonomyCheck {
    enum class Outcome { Common, Witness, Unreachable };
    Outcome outcome;
    std::optional<Arrow> common;
    std::optional<std::pair<NPath, NPath>> witness_paths;
    std::optional<std::pair<Arrow, Arrow>> witness_arrows;
};

HolonomyCheck holonomous_check(const Connection& c, int x, int y, int max_len);

/// Connection in the constant groupoid with payloads omega(x, y).
Connection from_one_form(const OneForm& omega);

/// Reads the 1-form back out of a constant-groupoid connection
/// (round-trip inverse of from_one_form).
OneForm to_one_form(const Connection& c);

} // namespace ncalc
