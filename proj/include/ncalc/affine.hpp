#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ncalc/groupoid.hpp"
#include "ncalc/space.hpp"

namespace ncalc {

/// Discrete affine connection: partial ternary op (z, x, y) -> [zxy],
/// defined exactly on admissible triples (x ~ z and x ~ y).
///
/// Three backends:
///  - lattice: Z_m^dim torus with unit-step neighbors, [zxy] = z - x + y;
///  - twisted: the lattice conjugated by a vertex bijection sigma -- both
///    the relation and the operation are transported, so it is an
///    isomorphic copy of the lattice;
///  - table: explicit entries over a given space.
class AffineConnection {
public:
    enum class Kind { Lattice, Twisted, Table };

    static AffineConnection lattice(int modulus, int dim);
    /// perm maps lattice vertex index -> vertex index (the sigma above).
    static AffineConnection twisted(int modulus, int dim, std::vector<int> perm);
    static AffineConnection table(std::shared_ptr<const NeighborSpace> space,
                                  std::map<std::tuple<int, int, int>, int> entries);

    /// Connection file; `load_ref` resolves the "space" file reference of
    /// table connections (receives the ref string, returns parsed JSON).
    static AffineConnection
    from_json(const nlohmann::json& j,
              const std::function<nlohmann::json(const std::string&)>& load_ref);
    nlohmann::json to_json() const;

    Kind kind() const { return kind_; }
    const NeighborSpace& space() const { return *space_; }
    std::shared_ptr<const NeighborSpace> space_ptr() const { return space_; }

    bool admissible(int z, int x, int y) const;
    /// [zxy]; empty when the triple is inadmissible or (table) missing.
    std::optional<int> eval(int z, int x, int y) const;

    /// Lattice/twisted only: coordinates of a vertex.
    std::vector<int> coords(int v) const;
    int modulus() const { return modulus_; }
    int dim() const { return dim_; }

private:
    AffineConnection() = default;

    Kind kind_ = Kind::Lattice;
    std::shared_ptr<const NeighborSpace> space_;
    int modulus_ = 0, dim_ = 0;            // lattice/twisted
    std::vector<int> perm_, perm_inv_;     // twisted
    std::map<std::tuple<int, int, int>, int> entries_; // table
};

/// validate_axioms: book-keeping, unit laws, inversion, and (separately
/// flagged) symmetry over every admissible triple.
struct AxiomViolation {
    int z, x, y;
    std::string axiom; // "bookkeeping-y" | "bookkeeping-z" | "unit-zxx" |
                       // "unit-xxy" | "inversion" | "symmetry"
    bool operator==(const AxiomViolation&) const = default;
};

struct AxiomReport {
    std::vector<AxiomViolation> core;     // everything except symmetry
    std::vector<AxiomViolation> symmetry;
    // Inversion instances skipped because [zxy] ~ y failed (already a
    // book-keeping violation, so the outer bracket is inadmissible).
    int inversion_skipped = 0;
    bool core_ok() const { return core.empty(); }
    bool symmetric() const { return symmetry.empty(); }
};

/// Throws ParseError when a table is missing an admissible triple.
AxiomReport validate_axioms(const AffineConnection& conn);

/// weak_flatness_check: [[z x0 x1] x1 [x1 x0 x2]] = [[z x0 x2] x2 [x2 x0 x1]]
/// for all x0 and x1, x2, z in monad(x0).
struct WeakFlatnessQuad {
    int x0, x1, x2, z;
    std::optional<int> lhs, rhs;
    bool operator==(const WeakFlatnessQuad&) const = default;
};

struct WeakFlatnessReport {
    std::vector<WeakFlatnessQuad> violations; // both sides defined, unequal
    std::vector<WeakFlatnessQuad> undefined;  // some side undefined
    bool flat() const { return violations.empty() && undefined.empty(); }
};

/// Throws UntestableError when conn is not symmetric.
WeakFlatnessReport weak_flatness_check(const AffineConnection& conn);

/// hat: the GL(M) connection nabla(x, y) = (z -> [zxy]).  Requires unit and
/// inversion laws (bijectivity) and book-keeping (images stay in monads);
/// failures surface as construction errors.
Connection hat(const AffineConnection& conn);

/// 2D grid from generating paths with a common domain.  Rows follow the
/// z-path, columns the y-path: u[0][j] = y_j, u[i][0] = z_i and
/// u[i+1][j+1] = [u[i+1][j] u[i][j] u[i][j+1]].
struct Grid2D {
    std::vector<std::vector<int>> u;
    int rows() const { return static_cast<int>(u.size()) - 1; }
    int cols() const { return static_cast<int>(u[0].size()) - 1; }
    int domain() const { return u[0][0]; }
    int codomain() const { return u.back().back(); }
};

/// Throws UntestableError naming the first cell whose op is undefined.
Grid2D grid2(const AffineConnection& conn, const NPath& ypath, const NPath& zpath);

/// Codomain dependence on the path choices, brute-forced within a bound.
struct GridInvariance {
    enum class Outcome { Common, Witness, Unreachable };
    Outcome outcome;
    std::optional<int> common;
    // (y-path, z-path) pairs with distinct codomains, plus those codomains.
    std::optional<std::array<std::vector<int>, 4>> witness; // y1, z1, y2, z2
    std::optional<std::pair<int, int>> witness_codomains;
    int undefined_pairs = 0; // grid construction failed (partial tables)
};

GridInvariance grid2_codomain_invariance(const AffineConnection& conn, int x,
                                         int yend, int zend, int max_len);

/// The six Cube Lemma expressions for p1, p2, p4 in monad(p0):
///   eq 0:  [[401]1[102]] = [[402]2[201]]
///   eq 1:  [[204]4[401]] = [[201]1[104]]
///   eq 2:  [[102]2[204]] = [[104]4[402]]
/// exprs holds them in the order written above (left, right, left, ...).
struct CubeReport {
    std::array<std::optional<int>, 6> exprs;
    bool all_defined = false;
    bool all_equal = false;          // all six defined and equal
    std::array<bool, 3> eq_defined{}; // both sides of equation i defined
    std::array<bool, 3> eq_holds{};   // ... and equal
    // On all_equal: the cube in digital notation, vertex 7 = common value.
    std::optional<std::array<int, 8>> cube;
};

/// Throws UntestableError unless p1, p2, p4 are in monad(p0).
CubeReport cube_check(const AffineConnection& conn, int p0, int p1, int p2, int p4);

/// 3D grid from three generating paths with common domain o; the three
/// coordinate planes are 2D grids and interior cells are filled through the
/// Cube Lemma (whose six-way agreement is enforced cell by cell).
struct Grid3D {
    std::vector<std::vector<std::vector<int>>> w; // w[i][j][l]
    int codomain() const { return w.back().back().back(); }
};

/// Throws UntestableError on an undefined cell or a cube disagreement
/// (reporting the cell).
Grid3D grid3(const AffineConnection& conn, const NPath& xpath, const NPath& ypath,
             const NPath& zpath);

/// Heap extraction: extended ternary brackets realized as grid codomains
/// over canonical (lexicographically least shortest) paths.  Construction
/// validates the preconditions (axioms + symmetry + weak flatness) and
/// throws UntestableError when they fail.  Not thread-safe (internal memo).
class Heap {
public:
    explicit Heap(const AffineConnection& conn);

    /// x +_o y = extended [xoy].
    int add(int o, int x, int y);
    /// The +_o inverse of x: extended [oxo].
    int inverse(int o, int x);
    /// Extended [xoo'], an isomorphism (component, +_o) -> (component, +_o').
    int change_base(int o, int o2, int x);

    const AffineConnection& connection() const { return conn_; }

private:
    /// Extended [z x y] via grid2 over canonical paths x -> y and x -> z.
    int extended(int z, int x, int y);

    const AffineConnection& conn_;
    std::map<std::tuple<int, int, int>, int> memo_;
    std::map<std::pair<int, int>, std::vector<int>> path_cache_;
    const std::vector<int>& canonical_path(int from, int to);
};

} // namespace ncalc
