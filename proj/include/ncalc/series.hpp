#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

namespace ncalc {

/// Exact scalar ring: arbitrary-precision rationals, always in lowest terms.
using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q" or "p" (also accepts JSON integers where callers pass them
/// through as strings); canonicalizes.
Rational rational_from_string(const std::string& s);
/// Canonical form: "p" when the denominator is 1, else "p/q" in lowest terms.
std::string rational_to_string(const Rational& r);

/// Shape of the ambient ring: n base variables x_1..x_n truncated at a total
/// degree, plus k square-zero generator blocks eps_{i,1..n} with optional
/// pairwise symmetric-annihilation relations:
///   within block i:        eps_{i,a} * eps_{i,b} = 0
///   declared pair {i,j}:   eps_{i,a} * eps_{j,b} = -eps_{i,b} * eps_{j,a}
/// Blocks and coordinates are 0-based internally (1-based in files).
struct BlockSpec {
    int base_vars = 0;
    int block_count = 0;
    std::set<std::pair<int, int>> pairs; // (i, j) with i < j

    bool paired(int i, int j) const {
        return pairs.count({std::min(i, j), std::max(i, j)}) > 0;
    }
    bool operator==(const BlockSpec&) const = default;
};

/// Normalized monomial: base exponents plus at most one generator per block,
/// stored sorted by block index.  The pair relations are applied at
/// multiplication time, so a stored monomial is always canonical.
struct Monomial {
    std::vector<int> exp;                       // size = base_vars
    std::vector<std::pair<int, int>> blocks;    // (block, coord), sorted

    int degree() const {
        int d = 0;
        for (int e : exp)
            d += e;
        return d;
    }
    bool operator==(const Monomial&) const = default;
};

/// Graded order: total base degree, then base exponents lexicographically,
/// then the block part; fixes canonical term order for serialization.
struct MonomialOrder {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

class MatrixSeries;

/// Truncated polynomial over Rational in the ring described by a BlockSpec.
/// Truncation counts base-variable degree only; block generators are capped
/// structurally (square-free per block).
class TruncatedSeries {
public:
    TruncatedSeries() = default;
    TruncatedSeries(BlockSpec spec, int order);

    static TruncatedSeries constant(const BlockSpec& spec, int order,
                                    const Rational& c);
    /// x_a (0-based).
    static TruncatedSeries variable(const BlockSpec& spec, int order, int a);
    /// eps_{block, coord} (0-based).
    static TruncatedSeries generator(const BlockSpec& spec, int order, int block,
                                     int coord);

    const BlockSpec& spec() const { return spec_; }
    int order() const { return order_; }
    bool is_zero() const { return terms_.empty(); }
    /// The coefficient of the empty monomial.
    Rational constant_term() const;
    Rational coeff(const Monomial& m) const;
    const std::map<Monomial, Rational, MonomialOrder>& terms() const {
        return terms_;
    }

    TruncatedSeries operator-() const;
    TruncatedSeries& operator+=(const TruncatedSeries& o);
    TruncatedSeries& operator-=(const TruncatedSeries& o);
    friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) {
        return a += b;
    }
    friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) {
        return a -= b;
    }
    friend TruncatedSeries operator*(const TruncatedSeries& a,
                                     const TruncatedSeries& b);
    TruncatedSeries scaled(const Rational& c) const;

    /// d/dx_a.
    TruncatedSeries derivative(int a) const;
    /// F(x + d_block): F + sum_a dF/dx_a * eps_{block,a}.
    TruncatedSeries taylor_shift(int block) const;
    /// Drop terms of base degree > new_order; new_order <= order().
    TruncatedSeries truncated(int new_order) const;
    /// Keep only terms of base degree == d (block parts untouched).
    TruncatedSeries homogeneous_part(int d) const;
    /// Rename blocks i <-> j (requires the pair structure to be symmetric
    /// under the swap); monomials are re-normalized.
    TruncatedSeries swap_blocks(int i, int j) const;
    /// The terms whose block part equals `part` exactly, with it removed.
    TruncatedSeries block_coefficient(
        const std::vector<std::pair<int, int>>& part) const;

    /// Substitutes args[a] for x_a.  Every arg must share spec/order and
    /// have zero constant term (nilpotent shifts are fine).
    TruncatedSeries compose(const std::vector<TruncatedSeries>& args) const;
    /// Shift by a rational point: F(x + c); exact on the stored polynomial.
    TruncatedSeries recenter(const std::vector<Rational>& c) const;

    bool operator==(const TruncatedSeries& o) const;

    /// {"vars", "order", "blocks", "terms"} (canonical term order, 1-based
    /// blocks).
    nlohmann::json to_json() const;
    static TruncatedSeries from_json(const nlohmann::json& j);

private:
    void add_term(Monomial m, const Rational& c);
    friend class MatrixSeries;

    BlockSpec spec_;
    int order_ = 0;
    std::map<Monomial, Rational, MonomialOrder> terms_;
};

/// Rectangular matrix of series sharing one spec/order.
class MatrixSeries {
public:
    MatrixSeries() = default;
    MatrixSeries(const BlockSpec& spec, int order, int rows, int cols);
    static MatrixSeries identity(const BlockSpec& spec, int order, int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const BlockSpec& spec() const { return spec_; }
    int order() const { return order_; }
    const TruncatedSeries& at(int r, int c) const { return e_.at(r * cols_ + c); }
    TruncatedSeries& at(int r, int c) { return e_.at(r * cols_ + c); }

    MatrixSeries operator-() const;
    MatrixSeries& operator+=(const MatrixSeries& o);
    MatrixSeries& operator-=(const MatrixSeries& o);
    friend MatrixSeries operator+(MatrixSeries a, const MatrixSeries& b) {
        return a += b;
    }
    friend MatrixSeries operator-(MatrixSeries a, const MatrixSeries& b) {
        return a -= b;
    }
    friend MatrixSeries operator*(const MatrixSeries& a, const MatrixSeries& b);
    MatrixSeries scaled(const TruncatedSeries& s) const;

    MatrixSeries derivative(int a) const;
    MatrixSeries taylor_shift(int block) const;
    MatrixSeries truncated(int new_order) const;
    MatrixSeries swap_blocks(int i, int j) const;

    /// Exact inverse; requires square shape and an invertible constant-term
    /// matrix (Neumann series on the positive-order part, which is
    /// nilpotent).  Throws UntestableError on a singular constant term.
    MatrixSeries inverse() const;

    bool is_zero() const;
    bool operator==(const MatrixSeries& o) const;

    /// {"rows", "cols", "entries": [<series>...]} row-major.
    nlohmann::json to_json() const;
    static MatrixSeries from_json(const nlohmann::json& j);

private:
    int rows_ = 0, cols_ = 0;
    BlockSpec spec_;
    int order_ = 0;
    std::vector<TruncatedSeries> e_;
};

/// Componentwise composition of a vector-valued polynomial map.
std::vector<TruncatedSeries> compose_map(const std::vector<TruncatedSeries>& f,
                                         const std::vector<TruncatedSeries>& args);

nlohmann::json blockspec_to_json(const BlockSpec& spec);
BlockSpec blockspec_from_json(const nlohmann::json& blocks, int vars);

} // namespace ncalc
