#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "ncalc/series.hpp"

namespace ncalc {

/// Matrix-group-valued coordinate 1-form: for each base direction a,
/// a size x size matrix Omega_a(x) of truncated series in dim variables
/// (no generator blocks).  The form on an infinitesimal edge (x, x+d) is
/// I + sum_a Omega_a(x) d_a.
struct CoordOneForm {
    int dim = 0;
    int size = 0;
    int order = 0;
    std::vector<MatrixSeries> omega; // dim matrices, base-only spec

    /// {"dim","size","order","omega":{"1":<matrix-series>,...}}; absent
    /// directions are zero.
    nlohmann::json to_json() const;
    static CoordOneForm from_json(const nlohmann::json& j);
};

/// Christoffel symbols Gamma^c_{ab}(x) encoding an affine connection in
/// coordinates: [zxy] = z - x + y + Gamma(x; z-x, y-x).
struct ChristoffelField {
    int dim = 0;
    int order = 0;
    std::vector<TruncatedSeries> gamma; // index (c*dim + a)*dim + b

    static ChristoffelField zero(int dim, int order);
    const TruncatedSeries& at(int c, int a, int b) const;
    TruncatedSeries& at(int c, int a, int b);
    ChristoffelField truncated(int new_order) const;
    bool is_zero() const;
    bool operator==(const ChristoffelField&) const;

    /// {"dim","order","gamma":{"c|a|b":<series>,...}} with 1-based indices;
    /// absent keys are zero.
    nlohmann::json to_json() const;
    static ChristoffelField from_json(const nlohmann::json& j);
};

/// Formal change of coordinates: phi(0) = 0, identity linear part.
struct FormalChart {
    int dim = 0;
    int order = 0;
    std::vector<TruncatedSeries> phi; // dim components, base-only spec

    /// Throws ParseError unless phi(0) = 0 with identity linear part.
    void validate() const;
    bool operator==(const FormalChart&) const;

    /// {"dim","order","phi":[<series>,...]}.
    nlohmann::json to_json() const;
    static FormalChart from_json(const nlohmann::json& j);
};

/// The identity point (x_1, ..., x_n) of a ring.
std::vector<TruncatedSeries> identity_point(const BlockSpec& spec, int order);

/// omega evaluated on the infinitesimal edge (p, p + d_block):
/// I + sum_a Omega_a(p) eps_{block,a}.  p is a point in a ring whose base
/// variables match om.dim; its components need zero constant term.
MatrixSeries eval_form(const CoordOneForm& om,
                       const std::vector<TruncatedSeries>& p, int block);

/// LHS - RHS of the composition identity
///   omega(x,y) * omega(y,z)
///     = I + Omega(x;d1+d2) + dOmega(x;d1,d2) + Omega(x;d1)*Omega(x;d2)
/// with y = x+d1, z = y+d2 on two unrelated blocks.  Identically zero for
/// every coordinate 1-form; computed at full order as a self-check.
MatrixSeries basicx_residual(const CoordOneForm& om);

/// Closedness residual, indexed by direction pairs a < b.  Zero iff the
/// form extends closed (Maurer-Cartan equation).
struct ClosednessReport {
    int order = 0;                          // residual order (input order - 1)
    std::vector<std::pair<int, int>> index; // (a, b) with a < b, 0-based
    std::vector<MatrixSeries> residual;     // matching index, base-only spec

    bool closed() const;
    std::optional<std::pair<int, int>> first_violation() const;
};

/// Tensor route: dOmega_b/dx_a - dOmega_a/dx_b + [Omega_a, Omega_b].
ClosednessReport closedness_residual(const CoordOneForm& om);
/// Pair-relation route: omega(x,y)*omega(y,z) - omega(x,z) expanded in the
/// two-block ring with the symmetric annihilation pair declared, collected
/// on the canonical monomials.  Must agree with the tensor route.
ClosednessReport closedness_residual_pairring(const CoordOneForm& om);

/// Darboux derivative: Omega_a = f^{-1} * df/dx_a.  f is a square matrix
/// series over a base-only spec with invertible constant term.
CoordOneForm maurer_cartan_from_map(const MatrixSeries& f);

/// Result of integrating dOmega = f * Omega_a with f(0) = 1.  On an
/// obstruction, `degree` is the degree of the right-hand-side data whose
/// integrability failed and (a, b) the offending direction pair.
struct JetPrimitiveResult {
    std::optional<MatrixSeries> f;
    int degree = -1;
    int a = -1, b = -1;

    bool ok() const { return f.has_value(); }
};

/// Solves df/dx_a = f * Omega_a degree by degree with f(0) = 1, up to
/// `order`.  Requires om.order >= order - 1.
JetPrimitiveResult formal_primitive(const CoordOneForm& om, int order);

/// [zxy] = z - x + y + Gamma(x; z-x, y-x), componentwise on series points.
/// Arguments must share one ring with base variables == G.dim; requires
/// G.order >= ring order - 2.
std::vector<TruncatedSeries> lambda_coord(const ChristoffelField& G,
                                          const std::vector<TruncatedSeries>& x,
                                          const std::vector<TruncatedSeries>& z,
                                          const std::vector<TruncatedSeries>& y);

/// torsion^c_{ab} = Gamma^c_{ab} - Gamma^c_{ba}.
ChristoffelField torsion(const ChristoffelField& G);

struct SymmetryReport {
    bool symmetric = true;
    int c = -1, a = -1, b = -1; // first failing component when not
};
SymmetryReport symmetry_check(const ChristoffelField& G);

/// LHS - RHS of [[zx0x1]x1[x1x0x2]] = [[zx0x2]x2[x2x0x1]] on three generic
/// blocks (x1-x0, x2-x0, z-x0), truncated to G.order - 1 where the result
/// is determined by the input data.  Zero iff flat.  Requires symmetry.
std::vector<TruncatedSeries> affine_flatness_residual(const ChristoffelField& G);

/// R^d_{cab} = d_a Gamma^d_{bc} - d_b Gamma^d_{ac}
///             - sum_e (Gamma^e_{bc} Gamma^d_{ae} - Gamma^e_{ac} Gamma^d_{be}),
/// at order G.order - 1.  The quadratic sign follows the [zxy] convention
/// (the stored Gamma is minus the classical symbol); the convention is
/// pinned by requiring residual == 0 iff R == 0 across the corpus.
struct CurvatureTensor {
    int dim = 0;
    int order = 0;
    std::vector<TruncatedSeries> r; // index ((d*dim + c)*dim + a)*dim + b

    const TruncatedSeries& at(int d, int c, int a, int b) const;
    bool is_zero() const;
    /// Lowest base degree with a nonzero coefficient, or nullopt if zero.
    std::optional<int> first_nonzero_degree() const;
};
CurvatureTensor curvature_tensor(const ChristoffelField& G);

/// The six cube expressions (digital vertex naming; 7 is the common value
/// for a symmetric flat connection) built from lambda_coord on three
/// generic blocks; each is a point, truncated to G.order - 1.
std::array<std::vector<TruncatedSeries>, 6> cube_expressions(
    const ChristoffelField& G);

/// Inverse chart: g with g(psi(x)) = x = psi(g(x)) to `order`.
FormalChart invert_chart(const FormalChart& psi, int order);

/// The unique Gamma' with psi o lambda_{Gamma'} = lambda_Gamma o psi on
/// nilpotent arguments, to base order out_order.  Requires
/// G.order >= out_order and psi.order >= out_order + 2.
ChristoffelField pullback_connection(const FormalChart& psi,
                                     const ChristoffelField& G, int out_order);

/// (1-t)x + ty, componentwise.
std::vector<TruncatedSeries> scalar_combination(
    const std::vector<TruncatedSeries>& x, const std::vector<TruncatedSeries>& y,
    const Rational& t);

/// lambda(x, y_t, z_t) with y = x+d1, z = x+d2-Gamma(d1,d2) on two
/// unrelated blocks; depends on t and d1+d2 only (symmetric G).
std::vector<TruncatedSeries> second_order_scalar_value(const ChristoffelField& G,
                                                       const Rational& t);
/// The value above minus x + t(d1+d2) + ((t^2-t)/2) Gamma(x; d1+d2, d1+d2);
/// identically zero for every symmetric G.
std::vector<TruncatedSeries> second_order_scalar_residual(
    const ChristoffelField& G, const Rational& t);

/// Result of solving the trivialization PDE
///   d^2 phi^c / dx_a dx_b + sum_e (d phi^c / dx_e) Gamma^e_{ab} = 0
/// with phi(0) = 0 and identity linear part.  On an obstruction, `degree`
/// is the degree of the PDE data that failed to integrate and (a, b, c)
/// the first failing component.
struct ChartResult {
    std::optional<FormalChart> chart;
    int degree = -1;
    int a = -1, b = -1, c = -1;

    bool ok() const { return chart.has_value(); }
};

/// Requires G symmetric and G.order >= order - 2.
ChartResult formal_chart(const ChristoffelField& G, int order);

/// phi applied to a point of any ring over the same base variables
/// (components need zero constant term).
std::vector<TruncatedSeries> chart_apply(const FormalChart& phi,
                                         const std::vector<TruncatedSeries>& p);

/// phi^{-1}(phi(x) - phi(o) + phi(y)) on nilpotent points.
std::vector<TruncatedSeries> heap_via_chart(const FormalChart& phi,
                                            const std::vector<TruncatedSeries>& o,
                                            const std::vector<TruncatedSeries>& x,
                                            const std::vector<TruncatedSeries>& y);

} // namespace ncalc
