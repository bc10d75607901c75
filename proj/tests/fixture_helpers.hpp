#pragma once

#include <map>
#include <tuple>

#include "ncalc/affine.hpp"

namespace ncalc_testing {

/// Non-flat but symmetric table on the Z_5^2 lattice space.
///
/// Construction: conjugate the lattice op by the vertex bijection sigma
/// that applies the non-affine transposition tau = (3 4) to the second
/// coordinate on the column c0 = 0, then truncate back to a table over the
/// *original* relation: triples whose sigma-preimage is admissible get the
/// conjugated value, the rest keep the plain lattice value.  Mixing the two
/// frames preserves symmetry and both unit laws but yields genuine
/// weak-flatness violations and failing cubes (with all six expressions
/// defined) near the patched column, plus book-keeping and inversion
/// failures that make heap extraction refuse the connection.
///
/// A conjugation applied *everywhere* would not do: any composite of table
/// evals would stay coherent under sigma, so all defined expressions would
/// still agree.
inline ncalc::AffineConnection nonflat_table() {
    using namespace ncalc;
    auto base = AffineConnection::lattice(5, 2);
    auto space = base.space_ptr();
    auto tw = [&](int v) { // self-inverse: tau is a transposition
        auto c = base.coords(v);
        if (c[0] == 0) {
            static const int tau[5] = {0, 1, 2, 4, 3};
            c[1] = tau[c[1]];
        }
        return c[0] * 5 + c[1];
    };
    auto lam0 = [&](int z, int x, int y) {
        auto cz = base.coords(z), cx = base.coords(x), cy = base.coords(y);
        int idx = 0;
        for (int i = 0; i < 2; ++i)
            idx = idx * 5 + ((cz[i] - cx[i] + cy[i]) % 5 + 5) % 5;
        return idx;
    };
    std::map<std::tuple<int, int, int>, int> entries;
    for (int x = 0; x < space->size(); ++x)
        for (int z : space->monad(x))
            for (int y : space->monad(x)) {
                int pz = tw(z), px = tw(x), py = tw(y);
                bool twisted_ok =
                    space->related(px, py) && space->related(px, pz);
                entries[{z, x, y}] =
                    twisted_ok ? tw(lam0(pz, px, py)) : lam0(z, x, y);
            }
    return AffineConnection::table(space, std::move(entries));
}

} // namespace ncalc_testing
