#include "ncalc/series.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "ncalc/errors.hpp"

namespace ncalc {

Rational rational_from_string(const std::string& s) {
    if (s.empty())
        throw ParseError("empty rational literal");
    for (char ch : s)
        if (!(ch == '-' || ch == '/' || (ch >= '0' && ch <= '9')))
            throw ParseError("bad rational literal: " + s);
    try {
        return Rational(s);
    } catch (const std::exception&) {
        throw ParseError("bad rational literal: " + s);
    }
}

std::string rational_to_string(const Rational& r) {
    if (denominator(r) == 1)
        return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

bool MonomialOrder::operator()(const Monomial& a, const Monomial& b) const {
    int da = a.degree(), db = b.degree();
    if (da != db)
        return da < db;
    if (a.exp != b.exp)
        return a.exp < b.exp;
    return a.blocks < b.blocks;
}

namespace {

// Canonicalizes the block part in place: sorts by block, kills square terms,
// and orients every declared pair so the lower block carries the lower
// coordinate (each swap flips the sign).  Returns false when the monomial is
// zero in the quotient.  The loop terminates because each swap strictly
// lowers the coordinate sequence lexicographically.
bool normalize_blocks(const BlockSpec& spec,
                      std::vector<std::pair<int, int>>& blocks, int& sign) {
    std::sort(blocks.begin(), blocks.end());
    for (size_t i = 0; i + 1 < blocks.size(); ++i)
        if (blocks[i].first == blocks[i + 1].first)
            return false; // eps_{i,a} * eps_{i,b} = 0 for all a, b
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t p = 0; p < blocks.size(); ++p)
            for (size_t q = p + 1; q < blocks.size(); ++q) {
                if (!spec.paired(blocks[p].first, blocks[q].first))
                    continue;
                if (blocks[p].second == blocks[q].second)
                    return false;
                if (blocks[p].second > blocks[q].second) {
                    std::swap(blocks[p].second, blocks[q].second);
                    sign = -sign;
                    changed = true;
                }
            }
    }
    return true;
}

bool mul_monomials(const BlockSpec& spec, int order, const Monomial& a,
                   const Monomial& b, Monomial& out, int& sign) {
    out.exp.assign(spec.base_vars, 0);
    int deg = 0;
    for (int i = 0; i < spec.base_vars; ++i) {
        out.exp[i] = a.exp[i] + b.exp[i];
        deg += out.exp[i];
    }
    if (deg > order)
        return false;
    out.blocks = a.blocks;
    out.blocks.insert(out.blocks.end(), b.blocks.begin(), b.blocks.end());
    sign = 1;
    return normalize_blocks(spec, out.blocks, sign);
}

void require_same(const TruncatedSeries& a, const TruncatedSeries& b) {
    if (!(a.spec() == b.spec()) || a.order() != b.order())
        throw ParseError("series spec/order mismatch");
}

// Packed monomial key for the multiplication fast path: 5 bits per base
// exponent starting at bit 0, then one nibble per block starting at bit 40
// holding coord+1 (0 = block absent).  Exponent lanes cannot overflow because
// the total base degree is capped before the lanes are added.
constexpr int kBlockShift = 40;
constexpr uint64_t kExpMask = (uint64_t(1) << kBlockShift) - 1;

bool packable_spec(const BlockSpec& spec, int order) {
    return spec.base_vars <= 6 && order <= 30 && spec.block_count <= 4;
}

uint64_t pack_monomial(const Monomial& m) {
    uint64_t key = 0;
    for (size_t i = 0; i < m.exp.size(); ++i)
        key |= static_cast<uint64_t>(m.exp[i]) << (5 * i);
    for (const auto& [block, coord] : m.blocks)
        key |= static_cast<uint64_t>(coord + 1) << (kBlockShift + 4 * block);
    return key;
}

Monomial unpack_monomial(const BlockSpec& spec, uint64_t key) {
    Monomial m;
    m.exp.resize(spec.base_vars);
    for (int i = 0; i < spec.base_vars; ++i)
        m.exp[i] = static_cast<int>((key >> (5 * i)) & 31);
    for (int b = 0; b < spec.block_count; ++b) {
        int nib = static_cast<int>((key >> (kBlockShift + 4 * b)) & 15);
        if (nib)
            m.blocks.emplace_back(b, nib - 1);
    }
    return m;
}

/// normalize_blocks on the packed form; block collisions are ruled out by the
/// caller's presence check, so only the declared pair relations remain.
bool normalize_packed(const BlockSpec& spec, uint64_t& key, int& sign) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [i, j] : spec.pairs) {
            int si = kBlockShift + 4 * i, sj = kBlockShift + 4 * j;
            uint64_t ci = (key >> si) & 15, cj = (key >> sj) & 15;
            if (!ci || !cj)
                continue;
            if (ci == cj)
                return false;
            if (ci > cj) {
                uint64_t diff = ci ^ cj;
                key ^= (diff << si) | (diff << sj);
                sign = -sign;
                changed = true;
            }
        }
    }
    return true;
}

} // namespace

TruncatedSeries::TruncatedSeries(BlockSpec spec, int order)
    : spec_(std::move(spec)), order_(order) {
    if (order_ < 0 || spec_.base_vars < 0 || spec_.block_count < 0)
        throw ParseError("bad series shape");
}

TruncatedSeries TruncatedSeries::constant(const BlockSpec& spec, int order,
                                          const Rational& c) {
    TruncatedSeries s(spec, order);
    if (c != 0)
        s.terms_.emplace(Monomial{std::vector<int>(spec.base_vars, 0), {}}, c);
    return s;
}

TruncatedSeries TruncatedSeries::variable(const BlockSpec& spec, int order,
                                          int a) {
    if (a < 0 || a >= spec.base_vars)
        throw ParseError("variable index out of range");
    if (order < 1)
        throw ParseError("order too small for a base variable");
    TruncatedSeries s(spec, order);
    Monomial m{std::vector<int>(spec.base_vars, 0), {}};
    m.exp[a] = 1;
    s.terms_.emplace(std::move(m), Rational(1));
    return s;
}

TruncatedSeries TruncatedSeries::generator(const BlockSpec& spec, int order,
                                           int block, int coord) {
    if (block < 0 || block >= spec.block_count || coord < 0 ||
        coord >= spec.base_vars)
        throw ParseError("generator index out of range");
    TruncatedSeries s(spec, order);
    s.terms_.emplace(
        Monomial{std::vector<int>(spec.base_vars, 0), {{block, coord}}},
        Rational(1));
    return s;
}

Rational TruncatedSeries::constant_term() const {
    return coeff(Monomial{std::vector<int>(spec_.base_vars, 0), {}});
}

Rational TruncatedSeries::coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
}

void TruncatedSeries::add_term(Monomial m, const Rational& c) {
    if (c == 0)
        return;
    auto [it, fresh] = terms_.emplace(std::move(m), c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0)
            terms_.erase(it);
    }
}

TruncatedSeries TruncatedSeries::operator-() const {
    TruncatedSeries r(spec_, order_);
    for (const auto& [m, c] : terms_)
        r.terms_.emplace(m, -c);
    return r;
}

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& o) {
    require_same(*this, o);
    for (const auto& [m, c] : o.terms_)
        add_term(m, c);
    return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& o) {
    require_same(*this, o);
    for (const auto& [m, c] : o.terms_)
        add_term(m, -c);
    return *this;
}

TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    require_same(a, b);
    TruncatedSeries r(a.spec_, a.order_);

    if (packable_spec(a.spec_, a.order_) &&
        a.terms_.size() * b.terms_.size() >= 1024) {
        struct Entry {
            uint64_t key;
            uint32_t presence;
            int deg;
            const Rational* coef;
        };
        auto flatten = [](const TruncatedSeries& s) {
            std::vector<Entry> v;
            v.reserve(s.terms_.size());
            for (const auto& [m, c] : s.terms_) {
                uint32_t pres = 0;
                for (const auto& [blk, coord] : m.blocks)
                    pres |= 1u << blk;
                v.push_back({pack_monomial(m), pres, m.degree(), &c});
            }
            std::sort(v.begin(), v.end(), [](const Entry& x, const Entry& y) {
                return x.deg < y.deg;
            });
            return v;
        };
        std::vector<Entry> ea = flatten(a), eb = flatten(b);
        const bool has_pairs = !a.spec_.pairs.empty();
        std::unordered_map<uint64_t, Rational> acc;
        acc.reserve(ea.size() + eb.size());
        for (const Entry& x : ea)
            for (const Entry& y : eb) {
                if (x.deg + y.deg > a.order_)
                    break; // eb ascends by degree
                if (x.presence & y.presence)
                    continue; // a repeated block squares to zero
                uint64_t key = ((x.key & kExpMask) + (y.key & kExpMask)) |
                               ((x.key | y.key) & ~kExpMask);
                int sign = 1;
                if (has_pairs && !normalize_packed(a.spec_, key, sign))
                    continue;
                Rational c = *x.coef * *y.coef;
                if (sign < 0)
                    c = -c;
                auto [it, fresh] = acc.try_emplace(key);
                if (fresh)
                    it->second = std::move(c);
                else
                    it->second += c;
            }
        for (auto& [key, c] : acc)
            if (c != 0)
                r.terms_.emplace(unpack_monomial(a.spec_, key), std::move(c));
        return r;
    }

    Monomial prod;
    int sign = 0;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) {
            if (!mul_monomials(a.spec_, a.order_, ma, mb, prod, sign))
                continue;
            Rational c = ca * cb;
            if (sign < 0)
                c = -c;
            r.add_term(prod, c);
        }
    return r;
}

TruncatedSeries TruncatedSeries::scaled(const Rational& c) const {
    TruncatedSeries r(spec_, order_);
    if (c == 0)
        return r;
    for (const auto& [m, v] : terms_)
        r.terms_.emplace(m, v * c);
    return r;
}

TruncatedSeries TruncatedSeries::derivative(int a) const {
    if (a < 0 || a >= spec_.base_vars)
        throw ParseError("derivative index out of range");
    TruncatedSeries r(spec_, order_);
    for (const auto& [m, c] : terms_) {
        if (m.exp[a] == 0)
            continue;
        Monomial d = m;
        d.exp[a] -= 1;
        r.add_term(std::move(d), c * m.exp[a]);
    }
    return r;
}

TruncatedSeries TruncatedSeries::taylor_shift(int block) const {
    if (block < 0 || block >= spec_.block_count)
        throw ParseError("taylor_shift block out of range");
    TruncatedSeries r = *this;
    for (int a = 0; a < spec_.base_vars; ++a)
        r += derivative(a) * generator(spec_, order_, block, a);
    return r;
}

TruncatedSeries TruncatedSeries::truncated(int new_order) const {
    if (new_order < 0 || new_order > order_)
        throw ParseError("truncated: bad target order");
    TruncatedSeries r(spec_, new_order);
    for (const auto& [m, c] : terms_)
        if (m.degree() <= new_order)
            r.terms_.emplace(m, c);
    return r;
}

TruncatedSeries TruncatedSeries::homogeneous_part(int d) const {
    TruncatedSeries r(spec_, order_);
    for (const auto& [m, c] : terms_)
        if (m.degree() == d)
            r.terms_.emplace(m, c);
    return r;
}

TruncatedSeries TruncatedSeries::swap_blocks(int i, int j) const {
    if (i < 0 || i >= spec_.block_count || j < 0 || j >= spec_.block_count)
        throw ParseError("swap_blocks index out of range");
    if (i == j)
        return *this;
    for (const auto& [p, q] : spec_.pairs) {
        auto rel = [&](int b) { return b == i ? j : (b == j ? i : b); };
        int rp = rel(p), rq = rel(q);
        if (!spec_.paired(rp, rq))
            throw ParseError("swap_blocks: pair structure not symmetric");
    }
    TruncatedSeries r(spec_, order_);
    for (const auto& [m, c] : terms_) {
        Monomial t = m;
        for (auto& [blk, coord] : t.blocks)
            blk = blk == i ? j : (blk == j ? i : blk);
        int sign = 1;
        if (!normalize_blocks(spec_, t.blocks, sign))
            continue;
        Rational sc = c;
        if (sign < 0)
            sc = -sc;
        r.add_term(std::move(t), sc);
    }
    return r;
}

TruncatedSeries TruncatedSeries::block_coefficient(
    const std::vector<std::pair<int, int>>& part) const {
    std::vector<std::pair<int, int>> want = part;
    std::sort(want.begin(), want.end());
    TruncatedSeries r(spec_, order_);
    for (const auto& [m, c] : terms_)
        if (m.blocks == want)
            r.terms_.emplace(Monomial{m.exp, {}}, c);
    return r;
}

TruncatedSeries TruncatedSeries::compose(
    const std::vector<TruncatedSeries>& args) const {
    if (static_cast<int>(args.size()) != spec_.base_vars)
        throw ParseError("compose: argument count mismatch");
    for (const auto& a : args) {
        require_same(*this, a);
        if (a.constant_term() != 0)
            throw ParseError("compose requires arguments with zero constant term");
    }
    TruncatedSeries r(spec_, order_);
    for (const auto& [m, c] : terms_) {
        TruncatedSeries acc = constant(spec_, order_, c);
        for (int a = 0; a < spec_.base_vars && !acc.is_zero(); ++a)
            for (int k = 0; k < m.exp[a]; ++k)
                acc = acc * args[a];
        if (!m.blocks.empty()) {
            TruncatedSeries g(spec_, order_);
            g.terms_.emplace(Monomial{std::vector<int>(spec_.base_vars, 0),
                                      m.blocks},
                             Rational(1));
            acc = acc * g;
        }
        r += acc;
    }
    return r;
}

TruncatedSeries TruncatedSeries::recenter(const std::vector<Rational>& c) const {
    if (static_cast<int>(c.size()) != spec_.base_vars)
        throw ParseError("recenter: point dimension mismatch");
    TruncatedSeries r(spec_, order_);
    for (const auto& [m, coef] : terms_) {
        // (x_a + c_a)^e expands without truncation loss: the total degree of
        // every expanded term stays <= the original term degree.
        TruncatedSeries acc = constant(spec_, order_, coef);
        for (int a = 0; a < spec_.base_vars && !acc.is_zero(); ++a) {
            if (m.exp[a] == 0)
                continue;
            TruncatedSeries shifted =
                variable(spec_, order_, a) + constant(spec_, order_, c[a]);
            for (int k = 0; k < m.exp[a]; ++k)
                acc = acc * shifted;
        }
        if (!m.blocks.empty()) {
            TruncatedSeries g(spec_, order_);
            g.terms_.emplace(Monomial{std::vector<int>(spec_.base_vars, 0),
                                      m.blocks},
                             Rational(1));
            acc = acc * g;
        }
        r += acc;
    }
    return r;
}

bool TruncatedSeries::operator==(const TruncatedSeries& o) const {
    return spec_ == o.spec_ && order_ == o.order_ && terms_ == o.terms_;
}

nlohmann::json blockspec_to_json(const BlockSpec& spec) {
    nlohmann::json blocks = nlohmann::json::array();
    for (int i = 0; i < spec.block_count; ++i) {
        std::vector<int> partners;
        for (const auto& [p, q] : spec.pairs) {
            if (p == i)
                partners.push_back(q + 1);
            else if (q == i)
                partners.push_back(p + 1);
        }
        std::sort(partners.begin(), partners.end());
        blocks.push_back({{"pairs_with", partners}});
    }
    return blocks;
}

BlockSpec blockspec_from_json(const nlohmann::json& blocks, int vars) {
    if (!blocks.is_array())
        throw ParseError("\"blocks\" must be an array");
    BlockSpec spec;
    spec.base_vars = vars;
    spec.block_count = static_cast<int>(blocks.size());
    for (int i = 0; i < spec.block_count; ++i) {
        const auto& b = blocks.at(i);
        if (!b.is_object())
            throw ParseError("block entry must be an object");
        if (!b.contains("pairs_with"))
            continue;
        for (const auto& jid : b.at("pairs_with")) {
            int j = jid.get<int>();
            if (j < 1 || j > spec.block_count)
                throw ParseError("pairs_with block id out of range");
            if (j == i + 1)
                throw ParseError("a block cannot pair with itself");
            spec.pairs.insert({std::min(i, j - 1), std::max(i, j - 1)});
        }
    }
    return spec;
}

nlohmann::json TruncatedSeries::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [m, c] : terms_) {
        nlohmann::json part = nlohmann::json::array();
        for (const auto& [blk, coord] : m.blocks)
            part.push_back({blk + 1, coord});
        terms.push_back({{"exp", m.exp},
                         {"block_part", part},
                         {"coef", rational_to_string(c)}});
    }
    return {{"vars", spec_.base_vars},
            {"order", order_},
            {"blocks", blockspec_to_json(spec_)},
            {"terms", terms}};
}

TruncatedSeries TruncatedSeries::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("vars") || !j.contains("order") ||
        !j.contains("terms"))
        throw ParseError("series object needs \"vars\", \"order\", \"terms\"");
    int vars = j.at("vars").get<int>();
    int order = j.at("order").get<int>();
    if (vars < 1 || order < 0)
        throw ParseError("bad series shape");
    BlockSpec spec =
        j.contains("blocks")
            ? blockspec_from_json(j.at("blocks"), vars)
            : BlockSpec{vars, 0, {}};
    TruncatedSeries s(spec, order);
    for (const auto& t : j.at("terms")) {
        if (!t.is_object() || !t.contains("exp") || !t.contains("coef"))
            throw ParseError("series term needs \"exp\" and \"coef\"");
        Monomial m;
        m.exp = t.at("exp").get<std::vector<int>>();
        if (static_cast<int>(m.exp.size()) != vars)
            throw ParseError("term exponent length mismatch");
        for (int e : m.exp)
            if (e < 0)
                throw ParseError("negative exponent");
        if (m.degree() > order)
            throw ParseError("term degree exceeds the declared order");
        if (t.contains("block_part"))
            for (const auto& bp : t.at("block_part")) {
                if (!bp.is_array() || bp.size() != 2)
                    throw ParseError("block_part entries are [block, coord]");
                int blk = bp.at(0).get<int>(), coord = bp.at(1).get<int>();
                if (blk < 1 || blk > spec.block_count)
                    throw ParseError("block id out of range");
                if (coord < 0 || coord >= vars)
                    throw ParseError("block coordinate out of range");
                m.blocks.push_back({blk - 1, coord});
            }
        int sign = 1;
        if (!normalize_blocks(spec, m.blocks, sign))
            continue;
        Rational c = rational_from_string(t.at("coef").get<std::string>());
        if (sign < 0)
            c = -c;
        s.add_term(std::move(m), c);
    }
    return s;
}

MatrixSeries::MatrixSeries(const BlockSpec& spec, int order, int rows, int cols)
    : rows_(rows), cols_(cols), spec_(spec), order_(order),
      e_(static_cast<size_t>(rows) * cols, TruncatedSeries(spec, order)) {
    if (rows < 1 || cols < 1)
        throw ParseError("bad matrix shape");
}

MatrixSeries MatrixSeries::identity(const BlockSpec& spec, int order, int n) {
    MatrixSeries m(spec, order, n, n);
    for (int i = 0; i < n; ++i)
        m.at(i, i) = TruncatedSeries::constant(spec, order, Rational(1));
    return m;
}

MatrixSeries MatrixSeries::operator-() const {
    MatrixSeries r = *this;
    for (auto& s : r.e_)
        s = -s;
    return r;
}

MatrixSeries& MatrixSeries::operator+=(const MatrixSeries& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw ParseError("matrix shape mismatch");
    for (size_t i = 0; i < e_.size(); ++i)
        e_[i] += o.e_[i];
    return *this;
}

MatrixSeries& MatrixSeries::operator-=(const MatrixSeries& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw ParseError("matrix shape mismatch");
    for (size_t i = 0; i < e_.size(); ++i)
        e_[i] -= o.e_[i];
    return *this;
}

MatrixSeries operator*(const MatrixSeries& a, const MatrixSeries& b) {
    if (a.cols_ != b.rows_)
        throw ParseError("matrix shape mismatch");
    MatrixSeries r(a.spec_, a.order_, a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
        for (int k = 0; k < a.cols_; ++k) {
            if (a.at(i, k).is_zero())
                continue;
            for (int j = 0; j < b.cols_; ++j)
                r.at(i, j) += a.at(i, k) * b.at(k, j);
        }
    return r;
}

MatrixSeries MatrixSeries::scaled(const TruncatedSeries& s) const {
    MatrixSeries r = *this;
    for (auto& en : r.e_)
        en = en * s;
    return r;
}

MatrixSeries MatrixSeries::derivative(int a) const {
    MatrixSeries r = *this;
    for (auto& en : r.e_)
        en = en.derivative(a);
    return r;
}

MatrixSeries MatrixSeries::taylor_shift(int block) const {
    MatrixSeries r = *this;
    for (auto& en : r.e_)
        en = en.taylor_shift(block);
    return r;
}

MatrixSeries MatrixSeries::truncated(int new_order) const {
    MatrixSeries r(spec_, new_order, rows_, cols_);
    for (size_t i = 0; i < e_.size(); ++i)
        r.e_[i] = e_[i].truncated(new_order);
    return r;
}

MatrixSeries MatrixSeries::swap_blocks(int i, int j) const {
    MatrixSeries r = *this;
    for (auto& en : r.e_)
        en = en.swap_blocks(i, j);
    return r;
}

MatrixSeries MatrixSeries::inverse() const {
    if (rows_ != cols_)
        throw ParseError("inverse of a non-square matrix");
    const int n = rows_;
    // Exact Gauss-Jordan on the constant part.
    std::vector<std::vector<Rational>> aug(n, std::vector<Rational>(2 * n, 0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            aug[i][j] = at(i, j).constant_term();
        aug[i][n + i] = 1;
    }
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (aug[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0)
            throw UntestableError("matrix series has a singular constant term");
        std::swap(aug[col], aug[pivot]);
        Rational inv = Rational(1) / aug[col][col];
        for (int j = 0; j < 2 * n; ++j)
            aug[col][j] *= inv;
        for (int r = 0; r < n; ++r) {
            if (r == col || aug[r][col] == 0)
                continue;
            Rational f = aug[r][col];
            for (int j = 0; j < 2 * n; ++j)
                aug[r][j] -= f * aug[col][j];
        }
    }
    MatrixSeries cinv(spec_, order_, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cinv.at(i, j) = TruncatedSeries::constant(spec_, order_, aug[i][n + j]);
    // M = C (I + P) with P nilpotent, so M^-1 = (sum (-P)^k) C^-1.
    MatrixSeries p = cinv * *this - identity(spec_, order_, n);
    MatrixSeries acc = identity(spec_, order_, n);
    MatrixSeries pw = identity(spec_, order_, n);
    for (int k = 1; k <= order_ + spec_.block_count; ++k) {
        pw = pw * p;
        if (pw.is_zero())
            break;
        if (k % 2 == 1)
            acc -= pw;
        else
            acc += pw;
    }
    return acc * cinv;
}

bool MatrixSeries::is_zero() const {
    for (const auto& en : e_)
        if (!en.is_zero())
            return false;
    return true;
}

bool MatrixSeries::operator==(const MatrixSeries& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_;
}

nlohmann::json MatrixSeries::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& en : e_)
        entries.push_back(en.to_json());
    return {{"rows", rows_}, {"cols", cols_}, {"entries", entries}};
}

MatrixSeries MatrixSeries::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
        !j.contains("entries"))
        throw ParseError("matrix series needs \"rows\", \"cols\", \"entries\"");
    int rows = j.at("rows").get<int>(), cols = j.at("cols").get<int>();
    const auto& entries = j.at("entries");
    if (!entries.is_array() ||
        static_cast<int>(entries.size()) != rows * cols)
        throw ParseError("matrix entry count mismatch");
    std::vector<TruncatedSeries> parsed;
    parsed.reserve(entries.size());
    for (const auto& en : entries)
        parsed.push_back(TruncatedSeries::from_json(en));
    for (const auto& en : parsed)
        if (!(en.spec() == parsed.front().spec()) ||
            en.order() != parsed.front().order())
            throw ParseError("matrix entries disagree on spec/order");
    MatrixSeries m(parsed.front().spec(), parsed.front().order(), rows, cols);
    m.e_ = std::move(parsed);
    return m;
}

std::vector<TruncatedSeries> compose_map(const std::vector<TruncatedSeries>& f,
                                         const std::vector<TruncatedSeries>& args) {
    std::vector<TruncatedSeries> out;
    out.reserve(f.size());
    for (const auto& comp : f)
        out.push_back(comp.compose(args));
    return out;
}

} // namespace ncalc
