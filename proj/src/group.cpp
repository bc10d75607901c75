#include "ncalc/group.hpp"

#include <algorithm>
#include <numeric>

#include "ncalc/errors.hpp"

namespace ncalc {

namespace {

int64_t mod_norm(int64_t x, int64_t m) {
    int64_t r = x % m;
    return r < 0 ? r + m : r;
}

// Extended Euclid; requires gcd(a, m) == 1.
int64_t mod_inverse(int64_t a, int64_t m) {
    int64_t t = 0, new_t = 1, r = m, new_r = mod_norm(a, m);
    while (new_r != 0) {
        int64_t q = r / new_r;
        std::swap(t -= q * new_t, new_t);
        std::swap(r -= q * new_r, new_r);
    }
    if (r != 1)
        throw ParseError("element not invertible mod " + std::to_string(m));
    return mod_norm(t, m);
}

class SymmetricGroup final : public Group {
public:
    explicit SymmetricGroup(int degree) : n_(degree) {
        if (degree < 1)
            throw ParseError("symmetric group: degree must be >= 1");
    }

    std::string kind() const override { return "symmetric"; }

    nlohmann::json to_json() const override {
        return {{"kind", "symmetric"}, {"degree", n_}};
    }

    GroupElement identity() const override {
        GroupElement e;
        e.v.resize(n_);
        std::iota(e.v.begin(), e.v.end(), 0);
        return e;
    }

    GroupElement compose(const GroupElement& a, const GroupElement& b) const override {
        check(a);
        check(b);
        GroupElement out;
        out.v.resize(n_);
        for (int i = 0; i < n_; ++i)
            out.v[i] = b.v[a.v[i]];
        return out;
    }

    GroupElement invert(const GroupElement& a) const override {
        check(a);
        GroupElement out;
        out.v.resize(n_);
        for (int i = 0; i < n_; ++i)
            out.v[a.v[i]] = i;
        return out;
    }

    void check(const GroupElement& e) const override {
        if (static_cast<int>(e.v.size()) != n_)
            throw ParseError("permutation: expected " + std::to_string(n_) + " images");
        std::vector<char> seen(n_, 0);
        for (int64_t img : e.v) {
            if (img < 0 || img >= n_ || seen[img])
                throw ParseError("permutation: not a bijection on 0.." +
                                 std::to_string(n_ - 1));
            seen[img] = 1;
        }
    }

    nlohmann::json element_to_json(const GroupElement& e) const override {
        return nlohmann::json(e.v);
    }

    GroupElement element_from_json(const nlohmann::json& j) const override {
        if (!j.is_array())
            throw ParseError("permutation element: expected an image array");
        GroupElement e;
        for (const auto& x : j) {
            if (!x.is_number_integer())
                throw ParseError("permutation element: images must be integers");
            e.v.push_back(x.get<int64_t>());
        }
        check(e);
        return e;
    }

    GroupElement sample(std::mt19937_64& rng) const override {
        GroupElement e = identity();
        for (int i = n_ - 1; i > 0; --i) {
            auto j = std::uniform_int_distribution<int>(0, i)(rng);
            std::swap(e.v[i], e.v[j]);
        }
        return e;
    }

private:
    int n_;
};

class CyclicGroup final : public Group {
public:
    explicit CyclicGroup(int64_t modulus) : m_(modulus) {
        if (modulus < 1)
            throw ParseError("cyclic group: modulus must be >= 1");
    }

    std::string kind() const override { return "cyclic"; }

    nlohmann::json to_json() const override {
        return {{"kind", "cyclic"}, {"modulus", m_}};
    }

    GroupElement identity() const override { return GroupElement{{0}}; }

    GroupElement compose(const GroupElement& a, const GroupElement& b) const override {
        check(a);
        check(b);
        return GroupElement{{mod_norm(a.v[0] + b.v[0], m_)}};
    }

    GroupElement invert(const GroupElement& a) const override {
        check(a);
        return GroupElement{{mod_norm(-a.v[0], m_)}};
    }

    void check(const GroupElement& e) const override {
        if (e.v.size() != 1 || e.v[0] < 0 || e.v[0] >= m_)
            throw ParseError("cyclic element: expected a residue in [0, " +
                             std::to_string(m_) + ")");
    }

    nlohmann::json element_to_json(const GroupElement& e) const override {
        return nlohmann::json(e.v[0]);
    }

    GroupElement element_from_json(const nlohmann::json& j) const override {
        if (!j.is_number_integer())
            throw ParseError("cyclic element: expected an integer");
        GroupElement e{{mod_norm(j.get<int64_t>(), m_)}};
        return e;
    }

    GroupElement sample(std::mt19937_64& rng) const override {
        return GroupElement{{std::uniform_int_distribution<int64_t>(0, m_ - 1)(rng)}};
    }

private:
    int64_t m_;
};

class Matrix2Group final : public Group {
public:
    explicit Matrix2Group(int64_t modulus) : p_(modulus) {
        if (modulus < 2)
            throw ParseError("matrix2 group: modulus must be >= 2");
    }

    std::string kind() const override { return "matrix2"; }

    nlohmann::json to_json() const override {
        return {{"kind", "matrix2"}, {"modulus", p_}};
    }

    GroupElement identity() const override { return GroupElement{{1, 0, 0, 1}}; }

    GroupElement compose(const GroupElement& a, const GroupElement& b) const override {
        check(a);
        check(b);
        const auto& x = a.v;
        const auto& y = b.v;
        return GroupElement{{mod_norm(x[0] * y[0] + x[1] * y[2], p_),
                             mod_norm(x[0] * y[1] + x[1] * y[3], p_),
                             mod_norm(x[2] * y[0] + x[3] * y[2], p_),
                             mod_norm(x[2] * y[1] + x[3] * y[3], p_)}};
    }

    GroupElement invert(const GroupElement& a) const override {
        check(a);
        int64_t det = mod_norm(a.v[0] * a.v[3] - a.v[1] * a.v[2], p_);
        int64_t di = mod_inverse(det, p_);
        return GroupElement{{mod_norm(a.v[3] * di, p_), mod_norm(-a.v[1] * di, p_),
                             mod_norm(-a.v[2] * di, p_), mod_norm(a.v[0] * di, p_)}};
    }

    void check(const GroupElement& e) const override {
        if (e.v.size() != 4)
            throw ParseError("matrix2 element: expected 4 row-major entries");
        for (int64_t x : e.v)
            if (x < 0 || x >= p_)
                throw ParseError("matrix2 element: entries must lie in [0, " +
                                 std::to_string(p_) + ")");
        int64_t det = mod_norm(e.v[0] * e.v[3] - e.v[1] * e.v[2], p_);
        int64_t g = std::gcd(det, p_);
        if (g != 1)
            throw ParseError("matrix2 element: determinant not invertible mod " +
                             std::to_string(p_));
    }

    nlohmann::json element_to_json(const GroupElement& e) const override {
        return nlohmann::json(e.v);
    }

    GroupElement element_from_json(const nlohmann::json& j) const override {
        if (!j.is_array() || j.size() != 4)
            throw ParseError("matrix2 element: expected [a, b, c, d]");
        GroupElement e;
        for (const auto& x : j) {
            if (!x.is_number_integer())
                throw ParseError("matrix2 element: entries must be integers");
            e.v.push_back(mod_norm(x.get<int64_t>(), p_));
        }
        check(e);
        return e;
    }

    GroupElement sample(std::mt19937_64& rng) const override {
        std::uniform_int_distribution<int64_t> dist(0, p_ - 1);
        for (;;) {
            GroupElement e{{dist(rng), dist(rng), dist(rng), dist(rng)}};
            int64_t det = mod_norm(e.v[0] * e.v[3] - e.v[1] * e.v[2], p_);
            if (std::gcd(det, p_) == 1)
                return e;
        }
    }

private:
    int64_t p_;
};

} // namespace

std::shared_ptr<const Group> symmetric_group(int degree) {
    return std::make_shared<SymmetricGroup>(degree);
}

std::shared_ptr<const Group> cyclic_group(int64_t modulus) {
    return std::make_shared<CyclicGroup>(modulus);
}

std::shared_ptr<const Group> matrix2_group(int64_t modulus) {
    return std::make_shared<Matrix2Group>(modulus);
}

std::shared_ptr<const Group> Group::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ParseError("group: expected object with a \"kind\" string");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "symmetric") {
        if (!j.contains("degree") || !j.at("degree").is_number_integer())
            throw ParseError("group: symmetric needs an integer \"degree\"");
        return symmetric_group(j.at("degree").get<int>());
    }
    if (kind == "cyclic") {
        if (!j.contains("modulus") || !j.at("modulus").is_number_integer())
            throw ParseError("group: cyclic needs an integer \"modulus\"");
        return cyclic_group(j.at("modulus").get<int64_t>());
    }
    if (kind == "matrix2") {
        if (!j.contains("modulus") || !j.at("modulus").is_number_integer())
            throw ParseError("group: matrix2 needs an integer \"modulus\"");
        return matrix2_group(j.at("modulus").get<int64_t>());
    }
    throw ParseError("group: unknown kind \"" + kind + "\"");
}

} // namespace ncalc
