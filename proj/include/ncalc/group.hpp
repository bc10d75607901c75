#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace ncalc {

/// Group element payload; interpretation is up to the owning Group.
/// Permutations store image arrays, cyclic elements a single residue,
/// 2x2 matrices their row-major entries.
struct GroupElement {
    std::vector<int64_t> v;
    auto operator<=>(const GroupElement&) const = default;
};

/// Finite group with composition written left-to-right: compose(a, b) is
/// "a then b".  For image-array permutations that means
/// compose(a, b)[i] = b[a[i]].
class Group {
public:
    virtual ~Group() = default;

    virtual std::string kind() const = 0;
    /// {"kind": ..., ...parameters}; the inverse of from_json.
    virtual nlohmann::json to_json() const = 0;

    virtual GroupElement identity() const = 0;
    virtual GroupElement compose(const GroupElement& a, const GroupElement& b) const = 0;
    virtual GroupElement invert(const GroupElement& a) const = 0;
    /// Throws ParseError when e is not a valid element.
    virtual void check(const GroupElement& e) const = 0;

    virtual nlohmann::json element_to_json(const GroupElement& e) const = 0;
    virtual GroupElement element_from_json(const nlohmann::json& j) const = 0;

    /// Uniformly random element; deterministic for a given engine state.
    virtual GroupElement sample(std::mt19937_64& rng) const = 0;

    /// Two group descriptions denote the same group.
    bool same_as(const Group& other) const { return to_json() == other.to_json(); }

    /// Dispatches on {"kind": "symmetric"|"cyclic"|"matrix2"}.
    static std::shared_ptr<const Group> from_json(const nlohmann::json& j);
};

/// S_k on {0, ..., k-1}; elements are image arrays.
std::shared_ptr<const Group> symmetric_group(int degree);
/// Z_m additive; elements are residues in [0, m).
std::shared_ptr<const Group> cyclic_group(int64_t modulus);
/// Invertible 2x2 matrices over Z_p; elements row-major [a, b, c, d].
std::shared_ptr<const Group> matrix2_group(int64_t modulus);

} // namespace ncalc
