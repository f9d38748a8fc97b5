#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "caps.hpp"
#include "error.hpp"

namespace spacelab {

class Poset;
using PosetPtr = std::shared_ptr<const Poset>;

/// Finite partial order on canonically indexed elements 0..n-1.
///
/// Posets are immutable and always owned through PosetPtr. The full relation
/// matrix is stored; for posets of at most 64 elements the rows are also kept
/// as bit masks so that up-set computations run on words.
class Poset : public std::enable_shared_from_this<Poset> {
    struct PrivateTag {};

public:
    Poset(PrivateTag, std::vector<std::string> names, std::vector<std::uint8_t> leq, std::string label)
        : names_(std::move(names))
        , leq_(std::move(leq))
        , label_(std::move(label))
    {
        const std::size_t n = names_.size();
        if (n <= kMaskBits) {
            up_.assign(n, 0);
            down_.assign(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (leq_[i * n + j]) {
                        up_[i] |= Mask{1} << j;
                        down_[j] |= Mask{1} << i;
                    }
                }
            }
        }
        std::vector<std::size_t> below(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) below[j] += leq_[i * n + j];
        }
        linear_.resize(n);
        std::iota(linear_.begin(), linear_.end(), std::size_t{0});
        std::stable_sort(linear_.begin(), linear_.end(),
                         [&](std::size_t a, std::size_t b) { return below[a] < below[b]; });
    }

    /// Builds a poset from a relation matrix that is already known to be a
    /// partial order. Constructions inside the library use this; user input
    /// goes through make_poset / poset_from_relation.
    static PosetPtr trusted(std::vector<std::string> names, std::vector<std::uint8_t> leq, std::string label = {})
    {
        return std::make_shared<const Poset>(PrivateTag{}, std::move(names), std::move(leq), std::move(label));
    }

    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }

    bool leq(std::size_t i, std::size_t j) const { return leq_[i * size() + j] != 0; }
    bool lt(std::size_t i, std::size_t j) const { return i != j && leq(i, j); }
    bool comparable(std::size_t i, std::size_t j) const { return leq(i, j) || leq(j, i); }

    const std::string& name(std::size_t i) const { return names_[i]; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<std::uint8_t>& relation() const { return leq_; }
    const std::string& label() const { return label_; }

    std::optional<std::size_t> index_of(const std::string& n) const
    {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == n) return i;
        }
        return std::nullopt;
    }

    bool fits_mask() const { return size() <= kMaskBits; }

    void require_mask() const
    {
        if (!fits_mask()) {
            throw Error(ErrorKind::SizeCap, "up-set bitsets need a base of at most 64 elements, got " +
                                                std::to_string(size()));
        }
    }

    Mask up_mask(std::size_t i) const { return up_[i]; }
    Mask down_mask(std::size_t i) const { return down_[i]; }

    Mask full_mask() const
    {
        require_mask();
        return size() == kMaskBits ? ~Mask{0} : ((Mask{1} << size()) - 1);
    }

    bool is_up_set(Mask m) const
    {
        for (Mask rest = m; rest; rest &= rest - 1) {
            auto i = static_cast<std::size_t>(std::countr_zero(rest));
            if ((up_[i] & ~m) != 0) return false;
        }
        return true;
    }

    bool is_down_set(Mask m) const
    {
        for (Mask rest = m; rest; rest &= rest - 1) {
            auto i = static_cast<std::size_t>(std::countr_zero(rest));
            if ((down_[i] & ~m) != 0) return false;
        }
        return true;
    }

    Mask up_closure(Mask m) const
    {
        Mask out = 0;
        for (Mask rest = m; rest; rest &= rest - 1) out |= up_[static_cast<std::size_t>(std::countr_zero(rest))];
        return out;
    }

    Mask down_closure(Mask m) const
    {
        Mask out = 0;
        for (Mask rest = m; rest; rest &= rest - 1) out |= down_[static_cast<std::size_t>(std::countr_zero(rest))];
        return out;
    }

    /// Elements sorted so that every element appears after everything below it.
    const std::vector<std::size_t>& linear_extension() const { return linear_; }

    bool is_discrete() const
    {
        for (std::size_t i = 0; i < size(); ++i) {
            for (std::size_t j = 0; j < size(); ++j) {
                if (i != j && leq(i, j)) return false;
            }
        }
        return true;
    }

    /// Same names and same order relation.
    bool same_as(const Poset& other) const
    {
        return this == &other || (names_ == other.names_ && leq_ == other.leq_);
    }

    PosetPtr opposite() const
    {
        const std::size_t n = size();
        std::vector<std::uint8_t> rel(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) rel[i * n + j] = leq_[j * n + i];
        }
        return trusted(names_, std::move(rel), label_.empty() ? std::string{} : label_ + "^op");
    }

    PosetPtr relabeled(std::string label) const { return trusted(names_, leq_, std::move(label)); }

    nlohmann::json element_json(Mask m) const
    {
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t i = 0; i < size() && i < kMaskBits; ++i) {
            if (m & (Mask{1} << i)) arr.push_back(names_[i]);
        }
        return arr;
    }

    std::string mask_name(Mask m) const
    {
        std::string s = "{";
        bool first = true;
        for (std::size_t i = 0; i < size() && i < kMaskBits; ++i) {
            if (m & (Mask{1} << i)) {
                if (!first) s += ",";
                s += names_[i];
                first = false;
            }
        }
        return s + "}";
    }

    /// Type-erased per-poset cache for the up-set lattice (see upset_lattice.hpp).
    template <class T, class Build>
    std::shared_ptr<const T> cached(Build&& build) const
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        if (!cache_) cache_ = std::shared_ptr<const void>(build());
        return std::shared_ptr<const T>(shared_from_this(), static_cast<const T*>(cache_.get()));
    }

private:
    std::vector<std::string> names_;
    std::vector<std::uint8_t> leq_;
    std::string label_;
    std::vector<Mask> up_;
    std::vector<Mask> down_;
    std::vector<std::size_t> linear_;
    mutable std::mutex cache_mutex_;
    mutable std::shared_ptr<const void> cache_;
};

inline bool same_poset(const PosetPtr& a, const PosetPtr& b)
{
    return a == b || (a && b && a->same_as(*b));
}

/// Validates a full relation and builds the poset.
inline PosetPtr poset_from_relation(std::vector<std::string> names, std::vector<std::uint8_t> leq,
                                    std::string label = {})
{
    const std::size_t n = names.size();
    {
        std::unordered_set<std::string> seen;
        for (const auto& nm : names) {
            if (!seen.insert(nm).second) throw Error(ErrorKind::DuplicateName, "duplicate element name '" + nm + "'");
        }
    }
    if (leq.size() != n * n) throw Error(ErrorKind::ShapeMismatch, "relation matrix has wrong size");
    for (std::size_t i = 0; i < n; ++i) {
        if (!leq[i * n + i]) throw Error(ErrorKind::LawViolation, "relation is not reflexive at " + names[i]);
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && leq[i * n + j] && leq[j * n + i]) {
                throw Error(ErrorKind::CycleDetected, names[i] + " and " + names[j] + " are mutually below each other",
                            {{"pair", {names[i], names[j]}}});
            }
            for (std::size_t k = 0; k < n; ++k) {
                if (leq[i * n + j] && leq[j * n + k] && !leq[i * n + k]) {
                    throw Error(ErrorKind::LawViolation, "relation is not transitive at " + names[i] + "," + names[j] +
                                                             "," + names[k]);
                }
            }
        }
    }
    return Poset::trusted(std::move(names), std::move(leq), std::move(label));
}

/// Poset generated by cover (or arbitrary) pairs i <= j, closed reflexively
/// and transitively.
inline PosetPtr make_poset(std::vector<std::string> names, const std::vector<std::pair<std::size_t, std::size_t>>& covers,
                           std::string label = {})
{
    const std::size_t n = names.size();
    {
        std::unordered_set<std::string> seen;
        for (const auto& nm : names) {
            if (!seen.insert(nm).second) throw Error(ErrorKind::DuplicateName, "duplicate element name '" + nm + "'");
        }
    }
    std::vector<std::uint8_t> rel(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) rel[i * n + i] = 1;
    for (auto [a, b] : covers) {
        if (a >= n || b >= n) throw Error(ErrorKind::UnresolvedReference, "cover pair index out of range");
        rel[a * n + b] = 1;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!rel[i * n + k]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (rel[k * n + j]) rel[i * n + j] = 1;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rel[i * n + j] && rel[j * n + i]) {
                throw Error(ErrorKind::CycleDetected, names[i] + " and " + names[j] + " lie on a cycle",
                            {{"pair", {names[i], names[j]}}});
            }
        }
    }
    return Poset::trusted(std::move(names), std::move(rel), std::move(label));
}

/// Convenience overload taking cover pairs by element name.
inline PosetPtr make_poset_named(std::vector<std::string> names,
                                 const std::vector<std::pair<std::string, std::string>>& covers, std::string label = {})
{
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    auto find = [&](const std::string& s) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == s) return i;
        }
        throw Error(ErrorKind::UnresolvedReference, "unknown element '" + s + "'");
    };
    for (const auto& [a, b] : covers) idx.emplace_back(find(a), find(b));
    return make_poset(std::move(names), idx, std::move(label));
}

inline PosetPtr empty_poset() { return Poset::trusted({}, {}, "0"); }

inline PosetPtr point() { return Poset::trusted({"*"}, {1}, "1"); }

/// n-element chain 0 < 1 < ... < n-1.
inline PosetPtr chain(std::size_t n)
{
    std::vector<std::string> names;
    std::vector<std::pair<std::size_t, std::size_t>> covers;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back(std::to_string(i));
        if (i > 0) covers.emplace_back(i - 1, i);
    }
    return make_poset(std::move(names), covers, "C" + std::to_string(n));
}

/// n-element antichain. Two-element antichain uses names a, b.
inline PosetPtr discrete(std::size_t n)
{
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back(n <= 26 ? std::string(1, static_cast<char>('a' + i)) : "d" + std::to_string(i));
    }
    return make_poset(std::move(names), {}, "D" + std::to_string(n));
}

/// The Sierpinski poset: the 2-chain 0 < 1.
inline PosetPtr sierpinski() { return chain(2)->relabeled("S"); }

/// Monotone map between posets, stored as an index table.
class MonotoneMap {
public:
    MonotoneMap() = default;

    /// Validating constructor.
    MonotoneMap(PosetPtr dom, PosetPtr cod, std::vector<std::size_t> assign)
        : dom_(std::move(dom))
        , cod_(std::move(cod))
        , assign_(std::move(assign))
    {
        if (assign_.size() != dom_->size()) throw Error(ErrorKind::ShapeMismatch, "assignment is not total");
        for (auto y : assign_) {
            if (y >= cod_->size()) throw Error(ErrorKind::ShapeMismatch, "assignment leaves the codomain");
        }
        for (std::size_t i = 0; i < dom_->size(); ++i) {
            for (std::size_t j = 0; j < dom_->size(); ++j) {
                if (dom_->leq(i, j) && !cod_->leq(assign_[i], assign_[j])) {
                    throw Error(ErrorKind::NotMonotone,
                                dom_->name(i) + " <= " + dom_->name(j) + " but images are not ordered",
                                {{"pair", {dom_->name(i), dom_->name(j)}},
                                 {"images", {cod_->name(assign_[i]), cod_->name(assign_[j])}}});
                }
            }
        }
    }

    /// Skips validation; for tables produced by the enumerators.
    static MonotoneMap trusted(PosetPtr dom, PosetPtr cod, std::vector<std::size_t> assign)
    {
        MonotoneMap m;
        m.dom_ = std::move(dom);
        m.cod_ = std::move(cod);
        m.assign_ = std::move(assign);
        return m;
    }

    const PosetPtr& dom() const { return dom_; }
    const PosetPtr& cod() const { return cod_; }
    const std::vector<std::size_t>& assign() const { return assign_; }
    std::size_t operator()(std::size_t x) const { return assign_[x]; }

    /// Image of a set of domain elements (no closure).
    Mask image(Mask m) const
    {
        Mask out = 0;
        for (Mask rest = m; rest; rest &= rest - 1) {
            out |= Mask{1} << assign_[static_cast<std::size_t>(std::countr_zero(rest))];
        }
        return out;
    }

    /// Preimage of a set of codomain elements.
    Mask preimage(Mask m) const
    {
        Mask out = 0;
        for (std::size_t x = 0; x < assign_.size(); ++x) {
            if (m & (Mask{1} << assign_[x])) out |= Mask{1} << x;
        }
        return out;
    }

    bool is_injective() const
    {
        std::vector<char> hit(cod_->size(), 0);
        for (auto y : assign_) {
            if (hit[y]) return false;
            hit[y] = 1;
        }
        return true;
    }

    bool is_surjective() const
    {
        std::vector<char> hit(cod_->size(), 0);
        for (auto y : assign_) hit[y] = 1;
        return std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
    }

    /// x <= x' iff f(x) <= f(x').
    bool is_order_embedding() const
    {
        for (std::size_t i = 0; i < dom_->size(); ++i) {
            for (std::size_t j = 0; j < dom_->size(); ++j) {
                if (dom_->leq(i, j) != cod_->leq(assign_[i], assign_[j])) return false;
            }
        }
        return true;
    }

    bool is_iso() const { return is_surjective() && is_order_embedding(); }

    nlohmann::json to_json() const
    {
        nlohmann::json j = nlohmann::json::object();
        for (std::size_t x = 0; x < assign_.size(); ++x) j[dom_->name(x)] = cod_->name(assign_[x]);
        return j;
    }

    friend bool operator==(const MonotoneMap& a, const MonotoneMap& b)
    {
        return a.assign_ == b.assign_ && same_poset(a.dom_, b.dom_) && same_poset(a.cod_, b.cod_);
    }

private:
    PosetPtr dom_;
    PosetPtr cod_;
    std::vector<std::size_t> assign_;
};

inline MonotoneMap identity(const PosetPtr& x)
{
    std::vector<std::size_t> a(x->size());
    std::iota(a.begin(), a.end(), std::size_t{0});
    return MonotoneMap::trusted(x, x, std::move(a));
}

inline MonotoneMap constant_map(const PosetPtr& dom, const PosetPtr& cod, std::size_t y)
{
    return MonotoneMap::trusted(dom, cod, std::vector<std::size_t>(dom->size(), y));
}

/// g after f.
inline MonotoneMap compose(const MonotoneMap& g, const MonotoneMap& f)
{
    if (!same_poset(f.cod(), g.dom())) throw Error(ErrorKind::ShapeMismatch, "maps are not composable");
    std::vector<std::size_t> a(f.dom()->size());
    for (std::size_t x = 0; x < a.size(); ++x) a[x] = g(f(x));
    return MonotoneMap::trusted(f.dom(), g.cod(), std::move(a));
}

/// Pointwise order of parallel maps: f(x) <= g(x) for all x.
inline bool pointwise_leq(const MonotoneMap& f, const MonotoneMap& g)
{
    for (std::size_t x = 0; x < f.dom()->size(); ++x) {
        if (!f.cod()->leq(f(x), g(x))) return false;
    }
    return true;
}

inline MonotoneMap inverse(const MonotoneMap& iso)
{
    if (!iso.is_iso()) throw Error(ErrorKind::ShapeMismatch, "map is not an isomorphism");
    std::vector<std::size_t> a(iso.cod()->size());
    for (std::size_t x = 0; x < iso.dom()->size(); ++x) a[iso(x)] = x;
    return MonotoneMap::trusted(iso.cod(), iso.dom(), std::move(a));
}

/// Finds an order isomorphism X -> Y by exhaustive search over bijections.
inline std::optional<MonotoneMap> find_isomorphism(const PosetPtr& x, const PosetPtr& y)
{
    if (x->size() != y->size()) return std::nullopt;
    const std::size_t n = x->size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j < n && ok; ++j) ok = x->leq(i, j) == y->leq(perm[i], perm[j]);
        }
        if (ok) return MonotoneMap::trusted(x, y, perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

inline bool is_isomorphic(const PosetPtr& x, const PosetPtr& y) { return find_isomorphism(x, y).has_value(); }

/// Reads a map as the same function between the opposite posets.
inline MonotoneMap opposite(const MonotoneMap& f, const PosetPtr& dom_op, const PosetPtr& cod_op)
{
    return MonotoneMap::trusted(dom_op, cod_op, f.assign());
}

} // namespace spacelab
