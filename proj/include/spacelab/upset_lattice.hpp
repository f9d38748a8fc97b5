#pragma once

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>
#include <set>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "certificate.hpp"
#include "hom.hpp"
#include "limits.hpp"
#include "poset.hpp"

namespace spacelab {

class UpSetLattice;
using LatticePtr = std::shared_ptr<const UpSetLattice>;

/// The lattice S^X of up-sets of a finite poset X, ordered by inclusion.
///
/// A map X -> S corresponds to the up-set it sends to the top point of S.
/// Elements are listed by (cardinality, bit pattern), so index 0 is the empty
/// set and the last index is the whole of X.
class UpSetLattice {
public:
    UpSetLattice(const Poset* base, std::vector<Mask> elements)
        : base_(base)
        , elements_(std::move(elements))
    {
        index_.reserve(elements_.size() * 2);
        for (std::size_t i = 0; i < elements_.size(); ++i) index_.emplace(elements_[i], i);
    }

    PosetPtr base() const { return base_->shared_from_this(); }
    const Poset& base_ref() const { return *base_; }

    std::size_t size() const { return elements_.size(); }
    Mask mask(std::size_t i) const { return elements_[i]; }
    const std::vector<Mask>& masks() const { return elements_; }

    std::optional<std::size_t> find(Mask m) const
    {
        auto it = index_.find(m);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t index_of(Mask m) const
    {
        auto it = index_.find(m);
        if (it == index_.end()) {
            throw Error(ErrorKind::ShapeMismatch, base_->mask_name(m) + " is not an up-set of " + base_->label());
        }
        return it->second;
    }

    std::size_t bottom() const { return 0; }
    std::size_t top() const { return elements_.size() - 1; }

    bool leq(std::size_t i, std::size_t j) const { return (elements_[i] & ~elements_[j]) == 0; }
    std::size_t meet(std::size_t i, std::size_t j) const { return index_of(elements_[i] & elements_[j]); }
    std::size_t join(std::size_t i, std::size_t j) const { return index_of(elements_[i] | elements_[j]); }

    std::string element_name(std::size_t i) const { return base_->mask_name(elements_[i]); }
    nlohmann::json element_json(std::size_t i) const { return base_->element_json(elements_[i]); }

    /// Same underlying poset (structurally).
    bool same_as(const UpSetLattice& other) const { return this == &other || base_->same_as(*other.base_); }

    /// The lattice as a poset in its own right (elements named by their members).
    PosetPtr as_poset() const
    {
        std::lock_guard<std::mutex> lock(poset_mutex_);
        if (!poset_) {
            const std::size_t n = size();
            std::vector<std::string> names(n);
            std::vector<std::uint8_t> rel(n * n);
            for (std::size_t i = 0; i < n; ++i) {
                names[i] = element_name(i);
                for (std::size_t j = 0; j < n; ++j) rel[i * n + j] = leq(i, j);
            }
            poset_ = Poset::trusted(std::move(names), std::move(rel), "S^" + label_of(base()));
        }
        return poset_;
    }

private:
    const Poset* base_;
    std::vector<Mask> elements_;
    std::unordered_map<Mask, std::size_t> index_;
    mutable std::mutex poset_mutex_;
    mutable PosetPtr poset_;
};

/// Builds (or fetches the cached) S^X.
inline LatticePtr upset_lattice(const PosetPtr& x, const Caps& caps = default_caps())
{
    x->require_mask();
    return x->cached<UpSetLattice>([&]() -> std::shared_ptr<const UpSetLattice> {
        std::vector<Mask> found;
        const auto& order = x->linear_extension();
        const std::size_t n = x->size();
        // choose membership from the top of the linear extension downwards
        std::function<void(std::size_t, Mask)> rec = [&](std::size_t k, Mask cur) {
            if (k == n) {
                if (found.size() >= caps.max_lattice) {
                    throw Error(ErrorKind::SizeCap, "up-set lattice of " + label_of(x) + " exceeds " +
                                                        std::to_string(caps.max_lattice) + " elements");
                }
                found.push_back(cur);
                return;
            }
            const std::size_t el = order[n - 1 - k];
            rec(k + 1, cur);
            const Mask strictly_above = x->up_mask(el) & ~(Mask{1} << el);
            if ((strictly_above & ~cur) == 0) rec(k + 1, cur | (Mask{1} << el));
        };
        rec(0, 0);
        std::sort(found.begin(), found.end(), [](Mask a, Mask b) {
            int pa = std::popcount(a), pb = std::popcount(b);
            return pa != pb ? pa < pb : a < b;
        });
        return std::make_shared<const UpSetLattice>(x.get(), std::move(found));
    });
}

// ---------------------------------------------------------------------------
// Lattice maps
// ---------------------------------------------------------------------------

enum class Law { Monotone, Bottom, Top, Meet, Join };

inline std::string_view to_string(Law law)
{
    switch (law) {
    case Law::Monotone: return "monotone";
    case Law::Bottom: return "preserves-bottom";
    case Law::Top: return "preserves-top";
    case Law::Meet: return "preserves-binary-meet";
    case Law::Join: return "preserves-binary-join";
    }
    return "?";
}

struct LatticeFlags {
    bool monotone = true;
    bool preserves_bottom = false;
    bool preserves_top = false;
    bool preserves_meet = false;
    bool preserves_join = false;

    /// Join-semilattice homomorphism, bottom included.
    bool join_hom() const { return preserves_bottom && preserves_join; }
    /// Meet-semilattice homomorphism, top included.
    bool meet_hom() const { return preserves_top && preserves_meet; }
    bool dlat_hom() const { return join_hom() && meet_hom(); }
};

/// A monotone map S^X -> S^Y, i.e. a natural transformation between the
/// representable presheaves, stored by its action on up-set indices.
class LatticeMap {
public:
    LatticeMap() = default;

    /// Rejects non-monotone assignments with ErrorKind::NotMonotone.
    LatticeMap(LatticePtr dom, LatticePtr cod, std::vector<std::size_t> assign)
        : dom_(std::move(dom))
        , cod_(std::move(cod))
        , assign_(std::move(assign))
    {
        if (assign_.size() != dom_->size()) throw Error(ErrorKind::ShapeMismatch, "lattice map is not total");
        for (auto v : assign_) {
            if (v >= cod_->size()) throw Error(ErrorKind::ShapeMismatch, "lattice map leaves its codomain");
        }
        if (auto w = find_violation(Law::Monotone)) {
            throw Error(ErrorKind::NotMonotone, "lattice map is not monotone", *w);
        }
        compute_flags();
    }

    /// For assignments known to be monotone (enumerators, closed formulas).
    static LatticeMap trusted(LatticePtr dom, LatticePtr cod, std::vector<std::size_t> assign)
    {
        LatticeMap m;
        m.dom_ = std::move(dom);
        m.cod_ = std::move(cod);
        m.assign_ = std::move(assign);
        m.compute_flags();
        return m;
    }

    /// Builds a map from a function on masks.
    template <class F>
    static LatticeMap from_function(LatticePtr dom, LatticePtr cod, F&& f)
    {
        std::vector<std::size_t> a(dom->size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = cod->index_of(f(dom->mask(i)));
        return LatticeMap(std::move(dom), std::move(cod), std::move(a));
    }

    const LatticePtr& dom() const { return dom_; }
    const LatticePtr& cod() const { return cod_; }
    const std::vector<std::size_t>& assign() const { return assign_; }
    const LatticeFlags& flags() const { return flags_; }

    std::size_t operator()(std::size_t i) const { return assign_[i]; }
    Mask apply(Mask m) const { return cod_->mask(assign_[dom_->index_of(m)]); }

    /// Witness for a failed law, or nullopt when the law holds.
    ///
    /// Monotonicity is checked on covering pairs U < U + {x}. Binary joins are
    /// checked by rebuilding each U as a union of principal up-sets and binary
    /// meets by rebuilding it as an intersection of complements of principal
    /// down-sets; a failed step is itself a pair witness.
    std::optional<nlohmann::json> find_violation(Law law) const
    {
        const auto& d = *dom_;
        const auto& c = *cod_;
        const Poset& x = d.base_ref();
        const std::size_t n = d.size();
        const std::size_t k = x.size();
        const Mask full = k == 0 ? Mask{0} : x.full_mask();
        switch (law) {
        case Law::Monotone:
            for (std::size_t i = 0; i < n; ++i) {
                const Mask u = d.mask(i);
                for (std::size_t e = 0; e < k; ++e) {
                    const Mask bit = Mask{1} << e;
                    if ((u & bit) || (x.up_mask(e) & ~bit & ~u)) continue;
                    const std::size_t j = d.index_of(u | bit);
                    if (!c.leq(assign_[i], assign_[j])) {
                        return nlohmann::json{{"law", "monotone"}, {"U", d.element_json(i)}, {"V", d.element_json(j)}};
                    }
                }
            }
            return std::nullopt;
        case Law::Bottom:
            if (assign_[d.bottom()] != c.bottom()) {
                return nlohmann::json{{"law", "preserves-bottom"}, {"image", c.element_json(assign_[d.bottom()])}};
            }
            return std::nullopt;
        case Law::Top:
            if (assign_[d.top()] != c.top()) {
                return nlohmann::json{{"law", "preserves-top"}, {"image", c.element_json(assign_[d.top()])}};
            }
            return std::nullopt;
        case Law::Meet:
        case Law::Join: {
            const bool is_join = law == Law::Join;
            std::vector<std::size_t> piece(k);
            for (std::size_t e = 0; e < k; ++e) {
                piece[e] = d.index_of(is_join ? x.up_mask(e) : (full & ~x.down_mask(e)));
            }
            for (std::size_t i = 0; i < n; ++i) {
                const Mask u = d.mask(i);
                const Mask pts = is_join ? u : (full & ~u);
                bool first = true;
                std::size_t acc = 0;
                for (std::size_t e = 0; e < k; ++e) {
                    if (!(pts & (Mask{1} << e))) continue;
                    if (first) {
                        acc = piece[e];
                        first = false;
                        continue;
                    }
                    const Mask a = d.mask(acc), b = d.mask(piece[e]);
                    const std::size_t combined = d.index_of(is_join ? (a | b) : (a & b));
                    const Mask lhs = c.mask(assign_[combined]);
                    const Mask rhs = is_join ? (c.mask(assign_[acc]) | c.mask(assign_[piece[e]]))
                                             : (c.mask(assign_[acc]) & c.mask(assign_[piece[e]]));
                    if (lhs != rhs) {
                        return nlohmann::json{{"law", std::string(to_string(law))},
                                              {"U", d.element_json(acc)},
                                              {"V", d.element_json(piece[e])},
                                              {"image_of_combination", c.base_ref().element_json(lhs)},
                                              {"combination_of_images", c.base_ref().element_json(rhs)}};
                    }
                    acc = combined;
                }
            }
            return std::nullopt;
        }
        }
        return std::nullopt;
    }

    nlohmann::json to_json() const
    {
        nlohmann::json j = nlohmann::json::array();
        for (std::size_t i = 0; i < assign_.size(); ++i) {
            j.push_back(nlohmann::json::array({dom_->element_json(i), cod_->element_json(assign_[i])}));
        }
        return j;
    }

    friend bool operator==(const LatticeMap& a, const LatticeMap& b)
    {
        return a.assign_ == b.assign_ && a.dom_->same_as(*b.dom_) && a.cod_->same_as(*b.cod_);
    }

private:
    void compute_flags()
    {
        flags_.monotone = true;
        flags_.preserves_bottom = !find_violation(Law::Bottom);
        flags_.preserves_top = !find_violation(Law::Top);
        flags_.preserves_meet = !find_violation(Law::Meet);
        flags_.preserves_join = !find_violation(Law::Join);
    }

    LatticePtr dom_;
    LatticePtr cod_;
    std::vector<std::size_t> assign_;
    LatticeFlags flags_;
};

inline LatticeMap identity_map(const LatticePtr& l)
{
    std::vector<std::size_t> a(l->size());
    std::iota(a.begin(), a.end(), std::size_t{0});
    return LatticeMap::trusted(l, l, std::move(a));
}

/// beta after alpha.
inline LatticeMap compose(const LatticeMap& beta, const LatticeMap& alpha)
{
    if (!alpha.cod()->same_as(*beta.dom())) throw Error(ErrorKind::ShapeMismatch, "lattice maps are not composable");
    std::vector<std::size_t> a(alpha.dom()->size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = beta(alpha(i));
    return LatticeMap::trusted(alpha.dom(), beta.cod(), std::move(a));
}

inline bool pointwise_leq(const LatticeMap& a, const LatticeMap& b)
{
    for (std::size_t i = 0; i < a.dom()->size(); ++i) {
        if (!a.cod()->leq(a(i), b(i))) return false;
    }
    return true;
}

/// S^f : S^Y -> S^X, V |-> f^{-1}(V).
inline LatticeMap inverse_image(const MonotoneMap& f, const Caps& caps = default_caps())
{
    auto sy = upset_lattice(f.cod(), caps);
    auto sx = upset_lattice(f.dom(), caps);
    std::vector<std::size_t> a(sy->size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = sx->index_of(f.preimage(sy->mask(i)));
    return LatticeMap::trusted(sy, sx, std::move(a));
}

/// The left adjoint of S^f: U |-> up-closure of f(U). Adjointness is
/// certified separately by check_adjoint.
inline LatticeMap direct_image(const MonotoneMap& f, const Caps& caps = default_caps())
{
    auto sx = upset_lattice(f.dom(), caps);
    auto sy = upset_lattice(f.cod(), caps);
    std::vector<std::size_t> a(sx->size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = sy->index_of(f.cod()->up_closure(f.image(sx->mask(i))));
    return LatticeMap::trusted(sx, sy, std::move(a));
}

/// Certifies l -| r: l r <= id_M and id_L <= r l pointwise.
inline Certificate check_adjoint(const LatticeMap& l, const LatticeMap& r)
{
    if (!l.cod()->same_as(*r.dom()) || !r.cod()->same_as(*l.dom())) {
        throw Error(ErrorKind::ShapeMismatch, "adjoint pair has incompatible shapes");
    }
    Certificate cert("adjunction");
    const auto& L = *l.dom();
    const auto& M = *l.cod();
    std::optional<nlohmann::json> counit_witness, unit_witness;
    for (std::size_t m = 0; m < M.size() && !counit_witness; ++m) {
        if (!M.leq(l(r(m)), m)) counit_witness = nlohmann::json{{"V", M.element_json(m)}, {"l_r_V", M.element_json(l(r(m)))}};
    }
    for (std::size_t u = 0; u < L.size() && !unit_witness; ++u) {
        if (!L.leq(u, r(l(u)))) unit_witness = nlohmann::json{{"U", L.element_json(u)}, {"r_l_U", L.element_json(r(l(u)))}};
    }
    cert.require("counit:l.r<=id", !counit_witness, counit_witness.value_or(nlohmann::json{}));
    cert.require("unit:id<=r.l", !unit_witness, unit_witness.value_or(nlohmann::json{}));
    return cert;
}

/// Frobenius condition for f with its computed left adjoint:
/// E(U meet S^f V) = E(U) meet V for all U in S^X, V in S^Y.
inline Certificate frobenius_holds(const MonotoneMap& f, const Caps& caps = default_caps())
{
    Certificate cert("frobenius");
    auto ex = direct_image(f, caps);
    auto inv = inverse_image(f, caps);
    const auto& sx = *ex.dom();
    const auto& sy = *ex.cod();
    for (std::size_t u = 0; u < sx.size(); ++u) {
        for (std::size_t v = 0; v < sy.size(); ++v) {
            Mask lhs = sy.mask(ex(sx.index_of(sx.mask(u) & sx.mask(inv(v)))));
            Mask rhs = sy.mask(ex(u)) & sy.mask(v);
            if (lhs != rhs) {
                cert.require("frobenius-equation", false,
                             {{"U", sx.element_json(u)},
                              {"V", sy.element_json(v)},
                              {"lhs", f.cod()->element_json(lhs)},
                              {"rhs", f.cod()->element_json(rhs)}});
                return cert;
            }
        }
    }
    cert.require("frobenius-equation", true);
    return cert;
}

/// Order-internal lattice structure of S^X: meet and join adjoint to the
/// diagonal, top and bottom adjoint to the unique map, and distributivity.
inline Certificate verify_order_internal(const UpSetLattice& l)
{
    Certificate cert("order-internal-lattice");
    const std::size_t n = l.size();
    bool diag_meet = true, join_diag = true, distributive = true, closed = true;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            closed &= l.find(l.mask(u) & l.mask(v)).has_value() && l.find(l.mask(u) | l.mask(v)).has_value();
            if (!closed) break;
            std::size_t m = l.meet(u, v), j = l.join(u, v);
            for (std::size_t w = 0; w < n; ++w) {
                diag_meet &= l.leq(w, m) == (l.leq(w, u) && l.leq(w, v));
                join_diag &= l.leq(j, w) == (l.leq(u, w) && l.leq(v, w));
                distributive &= l.meet(u, l.join(v, w)) == l.join(l.meet(u, v), l.meet(u, w));
            }
        }
    }
    bool units = true;
    for (std::size_t u = 0; u < n; ++u) units &= l.leq(u, l.top()) && l.leq(l.bottom(), u);
    cert.require("closed-under-meet-join", closed);
    cert.require("contains-empty-and-full", n >= 1 && l.mask(0) == 0 && l.mask(n - 1) == l.base_ref().full_mask());
    cert.require("diagonal-left-adjoint-to-meet", diag_meet);
    cert.require("join-left-adjoint-to-diagonal", join_diag);
    cert.require("top-bottom-adjoint-to-terminal", units);
    cert.require("distributive", distributive);
    return cert;
}

/// Maps X -> S are in bijection with up-sets (preimage of the top point) and,
/// complementarily, with down-sets (preimage of the bottom point).
inline Certificate verify_sierpinski(const PosetPtr& x, std::span<const MonotoneMap> candidates = {},
                                     const Caps& caps = default_caps())
{
    Certificate cert("sierpinski");
    auto s = sierpinski();
    std::vector<MonotoneMap> maps;
    if (candidates.empty()) {
        auto hom = enumerate_monotone(x, s, caps);
        maps = hom.maps();
    } else {
        maps.assign(candidates.begin(), candidates.end());
    }
    auto sx = upset_lattice(x, caps);
    std::vector<int> hit(sx->size(), 0);
    std::set<Mask> downs;
    for (const auto& a : maps) {
        Mask up = a.preimage(Mask{2});   // preimage of the top point 1
        Mask down = a.preimage(Mask{1}); // preimage of the bottom point 0
        auto idx = sx->find(up);
        if (!idx || !x->is_down_set(down) || (up | down) != (x->empty() ? 0 : x->full_mask()) || (up & down) != 0) {
            cert.require("classifies-up-set", false, {{"map", a.to_json()}});
            return cert;
        }
        hit[*idx]++;
        downs.insert(down);
    }
    bool bijective = std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; });
    cert.require("bijection-with-up-sets", bijective && maps.size() == sx->size(),
                 {{"maps", maps.size()}, {"up_sets", sx->size()}});
    cert.require("bijection-with-down-sets", downs.size() == maps.size());
    cert.count("maps", static_cast<std::int64_t>(maps.size()));
    cert.count("up_sets", static_cast<std::int64_t>(sx->size()));
    return cert;
}

// ---------------------------------------------------------------------------
// Order reversal
// ---------------------------------------------------------------------------

/// Complementation S^X -> S^{X^op}, an order-reversing bijection. Returns the
/// index table of the complement in `op`.
inline std::vector<std::size_t> complement_table(const UpSetLattice& l, const UpSetLattice& op)
{
    const Mask full = l.base_ref().empty() ? 0 : l.base_ref().full_mask();
    std::vector<std::size_t> t(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) t[i] = op.index_of(full & ~l.mask(i));
    return t;
}

/// The order-dual of alpha : S^X -> S^Y, as S^{X^op} -> S^{Y^op}:
/// V |-> complement of alpha(complement of V).
inline LatticeMap dual(const LatticeMap& alpha, const LatticePtr& dom_op, const LatticePtr& cod_op)
{
    auto to_dom = complement_table(*dom_op, *alpha.dom());
    auto from_cod = complement_table(*alpha.cod(), *cod_op);
    std::vector<std::size_t> a(dom_op->size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = from_cod[alpha(to_dom[i])];
    return LatticeMap::trusted(dom_op, cod_op, std::move(a));
}

} // namespace spacelab
