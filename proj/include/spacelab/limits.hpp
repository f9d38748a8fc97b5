#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "certificate.hpp"
#include "hom.hpp"
#include "poset.hpp"

namespace spacelab {

inline std::string label_of(const PosetPtr& p) { return p->label().empty() ? "?" : p->label(); }

// ---------------------------------------------------------------------------
// Products
// ---------------------------------------------------------------------------

/// X x Y with lexicographic element order: (x, y) has index x * |Y| + y.
struct ProductCone {
    PosetPtr object;
    MonotoneMap pi1;
    MonotoneMap pi2;

    std::size_t pair_index(std::size_t x, std::size_t y) const { return x * pi2.cod()->size() + y; }

    /// The pairing <f, g> : Z -> X x Y.
    MonotoneMap pairing(const MonotoneMap& f, const MonotoneMap& g) const
    {
        if (!same_poset(f.dom(), g.dom()) || !same_poset(f.cod(), pi1.cod()) || !same_poset(g.cod(), pi2.cod())) {
            throw Error(ErrorKind::ShapeMismatch, "pairing of maps with incompatible shapes");
        }
        std::vector<std::size_t> a(f.dom()->size());
        for (std::size_t z = 0; z < a.size(); ++z) a[z] = pair_index(f(z), g(z));
        return MonotoneMap::trusted(f.dom(), object, std::move(a));
    }
};

inline ProductCone product(const PosetPtr& x, const PosetPtr& y, const Caps& caps = default_caps())
{
    const std::size_t nx = x->size();
    const std::size_t ny = y->size();
    if (nx * ny > caps.max_elements) {
        throw Error(ErrorKind::SizeCap, "product of " + std::to_string(nx) + " and " + std::to_string(ny) +
                                            " elements exceeds cap " + std::to_string(caps.max_elements));
    }
    const std::size_t n = nx * ny;
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) names.push_back("(" + x->name(i) + "," + y->name(j) + ")");
    }
    std::vector<std::uint8_t> rel(n * n, 0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            rel[a * n + b] = x->leq(a / ny, b / ny) && y->leq(a % ny, b % ny);
        }
    }
    auto obj = Poset::trusted(std::move(names), std::move(rel), "(" + label_of(x) + "x" + label_of(y) + ")");
    std::vector<std::size_t> p1(n), p2(n);
    for (std::size_t a = 0; a < n; ++a) {
        p1[a] = a / ny;
        p2[a] = a % ny;
    }
    return ProductCone{obj, MonotoneMap::trusted(obj, x, std::move(p1)), MonotoneMap::trusted(obj, y, std::move(p2))};
}

/// f x g : X x Y -> X' x Y' between the given product cones.
inline MonotoneMap product_map(const ProductCone& from, const ProductCone& to, const MonotoneMap& f,
                               const MonotoneMap& g)
{
    return to.pairing(compose(f, from.pi1), compose(g, from.pi2));
}

/// The associator (A x B) x C -> A x (B x C).
inline MonotoneMap associator(const ProductCone& ab, const ProductCone& ab_c, const ProductCone& bc,
                              const ProductCone& a_bc)
{
    auto a = compose(ab.pi1, ab_c.pi1);
    auto b = compose(ab.pi2, ab_c.pi1);
    auto c = ab_c.pi2;
    return a_bc.pairing(a, bc.pairing(b, c));
}

// ---------------------------------------------------------------------------
// Coproducts
// ---------------------------------------------------------------------------

struct CoproductCocone {
    PosetPtr object;
    MonotoneMap inl;
    MonotoneMap inr;

    /// The copairing [f, g] : X + Y -> Z.
    MonotoneMap copairing(const MonotoneMap& f, const MonotoneMap& g) const
    {
        if (!same_poset(f.cod(), g.cod()) || !same_poset(f.dom(), inl.dom()) || !same_poset(g.dom(), inr.dom())) {
            throw Error(ErrorKind::ShapeMismatch, "copairing of maps with incompatible shapes");
        }
        const std::size_t nx = f.dom()->size();
        std::vector<std::size_t> a(object->size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = i < nx ? f(i) : g(i - nx);
        return MonotoneMap::trusted(object, f.cod(), std::move(a));
    }
};

/// X + Y: elements of X first, then Y, no cross order.
inline CoproductCocone coproduct(const PosetPtr& x, const PosetPtr& y)
{
    const std::size_t nx = x->size();
    const std::size_t ny = y->size();
    const std::size_t n = nx + ny;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < nx; ++i) names.push_back("inl(" + x->name(i) + ")");
    for (std::size_t j = 0; j < ny; ++j) names.push_back("inr(" + y->name(j) + ")");
    std::vector<std::uint8_t> rel(n * n, 0);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < nx; ++j) rel[i * n + j] = x->leq(i, j);
    }
    for (std::size_t i = 0; i < ny; ++i) {
        for (std::size_t j = 0; j < ny; ++j) rel[(nx + i) * n + nx + j] = y->leq(i, j);
    }
    auto obj = Poset::trusted(std::move(names), std::move(rel), "(" + label_of(x) + "+" + label_of(y) + ")");
    std::vector<std::size_t> l(nx), r(ny);
    std::iota(l.begin(), l.end(), std::size_t{0});
    std::iota(r.begin(), r.end(), nx);
    return CoproductCocone{obj, MonotoneMap::trusted(x, obj, std::move(l)), MonotoneMap::trusted(y, obj, std::move(r))};
}

// ---------------------------------------------------------------------------
// Equalizers, pullbacks
// ---------------------------------------------------------------------------

/// Sub-poset of `x` on the listed elements (kept in the given order).
inline PosetPtr induced_subposet(const PosetPtr& x, const std::vector<std::size_t>& keep, std::string label,
                                 std::vector<std::string> names = {})
{
    const std::size_t n = keep.size();
    if (names.empty()) {
        for (auto k : keep) names.push_back(x->name(k));
    }
    std::vector<std::uint8_t> rel(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) rel[i * n + j] = x->leq(keep[i], keep[j]);
    }
    return Poset::trusted(std::move(names), std::move(rel), std::move(label));
}

struct EqualizerCone {
    PosetPtr object;
    MonotoneMap e;
};

inline void require_parallel(const MonotoneMap& f, const MonotoneMap& g)
{
    if (!same_poset(f.dom(), g.dom()) || !same_poset(f.cod(), g.cod())) {
        throw Error(ErrorKind::ShapeMismatch, "maps are not parallel");
    }
}

inline EqualizerCone equalizer(const MonotoneMap& f, const MonotoneMap& g)
{
    require_parallel(f, g);
    std::vector<std::size_t> keep;
    for (std::size_t x = 0; x < f.dom()->size(); ++x) {
        if (f(x) == g(x)) keep.push_back(x);
    }
    auto obj = induced_subposet(f.dom(), keep, "Eq(" + label_of(f.dom()) + ")");
    return EqualizerCone{obj, MonotoneMap::trusted(obj, f.dom(), keep)};
}

struct PullbackCone {
    PosetPtr object;
    MonotoneMap p1;
    MonotoneMap p2;
};

/// X x_Z Y for f : X -> Z, g : Y -> Z, as pairs in lexicographic order.
inline PullbackCone pullback(const MonotoneMap& f, const MonotoneMap& g, const Caps& caps = default_caps())
{
    if (!same_poset(f.cod(), g.cod())) throw Error(ErrorKind::ShapeMismatch, "pullback of maps with different codomains");
    const auto& x = f.dom();
    const auto& y = g.dom();
    if (x->size() * y->size() > caps.max_elements) throw Error(ErrorKind::SizeCap, "pullback exceeds element cap");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < x->size(); ++i) {
        for (std::size_t j = 0; j < y->size(); ++j) {
            if (f(i) == g(j)) pairs.emplace_back(i, j);
        }
    }
    const std::size_t n = pairs.size();
    std::vector<std::string> names;
    std::vector<std::uint8_t> rel(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        names.push_back("(" + x->name(pairs[a].first) + "," + y->name(pairs[a].second) + ")");
        for (std::size_t b = 0; b < n; ++b) {
            rel[a * n + b] = x->leq(pairs[a].first, pairs[b].first) && y->leq(pairs[a].second, pairs[b].second);
        }
    }
    auto obj = Poset::trusted(std::move(names), std::move(rel),
                              "(" + label_of(x) + "x_" + label_of(f.cod()) + label_of(y) + ")");
    std::vector<std::size_t> a1(n), a2(n);
    for (std::size_t a = 0; a < n; ++a) {
        a1[a] = pairs[a].first;
        a2[a] = pairs[a].second;
    }
    return PullbackCone{obj, MonotoneMap::trusted(obj, x, std::move(a1)), MonotoneMap::trusted(obj, y, std::move(a2))};
}

// ---------------------------------------------------------------------------
// Coequalizers (oracle only)
// ---------------------------------------------------------------------------

struct CoequalizerCocone {
    PosetPtr object;
    MonotoneMap q;
};

namespace detail {

inline std::size_t uf_find(std::vector<std::size_t>& parent, std::size_t a)
{
    while (parent[a] != a) {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    return a;
}

inline void uf_union(std::vector<std::size_t>& parent, std::size_t a, std::size_t b)
{
    a = uf_find(parent, a);
    b = uf_find(parent, b);
    if (a == b) return;
    if (a < b) parent[b] = a;
    else parent[a] = b;
}

} // namespace detail

/// Quotient of the codomain by the equivalence generated by f(x) ~ g(x),
/// ordered by the posetal reflection of the induced preorder.
inline CoequalizerCocone coequalizer(const MonotoneMap& f, const MonotoneMap& g)
{
    require_parallel(f, g);
    const auto& y = f.cod();
    const std::size_t n = y->size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t x = 0; x < f.dom()->size(); ++x) detail::uf_union(parent, f(x), g(x));

    // preorder on classes, closed transitively; merge mutually related classes until stable
    bool changed = true;
    std::vector<std::uint8_t> pre;
    while (changed) {
        changed = false;
        pre.assign(n * n, 0);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (y->leq(a, b)) pre[detail::uf_find(parent, a) * n + detail::uf_find(parent, b)] = 1;
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!pre[i * n + k]) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (pre[k * n + j]) pre[i * n + j] = 1;
                }
            }
        }
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                std::size_t ra = detail::uf_find(parent, a);
                std::size_t rb = detail::uf_find(parent, b);
                if (ra != rb && pre[ra * n + rb] && pre[rb * n + ra]) {
                    detail::uf_union(parent, ra, rb);
                    changed = true;
                }
            }
        }
    }
    std::vector<std::size_t> reps;
    std::map<std::size_t, std::size_t> slot;
    for (std::size_t a = 0; a < n; ++a) {
        std::size_t r = detail::uf_find(parent, a);
        if (!slot.count(r)) {
            slot[r] = reps.size();
            reps.push_back(r);
        }
    }
    const std::size_t k = reps.size();
    std::vector<std::string> names(k);
    for (std::size_t a = 0; a < n; ++a) {
        auto& nm = names[slot[detail::uf_find(parent, a)]];
        nm += nm.empty() ? y->name(a) : "|" + y->name(a);
    }
    std::vector<std::uint8_t> rel(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) rel[i * k + j] = pre[reps[i] * n + reps[j]];
    }
    auto obj = Poset::trusted(std::move(names), std::move(rel), "Coeq(" + label_of(y) + ")");
    std::vector<std::size_t> q(n);
    for (std::size_t a = 0; a < n; ++a) q[a] = slot[detail::uf_find(parent, a)];
    return CoequalizerCocone{obj, MonotoneMap::trusted(y, obj, std::move(q))};
}

/// If `h` is constant on the fibres of the surjection `q`, the unique map k
/// with k q = h, provided it is monotone.
inline std::optional<MonotoneMap> factor_through_surjection(const MonotoneMap& q, const MonotoneMap& h)
{
    if (!same_poset(q.dom(), h.dom())) return std::nullopt;
    const std::size_t n = q.cod()->size();
    std::vector<std::size_t> k(n, static_cast<std::size_t>(-1));
    for (std::size_t x = 0; x < q.dom()->size(); ++x) {
        auto& slot = k[q(x)];
        if (slot == static_cast<std::size_t>(-1)) slot = h(x);
        else if (slot != h(x)) return std::nullopt;
    }
    for (auto v : k) {
        if (v == static_cast<std::size_t>(-1)) return std::nullopt;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (q.cod()->leq(i, j) && !h.cod()->leq(k[i], k[j])) return std::nullopt;
        }
    }
    return MonotoneMap::trusted(q.cod(), h.cod(), std::move(k));
}

// ---------------------------------------------------------------------------
// Universal-property verifiers (order-enriched)
// ---------------------------------------------------------------------------

/// Hom(Z, X x Y) -> Hom(Z, X) x Hom(Z, Y) is a bijection and an order
/// isomorphism for every test object Z.
inline Certificate verify_product_universal(const PosetPtr& x, const PosetPtr& y, std::span<const PosetPtr> tests,
                                            const Caps& caps = default_caps())
{
    Certificate cert("product-universal");
    auto cone = product(x, y, caps);
    for (const auto& z : tests) {
        const std::string tag = label_of(x) + "," + label_of(y) + "<-" + label_of(z);
        auto hom_xy = enumerate_monotone(z, cone.object, caps);
        auto hom_x = enumerate_monotone(z, x, caps);
        auto hom_y = enumerate_monotone(z, y, caps);
        cert.require("cardinality:" + tag, hom_xy.size() == hom_x.size() * hom_y.size(),
                     {{"hom_product", hom_xy.size()}, {"hom_x", hom_x.size()}, {"hom_y", hom_y.size()}});
        std::vector<std::pair<std::size_t, std::size_t>> image;
        std::set<std::pair<std::size_t, std::size_t>> seen;
        bool injective = true;
        for (const auto& h : hom_xy.maps()) {
            auto a = *hom_x.index_of(compose(cone.pi1, h));
            auto b = *hom_y.index_of(compose(cone.pi2, h));
            injective &= seen.insert({a, b}).second;
            image.emplace_back(a, b);
        }
        cert.require("bijective:" + tag, injective && seen.size() == hom_x.size() * hom_y.size());
        bool order_iso = true;
        for (std::size_t i = 0; i < hom_xy.size() && order_iso; ++i) {
            for (std::size_t j = 0; j < hom_xy.size() && order_iso; ++j) {
                bool lhs = hom_xy.leq(i, j);
                bool rhs = hom_x.leq(image[i].first, image[j].first) && hom_y.leq(image[i].second, image[j].second);
                if (lhs != rhs) order_iso = false;
            }
        }
        cert.require("order-iso:" + tag, order_iso);
    }
    return cert;
}

/// Hom(X + Y, Z) -> Hom(X, Z) x Hom(Y, Z) is a bijection and order isomorphism.
inline Certificate verify_coproduct_couniversal(const PosetPtr& x, const PosetPtr& y, std::span<const PosetPtr> tests,
                                                const Caps& caps = default_caps())
{
    Certificate cert("coproduct-couniversal");
    auto co = coproduct(x, y);
    cert.require("injections-jointly-surjective", [&] {
        std::vector<char> hit(co.object->size(), 0);
        for (auto v : co.inl.assign()) hit[v] = 1;
        for (auto v : co.inr.assign()) hit[v] = 1;
        return std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
    }());
    cert.require("injections-order-reflecting", co.inl.is_order_embedding() && co.inr.is_order_embedding());
    for (const auto& z : tests) {
        const std::string tag = label_of(x) + "+" + label_of(y) + "->" + label_of(z);
        auto hom_s = enumerate_monotone(co.object, z, caps);
        auto hom_x = enumerate_monotone(x, z, caps);
        auto hom_y = enumerate_monotone(y, z, caps);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        std::vector<std::pair<std::size_t, std::size_t>> image;
        for (const auto& h : hom_s.maps()) {
            auto a = *hom_x.index_of(compose(h, co.inl));
            auto b = *hom_y.index_of(compose(h, co.inr));
            seen.insert({a, b});
            image.emplace_back(a, b);
        }
        cert.require("bijective:" + tag, seen.size() == hom_s.size() && seen.size() == hom_x.size() * hom_y.size(),
                     {{"hom_sum", hom_s.size()}, {"hom_x", hom_x.size()}, {"hom_y", hom_y.size()}});
        bool order_iso = true;
        for (std::size_t i = 0; i < hom_s.size() && order_iso; ++i) {
            for (std::size_t j = 0; j < hom_s.size() && order_iso; ++j) {
                bool rhs = hom_x.leq(image[i].first, image[j].first) && hom_y.leq(image[i].second, image[j].second);
                order_iso = hom_s.leq(i, j) == rhs;
            }
        }
        cert.require("order-iso:" + tag, order_iso);
    }
    return cert;
}

/// Every h : Z -> X with f h = g h factors uniquely through e, and the
/// factorization is an order isomorphism onto that subset of Hom(Z, X).
inline Certificate verify_equalizer_universal(const MonotoneMap& f, const MonotoneMap& g,
                                              std::span<const PosetPtr> tests, const Caps& caps = default_caps())
{
    Certificate cert("equalizer-universal");
    auto eq = equalizer(f, g);
    cert.require("fork", compose(f, eq.e) == compose(g, eq.e));
    cert.require("inclusion-monic-order-reflecting", eq.e.is_injective() && eq.e.is_order_embedding());
    for (const auto& z : tests) {
        auto hom_e = enumerate_monotone(z, eq.object, caps);
        auto hom_x = enumerate_monotone(z, f.dom(), caps);
        std::size_t cones = 0;
        bool unique = true;
        for (const auto& h : hom_x.maps()) {
            if (!(compose(f, h) == compose(g, h))) continue;
            ++cones;
            std::size_t hits = 0;
            for (const auto& k : hom_e.maps()) hits += compose(eq.e, k) == h;
            unique &= hits == 1;
        }
        cert.require("unique-factorization:<-" + label_of(z), unique && cones == hom_e.size(),
                     {{"cones", cones}, {"hom_e", hom_e.size()}});
        bool order_iso = true;
        for (std::size_t i = 0; i < hom_e.size(); ++i) {
            for (std::size_t j = 0; j < hom_e.size(); ++j) {
                order_iso &= hom_e.leq(i, j) == pointwise_leq(compose(eq.e, hom_e[i]), compose(eq.e, hom_e[j]));
            }
        }
        cert.require("order-iso:<-" + label_of(z), order_iso);
    }
    return cert;
}

/// Coequalizer oracle: q f = q g and every h with h f = h g factors uniquely.
inline Certificate verify_coequalizer_couniversal(const MonotoneMap& f, const MonotoneMap& g,
                                                  std::span<const PosetPtr> tests, const Caps& caps = default_caps())
{
    Certificate cert("coequalizer-couniversal");
    auto co = coequalizer(f, g);
    cert.require("cofork", compose(co.q, f) == compose(co.q, g));
    for (const auto& z : tests) {
        auto hom_y = enumerate_monotone(f.cod(), z, caps);
        auto hom_q = enumerate_monotone(co.object, z, caps);
        std::size_t cocones = 0;
        bool unique = true;
        for (const auto& h : hom_y.maps()) {
            if (!(compose(h, f) == compose(h, g))) continue;
            ++cocones;
            std::size_t hits = 0;
            for (const auto& k : hom_q.maps()) hits += compose(k, co.q) == h;
            unique &= hits == 1;
        }
        cert.require("unique-factorization:->" + label_of(z), unique && cocones == hom_q.size(),
                     {{"cocones", cocones}, {"hom_q", hom_q.size()}});
    }
    return cert;
}

/// For f : W -> V and objects a : A -> V, b : B -> V over V, checks that the
/// canonical map f*A + f*B -> f*(A + B) is an isomorphism.
inline bool pullback_preserves_coproduct(const MonotoneMap& f, const MonotoneMap& a, const MonotoneMap& b,
                                         const Caps& caps = default_caps())
{
    auto sum = coproduct(a.dom(), b.dom());
    auto ab = sum.copairing(a, b);
    auto pb_sum = pullback(f, ab, caps);
    auto pb_a = pullback(f, a, caps);
    auto pb_b = pullback(f, b, caps);
    auto lhs = coproduct(pb_a.object, pb_b.object);
    // canonical comparison: (w, a) |-> (w, inl a), (w, b) |-> (w, inr b)
    std::vector<std::size_t> assign(lhs.object->size());
    auto locate = [&](std::size_t w, std::size_t s) -> std::size_t {
        for (std::size_t i = 0; i < pb_sum.object->size(); ++i) {
            if (pb_sum.p1(i) == w && pb_sum.p2(i) == s) return i;
        }
        throw Error(ErrorKind::NotFound, "comparison map leaves the pullback");
    };
    for (std::size_t i = 0; i < pb_a.object->size(); ++i) assign[i] = locate(pb_a.p1(i), sum.inl(pb_a.p2(i)));
    for (std::size_t i = 0; i < pb_b.object->size(); ++i) {
        assign[pb_a.object->size() + i] = locate(pb_b.p1(i), sum.inr(pb_b.p2(i)));
    }
    MonotoneMap cmp(lhs.object, pb_sum.object, std::move(assign));
    return cmp.is_iso();
}

/// Distributivity: X x Y + X x Z -> X x (Y + Z) is an isomorphism and
/// X x 0 = 0; plus pullback-stability of binary coproducts along every map in
/// `family`, using the maps of `family` sharing its codomain as objects over it.
inline Certificate verify_distributivity(const PosetPtr& x, const PosetPtr& y, const PosetPtr& z,
                                         std::span<const MonotoneMap> family = {}, const Caps& caps = default_caps())
{
    Certificate cert("distributivity");
    auto xy = product(x, y, caps);
    auto xz = product(x, z, caps);
    auto yz = coproduct(y, z);
    auto x_yz = product(x, yz.object, caps);
    auto lhs = coproduct(xy.object, xz.object);
    auto left = x_yz.pairing(xy.pi1, compose(yz.inl, xy.pi2));
    auto right = x_yz.pairing(xz.pi1, compose(yz.inr, xz.pi2));
    auto canonical = lhs.copairing(left, right);
    cert.require("canonical-iso:" + label_of(x) + "," + label_of(y) + "," + label_of(z), canonical.is_iso(),
                 {{"X", label_of(x)}, {"Y", label_of(y)}, {"Z", label_of(z)}});
    auto x0 = product(x, empty_poset(), caps);
    cert.require("product-with-initial", x0.object->size() == 0);
    for (const auto& f : family) {
        for (const auto& a : family) {
            if (!same_poset(a.cod(), f.cod())) continue;
            for (const auto& b : family) {
                if (!same_poset(b.cod(), f.cod())) continue;
                if (!pullback_preserves_coproduct(f, a, b, caps)) {
                    cert.require("pullback-preserves-coproduct", false,
                                 {{"f", f.to_json()}, {"a", a.to_json()}, {"b", b.to_json()}});
                    return cert;
                }
                cert.add_count("pullback-instances", 1);
            }
        }
    }
    cert.require("pullback-preserves-coproduct", true);
    return cert;
}

} // namespace spacelab
