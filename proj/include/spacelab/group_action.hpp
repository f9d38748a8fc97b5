#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "certificate.hpp"
#include "hom.hpp"
#include "limits.hpp"
#include "poset.hpp"
#include "power_monad.hpp"
#include "upset_lattice.hpp"

namespace spacelab {

// ---------------------------------------------------------------------------
// Monoids and groups
// ---------------------------------------------------------------------------

class Monoid;
using MonoidPtr = std::shared_ptr<const Monoid>;

/// An ordered monoid: a poset M with a monotone associative multiplication
/// and a unit. A group object additionally has a monotone inverse.
class Monoid {
public:
    Monoid(PosetPtr carrier, std::vector<std::size_t> table, std::size_t unit, std::string name,
           std::optional<std::vector<std::size_t>> inverse)
        : carrier_(std::move(carrier))
        , table_(std::move(table))
        , unit_(unit)
        , name_(std::move(name))
        , inverse_(std::move(inverse))
    {
    }

    const PosetPtr& carrier() const { return carrier_; }
    std::size_t size() const { return carrier_->size(); }
    std::size_t mul(std::size_t a, std::size_t b) const { return table_[a * size() + b]; }
    std::size_t unit() const { return unit_; }
    const std::string& name() const { return name_; }
    const std::vector<std::size_t>& table() const { return table_; }

    bool is_group() const { return inverse_.has_value(); }

    std::size_t inverse(std::size_t g) const
    {
        if (!inverse_) throw Error(ErrorKind::GroupRequired, name_ + " is not a group");
        return (*inverse_)[g];
    }

    /// The multiplication as a map out of the given product cone M x M.
    MonotoneMap mult_map(const ProductCone& mm) const
    {
        std::vector<std::size_t> a(mm.object->size());
        for (std::size_t x = 0; x < size(); ++x) {
            for (std::size_t y = 0; y < size(); ++y) a[mm.pair_index(x, y)] = mul(x, y);
        }
        return MonotoneMap(mm.object, carrier_, std::move(a));
    }

    /// Same multiplication on the reversed carrier order.
    MonoidPtr opposite() const
    {
        return std::make_shared<const Monoid>(carrier_->opposite(), table_, unit_, name_ + "^op", inverse_);
    }

    nlohmann::json to_json() const
    {
        nlohmann::json tab = nlohmann::json::array();
        for (std::size_t a = 0; a < size(); ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t b = 0; b < size(); ++b) row.push_back(carrier_->name(mul(a, b)));
            tab.push_back(row);
        }
        return {{"carrier", name_ + ".carrier"}, {"table", tab}, {"unit", carrier_->name(unit_)}};
    }

private:
    PosetPtr carrier_;
    std::vector<std::size_t> table_;
    std::size_t unit_;
    std::string name_;
    std::optional<std::vector<std::size_t>> inverse_;
};

/// Validates the monoid laws and monotonicity. Elements with two-sided
/// inverses everywhere and a monotone inversion make the result a group.
inline MonoidPtr make_monoid(const PosetPtr& carrier, std::vector<std::size_t> table, std::size_t unit,
                             std::string name = "M")
{
    const std::size_t n = carrier->size();
    if (n == 0) throw Error(ErrorKind::AxiomFailure, "a monoid needs a unit element");
    if (table.size() != n * n) throw Error(ErrorKind::ShapeMismatch, "multiplication table has wrong size");
    if (unit >= n) throw Error(ErrorKind::ShapeMismatch, "unit is not an element");
    for (auto v : table) {
        if (v >= n) throw Error(ErrorKind::ShapeMismatch, "multiplication table leaves the carrier");
    }
    auto mul = [&](std::size_t a, std::size_t b) { return table[a * n + b]; };
    const auto& nm = carrier->names();
    for (std::size_t a = 0; a < n; ++a) {
        if (mul(unit, a) != a || mul(a, unit) != a) {
            throw Error(ErrorKind::AxiomFailure, "unit law fails at " + nm[a], {{"element", nm[a]}});
        }
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t c = 0; c < n; ++c) {
                if (mul(mul(a, b), c) != mul(a, mul(b, c))) {
                    throw Error(ErrorKind::AxiomFailure, "multiplication is not associative",
                                {{"triple", {nm[a], nm[b], nm[c]}}});
                }
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t a2 = 0; a2 < n; ++a2) {
            if (!carrier->leq(a, a2)) continue;
            for (std::size_t b = 0; b < n; ++b) {
                for (std::size_t b2 = 0; b2 < n; ++b2) {
                    if (carrier->leq(b, b2) && !carrier->leq(mul(a, b), mul(a2, b2))) {
                        throw Error(ErrorKind::NotMonotone, "multiplication is not monotone",
                                    {{"pair", {nm[a], nm[b]}}, {"larger_pair", {nm[a2], nm[b2]}}});
                    }
                }
            }
        }
    }
    std::optional<std::vector<std::size_t>> inverse;
    std::vector<std::size_t> inv(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (mul(a, b) == unit && mul(b, a) == unit) inv[a] = b;
        }
    }
    bool all = std::all_of(inv.begin(), inv.end(), [&](std::size_t v) { return v < n; });
    if (all) {
        bool monotone = true;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) monotone &= !carrier->leq(a, b) || carrier->leq(inv[a], inv[b]);
        }
        if (monotone) inverse = inv;
    }
    return std::make_shared<const Monoid>(carrier, std::move(table), unit, std::move(name), std::move(inverse));
}

/// A group on a discrete carrier from its multiplication table.
inline MonoidPtr make_group(std::vector<std::string> names, std::vector<std::size_t> table, std::size_t unit = 0,
                            std::string name = "G")
{
    auto carrier = make_poset(std::move(names), {}, name);
    auto m = make_monoid(carrier, std::move(table), unit, std::move(name));
    if (!m->is_group()) throw Error(ErrorKind::AxiomFailure, "some element has no inverse");
    return m;
}

/// Cyclic group of order n with elements e, g, g2, ...
inline MonoidPtr cyclic_group(std::size_t n)
{
    std::vector<std::string> names;
    std::vector<std::size_t> table(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back(i == 0 ? "e" : i == 1 ? "g" : "g" + std::to_string(i));
        for (std::size_t j = 0; j < n; ++j) table[i * n + j] = (i + j) % n;
    }
    return make_group(std::move(names), std::move(table), 0, "C" + std::to_string(n));
}

inline MonoidPtr trivial_group() { return make_group({"e"}, {0}, 0, "1"); }

/// The 2-chain 0 < 1 under min, with unit 1.
inline MonoidPtr min_monoid()
{
    auto c2 = make_poset({"0", "1"}, {{0, 1}}, "C2");
    return make_monoid(c2, {0, 0, 0, 1}, 1, "min");
}

/// Inverse laws and discreteness of the carrier (a monotone inversion forces
/// the order to be discrete).
inline Certificate verify_group_object(const Monoid& g)
{
    Certificate cert("group-object:" + g.name());
    if (!g.is_group()) {
        cert.require("has-monotone-inverse", false, {{"monoid", g.name()}});
        return cert;
    }
    bool inverse_laws = true;
    for (std::size_t a = 0; a < g.size(); ++a) {
        inverse_laws &= g.mul(a, g.inverse(a)) == g.unit() && g.mul(g.inverse(a), a) == g.unit();
    }
    cert.require("inverse-laws", inverse_laws);
    cert.require("carrier-discrete", g.carrier()->is_discrete());
    return cert;
}

// ---------------------------------------------------------------------------
// Acted posets
// ---------------------------------------------------------------------------

/// A poset with a monotone action M x X -> X, stored as a table m * |X| + x.
class ActedPoset {
public:
    ActedPoset() = default;
    ActedPoset(MonoidPtr monoid, PosetPtr carrier, std::vector<std::size_t> table, std::string name)
        : monoid_(std::move(monoid))
        , carrier_(std::move(carrier))
        , table_(std::move(table))
        , name_(std::move(name))
    {
    }

    const MonoidPtr& monoid() const { return monoid_; }
    const PosetPtr& carrier() const { return carrier_; }
    const std::vector<std::size_t>& table() const { return table_; }
    const std::string& name() const { return name_; }
    std::size_t act(std::size_t m, std::size_t x) const { return table_[m * carrier_->size() + x]; }

    /// {x : m.x in U}
    Mask preimage(std::size_t m, Mask u) const
    {
        Mask out = 0;
        for (std::size_t x = 0; x < carrier_->size(); ++x) {
            if ((u >> act(m, x)) & 1U) out |= Mask{1} << x;
        }
        return out;
    }

    /// {m.x : x in U}
    Mask image(std::size_t m, Mask u) const
    {
        Mask out = 0;
        for (std::size_t x = 0; x < carrier_->size(); ++x) {
            if ((u >> x) & 1U) out |= Mask{1} << act(m, x);
        }
        return out;
    }

    MonotoneMap action_map(const ProductCone& mx) const
    {
        std::vector<std::size_t> a(mx.object->size());
        for (std::size_t m = 0; m < monoid_->size(); ++m) {
            for (std::size_t x = 0; x < carrier_->size(); ++x) a[mx.pair_index(m, x)] = act(m, x);
        }
        return MonotoneMap::trusted(mx.object, carrier_, std::move(a));
    }

    bool is_trivial() const
    {
        for (std::size_t m = 0; m < monoid_->size(); ++m) {
            for (std::size_t x = 0; x < carrier_->size(); ++x) {
                if (act(m, x) != x) return false;
            }
        }
        return true;
    }

    /// Same action on the reversed orders of monoid and carrier.
    ActedPoset opposite() const
    {
        return ActedPoset(monoid_->opposite(), carrier_->opposite(), table_, name_ + "^op");
    }

    nlohmann::json table_json() const
    {
        nlohmann::json tab = nlohmann::json::array();
        for (std::size_t m = 0; m < monoid_->size(); ++m) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t x = 0; x < carrier_->size(); ++x) row.push_back(carrier_->name(act(m, x)));
            tab.push_back(row);
        }
        return tab;
    }

private:
    MonoidPtr monoid_;
    PosetPtr carrier_;
    std::vector<std::size_t> table_;
    std::string name_;
};

inline ActedPoset make_acted(const MonoidPtr& m, const PosetPtr& x, std::vector<std::size_t> table,
                             std::string name = {})
{
    const std::size_t nm = m->size(), nx = x->size();
    if (table.size() != nm * nx) throw Error(ErrorKind::ShapeMismatch, "action table has wrong size");
    for (auto v : table) {
        if (v >= nx) throw Error(ErrorKind::ShapeMismatch, "action table leaves the carrier");
    }
    if (name.empty()) name = "(" + label_of(x) + "," + m->name() + ")";
    ActedPoset a(m, x, std::move(table), std::move(name));
    const auto& mn = m->carrier()->names();
    for (std::size_t e = 0; e < nx; ++e) {
        if (a.act(m->unit(), e) != e) {
            throw Error(ErrorKind::UnitLawFailure, "unit does not fix " + x->name(e), {{"element", x->name(e)}});
        }
    }
    for (std::size_t p = 0; p < nm; ++p) {
        for (std::size_t q = 0; q < nm; ++q) {
            for (std::size_t e = 0; e < nx; ++e) {
                if (a.act(p, a.act(q, e)) != a.act(m->mul(p, q), e)) {
                    throw Error(ErrorKind::AssocFailure, "action is not compatible with multiplication",
                                {{"m", mn[p]}, {"n", mn[q]}, {"element", x->name(e)}});
                }
            }
        }
    }
    for (std::size_t p = 0; p < nm; ++p) {
        for (std::size_t q = 0; q < nm; ++q) {
            if (!m->carrier()->leq(p, q)) continue;
            for (std::size_t e = 0; e < nx; ++e) {
                for (std::size_t f = 0; f < nx; ++f) {
                    if (x->leq(e, f) && !x->leq(a.act(p, e), a.act(q, f))) {
                        throw Error(ErrorKind::NotMonotone, "action is not monotone",
                                    {{"pair", {mn[p], x->name(e)}},
                                     {"larger_pair", {mn[q], x->name(f)}},
                                     {"images", {x->name(a.act(p, e)), x->name(a.act(q, f))}}});
                    }
                }
            }
        }
    }
    return a;
}

inline ActedPoset trivial_action(const MonoidPtr& m, const PosetPtr& x, std::string name = {})
{
    std::vector<std::size_t> t(m->size() * x->size());
    for (std::size_t p = 0; p < m->size(); ++p) {
        for (std::size_t e = 0; e < x->size(); ++e) t[p * x->size() + e] = e;
    }
    if (name.empty()) name = "(" + label_of(x) + ",triv)";
    return make_acted(m, x, std::move(t), std::move(name));
}

/// M acting on itself by left multiplication.
inline ActedPoset regular_action(const MonoidPtr& m)
{
    return make_acted(m, m->carrier(), m->table(), "(" + m->name() + ",mult)");
}

/// All actions of M on X: monoid homomorphisms into the monotone
/// endomaps, jointly monotone in M.
inline std::vector<ActedPoset> enumerate_actions(const MonoidPtr& m, const PosetPtr& x, const Caps& caps = default_caps())
{
    auto ends = enumerate_monotone(x, x, caps);
    const std::size_t nm = m->size(), nx = x->size();
    std::vector<std::size_t> choice(nm, 0);
    std::vector<ActedPoset> out;
    auto id = identity(x);
    std::size_t id_index = *ends.index_of(id);
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == nm) {
            std::vector<std::size_t> t(nm * nx);
            for (std::size_t p = 0; p < nm; ++p) {
                for (std::size_t e = 0; e < nx; ++e) t[p * nx + e] = ends[choice[p]](e);
            }
            try {
                out.push_back(make_acted(m, x, std::move(t), "(" + label_of(x) + "," + m->name() + "#" +
                                                                  std::to_string(out.size()) + ")"));
            } catch (const Error&) {
            }
            return;
        }
        if (k == m->unit()) {
            choice[k] = id_index;
            rec(k + 1);
            return;
        }
        for (std::size_t i = 0; i < ends.size(); ++i) {
            if (m->is_group() && !ends[i].is_iso()) continue;
            choice[k] = i;
            rec(k + 1);
        }
    };
    rec(0);
    return out;
}

// ---------------------------------------------------------------------------
// Equivariant maps
// ---------------------------------------------------------------------------

inline std::optional<nlohmann::json> equivariance_violation(const MonotoneMap& f, const ActedPoset& a,
                                                            const ActedPoset& b)
{
    const auto& m = *a.monoid();
    for (std::size_t p = 0; p < m.size(); ++p) {
        for (std::size_t x = 0; x < a.carrier()->size(); ++x) {
            if (f(a.act(p, x)) != b.act(p, f(x))) {
                return nlohmann::json{{"m", m.carrier()->name(p)}, {"element", a.carrier()->name(x)}};
            }
        }
    }
    return std::nullopt;
}

inline bool is_equivariant(const MonotoneMap& f, const ActedPoset& a, const ActedPoset& b)
{
    return !equivariance_violation(f, a, b);
}

inline void require_equivariant(const MonotoneMap& f, const ActedPoset& a, const ActedPoset& b)
{
    if (auto w = equivariance_violation(f, a, b)) throw Error(ErrorKind::NotEquivariant, "map is not equivariant", *w);
}

inline std::vector<MonotoneMap> enumerate_equivariant(const ActedPoset& a, const ActedPoset& b,
                                                      const Caps& caps = default_caps())
{
    std::vector<MonotoneMap> out;
    for_each_monotone(*a.carrier(), *b.carrier(), [&](const std::vector<std::size_t>& t) {
        auto f = MonotoneMap::trusted(a.carrier(), b.carrier(), t);
        if (is_equivariant(f, a, b)) {
            if (out.size() >= caps.max_hom) throw Error(ErrorKind::SizeCap, "too many equivariant maps");
            out.push_back(std::move(f));
        }
        return true;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Limits and coproducts of acted posets
// ---------------------------------------------------------------------------

struct ActedProduct {
    ActedPoset object;
    ProductCone cone;
    Certificate certificate;
};

/// Diagonal action on X x Y; certifies the projections are equivariant and
/// that equivariant pairs of maps out of each test object pair to
/// equivariant maps, bijectively.
inline ActedProduct acted_product(const ActedPoset& a, const ActedPoset& b, std::span<const ActedPoset> tests = {},
                                  const Caps& caps = default_caps())
{
    if (a.monoid() != b.monoid()) throw Error(ErrorKind::ShapeMismatch, "actions of different monoids");
    auto cone = product(a.carrier(), b.carrier(), caps);
    const auto& m = *a.monoid();
    std::vector<std::size_t> t(m.size() * cone.object->size());
    for (std::size_t p = 0; p < m.size(); ++p) {
        for (std::size_t x = 0; x < a.carrier()->size(); ++x) {
            for (std::size_t y = 0; y < b.carrier()->size(); ++y) {
                t[p * cone.object->size() + cone.pair_index(x, y)] = cone.pair_index(a.act(p, x), b.act(p, y));
            }
        }
    }
    ActedProduct r{make_acted(a.monoid(), cone.object, std::move(t), a.name() + "x" + b.name()), cone,
                   Certificate("acted-product")};
    r.certificate.require("pi1-equivariant", is_equivariant(cone.pi1, r.object, a));
    r.certificate.require("pi2-equivariant", is_equivariant(cone.pi2, r.object, b));
    for (const auto& z : tests) {
        auto fa = enumerate_equivariant(z, a, caps);
        auto fb = enumerate_equivariant(z, b, caps);
        auto fab = enumerate_equivariant(z, r.object, caps);
        bool pairs_equivariant = true;
        for (const auto& f : fa) {
            for (const auto& g : fb) pairs_equivariant &= is_equivariant(cone.pairing(f, g), z, r.object);
        }
        r.certificate.require("pairing-bijective[" + z.name() + "]", fab.size() == fa.size() * fb.size() && pairs_equivariant);
    }
    return r;
}

struct ActedCoproduct {
    ActedPoset object;
    CoproductCocone cocone;
    Certificate certificate;
};

/// Action on X + Y through G x (X + Y) = G x X + G x Y.
inline ActedCoproduct acted_coproduct(const ActedPoset& a, const ActedPoset& b, const Caps& caps = default_caps())
{
    if (a.monoid() != b.monoid()) throw Error(ErrorKind::ShapeMismatch, "actions of different monoids");
    auto cp = coproduct(a.carrier(), b.carrier());
    const auto& m = *a.monoid();
    const std::size_t nx = a.carrier()->size(), n = cp.object->size();
    std::vector<std::size_t> t(m.size() * n);
    for (std::size_t p = 0; p < m.size(); ++p) {
        for (std::size_t i = 0; i < n; ++i) t[p * n + i] = i < nx ? a.act(p, i) : nx + b.act(p, i - nx);
    }
    ActedCoproduct r{make_acted(a.monoid(), cp.object, std::move(t), a.name() + "+" + b.name()), cp,
                     Certificate("acted-coproduct")};
    // G x (X + Y) -> X + Y agrees with the copairing of the two actions
    // composed with the distributivity isomorphism
    auto g_xy = product(m.carrier(), cp.object, caps);
    auto gx = product(m.carrier(), a.carrier(), caps);
    auto gy = product(m.carrier(), b.carrier(), caps);
    auto sum = coproduct(gx.object, gy.object);
    auto canon = sum.copairing(product_map(gx, g_xy, identity(m.carrier()), cp.inl),
                               product_map(gy, g_xy, identity(m.carrier()), cp.inr));
    r.certificate.require("distributivity-iso", canon.is_iso());
    if (canon.is_iso()) {
        auto via_iso = compose(sum.copairing(compose(cp.inl, a.action_map(gx)), compose(cp.inr, b.action_map(gy))),
                               inverse(canon));
        r.certificate.require("action-through-iso", via_iso.assign() == r.object.action_map(g_xy).assign());
    }
    r.certificate.require("inl-equivariant", is_equivariant(cp.inl, a, r.object));
    r.certificate.require("inr-equivariant", is_equivariant(cp.inr, b, r.object));
    return r;
}

struct ActedEqualizer {
    ActedPoset object;
    EqualizerCone cone;
    Certificate certificate;
};

inline ActedEqualizer acted_equalizer(const MonotoneMap& f, const MonotoneMap& g, const ActedPoset& a,
                                      const ActedPoset& b)
{
    require_equivariant(f, a, b);
    require_equivariant(g, a, b);
    auto eq = equalizer(f, g);
    const auto& m = *a.monoid();
    const std::size_t n = eq.object->size();
    std::vector<std::size_t> back(a.carrier()->size(), n);
    for (std::size_t i = 0; i < n; ++i) back[eq.e(i)] = i;
    std::vector<std::size_t> t(m.size() * n);
    ActedEqualizer r{{}, eq, Certificate("acted-equalizer")};
    bool closed = true;
    for (std::size_t p = 0; p < m.size(); ++p) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t img = back[a.act(p, eq.e(i))];
            closed &= img < n;
            t[p * n + i] = img < n ? img : 0;
        }
    }
    r.certificate.require("equalizer-closed-under-action", closed);
    if (!closed) throw TheoremViolation(ErrorKind::AxiomFailure, "equalizer of equivariant maps is not invariant");
    r.object = make_acted(a.monoid(), eq.object, std::move(t), "Eq(" + a.name() + ")");
    r.certificate.require("inclusion-equivariant", is_equivariant(eq.e, r.object, a));
    return r;
}

// ---------------------------------------------------------------------------
// Exponentiated transformations
// ---------------------------------------------------------------------------

/// delta^M applied to W in S^{M x X}: fibre by fibre, (delta^M W)_m = delta(W_m).
inline Mask fiberwise(const LatticeMap& delta, std::size_t nm, Mask w)
{
    const auto& sx = *delta.dom();
    const auto& sy = *delta.cod();
    const std::size_t nx = sx.base_ref().size(), ny = sy.base_ref().size();
    Mask out = 0;
    for (std::size_t m = 0; m < nm; ++m) {
        Mask fibre = (w >> (m * nx)) & (nx == 0 ? 0 : sx.base_ref().full_mask());
        Mask img = sy.mask(delta(sx.index_of(fibre)));
        out |= img << (m * ny);
    }
    return out;
}

/// delta^M as a lattice map S^{M x X} -> S^{M x Y}.
inline LatticeMap exponentiated(const LatticeMap& delta, const ProductCone& mx, const ProductCone& my,
                                const Caps& caps = default_caps())
{
    auto smx = upset_lattice(mx.object, caps);
    auto smy = upset_lattice(my.object, caps);
    const std::size_t nm = mx.pi1.cod()->size();
    std::vector<std::size_t> a(smx->size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = smy->index_of(fiberwise(delta, nm, smx->mask(i)));
    return LatticeMap(smx, smy, std::move(a));
}

/// delta^M . S^a = S^b . delta, evaluated on every U.
inline std::optional<nlohmann::json> nat_equivariance_violation(const LatticeMap& delta, const ActedPoset& a,
                                                                const ActedPoset& b)
{
    const auto& sx = *delta.dom();
    const auto& sy = *delta.cod();
    const std::size_t nm = a.monoid()->size();
    const std::size_t nx = a.carrier()->size(), ny = b.carrier()->size();
    for (std::size_t u = 0; u < sx.size(); ++u) {
        Mask um = sx.mask(u);
        Mask sa = 0;
        for (std::size_t m = 0; m < nm; ++m) sa |= a.preimage(m, um) << (m * nx);
        Mask lhs = fiberwise(delta, nm, sa);
        Mask du = sy.mask(delta(u));
        Mask rhs = 0;
        for (std::size_t m = 0; m < nm; ++m) rhs |= b.preimage(m, du) << (m * ny);
        if (lhs != rhs) return nlohmann::json{{"U", sx.element_json(u)}};
    }
    return std::nullopt;
}

/// The group form: delta(g.U) = g.delta(U).
inline bool group_equivariant(const LatticeMap& delta, const ActedPoset& a, const ActedPoset& b)
{
    const auto& sx = *delta.dom();
    const auto& sy = *delta.cod();
    for (std::size_t g = 0; g < a.monoid()->size(); ++g) {
        for (std::size_t u = 0; u < sx.size(); ++u) {
            Mask gu = a.image(g, sx.mask(u));
            if (sy.mask(delta(sx.index_of(gu))) != b.image(g, sy.mask(delta(u)))) return false;
        }
    }
    return true;
}

struct EquivariantNats {
    std::vector<LatticeMap> maps;
    Certificate certificate;
};

inline EquivariantNats equivariant_nats(const ActedPoset& a, const ActedPoset& b, const Caps& caps = default_caps())
{
    if (a.monoid() != b.monoid()) throw Error(ErrorKind::ShapeMismatch, "actions of different monoids");
    const std::size_t nm = a.monoid()->size();
    if (nm * a.carrier()->size() > kMaskBits || nm * b.carrier()->size() > kMaskBits) {
        throw Error(ErrorKind::SizeCap, "M x X must fit a 64-bit up-set");
    }
    EquivariantNats r{{}, Certificate("equivariant-nats")};
    bool group = a.monoid()->is_group();
    bool agree = true;
    std::size_t total = 0;
    for_each_nat(upset_lattice(a.carrier(), caps), upset_lattice(b.carrier(), caps), [&](LatticeMap d) {
        ++total;
        bool eq = !nat_equivariance_violation(d, a, b);
        if (group) agree &= eq == group_equivariant(d, a, b);
        if (eq) r.maps.push_back(std::move(d));
        return true;
    });
    if (group) r.certificate.require("group-form-agrees", agree);
    r.certificate.count("nat", static_cast<std::int64_t>(total));
    r.certificate.count("equivariant", static_cast<std::int64_t>(r.maps.size()));
    return r;
}

// ---------------------------------------------------------------------------
// The induced action on P(X)
// ---------------------------------------------------------------------------

struct PowerAction {
    std::shared_ptr<DoublePower> px;
    ActedPoset acted;
    Certificate certificate;
};

/// a^P = P(a) . t_{M,X} : M x P(X) -> P(X). Computed as the transpose of the
/// composite transformation U |-> t(S^a U) = {(m, Phi) : (S^a U)_m in Phi};
/// when P(M x X) is within the caps the literal composite with the strength
/// is materialized and compared.
inline PowerAction power_action(const ActedPoset& a, const Caps& caps = default_caps())
{
    PowerAction r{std::make_shared<DoublePower>(a.carrier(), caps), {}, Certificate("power-action")};
    const auto& px = *r.px;
    const auto& m = a.monoid();
    auto mp = product(m->carrier(), px.carrier(), caps);
    auto mx = product(m->carrier(), a.carrier(), caps);
    mp.object->require_mask();
    auto act = px.transpose_with(mp.object, [&](std::size_t u) {
        Mask out = 0;
        for (std::size_t g = 0; g < m->size(); ++g) {
            std::size_t pre = px.opens()->index_of(a.preimage(g, px.opens()->mask(u)));
            for (std::size_t p = 0; p < px.size(); ++p) {
                if (px.contains(p, pre)) out |= Mask{1} << mp.pair_index(g, p);
            }
        }
        return out;
    });
    std::vector<std::size_t> table(m->size() * px.size());
    for (std::size_t g = 0; g < m->size(); ++g) {
        for (std::size_t p = 0; p < px.size(); ++p) table[g * px.size() + p] = act(mp.pair_index(g, p));
    }
    try {
        r.acted = make_acted(m, px.carrier(), std::move(table), "P" + a.name());
        r.certificate.require("action-laws", true);
    } catch (const Error& e) {
        throw TheoremViolation(e.kind(), std::string("induced action on P(X) fails: ") + e.what(), e.witness());
    }

    bool compared = false;
    if (mx.object->size() <= caps.max_double_power) {
        try {
            auto s = strength(m->carrier(), px, caps);
            auto via_strength = compose(functor_map(*s.pzx, px, a.action_map(s.zx)), s.t);
            r.certificate.require("equals-P(a).strength", via_strength.assign() == act.assign());
            compared = true;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SizeCap) throw;
        }
    }
    if (!compared) r.certificate.count("skipped:P(a).strength", 1);
    if (m->is_group()) {
        bool closed = true;
        for (std::size_t g = 0; g < m->size(); ++g) {
            for (std::size_t p = 0; p < px.size(); ++p) {
                Mask phi = 0;
                for (std::size_t u = 0; u < px.opens()->size(); ++u) {
                    Mask moved = a.image(m->inverse(g), px.opens()->mask(u));
                    if (px.contains(p, px.opens()->index_of(moved))) phi |= Mask{1} << u;
                }
                closed &= px.filter(r.acted.act(g, p)) == phi;
            }
        }
        r.certificate.require("group-closed-form", closed);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Stability of double exponentiability under actions
// ---------------------------------------------------------------------------

template <class Leq>
bool order_isomorphic_by_index(std::size_t n, const std::vector<std::size_t>& image, Leq&& dom_leq, Leq&& cod_leq)
{
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (dom_leq(i, j) != cod_leq(image[i], image[j])) return false;
        }
    }
    return true;
}

/// Equivariant transformations S^X -> S^Y versus equivariant maps
/// (Y, b) -> (P(X), a^P): counts, both transposes, both composites, order,
/// and naturality over the supplied equivariant maps into (Y, b).
inline Certificate verify_stability(const ActedPoset& a, const ActedPoset& b,
                                    std::span<const std::pair<ActedPoset, MonotoneMap>> naturality = {},
                                    const Caps& caps = default_caps())
{
    Certificate cert("stability:" + a.name() + "," + b.name());
    auto pa = power_action(a, caps);
    cert.absorb(pa.certificate);
    const auto& px = *pa.px;
    auto nats = equivariant_nats(a, b, caps);
    cert.absorb(nats.certificate);
    auto maps = enumerate_equivariant(b, pa.acted, caps);
    const auto& left = nats.maps;
    cert.count("equivariant_nats", static_cast<std::int64_t>(left.size()));
    cert.count("equivariant_maps", static_cast<std::int64_t>(maps.size()));
    cert.require("counts-agree", left.size() == maps.size(),
                 {{"equivariant_nats", left.size()}, {"equivariant_maps", maps.size()}});

    auto find_map = [&](const MonotoneMap& h) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < maps.size(); ++i) {
            if (maps[i].assign() == h.assign()) return i;
        }
        return std::nullopt;
    };
    std::vector<std::size_t> fwd(left.size(), maps.size()), bwd(maps.size(), left.size());
    bool forward_ok = true, backward_ok = true;
    for (std::size_t i = 0; i < left.size(); ++i) {
        auto h = px.transpose(left[i]);
        auto idx = find_map(h);
        if (!idx) {
            forward_ok = false;
            cert.require("transpose-lands-in-equivariant-maps", false, {{"delta", left[i].to_json()}});
            return cert;
        }
        fwd[i] = *idx;
    }
    for (std::size_t j = 0; j < maps.size(); ++j) {
        auto d = px.untranspose(maps[j], caps);
        bool found = false;
        for (std::size_t i = 0; i < left.size() && !found; ++i) {
            if (left[i].assign() == d.assign()) {
                bwd[j] = i;
                found = true;
            }
        }
        if (!found) {
            backward_ok = false;
            cert.require("untranspose-lands-in-equivariant-nats", false, {{"map", maps[j].to_json()}});
            return cert;
        }
    }
    cert.require("transpose-lands-in-equivariant-maps", forward_ok);
    cert.require("untranspose-lands-in-equivariant-nats", backward_ok);
    bool comp1 = true, comp2 = true;
    for (std::size_t i = 0; i < left.size(); ++i) comp1 &= bwd[fwd[i]] == i;
    for (std::size_t j = 0; j < maps.size(); ++j) comp2 &= fwd[bwd[j]] == j;
    cert.require("untranspose.transpose=id", comp1);
    cert.require("transpose.untranspose=id", comp2);
    if (comp1 && comp2) {
        std::function<bool(std::size_t, std::size_t)> dl = [&](std::size_t i, std::size_t j) {
            return pointwise_leq(left[i], left[j]);
        };
        std::function<bool(std::size_t, std::size_t)> cl = [&](std::size_t i, std::size_t j) {
            return pointwise_leq(maps[i], maps[j]);
        };
        cert.require("order-isomorphism", order_isomorphic_by_index(left.size(), fwd, dl, cl));
    }

    bool natural = true;
    std::optional<nlohmann::json> witness;
    for (const auto& [src, u] : naturality) {
        if (!is_equivariant(u, src, b)) continue;
        auto su = inverse_image(u, caps);
        for (const auto& d : left) {
            if (px.transpose(compose(su, d)).assign() != compose(px.transpose(d), u).assign()) {
                natural = false;
                witness = nlohmann::json{{"delta", d.to_json()}, {"u", u.to_json()}};
                break;
            }
        }
        if (!natural) break;
    }
    cert.require("natural-in-Y", natural, witness.value_or(nlohmann::json{}));
    cert.count("naturality_maps", static_cast<std::int64_t>(naturality.size()));
    return cert;
}

// ---------------------------------------------------------------------------
// Free actions and mates
// ---------------------------------------------------------------------------

/// (G x X, m x Id).
inline ActedPoset free_action(const MonoidPtr& g, const PosetPtr& x, const ProductCone& gx)
{
    std::vector<std::size_t> t(g->size() * gx.object->size());
    for (std::size_t h = 0; h < g->size(); ++h) {
        for (std::size_t k = 0; k < g->size(); ++k) {
            for (std::size_t e = 0; e < x->size(); ++e) {
                t[h * gx.object->size() + gx.pair_index(k, e)] = gx.pair_index(g->mul(h, k), e);
            }
        }
    }
    return make_acted(g, gx.object, std::move(t), "(" + g->name() + "x" + label_of(x) + ",free)");
}

/// The mate of delta : S^X -> S^Y as S^X -> S^{G x Y}:
/// (g, y) in mate(U) iff y in delta(g^{-1}.U).
inline LatticeMap mate(const LatticeMap& delta, const ActedPoset& a, const ProductCone& gy,
                       const Caps& caps = default_caps())
{
    const auto& g = *a.monoid();
    if (!g.is_group()) throw Error(ErrorKind::GroupRequired, "the mate formula uses inverses");
    const auto& sx = *delta.dom();
    const auto& sy = *delta.cod();
    auto sgy = upset_lattice(gy.object, caps);
    const std::size_t ny = sy.base_ref().size();
    std::vector<std::size_t> out(sx.size());
    for (std::size_t u = 0; u < sx.size(); ++u) {
        Mask m = 0;
        for (std::size_t h = 0; h < g.size(); ++h) {
            Mask moved = a.image(g.inverse(h), sx.mask(u));
            Mask ys = sy.mask(delta(sx.index_of(moved)));
            for (std::size_t y = 0; y < ny; ++y) {
                if ((ys >> y) & 1U) m |= Mask{1} << gy.pair_index(h, y);
            }
        }
        out[u] = sgy->index_of(m);
    }
    return LatticeMap(delta.dom(), sgy, std::move(out));
}

/// Inverse of mate: the unit component.
inline LatticeMap comate(const LatticeMap& eps, const MonoidPtr& g, const ProductCone& gy, const LatticePtr& sy)
{
    const auto& sgy = *eps.cod();
    const std::size_t ny = sy->base_ref().size();
    std::vector<std::size_t> out(eps.dom()->size());
    for (std::size_t u = 0; u < out.size(); ++u) {
        Mask m = sgy.mask(eps(u));
        Mask ys = 0;
        for (std::size_t y = 0; y < ny; ++y) {
            if ((m >> gy.pair_index(g->unit(), y)) & 1U) ys |= Mask{1} << y;
        }
        out[u] = sy->index_of(ys);
    }
    return LatticeMap(eps.dom(), sy, std::move(out));
}

/// The component of the mate at an acted (Z, c) on an element u of S^{Z x X}:
/// {(z, g, y) : (g^{-1} z, y) in delta_Z(u)}, with delta_Z fibrewise over Z.
inline Mask mate_component(const LatticeMap& delta, const ActedPoset& z, const ActedPoset& a, Mask u)
{
    const auto& g = *a.monoid();
    if (!g.is_group()) throw Error(ErrorKind::GroupRequired, "the mate formula uses inverses");
    const std::size_t nz = z.carrier()->size();
    const std::size_t ny = delta.cod()->base_ref().size();
    Mask dz = fiberwise(delta, nz, u); // over Z x Y, index z * ny + y
    Mask out = 0;                      // over Z x G x Y, index (z * |G| + g) * ny + y
    for (std::size_t zi = 0; zi < nz; ++zi) {
        for (std::size_t h = 0; h < g.size(); ++h) {
            std::size_t src = z.act(g.inverse(h), zi);
            for (std::size_t y = 0; y < ny; ++y) {
                if ((dz >> (src * ny + y)) & 1U) out |= Mask{1} << ((zi * g.size() + h) * ny + y);
            }
        }
    }
    return out;
}

/// Roundtrips and order for the mate correspondence over every delta in
/// Nat[S^X, S^Y], for a group acting on X (Y carries no action).
inline Certificate verify_mate(const ActedPoset& a, const PosetPtr& y, const Caps& caps = default_caps())
{
    Certificate cert("mate:" + a.name() + "," + label_of(y));
    const auto& g = a.monoid();
    auto gy = product(g->carrier(), y, caps);
    auto free_y = free_action(g, y, gy);
    auto sy = upset_lattice(y, caps);
    auto nats = nat_trans_space(a.carrier(), y, caps);
    std::vector<LatticeMap> mates;
    mates.reserve(nats.size());
    bool roundtrip = true, back = true, equivariant = true, unit_component = true;
    for (const auto& d : nats) {
        mates.push_back(mate(d, a, gy, caps));
        const auto& m = mates.back();
        auto c = comate(m, g, gy, sy);
        roundtrip &= c.assign() == d.assign();
        back &= mate(c, a, gy, caps).assign() == m.assign();
        equivariant &= !nat_equivariance_violation(m, a, free_y);
        // the unit component read off directly
        for (std::size_t u = 0; u < d.dom()->size() && unit_component; ++u) {
            Mask at_e = 0;
            for (std::size_t yi = 0; yi < y->size(); ++yi) {
                if ((m.cod()->mask(m(u)) >> gy.pair_index(g->unit(), yi)) & 1U) at_e |= Mask{1} << yi;
            }
            unit_component = at_e == sy->mask(d(u));
        }
    }
    cert.require("comate.mate=id", roundtrip);
    cert.require("mate.comate=id", back);
    cert.require("mate-equivariant", equivariant);
    cert.require("unit-component=delta", unit_component);
    std::vector<std::size_t> idx(nats.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::function<bool(std::size_t, std::size_t)> dl = [&](std::size_t i, std::size_t j) {
        return pointwise_leq(nats[i], nats[j]);
    };
    std::function<bool(std::size_t, std::size_t)> ml = [&](std::size_t i, std::size_t j) {
        return pointwise_leq(mates[i], mates[j]);
    };
    cert.require("order-isomorphism", order_isomorphic_by_index(nats.size(), idx, dl, ml));
    cert.count("nat", static_cast<std::int64_t>(nats.size()));
    return cert;
}

/// Free-forgetful adjunction data at (X, a): unit, counit, triangle
/// identities, the hom bijection against test objects, Frobenius
/// reciprocity and the untwisting isomorphism (G, m) x (X, pi2) = (G, m) x (X, a).
inline Certificate free_forgetful(const ActedPoset& a, std::span<const ActedPoset> tests = {},
                                  std::span<const PosetPtr> frobenius_family = {}, const Caps& caps = default_caps())
{
    Certificate cert("free-forgetful:" + a.name());
    const auto& g = a.monoid();
    const auto& x = a.carrier();
    auto gx = product(g->carrier(), x, caps);
    auto fx = free_action(g, x, gx);

    std::vector<std::size_t> eta(x->size());
    for (std::size_t e = 0; e < x->size(); ++e) eta[e] = gx.pair_index(g->unit(), e);
    auto unit_map = MonotoneMap(x, gx.object, eta);
    auto counit = a.action_map(gx);
    cert.require("counit-is-action-and-equivariant", is_equivariant(counit, fx, a));
    cert.require("triangle:counit.unit=id", compose(counit, unit_map).assign() == identity(x).assign());

    // counit of the free object composed with the free image of the unit
    auto g_gx = product(g->carrier(), gx.object, caps);
    auto free_unit = product_map(gx, g_gx, identity(g->carrier()), unit_map);
    auto free_free = free_action(g, gx.object, g_gx);
    auto counit_free = fx.action_map(g_gx);
    cert.require("triangle:counit_F.F(unit)=id", compose(counit_free, free_unit).assign() == identity(gx.object).assign());
    cert.require("free-unit-equivariant", is_equivariant(free_unit, fx, free_free));

    for (const auto& z : tests) {
        if (z.monoid() != g) continue;
        auto eqs = enumerate_equivariant(fx, z, caps);
        auto plain = enumerate_monotone(x, z.carrier(), caps);
        bool bij = eqs.size() == plain.size();
        for (const auto& f : eqs) {
            auto h = compose(f, unit_map);
            // f is recovered from h by extending equivariantly
            std::vector<std::size_t> ext(gx.object->size());
            for (std::size_t k = 0; k < g->size(); ++k) {
                for (std::size_t e = 0; e < x->size(); ++e) ext[gx.pair_index(k, e)] = z.act(k, h(e));
            }
            bij &= ext == f.assign();
        }
        cert.require("hom-bijection[" + z.name() + "]", bij, {{"equivariant", eqs.size()}, {"plain", plain.size()}});
    }

    if (!g->is_group()) {
        cert.count("skipped:frobenius(monoid)", 1);
        return cert;
    }
    for (const auto& y : frobenius_family) {
        // G x (X x Y) with free action  vs  (X, a) x (G x Y, free)
        auto xy = product(x, y, caps);
        auto g_xy = product(g->carrier(), xy.object, caps);
        auto gy = product(g->carrier(), y, caps);
        auto x_gy = product(x, gy.object, caps);
        auto left = free_action(g, xy.object, g_xy);
        auto fy = free_action(g, y, gy);
        auto right = acted_product(a, fy, {}, caps).object;
        std::vector<std::size_t> fwd(g_xy.object->size()), bwd(x_gy.object->size());
        for (std::size_t k = 0; k < g->size(); ++k) {
            for (std::size_t e = 0; e < x->size(); ++e) {
                for (std::size_t yi = 0; yi < y->size(); ++yi) {
                    fwd[g_xy.pair_index(k, xy.pair_index(e, yi))] = x_gy.pair_index(a.act(k, e), gy.pair_index(k, yi));
                    bwd[x_gy.pair_index(e, gy.pair_index(k, yi))] =
                        g_xy.pair_index(k, xy.pair_index(a.act(g->inverse(k), e), yi));
                }
            }
        }
        auto phi = MonotoneMap(g_xy.object, x_gy.object, fwd);
        auto psi = MonotoneMap(x_gy.object, g_xy.object, bwd);
        const std::string tag = "[" + label_of(y) + "]";
        cert.require("frobenius-map-equivariant" + tag, is_equivariant(phi, left, right));
        cert.require("frobenius-inverse-equivariant" + tag, is_equivariant(psi, right, left));
        cert.require("frobenius-inverse-left" + tag, compose(psi, phi).assign() == identity(g_xy.object).assign());
        cert.require("frobenius-inverse-right" + tag, compose(phi, psi).assign() == identity(x_gy.object).assign());
    }

    // (g, x) |-> (g, a(g, x)) untwists the diagonal action
    auto triv = trivial_action(g, x);
    auto twisted = acted_product(regular_action(g), a, {}, caps).object;
    auto plain = acted_product(regular_action(g), triv, {}, caps).object;
    std::vector<std::size_t> t(gx.object->size()), ti(gx.object->size());
    for (std::size_t k = 0; k < g->size(); ++k) {
        for (std::size_t e = 0; e < x->size(); ++e) {
            t[gx.pair_index(k, e)] = gx.pair_index(k, a.act(k, e));
            ti[gx.pair_index(k, e)] = gx.pair_index(k, a.act(g->inverse(k), e));
        }
    }
    auto untwist = MonotoneMap(plain.carrier(), twisted.carrier(), t);
    auto retwist = MonotoneMap(twisted.carrier(), plain.carrier(), ti);
    cert.require("untwist-equivariant", is_equivariant(untwist, plain, twisted));
    cert.require("untwist-iso", compose(retwist, untwist).assign() == identity(plain.carrier()).assign() &&
                                    compose(untwist, retwist).assign() == identity(twisted.carrier()).assign());
    return cert;
}

/// G x G x X => G x X -> X (m x Id, Id x a, then a) is a coequalizer of
/// acted posets, split in posets by x |-> (e, x) and (g, x) |-> (e, g, x).
inline Certificate verify_split_coequalizer(const ActedPoset& a, std::span<const ActedPoset> tests = {},
                                            const Caps& caps = default_caps())
{
    Certificate cert("split-coequalizer:" + a.name());
    const auto& g = a.monoid();
    const auto& x = a.carrier();
    auto gx = product(g->carrier(), x, caps);
    auto ggx = product(g->carrier(), gx.object, caps);
    auto f_gx = free_action(g, x, gx);
    auto f_ggx = free_action(g, gx.object, ggx);
    const std::size_t ng = g->size(), nx = x->size();
    std::vector<std::size_t> d0(ggx.object->size()), d1(ggx.object->size()), t(gx.object->size()), s(nx);
    for (std::size_t k = 0; k < ng; ++k) {
        for (std::size_t h = 0; h < ng; ++h) {
            for (std::size_t e = 0; e < nx; ++e) {
                std::size_t i = ggx.pair_index(k, gx.pair_index(h, e));
                d0[i] = gx.pair_index(g->mul(k, h), e);
                d1[i] = gx.pair_index(k, a.act(h, e));
            }
        }
    }
    for (std::size_t h = 0; h < ng; ++h) {
        for (std::size_t e = 0; e < nx; ++e) t[gx.pair_index(h, e)] = ggx.pair_index(g->unit(), gx.pair_index(h, e));
    }
    for (std::size_t e = 0; e < nx; ++e) s[e] = gx.pair_index(g->unit(), e);
    auto m0 = MonotoneMap(ggx.object, gx.object, d0);
    auto m1 = MonotoneMap(ggx.object, gx.object, d1);
    auto q = a.action_map(gx);
    auto sm = MonotoneMap(x, gx.object, s);
    auto tm = MonotoneMap(gx.object, ggx.object, t);
    cert.require("d0-equivariant", is_equivariant(m0, f_ggx, f_gx));
    cert.require("d1-equivariant", is_equivariant(m1, f_ggx, f_gx));
    cert.require("a-equivariant", is_equivariant(q, f_gx, a));
    cert.require("a.d0=a.d1", compose(q, m0).assign() == compose(q, m1).assign());
    cert.require("split:a.s=id", compose(q, sm).assign() == identity(x).assign());
    cert.require("split:d0.t=id", compose(m0, tm).assign() == identity(gx.object).assign());
    cert.require("split:d1.t=s.a", compose(m1, tm).assign() == compose(sm, q).assign());

    for (const auto& z : tests) {
        if (z.monoid() != g) continue;
        auto cocones = enumerate_equivariant(f_gx, z, caps);
        auto through = enumerate_equivariant(a, z, caps);
        std::size_t coequalizing = 0;
        bool unique = true;
        for (const auto& h : cocones) {
            if (compose(h, m0).assign() != compose(h, m1).assign()) continue;
            ++coequalizing;
            std::size_t hits = 0;
            for (const auto& k : through) hits += compose(k, q).assign() == h.assign();
            unique &= hits == 1;
        }
        cert.require("coequalizer[" + z.name() + "]", unique && coequalizing == through.size(),
                     {{"cocones", coequalizing}, {"maps_out_of_X", through.size()}});
    }
    return cert;
}

} // namespace spacelab
