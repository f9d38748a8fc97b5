#pragma once

#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>
#include <span>
#include <string>
#include <vector>

#include "birkhoff.hpp"
#include "certificate.hpp"
#include "hom.hpp"
#include "limits.hpp"
#include "poset.hpp"
#include "upset_lattice.hpp"

namespace spacelab {

// ---------------------------------------------------------------------------
// Natural transformations S^X -> S^Y
// ---------------------------------------------------------------------------

/// Streams every monotone map S^X -> S^Y.
template <class Visit>
void for_each_nat(const LatticePtr& sx, const LatticePtr& sy, Visit&& visit)
{
    for_each_monotone(*sx->as_poset(), *sy->as_poset(), [&](const std::vector<std::size_t>& a) {
        return visit(LatticeMap::trusted(sx, sy, a));
    });
}

/// All monotone maps S^X -> S^Y in enumeration order.
inline std::vector<LatticeMap> nat_trans_space(const PosetPtr& x, const PosetPtr& y, const Caps& caps = default_caps())
{
    auto sx = upset_lattice(x, caps);
    auto sy = upset_lattice(y, caps);
    std::vector<LatticeMap> out;
    for_each_nat(sx, sy, [&](LatticeMap m) {
        if (out.size() >= caps.max_hom) {
            throw Error(ErrorKind::SizeCap, "Nat[S^" + label_of(x) + ", S^" + label_of(y) + "] exceeds " +
                                                std::to_string(caps.max_hom) + " maps");
        }
        out.push_back(std::move(m));
        return true;
    });
    return out;
}

/// Join-homomorphisms S^X -> S^Y (bottom included). Each is fixed by its
/// values on the principal up-sets, which may be any antitone family.
template <class Visit>
void for_each_join_hom(const LatticePtr& sx, const LatticePtr& sy, Visit&& visit)
{
    const auto& x = sx->base_ref();
    auto xop = x.opposite();
    for_each_monotone(*xop, *sy->as_poset(), [&](const std::vector<std::size_t>& h) {
        std::vector<std::size_t> a(sx->size());
        for (std::size_t i = 0; i < sx->size(); ++i) {
            Mask out = 0;
            for (Mask rest = sx->mask(i); rest; rest &= rest - 1) {
                out |= sy->mask(h[static_cast<std::size_t>(std::countr_zero(rest))]);
            }
            a[i] = sy->index_of(out);
        }
        return visit(LatticeMap::trusted(sx, sy, std::move(a)));
    });
}

/// Meet-homomorphisms S^X -> S^Y (top included), fixed by their values on the
/// co-principal up-sets X \ down(x).
template <class Visit>
void for_each_meet_hom(const LatticePtr& sx, const LatticePtr& sy, Visit&& visit)
{
    const auto& x = sx->base_ref();
    auto xop = x.opposite();
    const Mask full_y = sy->mask(sy->top());
    for_each_monotone(*xop, *sy->as_poset(), [&](const std::vector<std::size_t>& k) {
        std::vector<std::size_t> a(sx->size());
        for (std::size_t i = 0; i < sx->size(); ++i) {
            Mask out = full_y;
            for (std::size_t e = 0; e < x.size(); ++e) {
                if (!(sx->mask(i) & (Mask{1} << e))) out &= sy->mask(k[e]);
            }
            a[i] = sy->index_of(out);
        }
        return visit(LatticeMap::trusted(sx, sy, std::move(a)));
    });
}

enum class KleisliKind { Plain, JoinHom, MeetHom, DLatHom };

inline std::string_view to_string(KleisliKind k)
{
    switch (k) {
    case KleisliKind::Plain: return "plain";
    case KleisliKind::JoinHom: return "join-hom";
    case KleisliKind::MeetHom: return "meet-hom";
    case KleisliKind::DLatHom: return "dlat-hom";
    }
    return "?";
}

inline KleisliKind classify(const LatticeMap& m)
{
    const auto& f = m.flags();
    if (f.dlat_hom()) return KleisliKind::DLatHom;
    if (f.join_hom()) return KleisliKind::JoinHom;
    if (f.meet_hom()) return KleisliKind::MeetHom;
    return KleisliKind::Plain;
}

/// Kleisli composition is composition of the natural transformations:
/// arrows Z -> P(Y) and Y -> P(X) given as outer: S^Y -> S^Z and
/// inner: S^X -> S^Y compose to outer . inner : S^X -> S^Z.
inline LatticeMap kleisli_compose(const LatticeMap& outer, const LatticeMap& inner) { return compose(outer, inner); }

// ---------------------------------------------------------------------------
// The double power object P(X)
// ---------------------------------------------------------------------------

/// P(X): the up-sets of the lattice S^X, ordered by inclusion. A point Phi is
/// stored as a bitset over the indices of S^X. Maps Y -> P(X) correspond to
/// monotone maps S^X -> S^Y through
///     h |-> (U |-> {y : U in h(y)}).
class DoublePower {
public:
    /// `checked` enforces the double-power cap on |X|; nested constructions
    /// (P(P(X)), P(Z x X) inside law checks) are bounded by the element caps.
    explicit DoublePower(PosetPtr x, const Caps& caps = default_caps(), bool checked = true)
        : base_(std::move(x))
    {
        if (checked && base_->size() > caps.max_double_power) {
            throw Error(ErrorKind::SizeCap, "P(" + label_of(base_) + ") needs |X| <= " +
                                                std::to_string(caps.max_double_power));
        }
        opens_ = upset_lattice(base_, caps);
        auto opens_poset = opens_->as_poset();
        opens_poset->require_mask();
        points_ = upset_lattice(opens_poset, caps);
        if (points_->size() > caps.max_elements) {
            throw Error(ErrorKind::SizeCap, "P(" + label_of(base_) + ") has " + std::to_string(points_->size()) +
                                                " points, above the element cap");
        }
        carrier_ = points_->as_poset()->relabeled("P(" + label_of(base_) + ")");
    }

    const PosetPtr& base() const { return base_; }
    const LatticePtr& opens() const { return opens_; }
    const PosetPtr& carrier() const { return carrier_; }
    std::size_t size() const { return carrier_->size(); }

    /// The set of opens (as a bitset over S^X indices) making up point p.
    Mask filter(std::size_t p) const { return points_->mask(p); }
    bool contains(std::size_t p, std::size_t u) const { return (points_->mask(p) >> u) & 1U; }
    std::size_t point_of(Mask filter) const { return points_->index_of(filter); }

    /// The points containing open u, as a bitset over the carrier.
    Mask evaluation_mask(std::size_t u) const
    {
        carrier_->require_mask();
        Mask out = 0;
        for (std::size_t p = 0; p < points_->size(); ++p) {
            if (contains(p, u)) out |= Mask{1} << p;
        }
        return out;
    }

    /// Transpose of a natural transformation given by its values
    /// delta(u) as bitsets over Y.
    template <class Delta>
    MonotoneMap transpose_with(const PosetPtr& y, Delta&& delta) const
    {
        std::vector<Mask> values(opens_->size());
        for (std::size_t u = 0; u < values.size(); ++u) values[u] = delta(u);
        std::vector<std::size_t> a(y->size());
        for (std::size_t e = 0; e < y->size(); ++e) {
            Mask phi = 0;
            for (std::size_t u = 0; u < values.size(); ++u) {
                if ((values[u] >> e) & 1U) phi |= Mask{1} << u;
            }
            auto p = points_->find(phi);
            if (!p) {
                throw Error(ErrorKind::NotMonotone, "transformation is not monotone at " + y->name(e),
                            {{"element", y->name(e)}});
            }
            a[e] = *p;
        }
        return MonotoneMap(y, carrier_, std::move(a));
    }

    MonotoneMap transpose(const LatticeMap& delta) const
    {
        if (!delta.dom()->same_as(*opens_)) throw Error(ErrorKind::ShapeMismatch, "transformation has the wrong source");
        const auto& sy = *delta.cod();
        return transpose_with(sy.base(), [&](std::size_t u) { return sy.mask(delta(u)); });
    }

    /// {y : U in h(y)} for the open with index u.
    Mask untranspose_mask(const MonotoneMap& h, std::size_t u) const
    {
        Mask out = 0;
        for (std::size_t e = 0; e < h.dom()->size(); ++e) {
            if (contains(h(e), u)) out |= Mask{1} << e;
        }
        return out;
    }

    LatticeMap untranspose(const MonotoneMap& h, const Caps& caps = default_caps()) const
    {
        if (!same_poset(h.cod(), carrier_)) throw Error(ErrorKind::ShapeMismatch, "map does not land in P(X)");
        auto sy = upset_lattice(h.dom(), caps);
        std::vector<std::size_t> a(opens_->size());
        for (std::size_t u = 0; u < a.size(); ++u) a[u] = sy->index_of(untranspose_mask(h, u));
        return LatticeMap::trusted(opens_, sy, std::move(a));
    }

private:
    PosetPtr base_;
    LatticePtr opens_;
    LatticePtr points_;
    PosetPtr carrier_;
};

inline DoublePower double_power(const PosetPtr& x, const Caps& caps = default_caps()) { return DoublePower(x, caps); }

/// eta_X : X -> P(X), the transpose of the identity on S^X.
inline MonotoneMap unit(const DoublePower& px) { return px.transpose(identity_map(px.opens())); }

/// P(f) : P(X) -> P(Y), the transpose of V |-> ev_X(f^{-1} V).
inline MonotoneMap functor_map(const DoublePower& px, const DoublePower& py, const MonotoneMap& f)
{
    if (!same_poset(f.dom(), px.base()) || !same_poset(f.cod(), py.base())) {
        throw Error(ErrorKind::ShapeMismatch, "P(f) with mismatched double powers");
    }
    return py.transpose_with(px.carrier(), [&](std::size_t v) {
        return px.evaluation_mask(px.opens()->index_of(f.preimage(py.opens()->mask(v))));
    });
}

/// mu_X : P(P(X)) -> P(X), the transpose of U |-> ev_{P X}(ev_X(U)).
/// `ppx` must be the double power of px.carrier().
inline MonotoneMap mult(const DoublePower& px, const DoublePower& ppx)
{
    if (!same_poset(ppx.base(), px.carrier())) throw Error(ErrorKind::ShapeMismatch, "mult needs P(P(X))");
    return px.transpose_with(ppx.carrier(), [&](std::size_t u) {
        return ppx.evaluation_mask(ppx.opens()->index_of(px.evaluation_mask(u)));
    });
}

/// Everything needed to state the strength t_{Z,X} : Z x P(X) -> P(Z x X).
struct Strength {
    ProductCone zx;          // Z x X
    ProductCone zp;          // Z x P(X)
    std::shared_ptr<DoublePower> pzx;
    MonotoneMap t;
};

/// The strength as the transpose of W |-> {(z, Phi) : W_z in Phi}, with W_z
/// the fibre of W over z.
inline MonotoneMap strength_map(const PosetPtr& z, const DoublePower& px, const ProductCone& zx, const ProductCone& zp,
                                const DoublePower& pzx)
{
    const std::size_t nz = z->size();
    const std::size_t nx = px.base()->size();
    const std::size_t np = px.size();
    zp.object->require_mask();
    return pzx.transpose_with(zp.object, [&](std::size_t w) {
        Mask wm = pzx.opens()->mask(w);
        Mask out = 0;
        for (std::size_t zi = 0; zi < nz; ++zi) {
            Mask fibre = 0;
            for (std::size_t xi = 0; xi < nx; ++xi) {
                if ((wm >> zx.pair_index(zi, xi)) & 1U) fibre |= Mask{1} << xi;
            }
            std::size_t fu = px.opens()->index_of(fibre);
            for (std::size_t p = 0; p < np; ++p) {
                if (px.contains(p, fu)) out |= Mask{1} << zp.pair_index(zi, p);
            }
        }
        return out;
    });
}

inline Strength strength(const PosetPtr& z, const DoublePower& px, const Caps& caps = default_caps())
{
    Strength s{product(z, px.base(), caps), product(z, px.carrier(), caps), nullptr, {}};
    s.pzx = std::make_shared<DoublePower>(s.zx.object, caps, false);
    s.t = strength_map(z, px, s.zx, s.zp, *s.pzx);
    return s;
}

/// Certifies that transposition Hom(Y, P(X)) <-> Nat[S^X, S^Y] is a bijection
/// and an order isomorphism, with both composites the identity.
inline Certificate verify_transpose(const DoublePower& px, const PosetPtr& y, const Caps& caps = default_caps())
{
    Certificate cert("transpose:" + label_of(px.base()) + "," + label_of(y));
    auto homs = enumerate_monotone(y, px.carrier(), caps);
    auto nats = nat_trans_space(px.base(), y, caps);
    cert.count("hom", static_cast<std::int64_t>(homs.size()));
    cert.count("nat", static_cast<std::int64_t>(nats.size()));
    cert.require("counts-agree", homs.size() == nats.size(), {{"hom", homs.size()}, {"nat", nats.size()}});

    std::vector<LatticeMap> down;
    down.reserve(homs.size());
    bool roundtrip_h = true;
    for (const auto& h : homs.maps()) {
        down.push_back(px.untranspose(h, caps));
        roundtrip_h &= px.transpose(down.back()).assign() == h.assign();
    }
    bool roundtrip_d = true;
    std::vector<std::size_t> hit(homs.size(), 0);
    for (const auto& d : nats) {
        auto h = px.transpose(d);
        roundtrip_d &= px.untranspose(h, caps).assign() == d.assign();
        if (auto i = homs.index_of(h)) hit[*i]++;
    }
    cert.require("transpose-after-untranspose-is-identity", roundtrip_h);
    cert.require("untranspose-after-transpose-is-identity", roundtrip_d);
    cert.require("transpose-hits-every-map-once",
                 std::all_of(hit.begin(), hit.end(), [](std::size_t c) { return c == 1; }));

    bool order = true;
    for (std::size_t i = 0; i < homs.size() && order; ++i) {
        for (std::size_t j = 0; j < homs.size() && order; ++j) {
            order = homs.leq(i, j) == pointwise_leq(down[i], down[j]);
        }
    }
    cert.require("order-isomorphism", order);
    return cert;
}

/// Naturality of transposition in Y: transpose(S^u . delta) = transpose(delta) . u.
inline Certificate verify_transpose_natural_in_y(const DoublePower& px, const MonotoneMap& u,
                                                 const Caps& caps = default_caps())
{
    Certificate cert("transpose-natural-in-Y");
    auto su = inverse_image(u, caps);
    bool ok = true;
    std::optional<nlohmann::json> witness;
    for_each_nat(px.opens(), su.dom(), [&](const LatticeMap& d) {
        if (px.transpose(compose(su, d)).assign() != compose(px.transpose(d), u).assign()) {
            ok = false;
            witness = nlohmann::json{{"delta", d.to_json()}, {"u", u.to_json()}};
            return false;
        }
        return true;
    });
    cert.require("square-commutes", ok, witness.value_or(nlohmann::json{}));
    return cert;
}

/// Naturality in X: transpose(delta . S^v) = P(v) . transpose(delta).
inline Certificate verify_transpose_natural_in_x(const DoublePower& px, const DoublePower& px2, const MonotoneMap& v,
                                                 const PosetPtr& y, const Caps& caps = default_caps())
{
    Certificate cert("transpose-natural-in-X");
    auto sv = inverse_image(v, caps);
    auto pv = functor_map(px, px2, v);
    bool ok = true;
    std::optional<nlohmann::json> witness;
    for_each_nat(px.opens(), upset_lattice(y, caps), [&](const LatticeMap& d) {
        if (px2.transpose(compose(d, sv)).assign() != compose(pv, px.transpose(d)).assign()) {
            ok = false;
            witness = nlohmann::json{{"delta", d.to_json()}, {"v", v.to_json()}};
            return false;
        }
        return true;
    });
    cert.require("square-commutes", ok, witness.value_or(nlohmann::json{}));
    return cert;
}

inline bool same_map(const MonotoneMap& a, const MonotoneMap& b)
{
    return a.assign() == b.assign() && same_poset(a.dom(), b.dom()) && same_poset(a.cod(), b.cod());
}

/// Certifies t_{A x B, X} = t_{A, B x X} . (Id_A x t_{B, X}) up to the
/// associativity isomorphisms of the products involved.
inline Certificate verify_strength_associativity(const PosetPtr& a, const PosetPtr& b, const PosetPtr& x,
                                                 const Caps& caps = default_caps())
{
    Certificate cert("strength-associativity");
    DoublePower px(x, caps, false);
    auto ab = product(a, b, caps);
    auto t_ab = strength(ab.object, px, caps);      // (A x B) x P X -> P((A x B) x X)
    auto t_b = strength(b, px, caps);               // B x P X -> P(B x X)
    auto t_a = strength(a, *t_b.pzx, caps);         // A x P(B x X) -> P(A x (B x X))
    // (A x B) x P X -> A x (B x P X)
    auto a_bp = product(a, t_b.zp.object, caps);
    auto assoc_in = associator(ab, t_ab.zp, t_b.zp, a_bp);
    // Id_A x t_{B,X} : A x (B x P X) -> A x P(B x X)
    auto id_t = product_map(a_bp, t_a.zp, identity(a), t_b.t);
    // P of (A x B) x X -> A x (B x X)
    auto assoc_out = associator(ab, t_ab.zx, t_b.zx, t_a.zx);
    auto p_assoc = functor_map(*t_ab.pzx, *t_a.pzx, assoc_out);
    auto lhs = compose(p_assoc, t_ab.t);
    auto rhs = compose(t_a.t, compose(id_t, assoc_in));
    cert.require("pentagon", same_map(lhs, rhs), {{"lhs", lhs.to_json()}, {"rhs", rhs.to_json()}});
    return cert;
}

/// Unit, multiplication and strength laws for P at X.
inline Certificate verify_monad_laws(const PosetPtr& x, const Caps& caps = default_caps())
{
    Certificate cert("monad-laws:" + label_of(x));
    DoublePower px(x, caps);
    auto eta = unit(px);

    // unit is the transpose of the identity and has the evaluation closed form
    cert.require("unit-untransposes-to-identity", px.untranspose(eta, caps).assign() == identity_map(px.opens()).assign());
    bool closed = true;
    for (std::size_t e = 0; e < x->size(); ++e) {
        Mask phi = 0;
        for (std::size_t u = 0; u < px.opens()->size(); ++u) {
            if ((px.opens()->mask(u) >> e) & 1U) phi |= Mask{1} << u;
        }
        closed &= px.filter(eta(e)) == phi;
    }
    cert.require("unit-is-evaluation", closed);
    cert.require("unit-injective", eta.is_injective());

    // P(P(X)) needs |P(X)| <= 64; beyond that the multiplication laws are skipped
    std::optional<DoublePower> ppx_slot;
    try {
        ppx_slot.emplace(px.carrier(), caps, false);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::SizeCap) throw;
        cert.count("skipped:mult-laws", 1);
    }
    if (ppx_slot) {
        const DoublePower& ppx = *ppx_slot;
        auto mu = mult(px, ppx);
        auto eta_p = unit(ppx);
        cert.require("mult.unit_P=id", same_map(compose(mu, eta_p), identity(px.carrier())));
        cert.require("mult.P(unit)=id", same_map(compose(mu, functor_map(px, ppx, eta)), identity(px.carrier())));

        bool mu_closed = true;
        for (std::size_t xi = 0; xi < ppx.size(); ++xi) {
            Mask phi = 0;
            for (std::size_t u = 0; u < px.opens()->size(); ++u) {
                auto ev = ppx.opens()->index_of(px.evaluation_mask(u));
                if (ppx.contains(xi, ev)) phi |= Mask{1} << u;
            }
            mu_closed &= px.filter(mu(xi)) == phi;
        }
        cert.require("mult-closed-form", mu_closed);

        try {
            DoublePower pppx(ppx.carrier(), caps, false);
            auto mu_p = mult(ppx, pppx);
            cert.require("mult.mult_P=mult.P(mult)",
                         same_map(compose(mu, mu_p), compose(mu, functor_map(pppx, ppx, mu))));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SizeCap) throw;
            cert.count("skipped:mult-associativity", 1);
        }
    }

    // strength laws
    auto one = point();
    auto t1 = strength(one, px, caps);
    auto p_pi2 = functor_map(*t1.pzx, px, t1.zx.pi2);
    cert.require("strength-unit:P(pi2).t_{1,X}=pi2", same_map(compose(p_pi2, t1.t), t1.zp.pi2));
    cert.require("strength-unit:t_{1,X}-iso", t1.t.is_iso());

    for (const auto& z : {point(), chain(2)}) {
        auto tz = strength(z, px, caps);
        auto id_eta = product_map(tz.zx, tz.zp, identity(z), eta);
        cert.require("strength-unit:t.(id x eta)=eta[" + label_of(z) + "]",
                     same_map(compose(tz.t, id_eta), unit(*tz.pzx)));
        if (!ppx_slot) {
            cert.count("skipped:strength-mult[" + label_of(z) + "]", 1);
            continue;
        }
        const DoublePower& ppx = *ppx_slot;
        auto mu = mult(px, ppx);
        try {
            // mu . P(t) . t_{Z,PX} = t . (id x mu)
            auto tzp = strength(z, ppx, caps);                    // Z x PPX -> P(Z x PX)
            DoublePower p_tz(tz.pzx->carrier(), caps, false);     // P(P(Z x X))
            auto p_t = functor_map(*tzp.pzx, p_tz, tz.t);         // P(Z x PX) -> PP(Z x X)
            auto lhs = compose(mult(*tz.pzx, p_tz), compose(p_t, tzp.t));
            auto rhs = compose(tz.t, product_map(tzp.zp, tz.zp, identity(z), mu));
            cert.require("strength-mult[" + label_of(z) + "]", same_map(lhs, rhs));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SizeCap) throw;
            cert.count("skipped:strength-mult[" + label_of(z) + "]", 1);
        }
    }
    return cert;
}

/// mu_X . P(h2) . h1 equals the transpose of untranspose(h1) . untranspose(h2).
inline Certificate verify_kleisli_composition(const DoublePower& px, const DoublePower& py, const MonotoneMap& h2,
                                              const MonotoneMap& h1, const Caps& caps = default_caps())
{
    Certificate cert("kleisli-composition");
    DoublePower ppx(px.carrier(), caps, false);
    auto via_monad = compose(mult(px, ppx), compose(functor_map(py, ppx, h2), h1));
    auto via_nat = px.transpose(kleisli_compose(py.untranspose(h1, caps), px.untranspose(h2, caps)));
    cert.require("monad-composite=nat-composite", same_map(via_monad, via_nat));
    return cert;
}

// ---------------------------------------------------------------------------
// Recovering maps from lattice homomorphisms
// ---------------------------------------------------------------------------

inline std::optional<std::pair<Law, nlohmann::json>> first_dlat_violation(const LatticeMap& alpha)
{
    for (Law law : {Law::Bottom, Law::Top, Law::Meet, Law::Join}) {
        if (auto w = alpha.find_violation(law)) return std::make_pair(law, *w);
    }
    return std::nullopt;
}

/// The unique f : Y -> X with S^f = alpha, for a lattice homomorphism
/// alpha : S^X -> S^Y. For each y, the up-sets whose image contains y form a
/// prime filter whose intersection must be a principal up-set up(x).
inline MonotoneMap recover_map(const LatticeMap& alpha)
{
    if (auto v = first_dlat_violation(alpha)) {
        throw Error(ErrorKind::NotDLatHom, "map violates " + std::string(to_string(v->first)), v->second);
    }
    const auto& sx = *alpha.dom();
    const auto& sy = *alpha.cod();
    const auto& x = sx.base_ref();
    auto yb = sy.base();
    std::vector<std::size_t> f(yb->size());
    for (std::size_t y = 0; y < yb->size(); ++y) {
        Mask v = x.empty() ? 0 : x.full_mask();
        for (std::size_t u = 0; u < sx.size(); ++u) {
            if ((sy.mask(alpha(u)) >> y) & 1U) v &= sx.mask(u);
        }
        std::optional<std::size_t> generator;
        for (std::size_t e = 0; e < x.size(); ++e) {
            if (((v >> e) & 1U) && x.up_mask(e) == v) generator = e;
        }
        if (!generator) {
            throw TheoremViolation(ErrorKind::NotPrincipal, "filter at " + yb->name(y) + " is not principal",
                                   {{"element", yb->name(y)}, {"meet_of_filter", x.element_json(v)},
                                    {"alpha", alpha.to_json()}});
        }
        f[y] = *generator;
    }
    MonotoneMap out;
    try {
        out = MonotoneMap(yb, sx.base(), std::move(f));
    } catch (const Error& e) {
        throw TheoremViolation(ErrorKind::NotMonotone, std::string("recovered map is not monotone: ") + e.what(),
                               e.witness());
    }
    if (inverse_image(out).assign() != alpha.assign()) {
        throw TheoremViolation(ErrorKind::AxiomFailure, "inverse image of the recovered map differs from the input",
                               {{"alpha", alpha.to_json()}, {"recovered", out.to_json()}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splitting idempotents
// ---------------------------------------------------------------------------

struct SplitResult {
    PosetPtr x0;
    MonotoneMap q;        // X -> X0
    LatticeMap theta;     // S^X0 -> S^X, equal to S^q
    LatticeMap gamma;     // S^X -> S^X0
    std::vector<std::size_t> fixed; // indices in S^X of the fixed up-sets
    Certificate certificate;
};

inline std::optional<nlohmann::json> idempotence_violation(const LatticeMap& psi)
{
    for (std::size_t u = 0; u < psi.dom()->size(); ++u) {
        if (psi(psi(u)) != psi(u)) return nlohmann::json{{"U", psi.dom()->element_json(u)}};
    }
    return std::nullopt;
}

/// Splits an inflationary idempotent join-homomorphism psi on S^X through
/// S^X0, where X0 is recovered from the fixed points of psi.
inline SplitResult split_inflationary(const LatticeMap& psi, const Caps& caps = default_caps())
{
    if (!psi.dom()->same_as(*psi.cod())) throw Error(ErrorKind::ShapeMismatch, "idempotent must be an endomap");
    const auto& sx = psi.dom();
    if (!psi.flags().join_hom()) {
        auto w = psi.find_violation(Law::Bottom);
        if (!w) w = psi.find_violation(Law::Join);
        throw Error(ErrorKind::NotJoinHom, "idempotent is not a join-homomorphism", w.value_or(nlohmann::json{}));
    }
    for (std::size_t u = 0; u < sx->size(); ++u) {
        if (!sx->leq(u, psi(u))) {
            throw Error(ErrorKind::NotInflationary, "idempotent is not inflationary",
                        {{"U", sx->element_json(u)}, {"psi_U", sx->element_json(psi(u))}});
        }
    }
    if (auto w = idempotence_violation(psi)) throw Error(ErrorKind::NotIdempotent, "map is not idempotent", *w);

    SplitResult r;
    Certificate& cert = r.certificate;
    cert = Certificate("split");
    for (std::size_t u = 0; u < sx->size(); ++u) {
        if (psi(u) == u) r.fixed.push_back(u);
    }
    FiniteLattice fl;
    try {
        fl = sublattice(*sx, r.fixed);
        require_distributive(fl);
    } catch (const Error& e) {
        throw TheoremViolation(ErrorKind::SplitObstruction, std::string("fixed points do not form a distributive lattice: ") + e.what(),
                               {{"psi", psi.to_json()}, {"detail", e.witness()}});
    }
    cert.require("fixed-points-closed-under-union-and-intersection", true);
    auto b = lattice_to_poset(fl, caps);
    cert.absorb(b.certificate);
    if (!b.certificate.passed()) {
        throw TheoremViolation(ErrorKind::SplitObstruction, "fixed-point lattice is not isomorphic to an up-set lattice",
                               {{"psi", psi.to_json()}});
    }
    r.x0 = b.poset->relabeled("X0");
    auto sx0 = upset_lattice(r.x0, caps);

    std::vector<std::size_t> theta(sx0->size()), gamma(sx->size());
    for (std::size_t k = 0; k < sx0->size(); ++k) theta[k] = r.fixed[b.iso_inverse[k]];
    std::vector<std::size_t> pos(sx->size(), 0);
    for (std::size_t i = 0; i < r.fixed.size(); ++i) pos[r.fixed[i]] = i;
    for (std::size_t u = 0; u < sx->size(); ++u) gamma[u] = b.iso[pos[psi(u)]];
    r.theta = LatticeMap(sx0, sx, std::move(theta));
    r.gamma = LatticeMap(sx, sx0, std::move(gamma));
    r.q = recover_map(r.theta);

    cert.require("theta.gamma=psi", compose(r.theta, r.gamma).assign() == psi.assign());
    cert.require("gamma.theta=id", compose(r.gamma, r.theta).assign() == identity_map(sx0).assign());
    cert.require("theta-meet-hom", r.theta.flags().meet_hom(), r.theta.find_violation(Law::Meet).value_or(nlohmann::json{}));
    cert.require("theta-join-hom", r.theta.flags().join_hom(), r.theta.find_violation(Law::Join).value_or(nlohmann::json{}));
    cert.require("gamma-join-hom", r.gamma.flags().join_hom(), r.gamma.find_violation(Law::Join).value_or(nlohmann::json{}));
    cert.require("gamma-preserves-top", r.gamma.flags().preserves_top);
    cert.require("theta=S^q", inverse_image(r.q, caps).assign() == r.theta.assign());
    cert.count("fixed_points", static_cast<std::int64_t>(r.fixed.size()));
    cert.count("x0_size", static_cast<std::int64_t>(r.x0->size()));
    return r;
}

/// Order dual of split_inflationary: psi deflationary, idempotent and a
/// meet-homomorphism. Runs the inflationary splitting on S^{X^op} through
/// complementation; q is the same function X -> X0.
inline SplitResult split_deflationary(const LatticeMap& psi, const Caps& caps = default_caps())
{
    if (!psi.dom()->same_as(*psi.cod())) throw Error(ErrorKind::ShapeMismatch, "idempotent must be an endomap");
    const auto& sx = psi.dom();
    if (!psi.flags().meet_hom()) {
        auto w = psi.find_violation(Law::Top);
        if (!w) w = psi.find_violation(Law::Meet);
        throw Error(ErrorKind::NotMeetHom, "idempotent is not a meet-homomorphism", w.value_or(nlohmann::json{}));
    }
    for (std::size_t u = 0; u < sx->size(); ++u) {
        if (!sx->leq(psi(u), u)) {
            throw Error(ErrorKind::NotDeflationary, "idempotent is not deflationary",
                        {{"U", sx->element_json(u)}, {"psi_U", sx->element_json(psi(u))}});
        }
    }
    if (auto w = idempotence_violation(psi)) throw Error(ErrorKind::NotIdempotent, "map is not idempotent", *w);

    auto xop = sx->base_ref().opposite();
    auto sxop = upset_lattice(xop, caps);
    auto dual_split = split_inflationary(dual(psi, sxop, sxop), caps);

    SplitResult r;
    r.x0 = dual_split.x0->opposite()->relabeled("X0");
    auto sx0 = upset_lattice(r.x0, caps);
    r.q = MonotoneMap(sx->base(), r.x0, dual_split.q.assign());
    r.theta = inverse_image(r.q, caps);
    r.gamma = dual(dual_split.gamma, sx, sx0);
    for (std::size_t u = 0; u < sx->size(); ++u) {
        if (psi(u) == u) r.fixed.push_back(u);
    }
    Certificate& cert = r.certificate;
    cert = Certificate("split-deflationary");
    cert.absorb(dual_split.certificate, "dual");
    cert.require("theta.gamma=psi", compose(r.theta, r.gamma).assign() == psi.assign());
    cert.require("gamma.theta=id", compose(r.gamma, r.theta).assign() == identity_map(sx0).assign());
    cert.require("theta-meet-hom", r.theta.flags().meet_hom());
    cert.require("theta-join-hom", r.theta.flags().join_hom());
    cert.require("gamma-meet-hom", r.gamma.flags().meet_hom());
    cert.require("gamma-preserves-bottom", r.gamma.flags().preserves_bottom);
    cert.count("fixed_points", static_cast<std::int64_t>(r.fixed.size()));
    cert.count("x0_size", static_cast<std::int64_t>(r.x0->size()));
    return r;
}

/// Inflationary idempotent join-homomorphisms on S^X.
inline std::vector<LatticeMap> enumerate_inflationary_idempotents(const PosetPtr& x, const Caps& caps = default_caps())
{
    auto sx = upset_lattice(x, caps);
    std::vector<LatticeMap> out;
    for_each_join_hom(sx, sx, [&](LatticeMap m) {
        for (std::size_t u = 0; u < sx->size(); ++u) {
            if (!sx->leq(u, m(u))) return true;
        }
        if (!idempotence_violation(m)) out.push_back(std::move(m));
        return true;
    });
    return out;
}

/// Deflationary idempotent meet-homomorphisms on S^X.
inline std::vector<LatticeMap> enumerate_deflationary_idempotents(const PosetPtr& x, const Caps& caps = default_caps())
{
    auto sx = upset_lattice(x, caps);
    std::vector<LatticeMap> out;
    for_each_meet_hom(sx, sx, [&](LatticeMap m) {
        for (std::size_t u = 0; u < sx->size(); ++u) {
            if (!sx->leq(m(u), u)) return true;
        }
        if (!idempotence_violation(m)) out.push_back(std::move(m));
        return true;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Equalizers become coequalizers of lattice maps
// ---------------------------------------------------------------------------

/// For the equalizer e : E -> X of f, g : X -> Y, checks that S^e coequalizes
///     (U, V, W) |-> U meet (V join S^f W)   and the same with g
/// on S^{X+X+Y} (and the dual join/meet form), and that every monotone
/// delta : S^X -> S^Z coequalizing them factors uniquely through S^e, for Z
/// in `tests`.
inline Certificate axiom7_check(const MonotoneMap& f, const MonotoneMap& g, std::span<const PosetPtr> tests,
                                const Caps& caps = default_caps())
{
    require_parallel(f, g);
    Certificate cert("equalizer-to-coequalizer");
    const auto& x = f.dom();
    const auto& y = f.cod();
    auto eq = equalizer(f, g);
    auto sx = upset_lattice(x, caps);
    auto sy = upset_lattice(y, caps);
    auto se = inverse_image(eq.e, caps);
    auto sxe = se.cod();

    // S^{X+X+Y} and its decomposition into S^X x S^X x S^Y
    auto xx = coproduct(x, x);
    auto xxy = coproduct(xx.object, y);
    auto big = upset_lattice(xxy.object, caps);
    const std::size_t nb = big->size();
    std::vector<std::size_t> cu(nb), cv(nb), cw(nb);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    for (std::size_t i = 0; i < nb; ++i) {
        Mask m = big->mask(i);
        Mask left = xxy.inl.preimage(m);
        cu[i] = sx->index_of(xx.inl.preimage(left));
        cv[i] = sx->index_of(xx.inr.preimage(left));
        cw[i] = sy->index_of(xxy.inr.preimage(m));
        seen.emplace(cu[i], cv[i], cw[i]);
    }
    cert.require("coproduct-exponential-is-product",
                 seen.size() == nb && nb == sx->size() * sx->size() * sy->size(),
                 {{"S^(X+X+Y)", nb}, {"product", sx->size() * sx->size() * sy->size()}});

    std::vector<Mask> finv(sy->size()), ginv(sy->size());
    for (std::size_t w = 0; w < sy->size(); ++w) {
        finv[w] = f.preimage(sy->mask(w));
        ginv[w] = g.preimage(sy->mask(w));
    }
    struct Form {
        std::string name;
        bool meet_outer;
    };
    const Form forms[] = {{"meet-join", true}, {"join-meet", false}};
    const std::size_t ns = sx->size();

    // fibres of S^e
    std::vector<std::size_t> fibre(ns);
    for (std::size_t u = 0; u < ns; ++u) fibre[u] = se(u);
    bool surjective = true;
    {
        std::vector<char> hit(sxe->size(), 0);
        for (auto v : fibre) hit[v] = 1;
        for (auto h : hit) surjective &= h != 0;
    }
    cert.require("S^e-surjective", surjective);

    for (const auto& form : forms) {
        auto combine = [&](std::size_t i, const std::vector<Mask>& inv) {
            Mask u = sx->mask(cu[i]), v = sx->mask(cv[i]), w = inv[cw[i]];
            return sx->index_of(form.meet_outer ? (u & (v | w)) : (u | (v & w)));
        };
        std::vector<std::size_t> parent(ns);
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        bool coequalizes = true;
        std::optional<nlohmann::json> coeq_witness;
        for (std::size_t i = 0; i < nb; ++i) {
            std::size_t a = combine(i, finv), b = combine(i, ginv);
            detail::uf_union(parent, a, b);
            if (se(a) != se(b) && coequalizes) {
                coequalizes = false;
                coeq_witness = nlohmann::json{{"U", sx->element_json(cu[i])},
                                              {"V", sx->element_json(cv[i])},
                                              {"W", sy->element_json(cw[i])}};
            }
        }
        cert.require(form.name + ":S^e-coequalizes", coequalizes, coeq_witness.value_or(nlohmann::json{}));
        std::vector<std::size_t> cls(ns);
        for (std::size_t u = 0; u < ns; ++u) cls[u] = detail::uf_find(parent, u);

        std::int64_t coequalizing = 0;
        bool universal = true;
        std::optional<nlohmann::json> witness;
        for (const auto& z : tests) {
            auto sz = upset_lattice(z, caps);
            for_each_nat(sx, sz, [&](const LatticeMap& d) {
                bool on_classes = true;
                for (std::size_t u = 0; u < ns && on_classes; ++u) on_classes = d(u) == d(cls[u]);
                // candidate factorization through S^e
                std::vector<std::size_t> through(sxe->size(), sz->size());
                bool well_defined = true;
                for (std::size_t u = 0; u < ns && well_defined; ++u) {
                    if (through[fibre[u]] == sz->size()) through[fibre[u]] = d(u);
                    well_defined = through[fibre[u]] == d(u);
                }
                std::size_t factorizations = 0;
                if (well_defined && surjective) {
                    bool monotone = true;
                    for (std::size_t a = 0; a < sxe->size() && monotone; ++a) {
                        for (std::size_t b = 0; b < sxe->size() && monotone; ++b) {
                            monotone = !sxe->leq(a, b) || sz->leq(through[a], through[b]);
                        }
                    }
                    factorizations = monotone ? 1 : 0;
                } else if (!surjective) {
                    for_each_nat(sxe, sz, [&](const LatticeMap& dd) {
                        if (compose(dd, se).assign() == d.assign()) ++factorizations;
                        return true;
                    });
                }
                if (on_classes) ++coequalizing;
                if ((on_classes && factorizations != 1) || (!on_classes && factorizations != 0)) {
                    universal = false;
                    witness = nlohmann::json{{"Z", label_of(z)},
                                             {"delta", d.to_json()},
                                             {"coequalizes", on_classes},
                                             {"factorizations", factorizations}};
                    return false;
                }
                return true;
            });
            if (!universal) break;
        }
        cert.require(form.name + ":unique-factorization", universal, witness.value_or(nlohmann::json{}));
        cert.add_count(form.name + ":coequalizing", coequalizing);
    }
    return cert;
}

} // namespace spacelab
