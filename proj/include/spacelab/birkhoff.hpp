#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "certificate.hpp"
#include "poset.hpp"
#include "upset_lattice.hpp"

namespace spacelab {

/// A finite lattice given by its order together with meet/join tables.
struct FiniteLattice {
    PosetPtr order;
    std::vector<std::size_t> meet_table;
    std::vector<std::size_t> join_table;
    std::size_t bottom = 0;
    std::size_t top = 0;

    std::size_t size() const { return order->size(); }
    bool leq(std::size_t a, std::size_t b) const { return order->leq(a, b); }
    std::size_t meet(std::size_t a, std::size_t b) const { return meet_table[a * size() + b]; }
    std::size_t join(std::size_t a, std::size_t b) const { return join_table[a * size() + b]; }
};

/// Computes greatest lower and least upper bounds; throws NotALattice if some
/// pair lacks one (or the poset is empty).
inline FiniteLattice lattice_from_poset(const PosetPtr& p)
{
    const std::size_t n = p->size();
    if (n == 0) throw Error(ErrorKind::NotALattice, "the empty poset has no top element");
    FiniteLattice l;
    l.order = p;
    l.meet_table.assign(n * n, 0);
    l.join_table.assign(n * n, 0);
    auto bound = [&](std::size_t a, std::size_t b, bool lower) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        for (std::size_t c = 0; c < n; ++c) {
            bool is_bound = lower ? (p->leq(c, a) && p->leq(c, b)) : (p->leq(a, c) && p->leq(b, c));
            if (!is_bound) continue;
            if (!best || (lower ? p->leq(*best, c) : p->leq(c, *best))) best = c;
        }
        if (!best) return std::nullopt;
        // best must dominate every bound
        for (std::size_t c = 0; c < n; ++c) {
            bool is_bound = lower ? (p->leq(c, a) && p->leq(c, b)) : (p->leq(a, c) && p->leq(b, c));
            if (is_bound && !(lower ? p->leq(c, *best) : p->leq(*best, c))) return std::nullopt;
        }
        return best;
    };
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            auto m = bound(a, b, true);
            auto j = bound(a, b, false);
            if (!m || !j) {
                throw Error(ErrorKind::NotALattice, p->name(a) + " and " + p->name(b) + " lack a " + (m ? "join" : "meet"),
                            {{"pair", {p->name(a), p->name(b)}}});
            }
            l.meet_table[a * n + b] = *m;
            l.join_table[a * n + b] = *j;
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        bool is_bottom = true, is_top = true;
        for (std::size_t b = 0; b < n; ++b) {
            is_bottom &= p->leq(a, b);
            is_top &= p->leq(b, a);
        }
        if (is_bottom) l.bottom = a;
        if (is_top) l.top = a;
    }
    return l;
}

/// The sub-lattice of S^X on the given member indices, which must be closed
/// under intersection and union and contain the empty and full up-sets.
inline FiniteLattice sublattice(const UpSetLattice& sx, const std::vector<std::size_t>& members)
{
    const std::size_t n = members.size();
    std::vector<std::string> names(n);
    std::vector<std::uint8_t> rel(n * n);
    std::unordered_map<Mask, std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) {
        names[i] = sx.element_name(members[i]);
        pos.emplace(sx.mask(members[i]), i);
        for (std::size_t j = 0; j < n; ++j) rel[i * n + j] = sx.leq(members[i], members[j]);
    }
    FiniteLattice l;
    l.order = Poset::trusted(std::move(names), std::move(rel));
    l.meet_table.assign(n * n, 0);
    l.join_table.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            auto m = pos.find(sx.mask(members[i]) & sx.mask(members[j]));
            auto u = pos.find(sx.mask(members[i]) | sx.mask(members[j]));
            if (m == pos.end() || u == pos.end()) {
                throw Error(ErrorKind::NotALattice, "subset is not closed under intersection and union",
                            {{"U", sx.element_json(members[i])}, {"V", sx.element_json(members[j])}});
            }
            l.meet_table[i * n + j] = m->second;
            l.join_table[i * n + j] = u->second;
        }
    }
    auto bottom = pos.find(Mask{0});
    auto top = pos.find(sx.base_ref().empty() ? Mask{0} : sx.base_ref().full_mask());
    if (bottom == pos.end() || top == pos.end()) {
        throw Error(ErrorKind::NotALattice, "subset misses the empty or the full up-set");
    }
    l.bottom = bottom->second;
    l.top = top->second;
    return l;
}

inline FiniteLattice lattice_of(const UpSetLattice& sx)
{
    std::vector<std::size_t> all(sx.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return sublattice(sx, all);
}

/// Witness of a distributivity failure, if any.
inline std::optional<nlohmann::json> distributivity_violation(const FiniteLattice& l)
{
    const std::size_t n = l.size();
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t c = 0; c < n; ++c) {
                if (l.meet(a, l.join(b, c)) != l.join(l.meet(a, b), l.meet(a, c))) {
                    return nlohmann::json{{"a", l.order->name(a)}, {"b", l.order->name(b)}, {"c", l.order->name(c)}};
                }
            }
        }
    }
    return std::nullopt;
}

inline void require_distributive(const FiniteLattice& l)
{
    if (auto w = distributivity_violation(l)) throw Error(ErrorKind::NotDistributive, "lattice is not distributive", *w);
}

/// Indices of the join-irreducible elements: not bottom and not the join of
/// the elements strictly below.
inline std::vector<std::size_t> join_irreducible_indices(const FiniteLattice& l)
{
    require_distributive(l);
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < l.size(); ++a) {
        if (a == l.bottom) continue;
        std::size_t below = l.bottom;
        for (std::size_t b = 0; b < l.size(); ++b) {
            if (b != a && l.leq(b, a)) below = l.join(below, b);
        }
        if (below != a) out.push_back(a);
    }
    return out;
}

/// The join-irreducibles with the induced order.
inline PosetPtr join_irreducibles(const FiniteLattice& l)
{
    return induced_subposet(l.order, join_irreducible_indices(l), "J");
}

/// Birkhoff representation L ≅ S^Y with Y the join-irreducibles in reverse
/// order; a |-> {j : j <= a} is an up-set of Y.
struct BirkhoffResult {
    PosetPtr poset;
    LatticePtr upsets;
    std::vector<std::size_t> irreducibles; // lattice index of each element of Y
    std::vector<std::size_t> iso;          // lattice index -> index in S^Y
    std::vector<std::size_t> iso_inverse;  // index in S^Y -> lattice index
    Certificate certificate;
};

inline BirkhoffResult lattice_to_poset(const FiniteLattice& l, const Caps& caps = default_caps())
{
    BirkhoffResult r;
    r.irreducibles = join_irreducible_indices(l);
    const std::size_t k = r.irreducibles.size();
    if (k > kMaskBits) throw Error(ErrorKind::SizeCap, "too many join-irreducibles");
    std::vector<std::string> names(k);
    std::vector<std::uint8_t> rel(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        names[i] = l.order->name(r.irreducibles[i]);
        for (std::size_t j = 0; j < k; ++j) rel[i * k + j] = l.leq(r.irreducibles[j], r.irreducibles[i]);
    }
    r.poset = Poset::trusted(std::move(names), std::move(rel), "J^op");
    r.upsets = upset_lattice(r.poset, caps);

    Certificate& cert = r.certificate;
    cert = Certificate("birkhoff");
    const std::size_t n = l.size();
    r.iso.assign(n, 0);
    bool total = true;
    for (std::size_t a = 0; a < n; ++a) {
        Mask m = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (l.leq(r.irreducibles[i], a)) m |= Mask{1} << i;
        }
        auto idx = r.upsets->find(m);
        if (!idx) {
            total = false;
            break;
        }
        r.iso[a] = *idx;
    }
    cert.require("down-sets-of-irreducibles-are-up-sets", total);
    if (!total) return r;

    std::vector<std::size_t> inv(r.upsets->size(), n);
    bool bijective = n == r.upsets->size();
    for (std::size_t a = 0; a < n && bijective; ++a) {
        if (inv[r.iso[a]] != n) bijective = false;
        inv[r.iso[a]] = a;
    }
    cert.require("bijective", bijective, {{"lattice", n}, {"up_sets", r.upsets->size()}});
    if (!bijective) return r;
    r.iso_inverse = inv;

    bool order = true, meets = true, joins = true;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            order &= l.leq(a, b) == r.upsets->leq(r.iso[a], r.iso[b]);
            meets &= r.iso[l.meet(a, b)] == r.upsets->meet(r.iso[a], r.iso[b]);
            joins &= r.iso[l.join(a, b)] == r.upsets->join(r.iso[a], r.iso[b]);
        }
    }
    cert.require("order-isomorphism", order);
    cert.require("preserves-meet", meets);
    cert.require("preserves-join", joins);
    cert.require("preserves-bottom", r.iso[l.bottom] == r.upsets->bottom());
    cert.require("preserves-top", r.iso[l.top] == r.upsets->top());
    return r;
}

} // namespace spacelab
