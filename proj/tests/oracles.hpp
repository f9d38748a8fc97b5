#pragma once

// Brute-force reference computations. These deliberately avoid the library's
// enumerators: functions are generated as all |Y|^|X| tuples and filtered, and
// sets as all bitmasks.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <vector>

#include <spacelab/group_action.hpp>
#include <spacelab/hom.hpp>
#include <spacelab/power_monad.hpp>
#include <spacelab/poset.hpp>

namespace oracle {

using spacelab::Poset;
using spacelab::PosetPtr;

/// The library's hom-set as a vector, safe to loop over as a temporary.
inline std::vector<spacelab::MonotoneMap> homs(const PosetPtr& x, const PosetPtr& y)
{
    return spacelab::enumerate_monotone(x, y).maps();
}

/// Calls visit(f) for every function {0..n-1} -> {0..m-1}.
inline void all_functions(std::size_t n, std::size_t m, const std::function<void(const std::vector<std::size_t>&)>& visit)
{
    std::vector<std::size_t> f(n, 0);
    if (n == 0) {
        visit(f);
        return;
    }
    if (m == 0) return;
    while (true) {
        visit(f);
        std::size_t i = 0;
        while (i < n && ++f[i] == m) f[i++] = 0;
        if (i == n) return;
    }
}

inline bool is_monotone(const Poset& x, const Poset& y, const std::vector<std::size_t>& f)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x.leq(i, j) && !y.leq(f[i], f[j])) return false;
        }
    }
    return true;
}

inline std::vector<std::vector<std::size_t>> monotone_maps(const Poset& x, const Poset& y)
{
    std::vector<std::vector<std::size_t>> out;
    all_functions(x.size(), y.size(), [&](const auto& f) {
        if (is_monotone(x, y, f)) out.push_back(f);
    });
    return out;
}

inline std::size_t hom_count(const PosetPtr& x, const PosetPtr& y) { return monotone_maps(*x, *y).size(); }

inline bool is_upset(const Poset& x, std::uint64_t m)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!((m >> i) & 1U)) continue;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x.leq(i, j) && !((m >> j) & 1U)) return false;
        }
    }
    return true;
}

inline std::vector<std::uint64_t> upsets(const Poset& x)
{
    std::vector<std::uint64_t> out;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << x.size()); ++m) {
        if (is_upset(x, m)) out.push_back(m);
    }
    return out;
}

inline std::uint64_t preimage(const std::vector<std::size_t>& f, std::uint64_t v)
{
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if ((v >> f[i]) & 1U) out |= std::uint64_t{1} << i;
    }
    return out;
}

/// Up-closure of the image of u under f.
inline std::uint64_t exists(const Poset& y, const std::vector<std::size_t>& f, std::uint64_t u)
{
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!((u >> i) & 1U)) continue;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y.leq(f[i], j)) out |= std::uint64_t{1} << j;
        }
    }
    return out;
}

inline bool isomorphic(const Poset& a, const Poset& b)
{
    if (a.size() != b.size()) return false;
    std::vector<std::size_t> p(a.size());
    std::iota(p.begin(), p.end(), std::size_t{0});
    do {
        bool ok = true;
        for (std::size_t i = 0; i < a.size() && ok; ++i) {
            for (std::size_t j = 0; j < a.size() && ok; ++j) ok = a.leq(i, j) == b.leq(p[i], p[j]);
        }
        if (ok) return true;
    } while (std::next_permutation(p.begin(), p.end()));
    return false;
}

/// Number of partial orders on n points up to isomorphism, from all n^2-bit
/// relations: reflexive, antisymmetric, transitive, then deduplicated by
/// smallest relabelled adjacency word.
inline std::size_t unlabelled_posets(std::size_t n)
{
    std::set<std::vector<bool>> classes;
    const std::size_t bits = n * n;
    for (std::uint64_t r = 0; r < (std::uint64_t{1} << bits); ++r) {
        auto rel = [&](std::size_t i, std::size_t j) { return ((r >> (i * n + j)) & 1U) != 0; };
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) ok = rel(i, i);
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j < n && ok; ++j) {
                if (i != j && rel(i, j) && rel(j, i)) ok = false;
                for (std::size_t k = 0; k < n && ok; ++k) {
                    if (rel(i, j) && rel(j, k) && !rel(i, k)) ok = false;
                }
            }
        }
        if (!ok) continue;
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        std::vector<bool> best;
        do {
            std::vector<bool> w(bits);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) w[i * n + j] = rel(p[i], p[j]);
            }
            if (best.empty() || w < best) best = w;
        } while (std::next_permutation(p.begin(), p.end()));
        classes.insert(best);
    }
    return classes.size();
}

/// The preorder on Y generated by its order and f(x) ~ g(x), closed by
/// Floyd-Warshall.
inline std::vector<std::vector<bool>> generated_preorder(const Poset& y, const std::vector<std::size_t>& f,
                                                         const std::vector<std::size_t>& g)
{
    const std::size_t n = y.size();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) r[i][j] = y.leq(i, j);
    }
    for (std::size_t k = 0; k < f.size(); ++k) r[f[k]][g[k]] = r[g[k]][f[k]] = true;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (r[i][k] && r[k][j]) r[i][j] = true;
            }
        }
    }
    return r;
}

/// Number of elements of the coequalizer of f, g : X -> Y.
inline std::size_t coequalizer_size(const Poset& y, const std::vector<std::size_t>& f, const std::vector<std::size_t>& g)
{
    auto r = generated_preorder(y, f, g);
    std::size_t classes = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        bool first = true;
        for (std::size_t j = 0; j < i; ++j) {
            if (r[i][j] && r[j][i]) first = false;
        }
        classes += first;
    }
    return classes;
}

/// True when q : Y -> Q presents Q as the quotient of Y by the preorder r:
/// q is onto and q(a) <= q(b) exactly when r relates a to b.
inline bool presents_quotient(const std::vector<std::vector<bool>>& r, const Poset& q_cod,
                              const std::vector<std::size_t>& q)
{
    std::vector<bool> hit(q_cod.size());
    for (auto v : q) hit[v] = true;
    if (std::find(hit.begin(), hit.end(), false) != hit.end()) return false;
    for (std::size_t a = 0; a < q.size(); ++a) {
        for (std::size_t b = 0; b < q.size(); ++b) {
            if (q_cod.leq(q[a], q[b]) != r[a][b]) return false;
        }
    }
    return true;
}

/// Frobenius reciprocity for f : X -> Y on all pairs of up-sets.
inline bool frobenius(const Poset& x, const Poset& y, const std::vector<std::size_t>& f)
{
    auto ux = upsets(x);
    for (auto u : ux) {
        for (auto v : upsets(y)) {
            if (exists(y, f, u & preimage(f, v)) != (exists(y, f, u) & v)) return false;
        }
    }
    return true;
}

/// Equivariant maps Y -> P(X) with g.Phi = {U : g^{-1}.U in Phi}. Only the
/// points of P(X) come from the library.
inline std::size_t equivariant_map_count(const spacelab::ActedPoset& a, const spacelab::ActedPoset& b)
{
    const auto& g = *a.monoid();
    auto px = spacelab::double_power(a.carrier());
    const auto& opens = *px.opens();
    auto act_p = [&](std::size_t h, std::size_t p) {
        spacelab::Mask out = 0;
        for (std::size_t u = 0; u < opens.size(); ++u) {
            std::size_t moved = opens.index_of(a.image(g.inverse(h), opens.mask(u)));
            if (px.contains(p, moved)) out |= spacelab::Mask{1} << u;
        }
        return px.point_of(out);
    };
    std::size_t n = 0;
    for (const auto& f : oracle::monotone_maps(*b.carrier(), *px.carrier())) {
        bool ok = true;
        for (std::size_t h = 0; h < g.size() && ok; ++h) {
            for (std::size_t y = 0; y < b.carrier()->size() && ok; ++y) ok = f[b.act(h, y)] == act_p(h, f[y]);
        }
        n += ok;
    }
    return n;
}

} // namespace oracle
