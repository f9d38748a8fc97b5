#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "poset.hpp"

namespace spacelab {

/// Streams every monotone map X -> Y to `visit` as an index table. Elements of
/// X are filled along a linear extension so that only lower bounds from
/// already-assigned predecessors need checking. `visit` returns false to stop.
template <class Visit>
void for_each_monotone(const Poset& x, const Poset& y, Visit&& visit)
{
    const std::size_t n = x.size();
    const std::size_t m = y.size();
    std::vector<std::size_t> assign(n, 0);
    if (n == 0) {
        visit(assign);
        return;
    }
    if (m == 0) return;
    const auto& order = x.linear_extension();
    // predecessors of order[k] among order[0..k)
    std::vector<std::vector<std::size_t>> preds(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            if (x.leq(order[j], order[k])) preds[k].push_back(order[j]);
        }
    }
    bool stop = false;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (stop) return;
        if (k == n) {
            if (!visit(static_cast<const std::vector<std::size_t>&>(assign))) stop = true;
            return;
        }
        const std::size_t el = order[k];
        for (std::size_t v = 0; v < m && !stop; ++v) {
            bool ok = true;
            for (auto p : preds[k]) {
                if (!y.leq(assign[p], v)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            assign[el] = v;
            rec(k + 1);
        }
    };
    rec(0);
}

/// All monotone maps X -> Y with the pointwise order.
class HomSet {
public:
    HomSet(PosetPtr dom, PosetPtr cod, std::vector<MonotoneMap> maps)
        : dom_(std::move(dom))
        , cod_(std::move(cod))
        , maps_(std::move(maps))
    {
    }

    const PosetPtr& dom() const { return dom_; }
    const PosetPtr& cod() const { return cod_; }
    const std::vector<MonotoneMap>& maps() const { return maps_; }
    std::size_t size() const { return maps_.size(); }
    const MonotoneMap& operator[](std::size_t i) const { return maps_[i]; }

    /// Pointwise order between the i-th and j-th map.
    bool leq(std::size_t i, std::size_t j) const { return pointwise_leq(maps_[i], maps_[j]); }

    std::optional<std::size_t> index_of(const MonotoneMap& f) const
    {
        for (std::size_t i = 0; i < maps_.size(); ++i) {
            if (maps_[i].assign() == f.assign()) return i;
        }
        return std::nullopt;
    }

private:
    PosetPtr dom_;
    PosetPtr cod_;
    std::vector<MonotoneMap> maps_;
};

inline HomSet enumerate_monotone(const PosetPtr& x, const PosetPtr& y, const Caps& caps = default_caps())
{
    std::vector<MonotoneMap> maps;
    for_each_monotone(*x, *y, [&](const std::vector<std::size_t>& a) {
        if (maps.size() >= caps.max_hom) {
            throw Error(ErrorKind::SizeCap, "hom-set " + x->label() + " -> " + y->label() + " exceeds " +
                                                std::to_string(caps.max_hom) + " maps");
        }
        maps.push_back(MonotoneMap::trusted(x, y, a));
        return true;
    });
    return HomSet(x, y, std::move(maps));
}

} // namespace spacelab
