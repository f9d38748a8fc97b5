#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "caps.hpp"
#include "error.hpp"
#include "poset.hpp"

namespace spacelab {

namespace detail {

/// Bit i*k+j set when i < j strictly.
inline std::uint64_t relation_code(const std::vector<std::uint8_t>& rel, std::size_t k, const std::vector<std::size_t>& perm)
{
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i != j && rel[perm[i] * k + perm[j]]) code |= std::uint64_t{1} << (i * k + j);
        }
    }
    return code;
}

/// Canonical form: the smallest code over all relabelings.
inline std::uint64_t canonical_code(const std::vector<std::uint8_t>& rel, std::size_t k)
{
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::uint64_t best = ~std::uint64_t{0};
    do {
        best = std::min(best, relation_code(rel, k, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace detail

/// One poset per isomorphism class with at most max_size elements, ordered
/// by size and then by canonical code. Elements are named a, b, c,
/// ... in the canonical labelling; chains are labelled Cn, antichains Dn and
/// the rest Pn.i.
inline std::vector<PosetPtr> generate_catalog(std::size_t max_size, const Caps& caps = default_caps())
{
    if (max_size > caps.max_poset) {
        throw Error(ErrorKind::SizeCap, "catalog size " + std::to_string(max_size) + " exceeds max_poset " +
                                            std::to_string(caps.max_poset));
    }
    if (max_size > 7) throw Error(ErrorKind::SizeCap, "catalogs are limited to 7 elements");
    std::vector<PosetPtr> out;
    out.push_back(empty_poset());
    for (std::size_t k = 1; k <= max_size; ++k) {
        // every poset has a labelling in which i < j implies i precedes j
        std::vector<std::pair<std::size_t, std::size_t>> slots;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) slots.emplace_back(i, j);
        }
        std::set<std::uint64_t> codes;
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << slots.size()); ++s) {
            std::vector<std::uint8_t> rel(k * k, 0);
            for (std::size_t i = 0; i < k; ++i) rel[i * k + i] = 1;
            for (std::size_t b = 0; b < slots.size(); ++b) {
                if ((s >> b) & 1U) rel[slots[b].first * k + slots[b].second] = 1;
            }
            bool transitive = true;
            for (std::size_t i = 0; i < k && transitive; ++i) {
                for (std::size_t j = 0; j < k && transitive; ++j) {
                    if (!rel[i * k + j]) continue;
                    for (std::size_t l = 0; l < k; ++l) {
                        if (rel[j * k + l] && !rel[i * k + l]) {
                            transitive = false;
                            break;
                        }
                    }
                }
            }
            if (transitive) codes.insert(detail::canonical_code(rel, k));
        }
        std::size_t index = 0;
        for (auto code : codes) {
            std::vector<std::string> names(k);
            std::vector<std::uint8_t> rel(k * k, 0);
            std::size_t strict = 0;
            for (std::size_t i = 0; i < k; ++i) {
                names[i] = std::string(1, static_cast<char>('a' + i));
                rel[i * k + i] = 1;
                for (std::size_t j = 0; j < k; ++j) {
                    if (i != j && ((code >> (i * k + j)) & 1U)) {
                        rel[i * k + j] = 1;
                        ++strict;
                    }
                }
            }
            std::string label;
            if (k == 1) label = "1";
            else if (strict == k * (k - 1) / 2) label = "C" + std::to_string(k);
            else if (strict == 0) label = "D" + std::to_string(k);
            else label = "P" + std::to_string(k) + "." + std::to_string(++index);
            out.push_back(poset_from_relation(std::move(names), std::move(rel), std::move(label)));
        }
    }
    return out;
}

} // namespace spacelab
