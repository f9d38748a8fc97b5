#include <gtest/gtest.h>

#include <map>

#include <spacelab/catalog.hpp>
#include <spacelab/hom.hpp>
#include <spacelab/limits.hpp>

#include "oracles.hpp"

using namespace spacelab;

namespace {

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::NotFound;
}

} // namespace

TEST(MakePoset, OnePointAndChain)
{
    auto one = make_poset({"a"}, {});
    EXPECT_EQ(one->size(), 1u);
    auto c2 = make_poset({"0", "1"}, {{0, 1}});
    EXPECT_TRUE(c2->leq(0, 1));
    EXPECT_FALSE(c2->leq(1, 0));
}

TEST(MakePoset, ClosesTransitively)
{
    auto c3 = chain(3);
    EXPECT_TRUE(c3->leq(0, 2));
    auto fan = make_poset_named({"x", "y", "z"}, {{"x", "y"}, {"y", "z"}});
    EXPECT_TRUE(fan->leq(0, 2));
}

TEST(MakePoset, RejectsCyclesAndDuplicates)
{
    EXPECT_EQ(kind_of([] { make_poset({"a", "b"}, {{0, 1}, {1, 0}}); }), ErrorKind::CycleDetected);
    EXPECT_EQ(kind_of([] { make_poset({"a", "a"}, {}); }), ErrorKind::DuplicateName);
}

TEST(MonotoneMap, RejectsOrderReversal)
{
    auto c2 = chain(2);
    EXPECT_EQ(kind_of([&] { MonotoneMap(c2, c2, {1, 0}); }), ErrorKind::NotMonotone);
}

TEST(Product, ChainSquareIsDiamond)
{
    auto p = product(chain(2), chain(2));
    ASSERT_EQ(p.object->size(), 4u);
    std::size_t bottoms = 0, tops = 0, incomparable = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        bool bottom = true, top = true;
        for (std::size_t j = 0; j < 4; ++j) {
            bottom = bottom && p.object->leq(i, j);
            top = top && p.object->leq(j, i);
            if (i < j && !p.object->comparable(i, j)) ++incomparable;
        }
        bottoms += bottom;
        tops += top;
    }
    EXPECT_EQ(bottoms, 1u);
    EXPECT_EQ(tops, 1u);
    EXPECT_EQ(incomparable, 1u);
}

TEST(Product, UnitLaw)
{
    auto v = make_poset_named({"a", "b", "c"}, {{"a", "b"}, {"a", "c"}});
    EXPECT_TRUE(oracle::isomorphic(*product(point(), v).object, *v));
}

TEST(Product, HomCountsMultiply)
{
    auto c2 = chain(2);
    auto p = product(c2, c2);
    EXPECT_EQ(enumerate_monotone(c2, p.object).size(), 9u);
    EXPECT_EQ(oracle::hom_count(c2, p.object), 9u);
}

TEST(Product, UniversalOverSmallCatalog)
{
    auto tests = generate_catalog(2);
    auto cat = generate_catalog(2);
    for (const auto& x : cat) {
        for (const auto& y : cat) EXPECT_TRUE(verify_product_universal(x, y, tests).passed()) << x->label() << y->label();
    }
}

TEST(Coproduct, Examples)
{
    auto c = coproduct(chain(2), point());
    EXPECT_EQ(c.object->size(), 3u);
    EXPECT_TRUE(oracle::isomorphic(*coproduct(empty_poset(), chain(2)).object, *chain(2)));
    auto cc = coproduct(chain(2), chain(2));
    EXPECT_EQ(enumerate_monotone(cc.object, chain(2)).size(), 9u);
    EXPECT_EQ(oracle::hom_count(cc.object, chain(2)), 9u);
    auto tests = generate_catalog(2);
    EXPECT_TRUE(verify_coproduct_couniversal(chain(2), discrete(2), tests).passed());
}

TEST(Equalizer, Examples)
{
    auto c2 = chain(2);
    auto id = identity(c2);
    EXPECT_EQ(equalizer(id, id).object->size(), 2u);
    auto e = equalizer(id, constant_map(c2, c2, 0));
    ASSERT_EQ(e.object->size(), 1u);
    EXPECT_EQ(e.e(0), 0u);
    auto one = point();
    EXPECT_EQ(equalizer(constant_map(one, c2, 0), constant_map(one, c2, 1)).object->size(), 0u);
}

TEST(Equalizer, UniversalForAllParallelPairs)
{
    auto tests = generate_catalog(2);
    auto c2 = chain(2);
    auto v = make_poset_named({"a", "b", "c"}, {{"a", "b"}, {"a", "c"}});
    auto hom = enumerate_monotone(v, c2);
    for (const auto& f : hom.maps()) {
        for (const auto& g : hom.maps()) EXPECT_TRUE(verify_equalizer_universal(f, g, tests).passed());
    }
}

TEST(Pullback, Examples)
{
    auto d2 = discrete(2);
    auto q = constant_map(d2, point(), 0);
    auto pb = pullback(q, q);
    EXPECT_EQ(pb.object->size(), 4u);
    EXPECT_TRUE(pb.object->is_discrete());

    auto c2 = chain(2);
    auto id = identity(c2);
    EXPECT_TRUE(oracle::isomorphic(*pullback(id, id).object, *c2));

    auto cc = coproduct(c2, c2);
    auto nabla = cc.copairing(id, id);
    auto kp = pullback(nabla, nabla);
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) pairs += nabla(i) == nabla(j);
    }
    EXPECT_EQ(kp.object->size(), pairs);
    EXPECT_EQ(kp.object->size(), 8u);
}

TEST(Coequalizer, Examples)
{
    auto c2 = chain(2);
    auto id = identity(c2);
    auto cc = coproduct(c2, c2);
    auto nabla = cc.copairing(id, id);
    auto kp = pullback(nabla, nabla);
    auto co = coequalizer(kp.p1, kp.p2);
    EXPECT_TRUE(oracle::isomorphic(*co.object, *c2));

    auto d2 = discrete(2);
    auto swap = MonotoneMap(d2, d2, {1, 0});
    EXPECT_EQ(coequalizer(swap, identity(d2)).object->size(), 1u);
    EXPECT_EQ(coequalizer(id, id).object->size(), 2u);
}

TEST(Coequalizer, MatchesPreorderOracle)
{
    auto tests = generate_catalog(2);
    auto cat = generate_catalog(3);
    for (const auto& x : cat) {
        if (x->size() > 2) continue;
        for (const auto& y : cat) {
            auto hom = enumerate_monotone(x, y);
            for (const auto& f : hom.maps()) {
                for (const auto& g : hom.maps()) {
                    auto co = coequalizer(f, g);
                    EXPECT_EQ(co.object->size(), oracle::coequalizer_size(*y, f.assign(), g.assign()));
                    EXPECT_TRUE(verify_coequalizer_couniversal(f, g, tests).passed());
                }
            }
        }
    }
}

TEST(HomSet, MatchesBruteForce)
{
    auto cat = generate_catalog(3);
    for (const auto& x : cat) {
        for (const auto& y : cat) {
            auto hom = enumerate_monotone(x, y);
            auto brute = oracle::monotone_maps(*x, *y);
            ASSERT_EQ(hom.size(), brute.size()) << x->label() << "->" << y->label();
            std::set<std::vector<std::size_t>> a(brute.begin(), brute.end()), b;
            for (const auto& f : hom.maps()) b.insert(f.assign());
            EXPECT_EQ(a, b);
        }
    }
}

TEST(HomSet, SpecCounts)
{
    auto c2 = chain(2);
    auto hom = enumerate_monotone(c2, c2);
    ASSERT_EQ(hom.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) EXPECT_TRUE(hom.leq(i, j) || hom.leq(j, i));
    }
    EXPECT_EQ(enumerate_monotone(discrete(2), c2).size(), 4u);
    EXPECT_EQ(enumerate_monotone(chain(3), point()).size(), 1u);
}

TEST(HomSet, RespectsCap)
{
    Caps caps;
    caps.max_hom = 5;
    EXPECT_EQ(kind_of([&] { enumerate_monotone(discrete(3), discrete(3), caps); }), ErrorKind::SizeCap);
}

TEST(Distributivity, Examples)
{
    auto c2 = chain(2);
    EXPECT_TRUE(verify_distributivity(c2, c2, point()).passed());
    EXPECT_TRUE(verify_distributivity(point(), discrete(2), c2).passed());
    EXPECT_TRUE(verify_distributivity(empty_poset(), c2, point()).passed());
}

TEST(Catalog, CountsMatchOracle)
{
    auto cat = generate_catalog(4);
    std::map<std::size_t, std::size_t> by_size;
    for (const auto& p : cat) ++by_size[p->size()];
    for (std::size_t n = 0; n <= 4; ++n) EXPECT_EQ(by_size[n], oracle::unlabelled_posets(n)) << n;
}

TEST(Catalog, PairwiseNonIsomorphic)
{
    auto cat = generate_catalog(4);
    for (std::size_t i = 0; i < cat.size(); ++i) {
        for (std::size_t j = i + 1; j < cat.size(); ++j) EXPECT_FALSE(oracle::isomorphic(*cat[i], *cat[j]));
    }
}

TEST(Catalog, LargerSizesMatchKnownCounts)
{
    // unlabelled posets on 5 and 6 points
    auto cat = generate_catalog(6);
    std::map<std::size_t, std::size_t> by_size;
    for (const auto& p : cat) ++by_size[p->size()];
    EXPECT_EQ(by_size[5], 63u);
    EXPECT_EQ(by_size[6], 318u);
    EXPECT_EQ(cat.size(), 406u);
}

TEST(Catalog, Deterministic)
{
    auto a = generate_catalog(4);
    auto b = generate_catalog(4);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i]->label(), b[i]->label());
        EXPECT_TRUE(a[i]->same_as(*b[i]));
    }
}
