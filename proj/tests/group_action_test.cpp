#include <gtest/gtest.h>

#include <spacelab/catalog.hpp>
#include <spacelab/group_action.hpp>

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

const MonoidPtr& c2g()
{
    static const MonoidPtr g = cyclic_group(2);
    return g;
}

const MonoidPtr& one_g()
{
    static const MonoidPtr g = trivial_group();
    return g;
}

ActedPoset swap_d2() { return make_acted(c2g(), discrete(2), {0, 1, 1, 0}, "swap"); }

// Actions by brute force: every table, filtered by the unit law,
// associativity and joint monotonicity.
std::size_t action_count(const Monoid& m, const Poset& x)
{
    const std::size_t nm = m.size(), nx = x.size();
    std::size_t count = 0;
    oracle::all_functions(nm * nx, nx, [&](const std::vector<std::size_t>& t) {
        auto act = [&](std::size_t g, std::size_t e) { return t[g * nx + e]; };
        for (std::size_t e = 0; e < nx; ++e) {
            if (act(m.unit(), e) != e) return;
        }
        for (std::size_t g = 0; g < nm; ++g) {
            for (std::size_t h = 0; h < nm; ++h) {
                for (std::size_t e = 0; e < nx; ++e) {
                    if (act(g, act(h, e)) != act(m.mul(g, h), e)) return;
                }
            }
        }
        for (std::size_t g = 0; g < nm; ++g) {
            for (std::size_t h = 0; h < nm; ++h) {
                if (!m.carrier()->leq(g, h)) continue;
                for (std::size_t e = 0; e < nx; ++e) {
                    for (std::size_t f = 0; f < nx; ++f) {
                        if (x.leq(e, f) && !x.leq(act(g, e), act(h, f))) return;
                    }
                }
            }
        }
        ++count;
    });
    return count;
}

// Equivariant Nat[S^X, S^Y] for a group: delta(g.U) = g.delta(U).
std::size_t equivariant_nat_count(const ActedPoset& a, const ActedPoset& b)
{
    std::size_t n = 0;
    for (const auto& d : nat_trans_space(a.carrier(), b.carrier())) {
        bool ok = true;
        for (std::size_t g = 0; g < a.monoid()->size() && ok; ++g) {
            for (std::size_t u = 0; u < d.dom()->size() && ok; ++u) {
                Mask gu = a.image(g, d.dom()->mask(u));
                ok = d.apply(gu) == b.image(g, d.cod()->mask(d(u)));
            }
        }
        n += ok;
    }
    return n;
}

std::vector<ActedPoset> group_actions(std::size_t max_size)
{
    std::vector<ActedPoset> out;
    for (const auto& g : {trivial_group(), cyclic_group(2), cyclic_group(3)}) {
        for (const auto& x : generate_catalog(max_size)) {
            for (auto& a : enumerate_actions(g, x)) out.push_back(std::move(a));
        }
    }
    return out;
}

} // namespace

TEST(Monoid, Examples)
{
    auto c2 = cyclic_group(2);
    EXPECT_TRUE(c2->is_group());
    EXPECT_TRUE(verify_group_object(*c2).passed());
    auto m = min_monoid();
    EXPECT_FALSE(m->is_group());
    EXPECT_EQ(m->mul(0, 1), 0u);
    EXPECT_EQ(m->mul(1, 1), 1u);
    // (b.b).c = c.c = a but b.(b.c) = b.a = b
    auto d3 = discrete(3);
    EXPECT_EQ(kind_of([&] { make_monoid(d3, {0, 1, 2, 1, 2, 0, 2, 0, 0}, 0); }), ErrorKind::AxiomFailure);
}

TEST(Monoid, GroupCarriersAreDiscrete)
{
    for (const auto& g : {trivial_group(), cyclic_group(2), cyclic_group(3), cyclic_group(4)}) {
        auto cert = verify_group_object(*g);
        EXPECT_TRUE(cert.passed());
        EXPECT_TRUE(g->carrier()->is_discrete());
    }
}

TEST(MakeActed, Examples)
{
    EXPECT_NO_THROW(swap_d2());
    EXPECT_EQ(kind_of([] { make_acted(cyclic_group(2), chain(2), {0, 1, 1, 0}); }), ErrorKind::NotMonotone);
    EXPECT_TRUE(trivial_action(cyclic_group(3), chain(3)).is_trivial());
    EXPECT_EQ(kind_of([] { make_acted(cyclic_group(2), discrete(2), {1, 0, 0, 1}); }), ErrorKind::UnitLawFailure);
    // g.(g.b) = a but (gg).b = b
    EXPECT_EQ(kind_of([] { make_acted(cyclic_group(2), discrete(2), {0, 1, 0, 0}); }), ErrorKind::AssocFailure);
}

TEST(EnumerateActions, MatchesBruteForce)
{
    for (const auto& m : {trivial_group(), cyclic_group(2), cyclic_group(3), min_monoid()}) {
        for (const auto& x : generate_catalog(3)) {
            EXPECT_EQ(enumerate_actions(m, x).size(), action_count(*m, *x)) << m->name() << " on " << x->label();
        }
    }
}

TEST(ActedLimits, ProductOfSwaps)
{
    auto a = swap_d2();
    auto p = acted_product(a, a);
    EXPECT_TRUE(p.certificate.passed());
    ASSERT_EQ(p.object.carrier()->size(), 4u);
    EXPECT_TRUE(p.object.carrier()->is_discrete());
    for (std::size_t x = 0; x < 2; ++x) {
        for (std::size_t y = 0; y < 2; ++y) {
            EXPECT_EQ(p.object.act(1, p.cone.pair_index(x, y)), p.cone.pair_index(1 - x, 1 - y));
        }
    }
}

TEST(ActedLimits, CoproductAndEqualizer)
{
    auto a = swap_d2();
    auto b = trivial_action(c2g(), chain(2));
    auto c = acted_coproduct(a, b);
    EXPECT_TRUE(c.certificate.passed());
    EXPECT_EQ(c.object.carrier()->size(), 4u);

    auto d2 = discrete(2);
    auto id = identity(d2);
    auto sw = MonotoneMap(d2, d2, {1, 0});
    auto e = acted_equalizer(id, sw, a, a);
    EXPECT_TRUE(e.certificate.passed());
    EXPECT_EQ(e.object.carrier()->size(), 0u);
    auto e2 = acted_equalizer(id, id, a, a);
    EXPECT_EQ(e2.object.carrier()->size(), 2u);
}

TEST(FreeForgetful, Examples)
{
    auto tests = generate_catalog(2);
    auto cert = free_forgetful(swap_d2(), {}, tests);
    EXPECT_TRUE(cert.passed()) << cert.to_json().dump();
    EXPECT_TRUE(free_forgetful(trivial_action(one_g(), chain(2)), {}, tests).passed());
    for (const auto& a : group_actions(2)) EXPECT_TRUE(free_forgetful(a, {}, tests).passed()) << a.name();
}

TEST(PowerAction, SwapOnD2)
{
    auto pa = power_action(swap_d2());
    EXPECT_TRUE(pa.certificate.passed());
    ASSERT_EQ(pa.acted.carrier()->size(), 6u);
    std::size_t fixed = 0;
    for (std::size_t p = 0; p < 6; ++p) fixed += pa.acted.act(1, p) == p;
    EXPECT_EQ(fixed, 4u);
}

TEST(PowerAction, TrivialAndLaws)
{
    auto t = power_action(trivial_action(c2g(), chain(2)));
    EXPECT_TRUE(t.acted.is_trivial());
    for (const auto& a : group_actions(2)) EXPECT_TRUE(power_action(a).certificate.passed()) << a.name();
}

TEST(EquivariantNats, Examples)
{
    auto a = swap_d2();
    auto point_triv = trivial_action(c2g(), point());
    auto r = equivariant_nats(a, point_triv);
    EXPECT_EQ(r.maps.size(), 4u);
    EXPECT_EQ(equivariant_nat_count(a, point_triv), 4u);

    auto triv = trivial_action(one_g(), chain(2));
    auto triv_y = trivial_action(one_g(), discrete(2));
    EXPECT_EQ(equivariant_nats(triv, triv_y).maps.size(), nat_trans_space(chain(2), discrete(2)).size());

    auto self = equivariant_nats(a, a);
    auto id = identity_map(upset_lattice(discrete(2)));
    bool has_id = false;
    for (const auto& d : self.maps) has_id = has_id || d.assign() == id.assign();
    EXPECT_TRUE(has_id);
}

TEST(Stability, SwapToPoint)
{
    auto a = swap_d2();
    auto b = trivial_action(c2g(), point());
    auto cert = verify_stability(a, b);
    EXPECT_TRUE(cert.passed());
    EXPECT_EQ(cert.count_of("equivariant_nats"), 4);
    EXPECT_EQ(cert.count_of("equivariant_maps"), 4);
    EXPECT_EQ(oracle::equivariant_map_count(a, b), 4u);
}

TEST(Stability, CountsMatchOraclesOverSmallCatalog)
{
    auto acts = group_actions(2);
    for (const auto& a : acts) {
        for (const auto& b : acts) {
            if (a.monoid()->name() != b.monoid()->name()) continue;
            auto cert = verify_stability(a, b);
            EXPECT_TRUE(cert.passed()) << a.name() << "," << b.name();
            auto nats = equivariant_nat_count(a, b);
            EXPECT_EQ(static_cast<std::size_t>(cert.count_of("equivariant_nats")), nats);
            EXPECT_EQ(oracle::equivariant_map_count(a, b), nats) << a.name() << "," << b.name();
        }
    }
}

TEST(Stability, TrivialGroupIsPlainTranspose)
{
    auto cat = generate_catalog(2);
    for (const auto& x : cat) {
        for (const auto& y : cat) {
            auto a = trivial_action(one_g(), x);
            auto b = trivial_action(one_g(), y);
            auto cert = verify_stability(a, b);
            EXPECT_TRUE(cert.passed());
            EXPECT_EQ(static_cast<std::size_t>(cert.count_of("equivariant_maps")),
                      nat_trans_space(x, y).size());
        }
    }
}

TEST(Mate, RoundTripAndUnitComponent)
{
    auto a = swap_d2();
    for (const auto& y : generate_catalog(2)) {
        auto cert = verify_mate(a, y);
        EXPECT_TRUE(cert.passed()) << y->label();
        EXPECT_EQ(static_cast<std::size_t>(cert.count_of("nat")), nat_trans_space(a.carrier(), y).size());
    }
    auto gy = product(a.monoid()->carrier(), point());
    auto sy = upset_lattice(point());
    for (const auto& d : nat_trans_space(a.carrier(), point())) {
        auto m = mate(d, a, gy);
        EXPECT_EQ(comate(m, a.monoid(), gy, sy).assign(), d.assign());
    }
}

TEST(Mate, TrivialGroupIsDelta)
{
    auto a = trivial_action(one_g(), chain(2));
    auto y = discrete(2);
    auto gy = product(a.monoid()->carrier(), y);
    for (const auto& d : nat_trans_space(a.carrier(), y)) {
        auto m = mate(d, a, gy);
        for (std::size_t u = 0; u < d.dom()->size(); ++u) {
            Mask got = m.cod()->mask(m(u));
            Mask want = d.cod()->mask(d(u));
            // 1 x Y lists pairs (e, y) in the order of Y
            EXPECT_EQ(got, want);
        }
    }
}

TEST(Mate, RequiresGroup)
{
    auto a = make_acted(min_monoid(), chain(2), {0, 0, 0, 1});
    auto gy = product(a.monoid()->carrier(), point());
    auto d = nat_trans_space(a.carrier(), point()).front();
    EXPECT_EQ(kind_of([&] { mate(d, a, gy); }), ErrorKind::GroupRequired);
}

TEST(SplitCoequalizer, Examples)
{
    EXPECT_TRUE(verify_split_coequalizer(trivial_action(c2g(), chain(2))).passed());
    EXPECT_TRUE(verify_split_coequalizer(swap_d2()).passed());
    EXPECT_TRUE(verify_split_coequalizer(regular_action(cyclic_group(3))).passed());
}
