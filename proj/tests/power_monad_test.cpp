#include <gtest/gtest.h>

#include <spacelab/catalog.hpp>
#include <spacelab/power_monad.hpp>

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

LatticeMap from_masks(const PosetPtr& x, const PosetPtr& y, const std::function<Mask(Mask)>& f)
{
    return LatticeMap::from_function(upset_lattice(x), upset_lattice(y), f);
}

bool is_chain(const Poset& p)
{
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (!p.comparable(i, j)) return false;
        }
    }
    return true;
}

} // namespace

TEST(NatTransSpace, Counts)
{
    EXPECT_EQ(nat_trans_space(chain(2), point()).size(), 4u);
    EXPECT_EQ(nat_trans_space(point(), point()).size(), 3u);
    EXPECT_EQ(nat_trans_space(empty_poset(), discrete(2)).size(), 4u);
    for (const auto& x : generate_catalog(2)) {
        for (const auto& y : generate_catalog(2)) {
            auto lx = upset_lattice(x)->as_poset();
            auto ly = upset_lattice(y)->as_poset();
            EXPECT_EQ(nat_trans_space(x, y).size(), oracle::hom_count(lx, ly));
        }
    }
}

TEST(DoublePower, Shapes)
{
    auto p1 = double_power(point());
    EXPECT_EQ(p1.size(), 3u);
    EXPECT_TRUE(is_chain(*p1.carrier()));
    auto pc2 = double_power(chain(2));
    EXPECT_EQ(pc2.size(), 4u);
    EXPECT_TRUE(is_chain(*pc2.carrier()));
    EXPECT_EQ(double_power(discrete(2)).size(), 6u);
    for (const auto& x : generate_catalog(3)) {
        EXPECT_EQ(double_power(x).size(), oracle::upsets(*upset_lattice(x)->as_poset()).size());
    }
}

TEST(DoublePower, RespectsCap)
{
    Caps caps;
    caps.max_double_power = 2;
    EXPECT_EQ(kind_of([&] { double_power(chain(3), caps); }), ErrorKind::SizeCap);
}

TEST(Unit, Examples)
{
    auto p1 = double_power(point());
    auto u1 = unit(p1);
    // the evaluation point {{*}} is the middle of the 3-chain
    EXPECT_EQ(p1.filter(u1(0)), Mask{1} << 1);

    auto pc2 = double_power(chain(2));
    auto u = unit(pc2);
    // up-sets of C2 in index order: {}, {1}, {0,1}
    EXPECT_EQ(pc2.filter(u(0)), Mask{1} << 2);
    EXPECT_EQ(pc2.filter(u(1)), (Mask{1} << 1) | (Mask{1} << 2));
    EXPECT_TRUE(u.is_injective());
    EXPECT_EQ(pc2.untranspose(u).assign(), identity_map(pc2.opens()).assign());
}

TEST(Transpose, BijectiveOrderIsoOverCatalog)
{
    auto cat = generate_catalog(2);
    for (const auto& x : cat) {
        auto px = double_power(x);
        for (const auto& y : cat) {
            EXPECT_TRUE(verify_transpose(px, y).passed()) << x->label() << "," << y->label();
            EXPECT_EQ(enumerate_monotone(y, px.carrier()).size(), nat_trans_space(x, y).size());
        }
    }
}

TEST(Transpose, NaturalInBothArguments)
{
    auto cat = generate_catalog(2);
    for (const auto& x : cat) {
        auto px = double_power(x);
        for (const auto& y : cat) {
            for (const auto& y2 : cat) {
                for (const auto& u : oracle::homs(y2, y)) {
                    EXPECT_TRUE(verify_transpose_natural_in_y(px, u).passed());
                }
            }
            auto px2 = double_power(y);
            for (const auto& v : oracle::homs(x, y)) {
                for (const auto& z : cat) EXPECT_TRUE(verify_transpose_natural_in_x(px, px2, v, z).passed());
            }
        }
    }
}

TEST(MonadLaws, SmallObjects)
{
    for (const auto& x : {point(), chain(2), discrete(2)}) {
        auto cert = verify_monad_laws(x);
        EXPECT_TRUE(cert.passed()) << x->label() << " " << cert.to_json().dump();
    }
}

TEST(Strength, UnitIsIdentity)
{
    auto px = double_power(chain(2));
    auto s = strength(point(), px);
    EXPECT_TRUE(s.t.is_iso());
    // (*, Phi) |-> Phi under 1 x X = X
    for (std::size_t p = 0; p < px.size(); ++p) {
        EXPECT_EQ(s.pzx->filter(s.t(s.zp.pair_index(0, p))), px.filter(p));
    }
}

TEST(Strength, Associativity)
{
    EXPECT_TRUE(verify_strength_associativity(chain(2), chain(2), point()).passed());
    EXPECT_TRUE(verify_strength_associativity(discrete(2), point(), chain(2)).passed());
}

TEST(Kleisli, CompositionMatchesMonad)
{
    auto cat = generate_catalog(2);
    for (const auto& x : cat) {
        for (const auto& y : cat) {
            auto px = double_power(x);
            auto py = double_power(y);
            auto h1s = enumerate_monotone(point(), py.carrier());
            auto h2s = enumerate_monotone(y, px.carrier());
            for (const auto& h1 : h1s.maps()) {
                for (const auto& h2 : h2s.maps()) EXPECT_TRUE(verify_kleisli_composition(px, py, h2, h1).passed());
            }
        }
    }
}

TEST(Kleisli, IdentityAndFlags)
{
    auto x = chain(2);
    auto sid = inverse_image(identity(x));
    for (const auto& d : nat_trans_space(x, discrete(2))) EXPECT_EQ(kleisli_compose(d, sid).assign(), d.assign());
    auto nats = nat_trans_space(chain(2), chain(2));
    for (const auto& a : nats) {
        for (const auto& b : nats) {
            auto c = kleisli_compose(b, a);
            if (a.flags().join_hom() && b.flags().join_hom()) EXPECT_TRUE(c.flags().join_hom());
            if (a.flags().meet_hom() && b.flags().meet_hom()) EXPECT_TRUE(c.flags().meet_hom());
            if (classify(a) == KleisliKind::DLatHom && classify(b) == KleisliKind::DLatHom) {
                EXPECT_EQ(classify(c), KleisliKind::DLatHom);
            }
        }
    }
}

TEST(RecoverMap, Examples)
{
    auto c2 = chain(2);
    auto id = recover_map(identity_map(upset_lattice(c2)));
    EXPECT_EQ(id.assign(), identity(c2).assign());

    auto to_top = from_masks(c2, point(), [](Mask u) { return (u >> 1) & 1U ? Mask{1} : Mask{0}; });
    auto f = recover_map(to_top);
    EXPECT_EQ(f(0), 1u);

    auto d2 = discrete(2);
    auto only_full = from_masks(d2, point(), [](Mask u) { return u == 3 ? Mask{1} : Mask{0}; });
    try {
        recover_map(only_full);
        FAIL() << "accepted a non-homomorphism";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotDLatHom);
        EXPECT_NE(std::string(e.what()).find("preserves-binary-join"), std::string::npos);
        EXPECT_FALSE(e.witness().is_null());
    }
}

// Axiom 5 both ways: dlat-homs are exactly the inverse images.
TEST(RecoverMap, DLatHomsAreInverseImages)
{
    auto cat = generate_catalog(3);
    for (const auto& x : cat) {
        for (const auto& y : cat) {
            std::size_t dlat = 0;
            for (const auto& alpha : nat_trans_space(x, y)) {
                if (!alpha.flags().dlat_hom()) {
                    EXPECT_EQ(kind_of([&] { recover_map(alpha); }), ErrorKind::NotDLatHom);
                    continue;
                }
                ++dlat;
                auto f = recover_map(alpha);
                EXPECT_EQ(inverse_image(f).assign(), alpha.assign());
            }
            EXPECT_EQ(dlat, oracle::hom_count(y, x)) << x->label() << "," << y->label();
            for (const auto& f : oracle::homs(y, x)) {
                EXPECT_EQ(recover_map(inverse_image(f)).assign(), f.assign());
            }
        }
    }
}

TEST(SplitInflationary, Examples)
{
    auto c2 = chain(2);
    auto id = split_inflationary(identity_map(upset_lattice(c2)));
    EXPECT_TRUE(id.certificate.passed());
    EXPECT_TRUE(oracle::isomorphic(*id.x0, *c2));
    EXPECT_TRUE(id.q.is_iso());

    auto collapse = from_masks(c2, c2, [](Mask u) { return u == 0 ? Mask{0} : Mask{3}; });
    auto s = split_inflationary(collapse);
    EXPECT_TRUE(s.certificate.passed());
    EXPECT_EQ(s.x0->size(), 1u);
    EXPECT_EQ(s.fixed.size(), 2u);

    auto d2 = discrete(2);
    auto orbit = from_masks(d2, d2, [](Mask u) { return u == 0 ? Mask{0} : Mask{3}; });
    auto o = split_inflationary(orbit);
    EXPECT_TRUE(o.certificate.passed());
    EXPECT_EQ(o.x0->size(), 1u);
}

TEST(SplitInflationary, Rejections)
{
    auto c2 = chain(2);
    auto down = from_masks(c2, c2, [](Mask) { return Mask{0}; });
    EXPECT_EQ(kind_of([&] { split_inflationary(down); }), ErrorKind::NotInflationary);
    auto d2 = discrete(2);
    auto everything = from_masks(d2, d2, [](Mask) { return Mask{3}; });
    EXPECT_EQ(kind_of([&] { split_inflationary(everything); }), ErrorKind::NotJoinHom);
    // on the 4-chain S^C3: 0 1 2 3 -> 0 2 3 3
    auto s3 = upset_lattice(chain(3));
    LatticeMap step(s3, s3, {0, 2, 3, 3});
    EXPECT_EQ(kind_of([&] { split_inflationary(step); }), ErrorKind::NotIdempotent);
}

TEST(SplitInflationary, AllIdempotentsUpToThree)
{
    for (const auto& x : generate_catalog(3)) {
        auto idems = enumerate_inflationary_idempotents(x);
        // brute-force count over the whole Nat space
        std::size_t expected = 0;
        for (const auto& m : nat_trans_space(x, x)) {
            bool ok = m.flags().join_hom();
            for (std::size_t u = 0; u < m.dom()->size() && ok; ++u) {
                ok = m.dom()->leq(u, m(u)) && m(m(u)) == m(u);
            }
            expected += ok;
        }
        EXPECT_EQ(idems.size(), expected) << x->label();
        for (const auto& psi : idems) {
            auto s = split_inflationary(psi);
            EXPECT_TRUE(s.certificate.passed()) << x->label();
            EXPECT_EQ(compose(s.theta, s.gamma).assign(), psi.assign());
            EXPECT_EQ(compose(s.gamma, s.theta).assign(), identity_map(s.gamma.cod()).assign());
            EXPECT_TRUE(s.theta.flags().dlat_hom());
            EXPECT_TRUE(s.gamma.flags().preserves_top);
        }
    }
}

TEST(SplitDeflationary, AllIdempotentsUpToThree)
{
    for (const auto& x : generate_catalog(3)) {
        for (const auto& psi : enumerate_deflationary_idempotents(x)) {
            auto s = split_deflationary(psi);
            EXPECT_TRUE(s.certificate.passed()) << x->label();
            EXPECT_EQ(compose(s.theta, s.gamma).assign(), psi.assign());
        }
    }
}

TEST(Axiom7, Examples)
{
    auto tests = generate_catalog(2);
    auto c2 = chain(2);
    auto id = identity(c2);
    EXPECT_TRUE(axiom7_check(id, id, tests).passed());
    auto cert = axiom7_check(id, constant_map(c2, c2, 0), tests);
    EXPECT_TRUE(cert.passed()) << cert.to_json().dump();
    auto one = point();
    EXPECT_TRUE(axiom7_check(constant_map(one, c2, 0), constant_map(one, c2, 1), tests).passed());
}
