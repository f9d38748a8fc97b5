// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <spacelab/spacelab.hpp>

#include "oracles.hpp"

using namespace spacelab;

namespace {

const std::string kInstances = SPACELAB_INSTANCES;
const std::string kCli = SPACELAB_CLI;

struct Outcome {
    bool ok = true;
    std::ostringstream note;

    void fail(const std::string& why)
    {
        if (ok) note << why;
        ok = false;
    }
    void expect(bool cond, const std::string& why)
    {
        if (!cond) fail(why);
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Captured {
    int code = -1;
    std::string out;
};

Captured run_cli(const std::string& args)
{
    Captured r;
    FILE* pipe = popen((kCli + " " + args + " 2>&1").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// Every check with the given id prefix passed, none was skipped, and at
// least one ran.
void expect_suite(Outcome& o, const Report& r, const std::string& prefix)
{
    std::size_t seen = 0;
    for (const auto& c : r.checks) {
        if (c.id.rfind(prefix, 0) != 0) continue;
        ++seen;
        if (c.status == Status::Fail) o.fail(c.id + " failed: " + c.witnesses.dump());
        if (c.status == Status::SkippedByCap) o.fail(c.id + " skipped by cap");
        if (c.counts.contains("skipped_by_cap")) o.fail(c.id + " skipped work by cap");
    }
    if (seen == 0) o.fail("no checks with prefix " + prefix);
}

std::int64_t sum_count(const Report& r, const std::string& prefix, const std::string& key)
{
    std::int64_t n = 0;
    for (const auto& c : r.checks) {
        if (c.id.rfind(prefix, 0) == 0 && c.counts.contains(key)) n += c.counts[key].get<std::int64_t>();
    }
    return n;
}

const std::vector<MonoidPtr>& groups()
{
    static const std::vector<MonoidPtr> gs = {trivial_group(), cyclic_group(2), cyclic_group(3)};
    return gs;
}

std::vector<ActedPoset> group_actions(std::size_t n)
{
    std::vector<ActedPoset> out;
    for (const auto& g : groups()) {
        for (const auto& x : generate_catalog(n)) {
            for (auto& a : enumerate_actions(g, x)) out.push_back(std::move(a));
        }
    }
    return out;
}

SuiteOptions catalog_options(std::size_t n)
{
    SuiteOptions opt;
    opt.catalog = n;
    return opt;
}

// Shared between criteria 2 and 3.
const Report& stability_report()
{
    static const Report r = run_suite("stability", nullptr, catalog_options(3));
    return r;
}

std::vector<std::vector<std::size_t>> action_pairs(const ActedPoset& a)
{
    std::vector<std::vector<std::size_t>> out(2);
    for (std::size_t g = 0; g < a.monoid()->size(); ++g) {
        for (std::size_t x = 0; x < a.carrier()->size(); ++x) {
            out[0].push_back(a.act(g, x));
            out[1].push_back(x);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void criterion1(Outcome& o)
{
    auto t0 = Clock::now();
    auto r = run_suite("axioms", nullptr, catalog_options(3));
    for (const auto* p : {"axioms/product", "axioms/coproduct", "axioms/equalizers", "axioms/axiom7",
                          "axioms/recover", "axioms/transpose", "axioms/distributivity", "axioms/pullback-stability",
                          "axioms/sierpinski", "axioms/axiom6-inflationary"}) {
        expect_suite(o, r, p);
    }
    // independent count of parallel pairs
    std::int64_t pairs = 0;
    for (const auto& x : generate_catalog(3)) {
        for (const auto& y : generate_catalog(3)) {
            auto n = static_cast<std::int64_t>(oracle::hom_count(x, y));
            pairs += n * n;
        }
    }
    o.expect(sum_count(r, "axioms/equalizers", "parallel_pairs") == pairs, "equalizer pair count differs from oracle");
    o.expect(sum_count(r, "axioms/axiom7", "parallel_pairs") == pairs, "axiom7 pair count differs from oracle");
    double secs = seconds_since(t0);
    o.expect(secs < 120, "took longer than 2 min");
    o.note << r.checks.size() << " checks, " << pairs << " parallel pairs, "
           << sum_count(r, "axioms/axiom6-inflationary", "idempotents") << " inflationary idempotents";
}

void criterion2(Outcome& o)
{
    auto t0 = Clock::now();
    const auto& r = stability_report();
    expect_suite(o, r, "stability/nat-vs-maps");
    std::size_t pairs = 0;
    auto acts = group_actions(3);
    for (const auto& c : r.checks) {
        if (c.id.rfind("stability/nat-vs-maps", 0) != 0) continue;
        ++pairs;
        if (c.counts["equivariant_nats"] != c.counts["equivariant_maps"]) o.fail(c.id + " counts differ");
    }
    std::size_t expected_pairs = 0;
    for (const auto& a : acts) {
        for (const auto& b : acts) expected_pairs += a.monoid() == b.monoid();
    }
    o.expect(pairs == expected_pairs, "stability pair count differs from the enumerated actions");
    // the map side against an independent count
    for (const auto& a : acts) {
        for (const auto& b : acts) {
            if (a.monoid() != b.monoid()) continue;
            auto cert = verify_stability(a, b);
            if (cert.count_of("equivariant_maps") != static_cast<std::int64_t>(oracle::equivariant_map_count(a, b))) {
                o.fail("oracle count differs for " + a.name() + "," + b.name());
            }
        }
    }
    const auto& c2 = groups()[1];
    auto swap = make_acted(c2, discrete(2), {0, 1, 1, 0}, "swap");
    auto one = trivial_action(c2, point());
    auto cert = verify_stability(swap, one);
    o.expect(cert.passed(), "((D2,swap),(1,triv)) failed");
    o.expect(cert.count_of("equivariant_nats") == 4 && cert.count_of("equivariant_maps") == 4,
             "((D2,swap),(1,triv)) count is not 4");
    double secs = seconds_since(t0);
    o.expect(secs < 300, "took longer than 5 min");
    o.note << pairs << " action pairs, ((D2,swap),(1,triv)) count " << cert.count_of("equivariant_nats");
}

void criterion3(Outcome& o)
{
    const auto& r = stability_report();
    expect_suite(o, r, "stability/mate");
    std::int64_t targets = sum_count(r, "stability/mate", "targets");
    std::int64_t expected = static_cast<std::int64_t>(group_actions(3).size() * generate_catalog(3).size());
    o.expect(targets == expected, "mate targets differ from actions x catalog");
    o.note << targets << " (action, target) pairs";
}

void criterion4(Outcome& o)
{
    std::int64_t homs = 0, rejected = 0;
    auto cat = generate_catalog(4);
    for (const auto& x : cat) {
        for (const auto& y : cat) {
            auto sx = upset_lattice(x), sy = upset_lattice(y);
            std::int64_t here = 0;
            auto visit = [&](bool count) {
                return [&, count](LatticeMap alpha) {
                    if (alpha.flags().dlat_hom()) {
                        auto f = recover_map(alpha);
                        if (inverse_image(f).assign() != alpha.assign()) {
                            o.fail("S^f differs from input " + alpha.to_json().dump());
                            return false;
                        }
                        here += count;
                        return true;
                    }
                    try {
                        recover_map(alpha);
                        o.fail("accepted a non-dlat-hom " + alpha.to_json().dump());
                        return false;
                    } catch (const Error& e) {
                        if (e.kind() != ErrorKind::NotDLatHom || !e.witness().contains("law")) {
                            o.fail(std::string("rejection without a law witness: ") + e.what());
                            return false;
                        }
                    }
                    ++rejected;
                    return true;
                };
            };
            for_each_join_hom(sx, sy, visit(true));
            for_each_meet_hom(sx, sy, visit(false));
            if (here != static_cast<std::int64_t>(oracle::hom_count(y, x))) {
                o.fail("dlat-hom count differs from |Hom(Y,X)| for " + label_of(x) + "," + label_of(y));
            }
            homs += here;
        }
    }
    o.note << homs << " dlat-homs recovered, " << rejected << " non-homs rejected";
}

void criterion5(Outcome& o)
{
    std::size_t splits = 0;
    for (const auto& x : generate_catalog(3)) {
        auto sx = upset_lattice(x);
        for (const auto& psi : enumerate_inflationary_idempotents(x)) {
            auto s = split_inflationary(psi);
            ++splits;
            const auto& th = s.theta;
            const auto& ga = s.gamma;
            const auto& sx0 = th.dom();
            for (std::size_t u = 0; u < sx0->size(); ++u) {
                for (std::size_t v = 0; v < sx0->size(); ++v) {
                    Mask mu = sx0->mask(u), mv = sx0->mask(v);
                    if (sx->mask(th(sx0->index_of(mu & mv))) != (sx->mask(th(u)) & sx->mask(th(v)))) o.fail("theta not meet-preserving");
                    if (sx->mask(th(sx0->index_of(mu | mv))) != (sx->mask(th(u)) | sx->mask(th(v)))) o.fail("theta not join-preserving");
                }
            }
            o.expect(ga(sx->top()) == sx0->top(), "gamma does not preserve top");
            for (std::size_t u = 0; u < sx->size(); ++u) o.expect(th(ga(u)) == psi(u), "theta.gamma != psi");
            for (std::size_t k = 0; k < sx0->size(); ++k) o.expect(ga(th(k)) == k, "gamma.theta != id");
        }
    }
    o.note << splits << " splits";
}

void criterion6(Outcome& o)
{
    auto t0 = Clock::now();
    SuiteOptions opt;
    opt.triq_catalog = 4;
    auto r = run_suite("triq", nullptr, opt);
    expect_suite(o, r, "triq/surjections");
    expect_suite(o, r, "triq/codiagonal");
    auto cat = generate_catalog(4);
    std::size_t triq = 0, open = 0;
    for (const auto& z : cat) {
        for (const auto& y : cat) {
            if (y->size() > z->size()) continue;
            for (const auto& p : oracle::homs(z, y)) {
                if (!p.is_surjective()) continue;
                bool is_open = oracle::frobenius(*z, *y, p.assign());
                auto t = find_triquotient_surjection(p);
                if (is_open && !t) o.fail("open surjection without triquotient " + p.to_json().dump());
                if (!t) continue;
                ++triq;
                open += is_open;
                // the kernel pair's coequalizer is Z modulo <= and the fibres
                std::vector<std::size_t> k1, k2;
                for (std::size_t a = 0; a < z->size(); ++a) {
                    for (std::size_t b = 0; b < z->size(); ++b) {
                        if (p(a) == p(b)) k1.push_back(a), k2.push_back(b);
                    }
                }
                auto pre = oracle::generated_preorder(*z, k1, k2);
                if (!oracle::presents_quotient(pre, *y, p.assign())) o.fail("not the kernel-pair coequalizer " + p.to_json().dump());
            }
        }
    }
    o.expect(static_cast<std::int64_t>(triq) == sum_count(r, "triq/surjections", "triquotient"),
             "suite triquotient count differs");
    o.expect(static_cast<std::int64_t>(open) == sum_count(r, "triq/surjections", "open"), "suite open count differs");
    double secs = seconds_since(t0);
    o.expect(secs < 120, "took longer than 2 min");
    o.note << triq << " triquotient surjections (" << open << " open), "
           << sum_count(r, "triq/surjections", "surjections") << " surjections";
}

void criterion7(Outcome& o)
{
    auto r = run_suite("sigma", nullptr, catalog_options(3));
    expect_suite(o, r, "sigma/components");
    expect_suite(o, r, "sigma/free-forgetful");
    expect_suite(o, r, "sigma/split-coequalizer");
    auto tests = generate_catalog(2);
    std::size_t n = 0;
    for (const auto& a : group_actions(3)) {
        auto c = connected_components(a, tests);
        auto pairs = action_pairs(a);
        auto pre = oracle::generated_preorder(*a.carrier(), pairs[0], pairs[1]);
        if (!oracle::presents_quotient(pre, *c.x0, c.q.assign())) o.fail("components differ from the orbit quotient of " + a.name());
        ++n;
    }
    auto swap = make_acted(groups()[1], discrete(2), {0, 1, 1, 0}, "swap");
    auto c = connected_components(swap, tests);
    o.expect(c.x0->size() == 1, "(D2, swap) is not the one-point poset");
    o.note << n << " group actions, (D2,swap) -> " << c.x0->size() << " point";
}

void criterion8(Outcome& o)
{
    auto a = parse_instance(kInstances + "/min_monoid.json").actions.begin()->second;
    auto attempt = try_connected_components(a, generate_catalog(2));
    o.expect(!attempt.ok() && attempt.diagnostic.has_value(), "no structured diagnostic");
    auto run = run_cli("sigma " + kInstances + "/min_monoid.json --format json --no-timing");
    o.expect(run.code == 1, "CLI exit code " + std::to_string(run.code));
    nlohmann::json fragment;
    try {
        auto j = nlohmann::json::parse(run.out);
        for (const auto& c : j["checks"]) {
            if (c["status"] != "fail") continue;
            for (const auto& w : c["witnesses"]) {
                if (w.contains("fragment")) fragment = w["fragment"];
            }
        }
    } catch (const std::exception& e) {
        o.fail(std::string("unparseable output: ") + e.what());
    }
    o.expect(!fragment.is_null(), "no replay fragment");
    if (!fragment.is_null()) {
        auto replay = parse_instance_json(fragment);
        auto again = run_suite("all", &replay);
        o.expect(!again.passed(), "replayed fragment does not fail");
    }
    if (attempt.diagnostic) o.note << "diagnostic at " << attempt.diagnostic->stage << "/" << attempt.diagnostic->check;
}

void criterion9(Outcome& o)
{
    auto r = run_suite("open", nullptr, catalog_options(3));
    for (const auto* p : {"open/objects", "open/maps", "open/bottom-point-detected", "open/equivariant-iff",
                          "open/section-inequality"}) {
        expect_suite(o, r, p);
    }
    std::size_t maps = 0;
    for (const auto& x : generate_catalog(3)) {
        for (const auto& y : generate_catalog(3)) {
            for (const auto& f : oracle::homs(x, y)) {
                ++maps;
                if (is_open(f).open() != oracle::frobenius(*x, *y, f.assign())) o.fail("openness differs from oracle " + f.to_json().dump());
            }
        }
    }
    auto bot = MonotoneMap(point(), chain(2), {0});
    auto w = is_open(bot);
    o.expect(!w.open() && !w.counterexample().is_null(), "bottom point of C2 not detected");
    o.note << maps << " maps classified, " << sum_count(r, "open/maps", "compositions") << " compositions, "
           << sum_count(r, "open/maps", "pullbacks") << " pullbacks, "
           << sum_count(r, "open/equivariant-iff", "equivariant_maps") << " equivariant maps";
}

void criterion10(Outcome& o)
{
    const std::string args = "all " + kInstances + "/desk.json --format json";
    auto a = run_cli(args + " --no-timing");
    auto b = run_cli(args + " --no-timing");
    o.expect(a.code == 0 && b.code == 0, "run did not pass");
    o.expect(!a.out.empty() && a.out == b.out, "outputs differ");
    // with timing on, the documents agree once millis is dropped
    auto strip = [](const std::string& s) {
        auto j = nlohmann::json::parse(s);
        for (auto& c : j["checks"]) c.erase("millis");
        return j.dump();
    };
    auto c = run_cli(args);
    auto d = run_cli(args);
    try {
        o.expect(strip(c.out) == strip(d.out), "outputs differ modulo timing");
        o.expect(strip(c.out) == strip(a.out), "timed and untimed outputs differ");
    } catch (const std::exception& e) {
        o.fail(std::string("unparseable output: ") + e.what());
    }
    o.note << a.out.size() << " bytes";
}

} // namespace

int main()
{
    const std::vector<std::function<void(Outcome&)>> criteria = {
        criterion1, criterion2, criterion3, criterion4, criterion5,
        criterion6, criterion7, criterion8, criterion9, criterion10,
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        auto t0 = Clock::now();
        try {
            criteria[i](o);
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::printf("criterion %2zu: %s  %.1fs  %s\n", i + 1, o.ok ? "PASS" : "FAIL", seconds_since(t0),
                    o.note.str().c_str());
        std::fflush(stdout);
        failed += !o.ok;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
