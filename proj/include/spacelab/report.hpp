#pragma once

#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "caps.hpp"
#include "certificate.hpp"
#include "error.hpp"

namespace spacelab {

inline constexpr const char* kVersion = "1.0.0";

enum class Status { Pass, Fail, SkippedByCap };

inline std::string_view to_string(Status s)
{
    switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::SkippedByCap: return "skipped-by-cap";
    }
    return "?";
}

/// One line of a report. Failures carry witnesses and, when the failing
/// input can be written down, an instance fragment that replays it.
struct CheckResult {
    std::string id;
    Status status = Status::Pass;
    nlohmann::json witnesses = nlohmann::json::array();
    nlohmann::json counts = nlohmann::json::object();
    nlohmann::json fragment;
    double millis = 0;

    nlohmann::json to_json(bool timing = true) const
    {
        nlohmann::json j = {{"id", id}, {"status", std::string(to_string(status))}};
        if (!witnesses.empty() || !fragment.is_null()) {
            nlohmann::json w = witnesses;
            if (!fragment.is_null()) w.push_back({{"fragment", fragment}});
            j["witnesses"] = w;
        }
        if (!counts.empty()) j["counts"] = counts;
        j["millis"] = timing ? millis : 0.0;
        return j;
    }
};

inline nlohmann::json caps_json(const Caps& c)
{
    return {{"max_poset", c.max_poset},
            {"max_double_power", c.max_double_power},
            {"max_elements", c.max_elements},
            {"max_lattice", c.max_lattice},
            {"max_hom", c.max_hom}};
}

struct Report {
    std::string suite;
    std::vector<CheckResult> checks;
    Caps caps;

    bool passed() const
    {
        for (const auto& c : checks) {
            if (c.status == Status::Fail) return false;
        }
        return true;
    }

    std::size_t count(Status s) const
    {
        std::size_t n = 0;
        for (const auto& c : checks) n += c.status == s;
        return n;
    }

    const CheckResult* find(const std::string& id) const
    {
        for (const auto& c : checks) {
            if (c.id == id) return &c;
        }
        return nullptr;
    }

    nlohmann::json to_json(bool timing = true) const
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks) arr.push_back(c.to_json(timing));
        return {{"suite", suite}, {"checks", arr}, {"caps", caps_json(caps)}, {"version", kVersion}};
    }

    std::string to_text() const
    {
        std::ostringstream out;
        out << "suite " << suite << "\n";
        if (checks.empty()) {
            out << "no checks selected\n";
            return out.str();
        }
        for (const auto& c : checks) {
            out << "  " << to_string(c.status) << "  " << c.id;
            if (c.millis >= 1) out << "  (" << static_cast<long long>(c.millis) << " ms)";
            out << "\n";
            if (c.status == Status::Fail) {
                for (const auto& w : c.witnesses) out << "      " << w.dump() << "\n";
                if (!c.fragment.is_null()) out << "      replay: " << c.fragment.dump() << "\n";
            } else if (c.status == Status::SkippedByCap && !c.witnesses.empty()) {
                out << "      " << c.witnesses[0].value("message", std::string{}) << "\n";
            }
        }
        out << count(Status::Pass) << " passed, " << count(Status::Fail) << " failed, "
            << count(Status::SkippedByCap) << " skipped by cap\n";
        return out.str();
    }
};

/// Mutable state a check body may fill in while it runs: the fragment is
/// reported if the check fails.
struct CheckContext {
    nlohmann::json fragment;
    nlohmann::json extra_counts = nlohmann::json::object();
};

/// Runs one check body, converting size caps into skips and errors into
/// failures.
inline CheckResult run_check(const std::string& id, const std::function<Certificate(CheckContext&)>& body)
{
    CheckResult r;
    r.id = id;
    CheckContext ctx;
    auto start = std::chrono::steady_clock::now();
    try {
        auto cert = body(ctx);
        if (cert.passed()) {
            r.status = Status::Pass;
        } else {
            r.status = Status::Fail;
            for (const auto& f : cert.failures()) r.witnesses.push_back({{"check", f.id}, {"witness", f.witness}});
            r.fragment = ctx.fragment;
        }
        for (const auto& [k, v] : cert.counts()) r.counts[k] = v;
    } catch (const TheoremViolation& e) {
        r.status = Status::Fail;
        r.witnesses.push_back({{"kind", std::string(to_string(e.kind()))}, {"message", e.what()},
                               {"theorem_violation", true}, {"witness", e.witness()}});
        r.fragment = ctx.fragment;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::SizeCap) {
            r.status = Status::SkippedByCap;
            r.witnesses.push_back({{"message", e.what()}});
        } else {
            r.status = Status::Fail;
            r.witnesses.push_back({{"kind", std::string(to_string(e.kind()))}, {"message", e.what()},
                                   {"witness", e.witness()}});
            r.fragment = ctx.fragment;
        }
    }
    for (const auto& [k, v] : ctx.extra_counts.items()) r.counts[k] = v;
    r.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace spacelab
