#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace spacelab {

struct Check {
    std::string id;
    bool passed = true;
    nlohmann::json witness;
};

/// Machine-checkable evidence bundle. A certificate is a named list of
/// sub-checks; it passes iff every sub-check passes. Failing sub-checks carry
/// a witness expressed with element names so it can be replayed by hand.
class Certificate {
public:
    Certificate() = default;
    explicit Certificate(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    /// Records a sub-check. Returns `ok` so callers can chain early exits.
    bool require(std::string id, bool ok, nlohmann::json witness = {})
    {
        checks_.push_back(Check{std::move(id), ok, ok ? nlohmann::json{} : std::move(witness)});
        return ok;
    }

    void count(const std::string& key, std::int64_t value) { counts_[key] = value; }
    void add_count(const std::string& key, std::int64_t delta) { counts_[key] += delta; }

    /// Folds another certificate in, prefixing its sub-check ids.
    void absorb(const Certificate& other, const std::string& prefix = {})
    {
        std::string p = prefix.empty() ? other.name() : prefix;
        for (const auto& c : other.checks_) {
            checks_.push_back(Check{p.empty() ? c.id : p + "/" + c.id, c.passed, c.witness});
        }
        for (const auto& [k, v] : other.counts_) {
            counts_[p.empty() ? k : p + "/" + k] = v;
        }
    }

    bool passed() const
    {
        for (const auto& c : checks_) {
            if (!c.passed) return false;
        }
        return true;
    }

    explicit operator bool() const { return passed(); }

    std::optional<Check> first_failure() const
    {
        for (const auto& c : checks_) {
            if (!c.passed) return c;
        }
        return std::nullopt;
    }

    std::vector<Check> failures() const
    {
        std::vector<Check> out;
        for (const auto& c : checks_) {
            if (!c.passed) out.push_back(c);
        }
        return out;
    }

    const std::vector<Check>& checks() const { return checks_; }
    const std::map<std::string, std::int64_t>& counts() const { return counts_; }

    std::int64_t count_of(const std::string& key) const
    {
        auto it = counts_.find(key);
        return it == counts_.end() ? 0 : it->second;
    }

    bool has_check(const std::string& id) const
    {
        for (const auto& c : checks_) {
            if (c.id == id) return true;
        }
        return false;
    }

    /// Status of a named sub-check; nullopt if it was never recorded.
    std::optional<bool> check_status(const std::string& id) const
    {
        for (const auto& c : checks_) {
            if (c.id == id) return c.passed;
        }
        return std::nullopt;
    }

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["name"] = name_;
        j["passed"] = passed();
        j["checks"] = static_cast<std::int64_t>(checks_.size());
        nlohmann::json fails = nlohmann::json::array();
        for (const auto& c : checks_) {
            if (!c.passed) fails.push_back({{"id", c.id}, {"witness", c.witness}});
        }
        j["failures"] = fails;
        if (!counts_.empty()) j["counts"] = counts_;
        return j;
    }

private:
    std::string name_;
    std::vector<Check> checks_;
    std::map<std::string, std::int64_t> counts_;
};

} // namespace spacelab
