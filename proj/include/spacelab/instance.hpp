#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "caps.hpp"
#include "error.hpp"
#include "group_action.hpp"
#include "poset.hpp"

namespace spacelab {

/// Named posets, maps, monoids and actions loaded from a JSON document, all
/// validated at load time. Sections are keyed by name and iterate in name
/// order.
struct InstanceFile {
    std::map<std::string, PosetPtr> posets;
    std::map<std::string, MonotoneMap> maps;
    std::map<std::string, MonoidPtr> monoids;
    std::map<std::string, ActedPoset> actions;
    std::vector<std::string> suites;
    bool has_suites = false;
};

namespace detail {

[[noreturn]] inline void syntax(const std::string& where, const std::string& what)
{
    throw Error(ErrorKind::SyntaxError, where + ": " + what, {{"location", where}});
}

[[noreturn]] inline void unresolved(const std::string& where, const std::string& name)
{
    throw Error(ErrorKind::UnresolvedReference, where + ": unknown name '" + name + "'",
                {{"location", where}, {"name", name}});
}

[[noreturn]] inline void law(const std::string& where, const Error& e)
{
    throw Error(ErrorKind::LawViolation, where + ": " + e.what(),
                {{"location", where}, {"kind", std::string(to_string(e.kind()))}, {"detail", e.witness()}});
}

inline const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key)) syntax(where, std::string("missing field '") + key + "'");
    return j.at(key);
}

inline std::string string_of(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_string()) syntax(where, "expected a string");
    return j.get<std::string>();
}

inline std::vector<std::string> strings_of(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_array()) syntax(where, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(string_of(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::size_t size_of(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_number_unsigned()) syntax(where, "expected a non-negative integer");
    return j.get<std::size_t>();
}

inline std::size_t element(const PosetPtr& p, const nlohmann::json& j, const std::string& where)
{
    auto name = string_of(j, where);
    auto idx = p->index_of(name);
    if (!idx) unresolved(where, name);
    return *idx;
}

/// n x n table of element names, row-major.
inline std::vector<std::size_t> table_of(const nlohmann::json& j, const PosetPtr& rows_over, const PosetPtr& cols_over,
                                         const PosetPtr& values, const std::string& where)
{
    if (!j.is_array() || j.size() != rows_over->size()) {
        syntax(where, "expected " + std::to_string(rows_over->size()) + " rows");
    }
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string at = where + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != cols_over->size()) {
            syntax(at, "expected " + std::to_string(cols_over->size()) + " entries");
        }
        for (std::size_t c = 0; c < j[r].size(); ++c) {
            out.push_back(element(values, j[r][c], at + "[" + std::to_string(c) + "]"));
        }
    }
    return out;
}

inline PosetPtr parse_poset(const std::string& name, const nlohmann::json& j, const std::string& where)
{
    if (!j.is_object()) syntax(where, "expected an object");
    if (j.contains("chain")) return chain(size_of(j["chain"], where + ".chain"))->relabeled(name);
    if (j.contains("discrete")) return discrete(size_of(j["discrete"], where + ".discrete"))->relabeled(name);
    auto names = strings_of(field(j, "elements", where), where + ".elements");
    std::vector<std::pair<std::string, std::string>> covers;
    if (j.contains("covers")) {
        const auto& cj = j["covers"];
        if (!cj.is_array()) syntax(where + ".covers", "expected an array of pairs");
        for (std::size_t i = 0; i < cj.size(); ++i) {
            const std::string at = where + ".covers[" + std::to_string(i) + "]";
            auto pair = strings_of(cj[i], at);
            if (pair.size() != 2) syntax(at, "expected a pair");
            for (const auto& nm : pair) {
                if (std::find(names.begin(), names.end(), nm) == names.end()) unresolved(at, nm);
            }
            covers.emplace_back(pair[0], pair[1]);
        }
    }
    try {
        return make_poset_named(std::move(names), covers, name);
    } catch (const Error& e) {
        law(where, e);
    }
}

inline const PosetPtr& poset_ref(const InstanceFile& f, const nlohmann::json& j, const std::string& where)
{
    auto name = string_of(j, where);
    auto it = f.posets.find(name);
    if (it == f.posets.end()) unresolved(where, name);
    return it->second;
}

} // namespace detail

inline InstanceFile parse_instance_json(const nlohmann::json& doc, const Caps& caps = default_caps())
{
    using namespace detail;
    if (!doc.is_object()) syntax("$", "instance must be a JSON object");
    static const std::vector<std::string> known = {"posets", "maps", "monoids", "groups", "actions", "suites"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) syntax("$", "unknown section '" + key + "'");
    }
    InstanceFile f;
    if (doc.contains("posets")) {
        if (!doc["posets"].is_object()) syntax("posets", "expected an object");
        for (const auto& [name, pj] : doc["posets"].items()) {
            auto p = parse_poset(name, pj, "posets." + name);
            if (p->size() > caps.max_poset) {
                throw Error(ErrorKind::SizeCap,
                            "posets." + name + ": " + std::to_string(p->size()) + " elements exceed max_poset " +
                                std::to_string(caps.max_poset),
                            {{"location", "posets." + name}});
            }
            f.posets[name] = p;
        }
    }
    if (doc.contains("maps")) {
        if (!doc["maps"].is_object()) syntax("maps", "expected an object");
        for (const auto& [name, mj] : doc["maps"].items()) {
            const std::string where = "maps." + name;
            const auto& from = poset_ref(f, field(mj, "from", where), where + ".from");
            const auto& to = poset_ref(f, field(mj, "to", where), where + ".to");
            const auto& aj = field(mj, "assign", where);
            if (!aj.is_object()) syntax(where + ".assign", "expected an object from element to element");
            std::vector<std::size_t> a(from->size(), to->size());
            for (const auto& [src, dst] : aj.items()) {
                auto s = from->index_of(src);
                if (!s) unresolved(where + ".assign", src);
                a[*s] = element(to, dst, where + ".assign." + src);
            }
            for (std::size_t x = 0; x < a.size(); ++x) {
                if (a[x] == to->size()) syntax(where + ".assign", "no value for '" + from->name(x) + "'");
            }
            try {
                f.maps.emplace(name, MonotoneMap(from, to, std::move(a)));
            } catch (const Error& e) {
                law(where, e);
            }
        }
    }
    for (const char* section : {"groups", "monoids"}) {
        if (!doc.contains(section)) continue;
        if (!doc[section].is_object()) syntax(section, "expected an object");
        const bool must_be_group = std::string(section) == "groups";
        for (const auto& [name, mj] : doc[section].items()) {
            const std::string where = std::string(section) + "." + name;
            if (f.monoids.count(name)) syntax(where, "monoid '" + name + "' defined twice");
            MonoidPtr m;
            try {
                if (mj.is_object() && mj.contains("cyclic")) {
                    auto c = cyclic_group(size_of(mj["cyclic"], where + ".cyclic"));
                    m = make_monoid(c->carrier(), c->table(), c->unit(), name);
                } else {
                    PosetPtr carrier;
                    if (mj.is_object() && mj.contains("carrier")) carrier = poset_ref(f, mj["carrier"], where + ".carrier");
                    else carrier = make_poset(strings_of(field(mj, "elements", where), where + ".elements"), {}, name);
                    auto table = table_of(field(mj, "table", where), carrier, carrier, carrier, where + ".table");
                    auto unit = element(carrier, field(mj, "unit", where), where + ".unit");
                    m = make_monoid(carrier, std::move(table), unit, name);
                }
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::SyntaxError || e.kind() == ErrorKind::UnresolvedReference) throw;
                law(where, e);
            }
            if (must_be_group && !m->is_group()) {
                law(where, Error(ErrorKind::AxiomFailure, "not a group: some element lacks a monotone inverse"));
            }
            f.monoids.emplace(name, m);
        }
    }
    if (doc.contains("actions")) {
        if (!doc["actions"].is_object()) syntax("actions", "expected an object");
        for (const auto& [name, aj] : doc["actions"].items()) {
            const std::string where = "actions." + name;
            auto mname = string_of(field(aj, "monoid", where), where + ".monoid");
            auto mit = f.monoids.find(mname);
            if (mit == f.monoids.end()) unresolved(where + ".monoid", mname);
            const auto& x = poset_ref(f, field(aj, "on", where), where + ".on");
            const auto& m = mit->second;
            std::vector<std::size_t> table;
            if (aj.contains("trivial") && aj["trivial"].is_boolean() && aj["trivial"].get<bool>()) {
                for (std::size_t g = 0; g < m->size(); ++g) {
                    for (std::size_t e = 0; e < x->size(); ++e) table.push_back(e);
                }
            } else {
                table = table_of(field(aj, "table", where), m->carrier(), x, x, where + ".table");
            }
            try {
                f.actions.emplace(name, make_acted(m, x, std::move(table), name));
            } catch (const Error& e) {
                law(where, e);
            }
        }
    }
    if (doc.contains("suites")) {
        f.suites = strings_of(doc["suites"], "suites");
        f.has_suites = true;
    }
    return f;
}

inline InstanceFile parse_instance_text(const std::string& text, const Caps& caps = default_caps())
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::SyntaxError, std::string("invalid JSON: ") + e.what(), {{"byte", e.byte}});
    }
    return parse_instance_json(doc, caps);
}

inline InstanceFile parse_instance(const std::string& path, const Caps& caps = default_caps())
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::SyntaxError, "cannot read '" + path + "'", {{"location", path}});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance_text(ss.str(), caps);
}

// ---------------------------------------------------------------------------
// Fragments: counterexamples written back in the instance format
// ---------------------------------------------------------------------------

inline nlohmann::json poset_fragment(const Poset& p)
{
    nlohmann::json covers = nlohmann::json::array();
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (i == j || !p.leq(i, j)) continue;
            bool cover = true;
            for (std::size_t k = 0; k < p.size() && cover; ++k) {
                if (k != i && k != j && p.leq(i, k) && p.leq(k, j)) cover = false;
            }
            if (cover) covers.push_back(nlohmann::json::array({p.name(i), p.name(j)}));
        }
    }
    return {{"elements", p.names()}, {"covers", covers}};
}

namespace detail {

/// Adds p under its label, disambiguating labels shared by different posets.
inline std::string add_poset(nlohmann::json& frag, const PosetPtr& p)
{
    std::string base = p->label().empty() ? "X" : p->label();
    std::string name = base;
    auto pj = poset_fragment(*p);
    for (int k = 2; frag["posets"].contains(name) && frag["posets"][name] != pj; ++k) name = base + "_" + std::to_string(k);
    frag["posets"][name] = pj;
    return name;
}

} // namespace detail

inline nlohmann::json map_fragment(const MonotoneMap& f, const std::string& name = "f")
{
    nlohmann::json frag = {{"posets", nlohmann::json::object()}};
    auto from = detail::add_poset(frag, f.dom());
    auto to = detail::add_poset(frag, f.cod());
    frag["maps"][name] = {{"from", from}, {"to", to}, {"assign", f.to_json()}};
    return frag;
}

inline void add_action(nlohmann::json& frag, const ActedPoset& a)
{
    if (!frag.contains("posets")) frag["posets"] = nlohmann::json::object();
    const auto& m = *a.monoid();
    const std::string mname = m.name();
    nlohmann::json mj;
    nlohmann::json tab = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t k = 0; k < m.size(); ++k) row.push_back(m.carrier()->name(m.mul(i, k)));
        tab.push_back(row);
    }
    if (m.carrier()->is_discrete()) mj["elements"] = m.carrier()->names();
    else mj["carrier"] = detail::add_poset(frag, m.carrier());
    mj["table"] = tab;
    mj["unit"] = m.carrier()->name(m.unit());
    frag["monoids"][mname] = mj;
    auto on = detail::add_poset(frag, a.carrier());
    frag["actions"][a.name()] = {{"monoid", mname}, {"on", on}, {"table", a.table_json()}};
}

inline nlohmann::json action_fragment(const ActedPoset& a, const std::string& suite = {})
{
    nlohmann::json frag = nlohmann::json::object();
    add_action(frag, a);
    if (!suite.empty()) frag["suites"] = nlohmann::json::array({suite});
    return frag;
}

} // namespace spacelab
