#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spacelab/spacelab.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kInputError = 2;

int input_error(const spacelab::Error& e)
{
    nlohmann::json j = {{"error", std::string(spacelab::to_string(e.kind()))}, {"message", e.what()}};
    if (!e.witness().is_null()) j["witness"] = e.witness();
    std::cerr << j.dump(2) << "\n";
    return kInputError;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exhaustive verifier for the up-set model of finite posets"};
    std::string suite;
    std::string file;
    std::string format = "text";
    std::size_t max_poset = spacelab::default_caps().max_poset;
    std::size_t max_double_power = spacelab::default_caps().max_double_power;
    std::size_t catalog = 3;
    unsigned jobs = 0;
    bool dual = false;
    bool no_timing = false;
    bool list = false;

    std::vector<std::string> suites = spacelab::suite_names();
    suites.push_back("all");
    app.add_option("suite", suite, "axioms | monad-laws | stability | sigma | open | triq | catalog | all")
        ->required()
        ->check(CLI::IsMember(suites));
    app.add_option("file", file, "instance file (JSON); catalogs are used when omitted")->check(CLI::ExistingFile);
    app.add_option("--max-poset", max_poset, "largest input or catalog poset")->capture_default_str();
    app.add_option("--max-double-power", max_double_power, "largest |X| for which P(X) is built")->capture_default_str();
    app.add_option("--catalog", catalog, "catalog size used without an instance file")->capture_default_str();
    app.add_option("--format", format, "report format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads (0: one per core)");
    app.add_flag("--dual", dual, "run connected components on the reversed orders");
    app.add_flag("--no-timing", no_timing, "report 0 for every timing field");
    app.add_flag("--list", list, "with the catalog suite, print the catalog as an instance document");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kPass : kInputError;
    }

    spacelab::SuiteOptions opt;
    opt.caps.max_poset = max_poset;
    opt.caps.max_double_power = max_double_power;
    opt.catalog = catalog;
    opt.dual = dual;
    opt.jobs = jobs;

    std::optional<spacelab::InstanceFile> instance;
    try {
        if (catalog > max_poset) {
            throw spacelab::Error(spacelab::ErrorKind::SizeCap, "--catalog " + std::to_string(catalog) +
                                                                    " exceeds --max-poset " + std::to_string(max_poset));
        }
        if (!file.empty()) instance = spacelab::parse_instance(file, opt.caps);
    } catch (const spacelab::Error& e) {
        return input_error(e);
    }

    if (suite == "catalog" && list) {
        nlohmann::json doc = {{"posets", nlohmann::json::object()}};
        for (const auto& p : spacelab::generate_catalog(catalog, opt.caps)) {
            doc["posets"][spacelab::label_of(p)] = spacelab::poset_fragment(*p);
        }
        std::cout << doc.dump(2) << "\n";
        return kPass;
    }

    spacelab::Report report;
    try {
        report = spacelab::run_suite(suite, instance ? &*instance : nullptr, opt);
    } catch (const spacelab::Error& e) {
        return input_error(e);
    }
    if (format == "json") std::cout << report.to_json(!no_timing).dump(2) << "\n";
    else std::cout << report.to_text();
    return report.passed() ? kPass : kFail;
}
