#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmetric/harness.hpp"

namespace {

using pmetric::harness::Table;

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Numeric cells become JSON numbers, the rest strings.
nlohmann::ordered_json cell(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    if (s == "nan" || s == "inf" || s == "-inf") return nullptr;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    return s;
}

std::string to_json(const std::string& command, const Table& t, const std::optional<std::string>& timestamp) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["code_version"] = pmetric::harness::kCodeVersion;
    if (timestamp) j["generated"] = *timestamp;
    j["columns"] = t.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
        nlohmann::ordered_json o;
        for (std::size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = cell(r[i]);
        rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    j["footer"] = t.footer;
    return j.dump(2) + "\n";
}

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poincare-metric distortion experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    bool no_timestamp = false;
    bool json = false;

    for (const char* name : {"ubdl", "cancel", "puresing", "partition"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key = value configuration file")->required();
        sub->add_option("--seed", seed, "override the configured seed");
        sub->add_option("--out", out_path, "CSV output path (stdout when omitted)");
        sub->add_flag("--no-timestamp", no_timestamp, "omit the generation timestamp");
        sub->add_flag("--json", json, "also write a JSON mirror (<out>.json, or stdout instead of CSV)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : pmetric::harness::kConfigFailure;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    pmetric::harness::RunResult res;
    try {
        res = pmetric::harness::run(command, pmetric::harness::Config::load(config_path), seed);
    } catch (const pmetric::harness::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return pmetric::harness::kConfigFailure;
    }
    for (const auto& m : res.messages) std::cerr << m << "\n";
    if (res.table.columns.empty()) return res.exit_code;

    const std::optional<std::string> stamp = no_timestamp ? std::nullopt : std::optional<std::string>(utc_timestamp());
    const std::string csv = pmetric::harness::to_csv(res.table, stamp);
    if (out_path.empty()) {
        std::cout << (json ? to_json(command, res.table, stamp) : csv);
    } else {
        if (!write_file(out_path, csv) || (json && !write_file(out_path + ".json", to_json(command, res.table, stamp)))) {
            std::cerr << "cannot write " << out_path << "\n";
            return pmetric::harness::kConfigFailure;
        }
        std::cerr << "wrote " << out_path << (json ? " and " + out_path + ".json" : std::string()) << "\n";
    }
    return res.exit_code;
}
