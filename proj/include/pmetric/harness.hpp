#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pmetric/cancellation.hpp"
#include "pmetric/circle.hpp"
#include "pmetric/composition.hpp"
#include "pmetric/singularity.hpp"

namespace pmetric::harness {

inline constexpr const char* kCodeVersion = "pmetric-0.1.0";
/// Deepest partition / chain order accepted without acknowledge_accuracy = true.
inline constexpr int kDepthCap = 10;

enum ExitCode : int { kPass = 0, kBoundFailure = 1, kConfigFailure = 2, kAccuracyRefusal = 3 };

class ConfigError : public Error {
public:
    ConfigError(const std::string& source, int line, const std::string& what)
        : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what), line_(line) {}
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

/// Deliberate refusal to run past the trusted iteration depth.
class AccuracyRefusal : public Error {
public:
    using Error::Error;
};

/// Flat key = value configuration with '#' comments.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>") {
        Config c;
        c.source_ = source;
        std::string raw;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const std::string text = trim(raw.substr(0, raw.find('#')));
            if (text.empty()) continue;
            const auto eq = text.find('=');
            if (eq == std::string::npos) throw ConfigError(source, line, "expected key = value, got '" + text + "'");
            const std::string key = trim(text.substr(0, eq));
            const std::string value = trim(text.substr(eq + 1));
            if (key.empty()) throw ConfigError(source, line, "empty key");
            if (c.values_.count(key)) throw ConfigError(source, line, "duplicate key '" + key + "'");
            c.values_[key] = {value, line};
        }
        return c;
    }

    static Config parse_string(const std::string& text, const std::string& source = "<config>") {
        std::istringstream in(text);
        return parse(in, source);
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path, 0, "cannot open configuration file");
        return parse(in, path);
    }

    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }

    void set(const std::string& key, const std::string& value) { values_[key] = {value, 0}; }

    /// Rejects keys outside `allowed`, naming the first offending line.
    void check_keys(const std::set<std::string>& allowed) const {
        const std::pair<const std::string, Entry>* worst = nullptr;
        for (const auto& kv : values_) {
            if (allowed.count(kv.first)) continue;
            if (!worst || kv.second.line < worst->second.line) worst = &kv;
        }
        if (worst) throw ConfigError(source_, worst->second.line, "unknown key '" + worst->first + "'");
    }

    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second.value;
    }

    [[nodiscard]] double get_double(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second.value, &used);
            if (used != it->second.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(source_, it->second.line, "'" + key + "' expects a number, got '" + it->second.value + "'");
        }
    }

    [[nodiscard]] long long get_int(const std::string& key, long long fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t used = 0;
            const long long v = std::stoll(it->second.value, &used);
            if (used != it->second.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(source_, it->second.line, "'" + key + "' expects an integer, got '" + it->second.value + "'");
        }
    }

    [[nodiscard]] std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t used = 0;
            if (!it->second.value.empty() && it->second.value[0] == '-') throw std::invalid_argument("negative");
            const unsigned long long v = std::stoull(it->second.value, &used);
            if (used != it->second.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(source_, it->second.line, "'" + key + "' expects a nonnegative integer");
        }
    }

    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second.value;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(source_, it->second.line, "'" + key + "' expects true or false, got '" + v + "'");
    }

    [[nodiscard]] std::vector<long long> get_int_list(const std::string& key, std::vector<long long> fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<long long> out;
        std::stringstream ss(it->second.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                std::size_t used = 0;
                out.push_back(std::stoll(item, &used));
                if (used != item.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ConfigError(source_, it->second.line, "'" + key + "' expects a comma-separated integer list");
            }
        }
        return out;
    }

    /// Line of a key, 0 when absent or set programmatically.
    [[nodiscard]] int line_of(const std::string& key) const {
        const auto it = values_.find(key);
        return it == values_.end() ? 0 : it->second.line;
    }

    [[nodiscard]] ConfigError error(const std::string& key, const std::string& what) const {
        return ConfigError(source_, line_of(key), what);
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::string source_;
    std::map<std::string, Entry> values_;
};

/// Rows of formatted cells plus trailing '#' comment lines.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> footer;

    void add(std::vector<std::string> row) {
        if (row.size() != columns.size()) throw Error("table row width does not match the header");
        rows.push_back(std::move(row));
    }
};

struct RunResult {
    int exit_code = kPass;
    Table table;
    /// Human-readable summary lines.
    std::vector<std::string> messages;
};

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
inline std::string fmt(long long v) { return std::to_string(v); }
inline std::string fmt(std::size_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "true" : "false"; }
inline std::string fmt(std::uint64_t v, int) { return std::to_string(v); }

inline std::string to_csv(const Table& t, const std::optional<std::string>& timestamp = std::nullopt) {
    std::ostringstream os;
    if (timestamp) os << "# generated " << *timestamp << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    }
    for (const auto& f : t.footer) os << "# " << f << "\n";
    return os.str();
}

namespace detail {

inline const std::set<std::string> kCommonKeys{"seed", "grid_points", "refine_points", "eps_guard", "acknowledge_accuracy"};

inline std::set<std::string> with_common(std::set<std::string> keys) {
    keys.insert(kCommonKeys.begin(), kCommonKeys.end());
    return keys;
}

inline GridSpec grid_from(const Config& c) {
    GridSpec g;
    const long long points = c.get_int("grid_points", static_cast<long long>(g.points));
    const long long refine = c.get_int("refine_points", static_cast<long long>(g.refine_points));
    if (points < 2) throw c.error("grid_points", "grid_points must be at least 2");
    if (refine < 0) throw c.error("refine_points", "refine_points must be nonnegative");
    g.points = static_cast<std::size_t>(points);
    g.refine_points = static_cast<std::size_t>(refine);
    g.eps_guard = c.get_double("eps_guard", g.eps_guard);
    if (!(g.eps_guard > 0.0 && g.eps_guard < 0.5)) throw c.error("eps_guard", "eps_guard must lie in (0, 0.5)");
    return g;
}

/// Provenance cells appended to every row.
inline std::vector<std::string> provenance(std::uint64_t seed, const GridSpec& g) {
    return {std::to_string(seed), std::to_string(g.points) + "+" + std::to_string(g.refine_points), fmt(g.eps_guard),
            kCodeVersion};
}

inline const std::vector<std::string> kProvenanceColumns{"seed", "grid", "eps_guard", "code_version"};

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline void check_depth(const Config& c, const std::string& key, long long depth) {
    if (depth > kDepthCap && !c.get_bool("acknowledge_accuracy", false)) {
        throw AccuracyRefusal("order " + std::to_string(depth) + " exceeds the trusted depth " +
                              std::to_string(kDepthCap) + " (" + key + "); set acknowledge_accuracy = true to run it");
    }
}

inline CircleFamily family_from(const Config& c) {
    const std::string name = c.get_string("family", "arnold");
    if (name == "rigid") return rigid_rotation;
    if (name == "arnold") return arnold_critical;
    if (name == "asymmetric_arnold") {
        const double eps = c.get_double("eps", 0.3);
        if (!(std::abs(eps) < 1.0)) throw c.error("eps", "eps must satisfy |eps| < 1");
        return [eps](double omega) { return asymmetric_arnold(omega, eps); };
    }
    throw c.error("family", "unknown family '" + name + "' (rigid, arnold, asymmetric_arnold)");
}

/// The configured lift; without `omega` the parameter is tuned to [prefix..., 1, 1, ...].
inline CircleMapLift lift_from(const Config& c) {
    const CircleFamily family = family_from(c);
    if (c.has("omega")) {
        const double omega = c.get_double("omega", 0.0);
        if (!(omega > 0.0 && omega < 1.0)) throw c.error("omega", "omega must lie in (0, 1)");
        return family(omega);
    }
    const auto prefix = c.get_int_list("prefix", {});
    for (long long a : prefix)
        if (a < 1) throw c.error("prefix", "partial quotients must be positive");
    if (c.get_string("family", "arnold") == "rigid") {
        double x = (std::sqrt(5.0) - 1.0) / 2.0;
        for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) x = 1.0 / (static_cast<double>(*it) + x);
        return family(x);
    }
    return family(find_parameter(family, prefix, 0.01, 0.99));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline RunResult cmd_ubdl(const Config& c) {
    c.check_keys(detail::with_common(
        {"suite", "count", "Q", "min_stages", "max_stages", "h_strength", "d1_samples", "d1_grid", "tolerance"}));
    const std::uint64_t seed = c.get_seed("seed", kUbdlSuiteSeed);
    const GridSpec grid = detail::grid_from(c);
    const std::string suite = c.get_string("suite", "frozen");
    const long long count = c.get_int("count", 100);
    if (count < 1) throw c.error("count", "count must be positive");
    UbdlOptions opt;
    opt.Q = c.get_double("Q", kCalibratedQ);
    opt.grid = grid;
    opt.tolerance = c.get_double("tolerance", 1e-9);
    opt.d1.samples = static_cast<std::size_t>(c.get_int("d1_samples", 100000));
    opt.d1.grid_points = static_cast<std::size_t>(c.get_int("d1_grid", 20));
    opt.d1.seed = seed;

    std::vector<UbdlCase> cases;
    if (suite == "frozen") {
        SuiteOptions so;
        so.min_stages = static_cast<std::size_t>(c.get_int("min_stages", 1));
        so.max_stages = static_cast<std::size_t>(c.get_int("max_stages", 20));
        so.h_strength = c.get_double("h_strength", 1.0);
        if (so.min_stages < 1 || so.max_stages < so.min_stages) throw c.error("max_stages", "invalid stage range");
        cases = ubdl_suite(seed, static_cast<std::size_t>(count), so);
    } else if (suite == "identity") {
        Rng rng(seed);
        for (long long i = 0; i < count; ++i) {
            const auto m = static_cast<std::size_t>(rng.integer(1, 20));
            const Interval I(0.0, 1.0);
            std::vector<CompositionStage> stages(m, CompositionStage{identity(I), identity(I)});
            cases.push_back({StandardComposition(std::move(stages)), random_sub_interval(rng, I)});
        }
    } else {
        throw c.error("suite", "unknown ubdl suite '" + suite + "' (frozen, identity)");
    }

    RunResult res;
    res.table.columns = detail::concat({"case", "stages", "a", "b", "c", "d", "d1", "d2", "cross_ratio_term", "bound",
                                        "measured", "Q", "Q_needed", "pass"},
                                       detail::kProvenanceColumns);
    std::size_t failures = 0;
    double worst_q = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& cs = cases[i];
        const UbdlBoundReport r = ubdl_verify(cs.composition, cs.sub, opt);
        failures += r.pass ? 0 : 1;
        worst_q = std::max(worst_q, r.Q_needed);
        const Interval& D = cs.composition.domain();
        res.table.add(detail::concat({fmt(i), fmt(cs.composition.size()), fmt(D.lo()), fmt(cs.sub.lo()), fmt(cs.sub.hi()),
                                      fmt(D.hi()), fmt(r.d1), fmt(r.d2), fmt(r.cross_ratio_term), fmt(r.bound_technical),
                                      fmt(r.measured), fmt(r.Q_used), fmt(r.Q_needed), fmt(r.pass)},
                                     detail::provenance(seed, grid)));
    }
    res.table.footer.push_back("cases=" + fmt(cases.size()) + " failures=" + fmt(failures) + " Q_needed_max=" + fmt(worst_q));
    res.messages.push_back("ubdl: " + fmt(cases.size() - failures) + "/" + fmt(cases.size()) + " cases within the bound");
    res.exit_code = failures == 0 ? kPass : kBoundFailure;
    return res;
}

inline RunResult cmd_cancel(const Config& c) {
    c.check_keys(detail::with_common({"suite", "count", "max_stages", "amplitude", "stages", "g_strength", "tolerance"}));
    const std::uint64_t seed = c.get_seed("seed", kCancellationSuiteSeed);
    const GridSpec grid = detail::grid_from(c);
    const std::string suite = c.get_string("suite", "frozen");
    const double tol = c.get_double("tolerance", 1e-9);

    std::vector<CancellationDecomposition> cases;
    if (suite == "frozen") {
        const long long count = c.get_int("count", 100);
        const long long max_stages = c.get_int("max_stages", 20);
        if (count < 1 || max_stages < 1) throw c.error("count", "count and max_stages must be positive");
        cases = cancellation_suite(seed, static_cast<std::size_t>(count), static_cast<std::size_t>(max_stages));
    } else if (suite == "identity") {
        const long long count = c.get_int("count", 10);
        Rng rng(seed);
        for (long long i = 0; i < count; ++i) {
            const auto m = static_cast<std::size_t>(rng.integer(1, 20));
            const Interval I(0.0, 1.0);
            cases.emplace_back(std::vector<CancellationStage>(m, CancellationStage{identity(I), identity(I), identity(I)}));
        }
    } else if (suite == "alternating") {
        const double amp = c.get_double("amplitude", 0.3);
        DecompositionOptions opt;
        opt.g_strength = c.get_double("g_strength", 0.1);
        Rng rng(seed);
        for (long long m : c.get_int_list("stages", {2, 4, 8, 16, 32})) {
            if (m < 1) throw c.error("stages", "stage counts must be positive");
            cases.push_back(decomposition_with_deltas(rng, alternating_deltas(static_cast<std::size_t>(m), amp), opt));
        }
    } else {
        throw c.error("suite", "unknown cancel suite '" + suite + "' (frozen, identity, alternating)");
    }

    RunResult res;
    res.table.columns = detail::concat({"case", "stages", "d_tilde", "delta", "sum_abs_delta", "gap", "bound", "pass",
                                        "gap_reduced", "reduced_pass", "reduction_residual", "reduction_pass"},
                                       detail::kProvenanceColumns);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const CancellationReport r = cancellation_verify(cases[i], grid, tol);
        const bool ok = r.pass && r.reduced_pass && r.reduction_pass;
        failures += ok ? 0 : 1;
        res.table.add(detail::concat({fmt(i), fmt(cases[i].size()), fmt(r.D_tilde), fmt(r.Delta), fmt(r.sum_abs_delta),
                                      fmt(r.gap), fmt(r.bound), fmt(r.pass), fmt(r.gap_reduced), fmt(r.reduced_pass),
                                      fmt(r.reduction_residual), fmt(r.reduction_pass)},
                                     detail::provenance(seed, grid)));
    }
    res.table.footer.push_back("cases=" + fmt(cases.size()) + " failures=" + fmt(failures));
    res.messages.push_back("cancel: " + fmt(cases.size() - failures) + "/" + fmt(cases.size()) + " cases within the bound");
    res.exit_code = failures == 0 ? kPass : kBoundFailure;
    return res;
}

inline RunResult cmd_puresing(const Config& c) {
    c.check_keys(detail::with_common({"family", "omega", "eps", "prefix", "lambda", "kappa_min", "kappa_max", "j", "depth",
                                      "max_residual", "tolerance"}));
    const std::uint64_t seed = c.get_seed("seed", 0);
    PureSingularityOptions opt;
    opt.grid = detail::grid_from(c);
    opt.lambda = static_cast<int>(c.get_int("lambda", 3));
    opt.kappa_min = static_cast<int>(c.get_int("kappa_min", 4));
    opt.kappa_max = static_cast<int>(c.get_int("kappa_max", 9));
    if (c.has("j")) opt.j = static_cast<int>(c.get_int("j", 0));
    opt.max_residual = c.get_double("max_residual", opt.max_residual);
    opt.tolerance = c.get_double("tolerance", opt.tolerance);
    if (opt.lambda < 1) throw c.error("lambda", "lambda must be positive");
    if (opt.kappa_min <= opt.lambda) {
        throw c.error("kappa_min", "kappa must exceed lambda (kappa_min = " + std::to_string(opt.kappa_min) +
                                       ", lambda = " + std::to_string(opt.lambda) + ")");
    }
    if (opt.kappa_max < opt.kappa_min) throw c.error("kappa_max", "kappa_max below kappa_min");
    detail::check_depth(c, "kappa_max", opt.kappa_max);
    const long long depth = c.get_int("depth", opt.kappa_max + 2);
    if (depth < opt.kappa_max) throw c.error("depth", "depth must be at least kappa_max");
    detail::check_depth(c, "depth", depth - 2);

    const CircleSystem sys(detail::lift_from(c), static_cast<std::size_t>(depth));
    const PureSingularityReport rep = pure_singularity_report(sys, opt);

    RunResult res;
    res.table.columns =
        detail::concat({"kappa", "lambda", "j", "delta", "d_tilde", "gap", "bound", "E_chi", "v_j", "L1_density_dev",
                        "fit_K1", "fit_K2", "residual", "chains", "cancel_gap", "bound_holds"},
                       detail::kProvenanceColumns);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double K1 = rep.gap_fit ? rep.gap_fit->K1 : nan, K2 = rep.gap_fit ? rep.gap_fit->K2 : nan;
    const double resid = rep.gap_fit ? rep.gap_fit->residual : nan;
    for (const auto& r : rep.rows) {
        res.table.add(detail::concat({fmt(r.kappa), fmt(r.lambda), fmt(r.j), fmt(r.delta), fmt(r.d_tilde), fmt(r.gap),
                                      fmt(r.bound), fmt(r.E_chi), fmt(r.v_j), fmt(r.L1_density_dev), fmt(K1), fmt(K2),
                                      fmt(resid), fmt(r.chains), fmt(r.cancel_gap), fmt(r.bound_holds)},
                                     detail::provenance(seed, opt.grid)));
    }
    auto& ft = res.table.footer;
    ft.push_back("family=" + rep.family + " parameter=" + fmt(rep.parameter) + " U=(" + fmt(rep.U.lo()) + "," +
                 fmt(rep.U.hi()) + ") critical_offset=" + fmt(rep.critical_offset));
    auto fit_line = [&](const std::string& name, const std::optional<DecayFit>& f) {
        if (f) {
            ft.push_back(name + " model=" + to_string(f->model) + " K1=" + fmt(f->K1) + " K2=" + fmt(f->K2) +
                         " residual=" + fmt(f->residual));
        }
    };
    fit_line("fit gap", rep.gap_fit);
    fit_line("fit d_tilde", rep.dtilde_fit);
    fit_line("fit delta", rep.delta_fit);
    fit_line("fit L1_density_dev(kappa-j)", rep.density_fit);
    for (std::size_t i = 0; i < rep.v_curve.size(); ++i) {
        ft.push_back("density j=" + fmt(rep.v_curve[i].first) + " v_j=" + fmt(rep.v_curve[i].second) +
                     " L1=" + fmt(rep.density_curve[i].second));
    }
    ft.push_back("decreasing gap=" + fmt(rep.gap_decreasing) + " d_tilde=" + fmt(rep.dtilde_decreasing) +
                 " delta=" + fmt(rep.delta_decreasing) + " bounds_hold=" + fmt(rep.bounds_hold) +
                 " zero_run=" + fmt(rep.zero_run) + " pass=" + fmt(rep.pass));
    res.messages.push_back(std::string("puresing: ") + (rep.pass ? "pass" : "FAIL") +
                           (rep.zero_run ? " (all columns zero)" : ""));
    res.exit_code = rep.pass ? kPass : kBoundFailure;
    return res;
}

inline RunResult cmd_partition(const Config& c) {
    c.check_keys(detail::with_common({"family", "omega", "eps", "prefix", "k", "depth"}));
    const std::uint64_t seed = c.get_seed("seed", 0);
    const GridSpec grid = detail::grid_from(c);
    const long long k = c.get_int("k", 3);
    if (k < 1) throw c.error("k", "k must be positive");
    detail::check_depth(c, "k", k);
    const long long depth = c.get_int("depth", k + 1);
    if (depth < k) throw c.error("depth", "depth must be at least k");
    const CircleSystem sys(detail::lift_from(c), static_cast<std::size_t>(depth));
    const DynamicalPartition d = dynamical_partition(sys, static_cast<int>(k));

    RunResult res;
    res.table.columns = detail::concat({"order", "kind", "orbit_index", "lo", "hi", "length"}, detail::kProvenanceColumns);
    double total = 0.0;
    for (const auto& e : d.elements) {
        total += e.arc.length();
        res.table.add(detail::concat({fmt(static_cast<int>(k)), to_string(e.kind), fmt(e.orbit_index), fmt(e.arc.lo()),
                                      fmt(e.arc.hi()), fmt(e.arc.length())},
                                     detail::provenance(seed, grid)));
    }
    res.table.footer.push_back("tiling_defect=" + fmt(d.tiling_defect) + " total_length=" + fmt(total) +
                               " lengthy=" + fmt(d.lengthy_count) + " short=" + fmt(d.short_count) +
                               " parameter=" + fmt(sys.map().parameter()));
    res.messages.push_back("partition: order " + fmt(static_cast<int>(k)) + ", " + fmt(d.elements.size()) +
                           " elements, tiling defect " + fmt(d.tiling_defect));
    return res;
}

/// Runs a command, mapping failures onto the exit-code contract.
inline RunResult run(const std::string& command, Config config, std::optional<std::uint64_t> seed_override = std::nullopt) {
    if (seed_override) config.set("seed", std::to_string(*seed_override));
    try {
        if (command == "ubdl") return cmd_ubdl(config);
        if (command == "cancel") return cmd_cancel(config);
        if (command == "puresing") return cmd_puresing(config);
        if (command == "partition") return cmd_partition(config);
        throw ConfigError(config.source(), 0, "unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        return {kConfigFailure, {}, {std::string("configuration error: ") + e.what()}};
    } catch (const RationalRotationError& e) {
        return {kConfigFailure, {}, {std::string("configuration error: ") + e.what()}};
    } catch (const AccuracyRefusal& e) {
        return {kAccuracyRefusal, {}, {std::string("refused: ") + e.what()}};
    } catch (const Error& e) {
        return {kAccuracyRefusal, {}, {std::string("numerical error: ") + e.what()}};
    }
}

}  // namespace pmetric::harness
