#include "qwalk/config.hpp"

#include "qwalk/error.hpp"
#include "qwalk/estimates.hpp"
#include "qwalk/inverse.hpp"
#include "qwalk/io.hpp"
#include "qwalk/scattering.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/toml.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace qwalk {

using json = nlohmann::ordered_json;

namespace {

/// Typed access to one config table; keys are marked as they are read so
/// finish() can reject anything left over.
class Table {
public:
    Table(const json& j, std::string name) : name_(std::move(name)) {
        if (!j.is_object())
            fail(ErrorCode::config, "[" + name_ + "] must be a table");
        j_ = &j;
    }

    bool has(const std::string& key) const { return j_->contains(key); }

    const json& get(const std::string& key) {
        if (!has(key))
            fail(ErrorCode::config, "missing key '" + key + "' in [" + name_ + "]");
        used_.insert(key);
        return (*j_)[key];
    }

    double number(const std::string& key) {
        const json& v = get(key);
        if (!v.is_number())
            bad(key, "a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::int64_t integer(const std::string& key) {
        const json& v = get(key);
        if (!v.is_number_integer())
            bad(key, "an integer");
        return v.get<std::int64_t>();
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) { return has(key) ? integer(key) : fallback; }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key))
            return fallback;
        const json& v = get(key);
        if (!v.is_boolean())
            bad(key, "true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = get(key);
        if (!v.is_string())
            bad(key, "a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, std::string fallback) {
        return has(key) ? string(key) : std::move(fallback);
    }

    Complex complex(const std::string& key) { return to_complex(get(key), key); }

    std::vector<double> numbers(const std::string& key) {
        const json& v = get(key);
        if (!v.is_array())
            bad(key, "an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number())
                bad(key, "an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::int64_t> integers(const std::string& key) {
        const json& v = get(key);
        if (!v.is_array())
            bad(key, "an array of integers");
        std::vector<std::int64_t> out;
        for (const auto& e : v) {
            if (!e.is_number_integer())
                bad(key, "an array of integers");
            out.push_back(e.get<std::int64_t>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key) {
        const json& v = get(key);
        if (!v.is_array())
            bad(key, "an array of strings");
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string())
                bad(key, "an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    Complex to_complex(const json& v, const std::string& key) const {
        if (v.is_number())
            return v.get<double>();
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
            return {v[0].get<double>(), v[1].get<double>()};
        bad(key, "a number or [re, im]");
    }

    void require(bool ok, const std::string& message) const {
        if (!ok)
            fail(ErrorCode::config, "[" + name_ + "] " + message);
    }

    void finish() const {
        for (const auto& [k, v] : j_->items())
            if (!used_.contains(k))
                fail(ErrorCode::config, "unknown key '" + k + "' in [" + name_ + "]");
    }

private:
    [[noreturn]] void bad(const std::string& key, const std::string& what) const {
        fail(ErrorCode::config, "'" + key + "' in [" + name_ + "] must be " + what);
    }

    const json* j_ = nullptr;
    std::string name_;
    std::set<std::string> used_;
};

const json empty_table = json::object();

const json& section_or_empty(const json& tree, const char* name) {
    return tree.contains(name) ? tree[name] : empty_table;
}

const std::set<std::string> sections = {"title", "coin", "nonlinear", "initial", "walk",
                                        "decay", "scatter", "invscat", "spectrum"};

NonlinearCoin parse_nonlinear(const json& j) {
    Table t(j, "nonlinear");
    const std::string kind = t.string("kind", "identity");
    NonlinearCoin coin;
    if (kind == "identity") {
    } else if (kind == "optical_galton") {
        coin = NonlinearCoin::optical_galton(t.number("g"));
    } else if (kind == "gross_neveu") {
        coin = NonlinearCoin::gross_neveu(t.number("g"), t.number("theta"));
    } else if (kind == "thirring") {
        coin = NonlinearCoin::thirring(t.number("g"), t.number("theta"));
    } else if (kind == "rotation_power") {
        const std::int64_t sign = t.integer("lambda_sign", 1);
        t.require(sign == 1 || sign == -1, "lambda_sign must be 1 or -1");
        coin = NonlinearCoin::rotation_power(t.number("theta0"), t.number("g"), static_cast<int>(sign),
                                             t.number("p"));
    } else if (kind == "kerr_diagonal") {
        coin = NonlinearCoin::kerr_diagonal(t.number("g1"), t.number("g2"));
    } else if (kind == "custom") {
        NonlinearCoin::Custom table;
        const auto mag = t.strings("magnitude");
        const auto phase = t.strings("phase");
        t.require(mag.size() == 4 && phase.size() == 4,
                  "custom coins need 4 'magnitude' and 4 'phase' expressions (row-major)");
        for (int i = 0; i < 4; ++i) {
            table.magnitude[i] = Expr::parse(mag[i]);
            table.phase[i] = Expr::parse(phase[i]);
        }
        if (t.has("order"))
            table.order = t.number("order");
        coin = NonlinearCoin::custom(std::move(table), t.boolean("tilde", false));
    } else {
        fail(ErrorCode::config, "unknown nonlinear kind '" + kind + "'");
    }
    if (kind != "custom" && kind != "kerr_diagonal" && t.boolean("squared", false))
        coin = coin.with_squared_arguments();
    t.finish();
    return coin;
}

void parse_constant(const json& j, RunConfig& cfg) {
    Table t(j, "coin");
    const int forms = int(t.has("preset")) + int(t.has("a")) + int(t.has("theta")) + int(t.has("matrix"));
    t.require(forms <= 1, "give exactly one of 'preset', 'a' (with optional 'b'), 'theta' or 'matrix'");
    const double tol = 1e-12;
    if (t.has("preset")) {
        const std::string preset = t.string("preset");
        const double r = 1 / std::numbers::sqrt2;
        if (preset == "hadamard")
            cfg.constant = {r, r, r, -r};
        else if (preset == "model") {
            auto m = cfg.nonlinear.paired_constant();
            t.require(m.has_value(), "preset 'model' needs a nonlinear kind with a paired constant coin");
            cfg.constant = *m;
        } else
            fail(ErrorCode::config, "unknown coin preset '" + preset + "'");
    } else if (t.has("theta")) {
        cfg.constant = Mat2::rotation(t.number("theta"));
    } else if (t.has("matrix")) {
        const json& m = t.get("matrix");
        t.require(m.is_array() && m.size() == 2 && m[0].is_array() && m[0].size() == 2 && m[1].is_array() &&
                      m[1].size() == 2,
                  "'matrix' must be [[z00, z01], [z10, z11]]");
        cfg.constant = {t.to_complex(m[0][0], "matrix"), t.to_complex(m[0][1], "matrix"),
                        t.to_complex(m[1][0], "matrix"), t.to_complex(m[1][1], "matrix")};
    } else if (t.has("a")) {
        const Complex a = t.complex("a");
        const Complex b = t.has("b") ? t.complex("b") : Complex(std::sqrt(std::max(0.0, 1 - std::norm(a))));
        cfg.constant = {a, b, -std::conj(b), std::conj(a)};
    } else {
        auto m = cfg.nonlinear.paired_constant();
        t.require(m.has_value(), "no constant coin given and the nonlinear kind has no paired one");
        cfg.constant = *m;
    }
    t.finish();
    if (unitarity_defect(cfg.constant) > tol)
        fail(ErrorCode::config, "[coin] the constant coin is not unitary (defect " +
                                    format_double(unitarity_defect(cfg.constant)) + ")");
    cfg.standard = ConstantCoin::from_matrix(cfg.constant, tol);
    if (!cfg.standard) {
        const Complex a = cfg.constant.m00;
        const bool shaped = std::abs(cfg.constant.m11 - std::conj(a)) <= tol &&
                            std::abs(cfg.constant.m10 + std::conj(cfg.constant.m01)) <= tol;
        if (shaped)
            cfg.constant_problem = "|a| = " + format_double(std::abs(a)) +
                                   ": the dispersive estimates fail at |a| = 0 and |a| = 1 (the walk does not "
                                   "disperse), so 0 < |a| < 1 is required";
        else
            cfg.constant_problem =
                "the constant coin is not of the (a b; -conj(b) conj(a)) shape required by spectral tools";
    }
}

Spinor parse_spinor(Table& t, const std::string& key) {
    const json& v = t.get(key);
    t.require(v.is_array() && v.size() == 2, "'" + key + "' must be [c1, c2]");
    return {t.to_complex(v[0], key), t.to_complex(v[1], key)};
}

InitialSpec parse_initial(const json& j, const std::filesystem::path& base) {
    Table t(j, "initial");
    InitialSpec s;
    const std::string kind = t.string("kind", "delta");
    auto component = [&](std::int64_t c) {
        t.require(c == 1 || c == 2, "component must be 1 or 2");
        return static_cast<int>(c);
    };
    if (kind == "delta") {
        s.kind = InitialSpec::Kind::delta;
        s.component = component(t.integer("component", 1));
        s.site = t.integer("site", 0);
        s.amplitude = t.has("amplitude") ? t.complex("amplitude") : Complex(1.0);
    } else if (kind == "deltas") {
        s.kind = InitialSpec::Kind::deltas;
        const json& e = t.get("entries");
        t.require(e.is_array() && !e.empty(), "'entries' must be a non-empty array of inline tables");
        for (const auto& item : e) {
            Table et(item, "initial.entries");
            InitialSpec::Entry entry{};
            entry.component = component(et.integer("component"));
            entry.site = et.integer("site");
            entry.amplitude = et.has("amplitude") ? et.complex("amplitude") : Complex(1.0);
            et.finish();
            s.entries.push_back(entry);
        }
    } else if (kind == "wavepacket") {
        s.kind = InitialSpec::Kind::wavepacket;
        s.center = t.number("center", 0);
        s.width = t.number("width");
        t.require(s.width > 0, "'width' must be > 0");
        s.momentum = t.number("momentum", 0);
        s.polarization = t.has("polarization") ? parse_spinor(t, "polarization") : Spinor{1.0, 0.0};
        t.require(!s.polarization.is_zero(), "'polarization' must be nonzero");
        if (t.has("l1"))
            s.l1 = t.number("l1");
        if (t.has("l2"))
            s.l2 = t.number("l2");
        t.require(!(s.l1 && s.l2), "give at most one of 'l1' and 'l2'");
        if (t.has("amplitude"))
            s.amplitude = t.complex("amplitude");
    } else if (kind == "file") {
        s.kind = InitialSpec::Kind::file;
        s.path = t.string("path");
        if (s.path.is_relative())
            s.path = base / s.path;
    } else if (kind == "random") {
        s.kind = InitialSpec::Kind::random;
        s.sites = t.integer("sites", 16);
        t.require(s.sites >= 1, "'sites' must be >= 1");
        s.site = t.integer("site", 0);
        const std::int64_t seed = t.integer("seed", 0);
        t.require(seed >= 0, "'seed' must be >= 0");
        s.seed = static_cast<std::uint64_t>(seed);
        s.l2 = t.number("l2", 1.0);
    } else {
        fail(ErrorCode::config, "unknown initial kind '" + kind + "'");
    }
    if (s.l1)
        t.require(*s.l1 > 0, "'l1' must be > 0");
    if (s.l2)
        t.require(*s.l2 > 0, "'l2' must be > 0");
    t.finish();
    return s;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const Mat2& m) {
    return json::array({json::array({complex_json(m.m00), complex_json(m.m01)}),
                        json::array({complex_json(m.m10), complex_json(m.m11)})});
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json coin_json(const RunConfig& cfg) {
    json j;
    j["constant"] = matrix_json(cfg.constant);
    j["nonlinear"] = cfg.nonlinear.name();
    j["order"] = optional_json(cfg.nonlinear.order());
    j["tilde_form"] = cfg.nonlinear.has_tilde_form();
    return j;
}

const ConstantCoin& require_standard(const RunConfig& cfg, const char* command) {
    if (!cfg.standard)
        fail(ErrorCode::regime_violation, std::string(command) + ": " + cfg.constant_problem);
    return *cfg.standard;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
    return os;
}

void close_out(std::ofstream& os, const std::filesystem::path& path) {
    os.close();
    if (!os)
        fail(ErrorCode::io, "write failed for '" + path.string() + "'");
}

json base_report(const RunConfig& cfg, std::string_view command) {
    json j;
    j["schema_version"] = schema_version;
    j["command"] = command;
    j["coin"] = coin_json(cfg);
    if (cfg.initial.kind == InitialSpec::Kind::random)
        j["seed"] = cfg.seed_override.value_or(cfg.initial.seed);
    else if (cfg.seed_override)
        j["seed"] = *cfg.seed_override;
    return j;
}

void run_walk(const RunConfig& cfg, const std::filesystem::path& out) {
    Table t(cfg.section("walk"), "walk");
    WalkConfig wc = walk_config(cfg, t.integer("horizon"));
    t.require(wc.horizon >= 0, "'horizon' must be >= 0");
    TrajectoryOptions opts;
    opts.diagnostics_every = t.integer("diagnostics_every", 1);
    t.require(opts.diagnostics_every >= 1, "'diagnostics_every' must be >= 1");
    opts.weak_l4 = t.boolean("weak_l4", true);
    const bool probs = t.boolean("probabilities", false);
    const std::int64_t probs_every = t.integer("probabilities_every", 1);
    t.require(probs_every >= 1, "'probabilities_every' must be >= 1");
    const bool final_state = t.boolean("final_state", true);
    t.finish();

    const GridState u0 = build_initial_state(cfg);
    opts.record_states = false;

    const auto diag_path = out / "diagnostics.csv";
    const auto prob_path = out / "probabilities.csv";
    std::ofstream diag = open_out(diag_path);
    write_diagnostics_header(diag);
    std::ofstream prob;
    if (probs) {
        prob = open_out(prob_path);
        write_probabilities_header(prob);
    }
    const double l2_0 = l2_norm(u0);
    double drift = 0;
    const std::int64_t diag_every = opts.diagnostics_every;
    opts.observer = [&](std::int64_t step, const GridState& u) {
        if (step % diag_every == 0 || step == wc.horizon)
            write_diagnostics_row(diag, diagnose(step, u, opts.weak_l4));
        if (probs && (step % probs_every == 0 || step == wc.horizon))
            write_probabilities_rows(prob, step, u);
        drift = std::max(drift, std::abs(l2_norm(u) - l2_0));
    };
    opts.diagnostics_every = wc.horizon + 1;
    const Trajectory traj = evolve(u0, wc, opts);
    close_out(diag, diag_path);
    if (probs)
        close_out(prob, prob_path);

    json summary = base_report(cfg, "walk");
    summary["horizon"] = wc.horizon;
    summary["l2_initial"] = l2_0;
    summary["l2_final"] = l2_norm(traj.final_state);
    summary["max_l2_drift"] = drift;
    summary["outputs"] = json::array({"diagnostics.csv"});
    if (probs)
        summary["outputs"].push_back("probabilities.csv");
    if (final_state) {
        write_json(out / "final_state.json", state_to_json(traj.final_state));
        summary["outputs"].push_back("final_state.json");
    }
    write_json(out / "summary.json", summary);
}

void run_decay(const RunConfig& cfg, const std::filesystem::path& out) {
    Table t(cfg.section("decay"), "decay");
    std::vector<std::int64_t> times;
    std::int64_t t_min = 64, t_max = 4096;
    if (t.has("times")) {
        times = t.integers("times");
        t.require(!times.empty(), "'times' must not be empty");
        for (std::size_t i = 0; i < times.size(); ++i)
            t.require(times[i] >= 0 && (i == 0 || times[i] > times[i - 1]),
                      "'times' must be nonnegative and strictly increasing");
        t_min = times.front();
        t_max = times.back();
    } else {
        t_min = t.integer("t_min", t_min);
        t_max = t.integer("t_max", t_max);
        t.require(0 <= t_min && t_min < t_max, "need 0 <= t_min < t_max");
        const std::string sampling = t.string("sampling", "dense");
        if (sampling == "dense") {
            for (std::int64_t s = t_min; s <= t_max; ++s)
                times.push_back(s);
        } else if (sampling == "log") {
            const std::int64_t n = t.integer("samples", 64);
            t.require(n >= 2, "'samples' must be >= 2");
            times = log_spaced_times(t_min, t_max, static_cast<std::size_t>(n));
        } else {
            fail(ErrorCode::config, "[decay] 'sampling' must be \"dense\" or \"log\"");
        }
    }
    std::vector<std::string> names = t.has("norms") ? t.strings("norms")
                                                    : std::vector<std::string>{"linf", "weak_l4", "l5"};
    t.require(!names.empty(), "'norms' must not be empty");
    std::vector<NormKind> kinds;
    try {
        for (const auto& n : names)
            kinds.push_back(NormKind::parse(n));
    } catch (const Error& e) {
        fail(ErrorCode::config, std::string("[decay] ") + e.what());
    }
    std::int64_t fit_lo = t_min, fit_hi = t_max;
    if (t.has("fit_window")) {
        const auto w = t.integers("fit_window");
        t.require(w.size() == 2 && w[0] < w[1], "'fit_window' must be [t_lo, t_hi] with t_lo < t_hi");
        fit_lo = w[0];
        fit_hi = w[1];
    }
    const double tolerance = t.number("tolerance", 0.05);
    const std::string abscissa_name = t.string("abscissa", "log_bracket_t");
    t.require(abscissa_name == "log_bracket_t" || abscissa_name == "log_t",
              "'abscissa' must be \"log_bracket_t\" or \"log_t\"");
    const Abscissa abscissa = abscissa_name == "log_t" ? Abscissa::log_t : Abscissa::log_bracket_t;
    const std::int64_t stz_horizon = t.integer("strichartz_horizon", 0);
    t.require(stz_horizon >= 0, "'strichartz_horizon' must be >= 0");
    t.finish();

    require_standard(cfg, "decay");
    const GridState u0 = build_initial_state(cfg);
    const WalkConfig wc = walk_config(cfg);
    const auto series = decay_series(u0, wc, kinds, times, "configured");

    // Linear targets; the nonlinear run shares them when the data is small.
    const std::map<std::string, double> targets = {{"linf", -1.0 / 3}, {"weak_l4", -0.25}, {"l5", -4.0 / 15}};

    json report = base_report(cfg, "decay");
    report["abscissa"] = abscissa_name;
    report["fit_window"] = json::array({fit_lo, fit_hi});
    report["tolerance"] = tolerance;
    json fits = json::array();
    for (const auto& s : series) {
        const std::string name = s.kind.name();
        const auto csv = out / ("series_" + name + ".csv");
        std::ostringstream os;
        write_series_csv(os, s);
        write_file(csv, os.str());
        json f;
        f["norm"] = name;
        f["series"] = csv.filename().string();
        const auto target = targets.find(name);
        f["target"] = target != targets.end() ? json(target->second) : json(nullptr);
        try {
            const SlopeFit fit = fit_decay(s, fit_lo, fit_hi, abscissa);
            f["slope"] = fit.slope;
            f["intercept"] = fit.intercept;
            f["r2"] = fit.r2;
            f["samples"] = fit.samples;
            if (target != targets.end()) {
                f["pass"] = std::abs(fit.slope - target->second) <= tolerance;
                f["fitted_constant"] = fitted_constant(s, target->second, fit_lo, fit_hi, l1_norm(u0));
            } else {
                f["pass"] = nullptr;
                f["fitted_constant"] = nullptr;
            }
        } catch (const Error& e) {
            f["slope"] = nullptr;
            f["error"] = e.what();
            f["pass"] = nullptr;
        }
        fits.push_back(std::move(f));
    }
    report["fits"] = std::move(fits);
    if (stz_horizon > 0) {
        const StrichartzReport r = strichartz_report(u0, cfg.constant, stz_horizon);
        std::ostringstream os;
        os << "T,linf_l2,l6_linf,stz,ratio,l6_ratio\n";
        for (const auto& c : r.doubling)
            os << c.horizon << ',' << format_double(c.linf_l2) << ',' << format_double(c.l6_linf) << ','
               << format_double(c.stz) << ',' << format_double(c.ratio) << ',' << format_double(c.l6_ratio)
               << '\n';
        write_file(out / "strichartz.csv", os.str());
        report["strichartz"] = {{"horizon", r.horizon}, {"linf_l2", r.linf_l2}, {"l6_linf", r.l6_linf},
                                {"stz", r.stz},         {"ratio", r.ratio},     {"series", "strichartz.csv"}};
    }
    write_json(out / "fits.json", report);
}

void write_terms_csv(const std::filesystem::path& path, const std::vector<double>& terms) {
    std::ostringstream os;
    os << "t,term\n";
    for (std::size_t i = 0; i < terms.size(); ++i)
        os << i << ',' << format_double(terms[i]) << '\n';
    write_file(path, os.str());
}

json wave_json(const WaveOperatorResult& r) {
    json j;
    j["certified"] = r.certified;
    j["t_star"] = r.t_star;
    j["tail_bound"] = r.tail_bound;
    j["rate"] = r.rate;
    j["monotone_tail"] = r.monotone_tail;
    j["guard_trips"] = r.guard_trips;
    j["coin_order"] = optional_json(r.coin_order);
    j["terms"] = "terms.csv";
    return j;
}

void run_scatter(const RunConfig& cfg, const std::filesystem::path& out) {
    Table t(cfg.section("scatter"), "scatter");
    TailOptions opts;
    opts.tol = t.number("tol", opts.tol);
    t.require(opts.tol > 0, "'tol' must be > 0");
    opts.t_max = t.integer("t_max", opts.t_max);
    t.require(opts.t_max >= 1, "'t_max' must be >= 1");
    opts.persistence = static_cast<int>(t.integer("persistence", opts.persistence));
    opts.guard = t.number("guard", opts.guard);
    opts.lag = static_cast<int>(t.integer("lag", opts.lag));
    opts.divergence_after = t.integer("divergence_after", opts.divergence_after);
    t.require(opts.divergence_after >= 0, "'divergence_after' must be >= 0");
    t.require(opts.persistence >= 1 && opts.lag >= 1 && opts.guard >= 1, "need persistence, lag >= 1, guard >= 1");
    std::optional<std::vector<std::int64_t>> defect_times;
    if (t.has("defect_times")) {
        defect_times = t.integers("defect_times");
        for (std::size_t i = 0; i < defect_times->size(); ++i)
            t.require((*defect_times)[i] >= 0 && (i == 0 || (*defect_times)[i] > (*defect_times)[i - 1]),
                      "'defect_times' must be nonnegative and strictly increasing");
    }
    t.finish();

    const GridState u0 = build_initial_state(cfg);
    const WalkConfig wc = walk_config(cfg);
    json report = base_report(cfg, "scatter");
    report["tol"] = opts.tol;
    report["t_max"] = opts.t_max;
    report["l2_u0"] = l2_norm(u0);
    report["l1_u0"] = l1_norm(u0);
    WaveOperatorResult r;
    try {
        r = wave_operator(u0, wc, opts);
    } catch (const NotCertified& e) {
        write_terms_csv(out / "terms.csv", e.partial().partial_sums_deltas);
        json w = wave_json(e.partial());
        w["u_plus"] = nullptr;
        w["error"] = e.what();
        report.update(w);
        write_json(out / "scatter.json", report);
        throw;
    }
    write_terms_csv(out / "terms.csv", r.partial_sums_deltas);
    std::vector<std::int64_t> times =
        defect_times.value_or(std::vector<std::int64_t>{0, r.t_star, 2 * r.t_star});
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const DecaySeries defect = scattering_defect(u0, wc, r.u_plus, times);
    {
        std::ostringstream os;
        os << "t,defect\n";
        for (std::size_t i = 0; i < defect.times.size(); ++i)
            os << defect.times[i] << ',' << format_double(defect.values[i]) << '\n';
        write_file(out / "defect.csv", os.str());
    }
    report.update(wave_json(r));
    report["l2_u_plus"] = l2_norm(r.u_plus);
    report["defect"] = "defect.csv";
    report["u_plus"] = state_to_json(r.u_plus);
    write_json(out / "scatter.json", report);
}

json functionals_json(const ProbeFunctionals& p) {
    json L = json::array();
    for (const auto& row : p.L)
        L.push_back(json::array({complex_json(row[0]), complex_json(row[1])}));
    return {{"lambda", p.lambda},
            {"L", std::move(L)},
            {"tail_budget", p.tail_budget},
            {"tail", json::array({p.tail[0], p.tail[1]})},
            {"terms", json::array({p.terms[0], p.terms[1]})}};
}

void run_invscat(const RunConfig& cfg, const std::filesystem::path& out, unsigned threads) {
    Table t(cfg.section("invscat"), "invscat");
    const std::vector<double> grid =
        t.has("lambdas") ? t.numbers("lambdas") : std::vector<double>{0.4, 0.3, 0.2};
    t.require(!grid.empty(), "'lambdas' must not be empty");
    for (double l : grid)
        t.require(l > 0 && l < 1, "every lambda must be in (0, 1)");
    OrderStudyOptions opts;
    opts.threads = std::max(1u, threads);
    if (t.has("window")) {
        const auto w = t.numbers("window");
        t.require(w.size() == 2 && w[0] < w[1], "'window' must be [lo, hi] with lo < hi");
        opts.window_lo = w[0];
        opts.window_hi = w[1];
    }
    opts.roundoff_lambda = t.number("roundoff_lambda", opts.roundoff_lambda);
    if (t.has("tail_budget")) {
        opts.probe.tail_budget = t.number("tail_budget");
        t.require(*opts.probe.tail_budget > 0, "'tail_budget' must be > 0");
    }
    opts.probe.t_max = t.integer("t_max", opts.probe.t_max);
    t.require(opts.probe.t_max >= 1, "'t_max' must be >= 1");
    t.finish();
    if (cfg.tree.contains("initial"))
        std::cerr << "warning: [initial] is ignored by invscat (probe states are fixed)\n";

    const ReconstructionReport rep = order_study(walk_config(cfg), grid, opts);
    for (const auto& w : rep.warnings)
        std::cerr << "warning: " << w << '\n';

    json report = base_report(cfg, "invscat");
    report["grid"] = rep.grid;
    report["window"] = json::array({opts.window_lo, opts.window_hi});
    report["warnings"] = rep.warnings;
    report["truth"] = {{"d1", rep.truth1 ? matrix_json(*rep.truth1) : json(nullptr)},
                       {"d2", rep.truth2 ? matrix_json(*rep.truth2) : json(nullptr)}};
    json entries = json::array();
    std::ostringstream csv;
    csv << "lambda,err1,err2,order1,order2,skew1,skew2\n";
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& e : rep.entries) {
        json j;
        j["lambda"] = e.lambda;
        j["d1_hat"] = matrix_json(e.d1_hat);
        j["d2_hat"] = matrix_json(e.d2_hat);
        j["err1"] = optional_json(e.err1);
        j["err2"] = optional_json(e.err2);
        j["order1"] = optional_json(e.order1);
        j["order2"] = optional_json(e.order2);
        j["skew1"] = e.skew1;
        j["skew2"] = e.skew2;
        j["flags"] = e.flags;
        j["probes"] = functionals_json(e.probes);
        j["probes_2lambda"] = functionals_json(e.probes_2x);
        entries.push_back(std::move(j));
        csv << format_double(e.lambda) << ',' << cell(e.err1) << ',' << cell(e.err2) << ',' << cell(e.order1)
            << ',' << cell(e.order2) << ',' << format_double(e.skew1) << ',' << format_double(e.skew2) << '\n';
    }
    report["entries"] = std::move(entries);
    report["errors"] = "errors.csv";
    write_file(out / "errors.csv", csv.str());
    write_json(out / "invscat.json", report);
}

void run_spectrum(const RunConfig& cfg, const std::filesystem::path& out) {
    Table t(cfg.section("spectrum"), "spectrum");
    const std::int64_t points = t.integer("points", 1024);
    t.require(points >= 2, "'points' must be >= 2");
    t.finish();
    const ConstantCoin& c0 = require_standard(cfg, "spectrum");
    const Dispersion d(c0);
    std::ostringstream os;
    write_dispersion_csv(os, d, static_cast<std::size_t>(points));
    write_file(out / "dispersion.csv", os.str());
    json report = base_report(cfg, "spectrum");
    report["abs_a"] = d.abs_a();
    report["theta_a"] = d.theta_a();
    report["max_group_velocity"] = d.abs_a();
    report["points"] = points;
    report["dispersion"] = "dispersion.csv";
    write_json(out / "spectrum.json", report);
}

} // namespace

const json& RunConfig::section(std::string_view name) const {
    const std::string key(name);
    return tree.contains(key) ? tree[key] : empty_table;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    cfg.source = std::string(text);
    cfg.base_dir = base_dir;
    cfg.tree = parse_toml(text);
    for (const auto& [k, v] : cfg.tree.items()) {
        if (!sections.contains(k))
            fail(ErrorCode::config, "unknown top-level key '" + k + "'");
        if (k != "title" && !v.is_object())
            fail(ErrorCode::config, "'" + k + "' must be a table");
    }
    if (cfg.tree.contains("title") && !cfg.tree["title"].is_string())
        fail(ErrorCode::config, "'title' must be a string");
    try {
        cfg.nonlinear = parse_nonlinear(section_or_empty(cfg.tree, "nonlinear"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::config)
            throw;
        fail(ErrorCode::config, std::string("[nonlinear] ") + e.what());
    }
    parse_constant(section_or_empty(cfg.tree, "coin"), cfg);
    cfg.initial = parse_initial(section_or_empty(cfg.tree, "initial"), base_dir);
    // Command sections are validated eagerly so a typo fails before any run.
    for (const char* name : {"walk", "decay", "scatter", "invscat", "spectrum"})
        if (cfg.tree.contains(name))
            Table(cfg.tree[name], name);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    return parse_config(text, path.parent_path());
}

GridState build_initial_state(const RunConfig& cfg) {
    const InitialSpec& s = cfg.initial;
    GridState u;
    switch (s.kind) {
    case InitialSpec::Kind::delta:
        u = GridState::delta(s.component, s.site, s.amplitude);
        break;
    case InitialSpec::Kind::deltas:
        for (const auto& e : s.entries)
            u = add(u, GridState::delta(e.component, e.site, e.amplitude));
        break;
    case InitialSpec::Kind::wavepacket:
        u = scale(s.amplitude, gaussian_wavepacket(s.center, s.width, s.momentum, s.polarization));
        break;
    case InitialSpec::Kind::file:
    {
        const json j = json::parse(read_file(s.path), nullptr, false);
        if (j.is_discarded())
            fail(ErrorCode::config, "'" + s.path.string() + "' is not valid JSON");
        u = state_from_json(j);
        break;
    }
    case InitialSpec::Kind::random: {
        std::mt19937_64 rng(cfg.seed_override.value_or(s.seed));
        std::normal_distribution<double> normal;
        std::vector<Spinor> cells(static_cast<std::size_t>(s.sites));
        for (auto& c : cells)
            c = {{normal(rng), normal(rng)}, {normal(rng), normal(rng)}};
        u = GridState(s.site, std::move(cells));
        break;
    }
    }
    if (u.empty())
        return u;
    if (s.l1)
        u = scale(*s.l1 / l1_norm(u), u);
    else if (s.l2)
        u = scale(*s.l2 / l2_norm(u), u);
    return u;
}

WalkConfig walk_config(const RunConfig& cfg, std::int64_t horizon) {
    WalkConfig wc;
    wc.constant = cfg.constant;
    wc.nonlinear = cfg.nonlinear;
    wc.horizon = horizon;
    return wc;
}

void run_command(const RunConfig& cfg, std::string_view command, const std::filesystem::path& out_dir,
                 unsigned threads) {
    static const std::set<std::string_view> commands = {"walk", "decay", "scatter", "invscat", "spectrum"};
    if (!commands.contains(command))
        fail(ErrorCode::invalid_argument, "unknown command '" + std::string(command) + "'");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        fail(ErrorCode::io, "cannot create '" + out_dir.string() + "': " + ec.message());
    write_file(out_dir / "config.toml", cfg.source);
    if (command == "walk")
        run_walk(cfg, out_dir);
    else if (command == "decay")
        run_decay(cfg, out_dir);
    else if (command == "scatter")
        run_scatter(cfg, out_dir);
    else if (command == "invscat")
        run_invscat(cfg, out_dir, threads);
    else
        run_spectrum(cfg, out_dir);
}

} // namespace qwalk
