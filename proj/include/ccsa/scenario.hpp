#pragma once

// Scenario runner: config -> curve -> paths -> swap NPV -> costs -> solver,
// with CSV outputs and a run manifest that reproduces the run on its own.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "ccsa/costs.hpp"
#include "ccsa/curve.hpp"
#include "ccsa/dynamics.hpp"
#include "ccsa/solver.hpp"
#include "ccsa/swap.hpp"

namespace ccsa {

/// Error carrying the name of the pipeline stage that failed.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

template <class F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(stage, e.what());
    }
}

struct ScenarioConfig {
    std::optional<std::string> curve_file;  // CSV; absent: built-in 2012-06-15 table
    std::vector<MarketQuote> quotes;        // resolved quotes (inline in manifests)
    CurveSource curve_source = CurveSource::quoted_df_first;

    G2Params g2 = reference_g2_params();
    bool use_historical_sigma = false;
    std::string cir_preset = "HIGH";  // HIGH, LOW or custom
    CIRParams cir = cir_high();

    CostConfig costs{};
    double c_z_fraction = 0.0;     // switching costs as fractions of notional
    double c_zeta_fraction = 0.0;

    SwapSpec swap{};
    bool par_fixed_rate = true;    // fixed rate set to the curve's par rate

    std::size_t n_paths = 1000;
    int steps_per_year = 252;
    std::uint64_t seed = 20120615;
    Regime initial_regime = Regime::zero_collateral;
    unsigned threads = 0;
    double rho_rate_intensity = 0.0;
    bool literal_z_drift = false;
    BoundaryVariable boundary_variable = BoundaryVariable::cost_state;

    std::string output_dir = "out";
    bool dump_paths = false;
    bool dump_costs = false;

    /// Resolves presets, quotes and derived switching costs.
    void resolve() {
        if (cir_preset == "HIGH" || cir_preset == "high") cir = cir_high(), cir_preset = "HIGH";
        else if (cir_preset == "LOW" || cir_preset == "low") cir = cir_low(), cir_preset = "LOW";
        else if (cir_preset != "custom") throw std::invalid_argument("unknown intensity preset '" + cir_preset + "'");
        if (quotes.empty()) quotes = curve_file ? load_quotes_csv(*curve_file) : reference_market_quotes();
        costs.notional = swap.notional;
        costs.c_z = c_z_fraction * swap.notional;
        costs.c_zeta = c_zeta_fraction * swap.notional;
        if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
    }

    G2Params effective_g2() const {
        G2Params p = g2;
        if (use_historical_sigma) p.sigma = kHistoricalEuriborVol;
        return p;
    }
};

namespace detail {

inline std::string regime_name(Regime r) { return to_string(r); }
inline Regime parse_regime(const std::string& s) {
    if (s == "z" || s == "zero_collateral") return Regime::zero_collateral;
    if (s == "zeta" || s == "full_collateral") return Regime::full_collateral;
    throw std::invalid_argument("unknown regime '" + s + "'");
}
inline std::string boundary_name(BoundaryVariable v) {
    switch (v) {
        case BoundaryVariable::cost_state: return "cost_state";
        case BoundaryVariable::short_rate: return "short_rate";
        case BoundaryVariable::intensity: return "intensity";
    }
    return "?";
}
inline BoundaryVariable parse_boundary(const std::string& s) {
    if (s == "cost_state") return BoundaryVariable::cost_state;
    if (s == "short_rate") return BoundaryVariable::short_rate;
    if (s == "intensity") return BoundaryVariable::intensity;
    throw std::invalid_argument("unknown boundary variable '" + s + "'");
}

}  // namespace detail

inline nlohmann::json to_json(const ScenarioConfig& c) {
    using nlohmann::json;
    json quotes = json::array();
    for (const auto& q : c.quotes) {
        json row{{"label", q.label}, {"kind", to_string(q.kind)}, {"rate", q.rate}};
        if (q.df) row["df"] = *q.df;
        quotes.push_back(row);
    }
    json j{
        {"curve", {{"source", c.curve_source == CurveSource::bootstrap ? "bootstrap" : "quoted_df"}, {"quotes", quotes}}},
        {"g2", {{"mu", c.g2.mu}, {"nu", c.g2.nu}, {"sigma", c.g2.sigma}, {"eta", c.g2.eta}, {"rho", c.g2.rho},
                {"use_historical_sigma", c.use_historical_sigma}}},
        {"intensity", {{"preset", c.cir_preset}, {"kappa", c.cir.kappa}, {"gamma", c.cir.gamma},
                       {"upsilon", c.cir.upsilon}, {"lambda0", c.cir.lambda0}}},
        {"costs", {{"r_free", c.costs.r_free}, {"r_borr", c.costs.r_borr}, {"r_opp", c.costs.r_opp},
                   {"recovery", c.costs.recovery}, {"c_z", c.c_z_fraction}, {"c_zeta", c.c_zeta_fraction},
                   {"delta", c.costs.delta}, {"split_epe_ene", c.costs.split_epe_ene}}},
        {"swap", {{"notional", c.swap.notional}, {"maturity", c.swap.maturity}, {"float_tenor", c.swap.float_tenor},
                  {"direction", c.swap.direction == SwapDirection::pay_fixed ? "pay_fixed" : "receive_fixed"},
                  {"fixing", c.swap.fixing == Fixing::in_arrears ? "in_arrears" : "in_advance"}}},
        {"n_paths", c.n_paths},
        {"steps_per_year", c.steps_per_year},
        {"seed", c.seed},
        {"initial_regime", detail::regime_name(c.initial_regime)},
        {"threads", c.threads},
        {"rho_rate_intensity", c.rho_rate_intensity},
        {"literal_z_drift", c.literal_z_drift},
        {"boundary_variable", detail::boundary_name(c.boundary_variable)},
        {"output_dir", c.output_dir},
        {"dump_paths", c.dump_paths},
        {"dump_costs", c.dump_costs},
    };
    if (c.par_fixed_rate) j["swap"]["fixed_rate"] = "par";
    else j["swap"]["fixed_rate"] = c.swap.fixed_rate;
    if (c.curve_file) j["curve"]["file"] = *c.curve_file;
    return j;
}

/// Reads a config; a run manifest is accepted too (its "config" member is used).
/// Relative curve paths are resolved against base_dir.
inline ScenarioConfig config_from_json(const nlohmann::json& in, const std::filesystem::path& base_dir = {}) {
    const nlohmann::json& j = in.contains("config") && in["config"].is_object() ? in["config"] : in;
    ScenarioConfig c;
    if (j.contains("curve")) {
        const auto& cj = j["curve"];
        if (cj.value("source", "quoted_df") == "bootstrap") c.curve_source = CurveSource::bootstrap;
        if (cj.contains("quotes")) {
            for (const auto& row : cj["quotes"]) {
                MarketQuote q;
                q.label = row.at("label").get<std::string>();
                q.maturity = tenor_to_years(q.label);
                q.kind = parse_quote_kind(row.at("kind").get<std::string>());
                q.rate = row.at("rate").get<double>();
                if (row.contains("df") && !row["df"].is_null()) q.df = row["df"].get<double>();
                c.quotes.push_back(q);
            }
        } else if (cj.contains("file")) {
            std::filesystem::path p = cj["file"].get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            c.curve_file = p.string();
        }
    }
    if (j.contains("g2")) {
        const auto& g = j["g2"];
        c.g2.mu = g.value("mu", c.g2.mu);
        c.g2.nu = g.value("nu", c.g2.nu);
        c.g2.sigma = g.value("sigma", c.g2.sigma);
        c.g2.eta = g.value("eta", c.g2.eta);
        c.g2.rho = g.value("rho", c.g2.rho);
        c.use_historical_sigma = g.value("use_historical_sigma", false);
    }
    if (j.contains("intensity")) {
        const auto& l = j["intensity"];
        c.cir_preset = l.value("preset", std::string("HIGH"));
        c.cir.kappa = l.value("kappa", 0.0);
        c.cir.gamma = l.value("gamma", 0.0);
        c.cir.upsilon = l.value("upsilon", 0.0);
        c.cir.lambda0 = l.value("lambda0", 0.0);
    }
    if (j.contains("costs")) {
        const auto& k = j["costs"];
        c.costs.r_free = k.value("r_free", c.costs.r_free);
        c.costs.r_borr = k.value("r_borr", c.costs.r_borr);
        c.costs.r_opp = k.value("r_opp", c.costs.r_opp);
        c.costs.recovery = k.value("recovery", c.costs.recovery);
        c.c_z_fraction = k.value("c_z", 0.0);
        c.c_zeta_fraction = k.value("c_zeta", 0.0);
        c.costs.delta = k.value("delta", 0.0);
        c.costs.split_epe_ene = k.value("split_epe_ene", false);
    }
    if (j.contains("swap")) {
        const auto& s = j["swap"];
        c.swap.notional = s.value("notional", c.swap.notional);
        c.swap.maturity = s.value("maturity", c.swap.maturity);
        c.swap.float_tenor = s.value("float_tenor", c.swap.float_tenor);
        const std::string dir = s.value("direction", std::string("pay_fixed"));
        if (dir == "pay_fixed") c.swap.direction = SwapDirection::pay_fixed;
        else if (dir == "receive_fixed") c.swap.direction = SwapDirection::receive_fixed;
        else throw std::invalid_argument("unknown swap direction '" + dir + "'");
        const std::string fix = s.value("fixing", std::string("in_arrears"));
        if (fix == "in_arrears") c.swap.fixing = Fixing::in_arrears;
        else if (fix == "in_advance") c.swap.fixing = Fixing::in_advance;
        else throw std::invalid_argument("unknown fixing '" + fix + "'");
        if (s.contains("fixed_rate") && s["fixed_rate"].is_number()) {
            c.par_fixed_rate = false;
            c.swap.fixed_rate = s["fixed_rate"].get<double>();
        }
    }
    c.n_paths = j.value("n_paths", c.n_paths);
    c.steps_per_year = j.value("steps_per_year", c.steps_per_year);
    c.seed = j.value("seed", c.seed);
    c.initial_regime = detail::parse_regime(j.value("initial_regime", std::string("z")));
    c.threads = j.value("threads", c.threads);
    c.rho_rate_intensity = j.value("rho_rate_intensity", 0.0);
    c.literal_z_drift = j.value("literal_z_drift", false);
    c.boundary_variable = detail::parse_boundary(j.value("boundary_variable", std::string("cost_state")));
    c.output_dir = j.value("output_dir", c.output_dir);
    c.dump_paths = j.value("dump_paths", false);
    c.dump_costs = j.value("dump_costs", false);
    return c;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PipelineError("config", "cannot open '" + path + "'");
    return run_stage("config", [&] {
        return config_from_json(nlohmann::json::parse(in), std::filesystem::path(path).parent_path());
    });
}

/// Simulated market shared by every solve at a common seed.
struct MarketState {
    YieldCurve curve;
    G2Model model;
    TimeGrid grid;
    SwapSpec swap;
    PathSet paths;
    StepPathMatrix npv;
    ExposureProfile exposure;
    std::vector<std::string> warnings;
};

/// Curve, dynamics and swap stages. Expects a resolved config.
inline MarketState prepare_market(const ScenarioConfig& cfg) {
    YieldCurve curve = run_stage("curve", [&] { return build_curve(cfg.quotes, cfg.curve_source); });
    std::vector<std::string> warnings;
    G2Model model = run_stage("dynamics", [&] { return G2Model(cfg.effective_g2(), curve); });
    const TimeGrid grid = run_stage("dynamics", [&] { return TimeGrid::uniform(cfg.swap.maturity, cfg.steps_per_year); });
    PathSet paths = run_stage("dynamics", [&] {
        cfg.cir.validate();
        if (!cfg.cir.feller())
            warnings.emplace_back("intensity parameters violate the Feller condition (2 kappa gamma < upsilon^2)");
        const SimulationOptions sim{cfg.rho_rate_intensity, cfg.literal_z_drift, cfg.threads};
        return simulate_paths(model, cfg.cir, grid, cfg.n_paths, cfg.seed, sim);
    });
    SwapSpec swap = cfg.swap;
    StepPathMatrix npv = run_stage("swap", [&] {
        if (cfg.par_fixed_rate) swap.fixed_rate = par_fixed_rate(curve, swap.maturity, swap.float_tenor);
        swap.validate();
        return npv_matrix(paths, swap, model, cfg.threads);
    });
    ExposureProfile exposure = exposure_profile(paths, npv);
    return {std::move(curve), std::move(model), grid,           swap,
            std::move(paths), std::move(npv),   std::move(exposure), std::move(warnings)};
}

struct ScenarioResult {
    RegimeCostPaths costs;
    SwitchingSolution solution;
    std::vector<BoundaryEntry> boundary;
    RemainingSwitches remaining;
    std::vector<std::string> warnings;
};

/// Cost and solver stages on a prepared market.
inline ScenarioResult solve_market(const MarketState& m, const ScenarioConfig& cfg, const SolverOptions& opts = {}) {
    ScenarioResult r;
    r.warnings = m.warnings;
    r.costs = run_stage("costs", [&] {
        for (auto& w : cfg.costs.validate()) r.warnings.push_back(w);
        return regime_cost_paths(m.paths, m.npv, cfg.costs);
    });
    r.solution = run_stage("solver", [&] { return solve_switching(m.paths, r.costs, cfg.costs, cfg.initial_regime, opts); });
    r.boundary = extract_boundary(r.solution, m.paths, r.costs, cfg.boundary_variable);
    r.remaining = min_remaining_switches(r.solution);
    return r;
}

/// Git blob SHA-1 of a byte string.
inline std::string git_blob_sha1(const std::string& content) {
    const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
        throw std::runtime_error("SHA-1 digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
    return hex.str();
}

inline void write_values_csv(std::ostream& os, const SwitchingSolution& s) {
    os << "initial_regime,v_star,se_star,v_cva,se_cva,v_coll,se_coll,v_star_z,se_star_z,v_star_zeta,se_star_zeta,"
          "best_initial_regime,total_switches\n";
    os.precision(10);
    const auto& b = s.star();
    os << to_string(s.initial_regime) << ',' << b.value << ',' << b.std_error << ',' << s.v_cva.value << ',' << s.v_cva.std_error << ',' << s.v_coll.value << ','
       << s.v_coll.std_error << ',' << s.v_star[0].value << ',' << s.v_star[0].std_error << ',' << s.v_star[1].value << ','
       << s.v_star[1].std_error << ',' << to_string(s.best_initial_regime()) << ',' << s.total_switches() << '\n';
}

namespace detail {
template <class Writer>
void write_file(const std::filesystem::path& p, Writer&& w) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
    w(os);
}
}  // namespace detail

struct RunReport {
    ScenarioConfig config;
    ScenarioResult result;
    MarketState market;
    double wall_seconds = 0.0;
    nlohmann::json manifest;
};

/// Full pipeline; writes outputs when cfg.output_dir is non-empty.
inline RunReport run_scenario(ScenarioConfig cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    run_stage("config", [&] {
        cfg.resolve();
        return 0;
    });
    MarketState market = prepare_market(cfg);
    ScenarioResult result = solve_market(market, cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::json manifest;
    const nlohmann::json config_json = to_json(cfg);
    manifest["config"] = config_json;
    manifest["seed"] = cfg.seed;
    manifest["fixed_rate"] = market.swap.fixed_rate;
    manifest["inputs_sha1"]["config"] = git_blob_sha1(config_json.dump());
    if (cfg.curve_file) {
        std::ifstream in(*cfg.curve_file, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        manifest["inputs_sha1"]["curve_file"] = git_blob_sha1(buf.str());
    }
    manifest["wall_time_seconds"] = wall;
    manifest["warnings"] = result.warnings;
    manifest["values"] = {{"v_star", result.solution.star().value},
                          {"v_cva", result.solution.v_cva.value},
                          {"v_coll", result.solution.v_coll.value}};

    if (!cfg.output_dir.empty()) {
        run_stage("output", [&] {
            const std::filesystem::path dir(cfg.output_dir);
            std::filesystem::create_directories(dir);
            detail::write_file(dir / "values.csv", [&](std::ostream& os) { write_values_csv(os, result.solution); });
            detail::write_file(dir / "indicators.csv", [&](std::ostream& os) { write_indicators_csv(os, result.solution); });
            detail::write_file(dir / "boundary.csv", [&](std::ostream& os) { write_boundary_csv(os, result.boundary); });
            detail::write_file(dir / "switches.csv", [&](std::ostream& os) { write_switches_csv(os, result.remaining); });
            detail::write_file(dir / "exposure.csv", [&](std::ostream& os) { write_exposure_csv(os, market.exposure); });
            if (cfg.dump_paths)
                detail::write_file(dir / "paths.csv", [&](std::ostream& os) { write_paths_csv(os, market.paths); });
            if (cfg.dump_costs)
                detail::write_file(dir / "costs.csv", [&](std::ostream& os) { write_costs_csv(os, result.costs); });
            detail::write_file(dir / "manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
            return 0;
        });
    }
    return {std::move(cfg), std::move(result), std::move(market), wall, std::move(manifest)};
}

enum class SweepParam { c, c_z, c_zeta, delta, lambda_preset };

inline SweepParam parse_sweep_param(const std::string& s) {
    if (s == "c") return SweepParam::c;
    if (s == "c_z") return SweepParam::c_z;
    if (s == "c_zeta") return SweepParam::c_zeta;
    if (s == "delta") return SweepParam::delta;
    if (s == "lambda_preset") return SweepParam::lambda_preset;
    throw std::invalid_argument("unknown sweep parameter '" + s + "'");
}

struct SweepRow {
    std::string value;
    Estimate v_star;
    Estimate v_cva;
    Estimate v_coll;
    std::size_t total_switches = 0;
};

struct SweepResult {
    std::string param;
    std::vector<SweepRow> rows;
    bool v_star_non_decreasing = true;
    std::vector<std::string> warnings;
};

/// One solve per value at the config's seed. Switching-cost and delta sweeps
/// reuse one simulated market; preset sweeps re-simulate with the same seed.
inline SweepResult sweep(ScenarioConfig cfg, const std::string& param_name, const std::vector<std::string>& values) {
    const SweepParam param = run_stage("config", [&] { return parse_sweep_param(param_name); });
    if (values.empty()) throw PipelineError("config", "sweep needs at least one value");
    run_stage("config", [&] {
        cfg.resolve();
        return 0;
    });
    SweepResult out;
    out.param = param_name;
    std::optional<MarketState> shared;
    if (param != SweepParam::lambda_preset) shared = prepare_market(cfg);
    for (const auto& v : values) {
        ScenarioConfig c = cfg;
        run_stage("config", [&] {
            switch (param) {
                case SweepParam::c: c.c_z_fraction = c.c_zeta_fraction = std::stod(v); break;
                case SweepParam::c_z: c.c_z_fraction = std::stod(v); break;
                case SweepParam::c_zeta: c.c_zeta_fraction = std::stod(v); break;
                case SweepParam::delta: c.costs.delta = std::stod(v); break;
                case SweepParam::lambda_preset: c.cir_preset = v; break;
            }
            c.resolve();
            return 0;
        });
        std::optional<MarketState> local;
        if (!shared) local = prepare_market(c);
        const MarketState& m = shared ? *shared : *local;
        const ScenarioResult r = solve_market(m, c);
        out.rows.push_back({v, r.solution.star(), r.solution.v_cva, r.solution.v_coll, r.solution.total_switches()});
        for (const auto& w : r.warnings) out.warnings.push_back(v + ": " + w);
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (out.rows[i].v_star.value < out.rows[i - 1].v_star.value) out.v_star_non_decreasing = false;
    return out;
}

/// param,value,v_star,se_star,v_cva,v_coll,total_switches
inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
    os << "param,value,v_star,se_star,v_cva,v_coll,total_switches\n";
    os.precision(10);
    for (const auto& r : s.rows)
        os << s.param << ',' << r.value << ',' << r.v_star.value << ',' << r.v_star.std_error << ',' << r.v_cva.value << ','
           << r.v_coll.value << ',' << r.total_switches << '\n';
}

}  // namespace ccsa
