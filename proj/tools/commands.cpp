#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "spdc/io.hpp"
#include "spdc/metrics.hpp"
#include "spdc/optimizer.hpp"
#include "spdc/poling.hpp"

namespace spdc::cli
{
namespace
{

using nlohmann::json;

struct Context
{
    json spec;
    std::filesystem::path base;  // directory of the config file
    RunOptions opts;
    std::string hash;
    std::ostream* log = nullptr;

    std::vector<std::pair<std::string, std::string>> meta() const
    {
        return {{"config_hash", hash}, {"version", library_version()}};
    }

    json stamp(json j) const
    {
        j["config_hash"] = hash;
        j["version"] = library_version();
        return j;
    }
};

// Artifacts are rendered in memory first and written only once the whole
// command has succeeded (or produced its partial report).
class Outputs
{
public:
    void add(std::string name, std::string text) { files_.emplace_back(std::move(name), std::move(text)); }

    void flush(const std::filesystem::path& dir) const
    {
        std::filesystem::create_directories(dir);
        for (const auto& [name, text] : files_) {
            std::ofstream out(dir / name, std::ios::binary);
            if (!out)
                throw ConfigError(fmt::format("cannot write {}", (dir / name).string()));
            out << text;
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<double> parse_grid(const json& j)
{
    if (j.is_array())
        return j.get<std::vector<double>>();
    const double lo = j.at("min").get<double>();
    const double hi = j.at("max").get<double>();
    const auto n = j.at("points").get<std::size_t>();
    if (n < 2 || !(hi > lo))
        throw ConfigError("grid needs max > min and at least two points");
    const bool log_spaced = j.value("log", false);
    if (log_spaced && !(lo > 0.0))
        throw ConfigError("log-spaced grid needs a positive minimum");
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n - 1);
        v[k] = log_spaced ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
    }
    return v;
}

OpticalConfig parse_optics(const Context& ctx) { return config_from_json(ctx.spec.at("optics")); }

Chi2Profile parse_profile(const Context& ctx, const json& j, const OpticalConfig& cfg)
{
    if (j.contains("plan_csv")) {
        std::ifstream in(ctx.base / j.at("plan_csv").get<std::string>());
        if (!in)
            throw ConfigError("cannot open plan_csv");
        return read_plan_csv(in).profile();
    }
    return profile_from_json(j, cfg.length_um);
}

PumpSpec parse_pump(const json& j, const OpticalConfig& cfg)
{
    json p = j;
    if (!p.contains("waist_um")) {
        if (!p.contains("xi"))
            throw ConfigError("pump needs waist_um or xi");
        p["waist_um"] = waist_from_xi(cfg, BeamParameter{p.at("xi").get<double>()}, cfg.k_p);
    }
    p.erase("xi");
    return pump_from_json(p);
}

SubspaceBounds parse_bounds(const json& j, SubspaceBounds fallback)
{
    if (j.is_null())
        return fallback;
    SubspaceBounds b{j.value("H", fallback.H), j.value("U", fallback.U)};
    b.validate();
    return b;
}

DecomposeOptions parse_decompose(const Context& ctx)
{
    DecomposeOptions d;
    const json j = ctx.spec.value("decompose", json::object());
    d.rel_tol = j.value("rel_tol", d.rel_tol);
    d.radial = j.value("radial", d.radial);
    d.azimuthal = j.value("azimuthal", d.azimuthal);
    d.max_refinements = j.value("max_refinements", d.max_refinements);
    if (ctx.opts.tolerance)
        d.rel_tol = *ctx.opts.tolerance;
    return d;
}

ZKernelOptions parse_zkernel(const json& j, ZKernelOptions z)
{
    if (j.is_null())
        return z;
    z.outer = j.value("outer", z.outer);
    z.inner = j.value("inner", z.inner);
    z.line = j.value("line", z.line);
    return z;
}

std::uint64_t seed_of(const Context& ctx)
{
    return ctx.opts.seed ? *ctx.opts.seed : ctx.spec.value("seed", std::uint64_t{0});
}

// Collection waists: explicit waists, a shared xi, or (default) the
// symmetric coupling optimum.
CollectionResult parse_collection(const json& j, const OpticalConfig& cfg, const PumpSpec& pump,
                                  const Chi2Profile& profile, const MetricsOptions& mopts)
{
    if (j.contains("w_s_um"))
        return {j.at("w_s_um").get<double>(), j.at("w_i_um").get<double>(), 0.0};
    if (j.contains("xi")) {
        const double xi = j.at("xi").get<double>();
        return {waist_from_xi(cfg, {xi}, cfg.k_s), waist_from_xi(cfg, {xi}, cfg.k_i), 0.0};
    }
    return optimize_collection(cfg, pump, profile, j.value("symmetric", true), mopts);
}

void cmd_metrics(const Context& ctx, Outputs& out)
{
    const OpticalConfig cfg = parse_optics(ctx);
    json cases = ctx.spec.contains("cases") ? ctx.spec.at("cases") : json::array({ctx.spec});

    json reports = json::array();
    std::string table = fmt::format("{:<16} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}  {}\n", "case",
                                    "purity", "schmidt", "r2_smf", "heralding", "rate", "xi_s",
                                    "provenance");
    const auto write = [&](const json& error) {
        json doc = ctx.stamp({{"optics", to_json(cfg)}, {"cases", reports}});
        if (!error.is_null())
            doc["error"] = error;
        out.add("metrics.json", doc.dump(2) + "\n");
        out.add("metrics.txt", table);
    };

    for (std::size_t k = 0; k < cases.size(); ++k) {
        const json& c = cases[k];
        const std::string name = c.value("name", fmt::format("case{}", k));
        try {
            const Chi2Profile profile = parse_profile(ctx, c.at("profile"), cfg);
            const PumpSpec pump = parse_pump(c.at("pump"), cfg);
            MetricsOptions mopts;
            mopts.decompose = parse_decompose(ctx);
            mopts.zkernel = parse_zkernel(c.value("zkernel", json()), mopts.zkernel);
            mopts.bounds = parse_bounds(c.value("subspace", json()), pump.is_gaussian()
                                                                        ? SubspaceBounds{8, 6}
                                                                        : SubspaceBounds{10, 8});
            mopts.force_mode_path = c.value("force_mode_path", false);
            const CollectionResult col = parse_collection(c.value("collection", json::object()),
                                                          cfg, pump, profile, mopts);
            const MetricsReport r =
                compute_metrics(cfg, pump, profile, {col.w_s}, {col.w_i}, mopts);
            const double xi_s = xi_from_waist(cfg, r.w_s, cfg.k_s).xi;
            json entry{{"name", name}, {"metrics", to_json(r)}, {"xi_s", xi_s},
                       {"xi_p", xi_from_waist(cfg, pump.waist_um, cfg.k_p).xi},
                       {"profile", to_json(profile)}, {"pump", to_json(pump)}};
            reports.push_back(entry);
            table += fmt::format("{:<16} {:>9.5f} {:>9.5f} {:>9.5f} {:>9.5f} {:>9.5f} {:>9.4f}  {}\n",
                                 name, r.purity, r.schmidt, r.r2_smf, r.heralding, r.relative_rate,
                                 xi_s, r.provenance);
            *ctx.log << fmt::format("{}: P = {:.5f}, R2 = {:.5f}, eta = {:.5f}\n", name, r.purity,
                                    r.r2_smf, r.heralding);
        } catch (const NumericalError& e) {
            write(json{{"case", name}, {"message", e.what()}});
            throw;
        }
    }
    write(json());
}

void cmd_scan(const Context& ctx, Outputs& out)
{
    const OpticalConfig cfg = parse_optics(ctx);
    const json& s = ctx.spec.at("scan");
    const std::string kind = s.at("kind").get<std::string>();
    const ZKernelOptions z = parse_zkernel(s.value("zkernel", json()), ZKernelOptions{});

    ScanTable table;
    if (kind == "waist-length") {
        const Chi2Profile profile = parse_profile(ctx, ctx.spec.at("profile"), cfg);
        std::vector<double> lengths = parse_grid(s.at("length_mm"));
        for (double& l : lengths)
            l *= 1e3;
        table = scan_waist_length(cfg, profile, parse_grid(s.at("w_p_um")), lengths, z);
    } else if (kind == "xi") {
        const Chi2Profile profile = parse_profile(ctx, ctx.spec.at("profile"), cfg);
        table = scan_xi(cfg, profile, parse_grid(s.at("xi_p")), z);
    } else if (kind == "collection") {
        const Chi2Profile profile = parse_profile(ctx, ctx.spec.at("profile"), cfg);
        table = scan_collection(cfg, profile, parse_grid(s.at("xi_p")), parse_grid(s.at("xi_s")),
                                z.line);
    } else if (kind == "series-order") {
        CrystalOptOptions o;
        o.seed = seed_of(ctx);
        table = scan_series_order(cfg, s.at("max_order").get<int>(), s.value("xi0", 1.42), o);
    } else {
        throw ConfigError(fmt::format("unknown scan kind '{}'", kind));
    }

    std::ostringstream csv;
    write_scan_csv(table, csv, ctx.meta());
    out.add("scan.csv", csv.str());

    // Location of the best value of the first metric.
    const auto& v = table.values.front();
    const std::size_t best =
        static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    json argmax;
    std::size_t rest = best;
    for (std::size_t d = table.axes.size(); d-- > 0;) {
        argmax[table.axis_names[d]] = table.axes[d][rest % table.axes[d].size()];
        rest /= table.axes[d].size();
    }
    out.add("scan.json", ctx.stamp({{"kind", kind},
                                    {"metric", table.metric_names.front()},
                                    {"max", v[best]},
                                    {"argmax", argmax}})
                                 .dump(2) +
                             "\n");
    *ctx.log << fmt::format("scan {}: max {} = {:.5f} at {}\n", kind, table.metric_names.front(),
                            v[best], argmax.dump());
}

void cmd_optimize_crystal(const Context& ctx, Outputs& out)
{
    const OpticalConfig cfg = parse_optics(ctx);
    const json& o = ctx.spec.at("optimize");
    CrystalOptOptions opts;
    opts.seed = seed_of(ctx);
    opts.sigma_over_length = o.value("sigma_over_length", opts.sigma_over_length);
    opts.max_outer = o.value("max_outer", opts.max_outer);
    opts.purity_tol = o.value("purity_tol", opts.purity_tol);
    opts.search = parse_zkernel(o.value("search", json()), opts.search);
    opts.verify = parse_zkernel(o.value("verify", json()), opts.verify);
    const CrystalOptResult r =
        optimize_crystal(cfg, o.at("order").get<int>(), o.value("xi0", 1.42), opts);

    json doc = ctx.stamp({{"optics", to_json(cfg)}, {"result", to_json(r)},
                          {"profile", to_json(r.profile())}});
    out.add("crystal.json", doc.dump(2) + "\n");
    *ctx.log << fmt::format("xi* = {:.4f}, P = {:.6f} after {} outer iterations{}\n", r.xi_star,
                            r.purity, r.outer_iterations, r.converged ? "" : " (not converged)");
}

void cmd_optimize_pump(const Context& ctx, Outputs& out)
{
    const OpticalConfig cfg = parse_optics(ctx);
    const Chi2Profile profile = parse_profile(ctx, ctx.spec.at("profile"), cfg);
    const PumpSpec base = parse_pump(ctx.spec.at("pump"), cfg);
    const json& range = ctx.spec.at("pump_modes");
    const auto modes = pump_mode_range(range.at("p_max").get<int>(), range.at("l_max").get<int>());
    const SubspaceBounds bounds = parse_bounds(ctx.spec.value("subspace", json()), {10, 8});
    MetricsOptions mopts;
    mopts.decompose = parse_decompose(ctx);
    const CollectionResult col = parse_collection(ctx.spec.value("collection", json::object()), cfg,
                                                  PumpSpec::gaussian(base.waist_um), profile, mopts);

    const ModeTensors tensors = cached_mode_tensors(cfg, base.waist_um, modes, profile, bounds,
                                                    col.w_s, col.w_i, mopts.decompose);
    PumpOptOptions popts;
    popts.restarts = ctx.spec.value("restarts", popts.restarts);
    const PumpOptResult r = optimize_pump(tensors, popts);

    json doc = ctx.stamp({{"optics", to_json(cfg)},
                          {"profile", to_json(profile)},
                          {"w_s_um", col.w_s},
                          {"w_i_um", col.w_i},
                          {"subspace", {{"H", bounds.H}, {"U", bounds.U}}},
                          {"result", to_json(r)}});
    out.add("pump.json", doc.dump(2) + "\n");
    *ctx.log << fmt::format("P = {:.6f} (Gaussian {:.6f}), R2 = {:.4f}, eta = {:.4f}\n", r.purity,
                            r.purity_gaussian, r.r2_smf, r.heralding);
}

PolingTarget parse_target(const Context& ctx, const OpticalConfig& cfg)
{
    const json& p = ctx.spec.at("poling");
    const Chi2Profile profile = parse_profile(ctx, ctx.spec.at("profile"), cfg);
    const double half_width = p.value("half_width_pi_over_length", 24.0) * kPi / cfg.length_um;
    return PolingTarget::from_profile(profile, p.at("domain_um").get<double>(), half_width,
                                      p.value("points", std::size_t{481}));
}

void cmd_pole(const Context& ctx, Outputs& out)
{
    const OpticalConfig cfg = parse_optics(ctx);
    const json& p = ctx.spec.at("poling");
    const PolingTarget target = parse_target(ctx, cfg);
    SynthesisOptions so;
    so.seed = seed_of(ctx);
    so.sweeps = p.value("sweeps", so.sweeps);
    const DomainPlan plan =
        synthesize(target, p.at("domains").get<std::size_t>(), target.domain_um, so);
    const PlanReport report = verify_plan(plan, target);

    std::ostringstream csv;
    write_plan_csv(plan, csv, ctx.meta());
    out.add("plan.csv", csv.str());
    std::ostringstream curve;
    write_report_csv(report, curve);
    out.add("plan_curve.csv", curve.str());
    out.add("plan.json", ctx.stamp({{"plan", to_json(plan)}, {"seed", so.seed}}).dump(2) + "\n");
    *ctx.log << fmt::format("fidelity {:.5f} (greedy {:.5f}), max deviation {:.4f}\n",
                            plan.fidelity, plan.greedy_fidelity, plan.max_deviation);
}

void cmd_verify_plan(const Context& ctx, Outputs& out)
{
    const OpticalConfig cfg = parse_optics(ctx);
    const PolingTarget target = parse_target(ctx, cfg);
    std::ifstream in(ctx.base / ctx.spec.at("plan_csv").get<std::string>());
    if (!in)
        throw ConfigError("cannot open plan_csv");
    const DomainPlan plan = read_plan_csv(in);
    const PlanReport report = verify_plan(plan, target);
    std::ostringstream curve;
    write_report_csv(report, curve);
    out.add("verify_curve.csv", curve.str());
    out.add("verify.json", ctx.stamp({{"domains", plan.domains()},
                                      {"domain_um", plan.domain_um},
                                      {"fidelity", report.fidelity},
                                      {"max_deviation", report.max_deviation}})
                                   .dump(2) +
                               "\n");
    *ctx.log << fmt::format("fidelity {:.5f}, max deviation {:.4f}\n", report.fidelity,
                            report.max_deviation);
}

const std::map<std::string, std::function<void(const Context&, Outputs&)>>& commands()
{
    static const std::map<std::string, std::function<void(const Context&, Outputs&)>> table{
        {"metrics", cmd_metrics},
        {"scan", cmd_scan},
        {"optimize-crystal", cmd_optimize_crystal},
        {"optimize-pump", cmd_optimize_pump},
        {"pole", cmd_pole},
        {"verify-plan", cmd_verify_plan}};
    return table;
}

}  // namespace

int run(const std::string& command, const RunOptions& opts, std::ostream& log)
{
    const auto start = std::chrono::steady_clock::now();
    Context ctx;
    ctx.opts = opts;
    ctx.log = &log;
    Outputs out;
    int code = kExitOk;
    std::string status = "ok";
    try {
        const auto it = commands().find(command);
        if (it == commands().end())
            throw ConfigError(fmt::format("unknown command '{}'", command));
        std::ifstream in(opts.config);
        if (!in)
            throw ConfigError(fmt::format("cannot open config {}", opts.config.string()));
        try {
            ctx.spec = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("malformed config: {}", e.what()));
        }
        if (!ctx.spec.is_object())
            throw ConfigError("config must be a JSON object");
        if (ctx.spec.contains("command") && ctx.spec.at("command").get<std::string>() != command)
            throw ConfigError(fmt::format("config is for '{}', not '{}'",
                                          ctx.spec.at("command").get<std::string>(), command));
        json keyed = ctx.spec;
        if (opts.seed)
            keyed["seed"] = *opts.seed;
        if (opts.tolerance)
            keyed["tolerance"] = *opts.tolerance;
        ctx.hash = hash_hex(config_hash(keyed));
        ctx.base = opts.config.parent_path();

        try {
            it->second(ctx, out);
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("config: {}", e.what()));
        }
        out.flush(opts.out);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        log << "numerical error: " << e.what() << '\n';
        try {
            out.flush(opts.out);
        } catch (const std::exception&) {
        }
        code = kExitNumerical;
        status = "numerical-error";
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        append_run_log(opts.out / "runs.jsonl", {{"command", command},
                                                 {"config", opts.config.string()},
                                                 {"config_hash", ctx.hash},
                                                 {"version", library_version()},
                                                 {"status", status},
                                                 {"wall_time_s", wall}});
    } catch (const std::exception& e) {
        log << "warning: " << e.what() << '\n';
    }
    return code;
}

}  // namespace spdc::cli
