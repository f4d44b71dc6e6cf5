#include <doctest.h>

#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "helpers.hpp"
#include "spdc/optimizer.hpp"
#include "spdc/poling.hpp"

using namespace spdc;
namespace fs = std::filesystem;

namespace
{

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

int run(const std::string& command, const fs::path& config, const fs::path& out,
        std::optional<std::uint64_t> seed = {})
{
    std::ostringstream log;
    cli::RunOptions o;
    o.config = config;
    o.out = out;
    o.seed = seed;
    return cli::run(command, o, log);
}

const char* kUnitOptics =
    R"("optics": {"lambda_p_nm": 775, "lambda_s_nm": 1550, "crystal_length_mm": 2, "dispersion": "unit"})";

}  // namespace

TEST_SUITE("cli")
{
    TEST_CASE("metrics on the unit configuration")
    {
        const testcfg::TempDir dir;
        const fs::path cfg = fs::path(SPDC_SOURCE_DIR) / "configs" / "unit-toy.json";
        REQUIRE(run("metrics", cfg, dir.path() / "a") == cli::kExitOk);
        const auto doc = nlohmann::json::parse(slurp(dir.path() / "a" / "metrics.json"));
        const auto& m = doc.at("cases").at(0).at("metrics");
        const double p = m.at("purity").get<double>();
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
        CHECK(m.at("schmidt").get<double>() == doctest::Approx(1.0 / p).epsilon(1e-14));
        CHECK(m.at("heralding").get<double>() >= m.at("r2_smf").get<double>());
        CHECK(doc.at("config_hash").get<std::string>().size() == 16);
        CHECK(fs::exists(dir.path() / "a" / "metrics.txt"));
        CHECK(nlohmann::json::parse(slurp(dir.path() / "a" / "runs.jsonl")).at("status") == "ok");

        REQUIRE(run("metrics", cfg, dir.path() / "b") == cli::kExitOk);
        CHECK(slurp(dir.path() / "a" / "metrics.json") == slurp(dir.path() / "b" / "metrics.json"));
        CHECK(slurp(dir.path() / "a" / "metrics.txt") == slurp(dir.path() / "b" / "metrics.txt"));
    }

    TEST_CASE("configuration errors exit with code 2 and write nothing")
    {
        const testcfg::TempDir dir;
        const fs::path bad = dir.path() / "bad.json";
        write_text(bad, "{\"command\": \"metrics\", \"optics\": {");
        CHECK(run("metrics", bad, dir.path() / "o1") == cli::kExitConfig);
        CHECK(!fs::exists(dir.path() / "o1"));

        const fs::path missing = dir.path() / "missing.json";
        write_text(missing, std::string("{") + kUnitOptics + "}");
        CHECK(run("metrics", missing, dir.path() / "o2") == cli::kExitConfig);
        CHECK(!fs::exists(dir.path() / "o2"));

        CHECK(run("scan", fs::path(SPDC_SOURCE_DIR) / "configs" / "unit-toy.json",
                  dir.path() / "o3") == cli::kExitConfig);
        CHECK(run("no-such-command", missing, dir.path() / "o4") == cli::kExitConfig);
        CHECK(run("metrics", dir.path() / "nope.json", dir.path() / "o5") == cli::kExitConfig);
        CHECK(!fs::exists(dir.path() / "o3"));
    }

    TEST_CASE("truncation failure exits with code 3 and a partial report")
    {
        const testcfg::TempDir dir;
        const fs::path cfg = dir.path() / "tiny.json";
        write_text(cfg, std::string("{") + kUnitOptics + R"(, "cases": [{"name": "tiny",
            "profile": {"kind": "constant"}, "pump": {"xi": 1.0}, "collection": {"xi": 1.0},
            "force_mode_path": true, "subspace": {"H": 0, "U": 0}}]})");
        CHECK(run("metrics", cfg, dir.path() / "o") == cli::kExitNumerical);
        const auto doc = nlohmann::json::parse(slurp(dir.path() / "o" / "metrics.json"));
        CHECK(doc.at("error").at("case") == "tiny");
        CHECK(nlohmann::json::parse(slurp(dir.path() / "o" / "runs.jsonl")).at("status") ==
              "numerical-error");
    }

    TEST_CASE("scan output parses")
    {
        const testcfg::TempDir dir;
        const fs::path cfg = dir.path() / "scan.json";
        write_text(cfg, std::string("{") + kUnitOptics + R"(, "profile": {"kind": "constant"},
            "scan": {"kind": "xi", "xi_p": {"min": 0.5, "max": 4, "points": 5, "log": true},
                     "zkernel": {"outer": 24, "inner": 32}}})");
        REQUIRE(run("scan", cfg, dir.path() / "o") == cli::kExitOk);
        std::ifstream in(dir.path() / "o" / "scan.csv");
        const ScanTable t = read_scan_csv(in);
        CHECK(t.points() == 5);
        const auto summary = nlohmann::json::parse(slurp(dir.path() / "o" / "scan.json"));
        double best = 0.0;
        for (double v : t.values.front())
            best = std::max(best, v);
        CHECK(summary.at("max").get<double>() == best);
    }

    TEST_CASE("pole and verify-plan agree")
    {
        const testcfg::TempDir dir;
        const fs::path cfg = dir.path() / "pole.json";
        write_text(cfg, std::string("{") +
                            R"("optics": {"lambda_p_nm": 775, "lambda_s_nm": 1550, "crystal_length_mm": 4.6},
            "profile": {"kind": "gaussian", "sigma_over_length": 0.25},
            "poling": {"domains": 200, "domain_um": 23, "points": 121, "sweeps": 20},
            "plan_csv": "o/plan.csv"})");
        REQUIRE(run("pole", cfg, dir.path() / "o", 3) == cli::kExitOk);
        std::ifstream in(dir.path() / "o" / "plan.csv");
        const DomainPlan plan = read_plan_csv(in);
        CHECK(plan.domains() == 200);
        const auto pj = nlohmann::json::parse(slurp(dir.path() / "o" / "plan.json"));
        CHECK(pj.at("seed") == 3);

        REQUIRE(run("verify-plan", cfg, dir.path() / "v") == cli::kExitOk);
        const auto vj = nlohmann::json::parse(slurp(dir.path() / "v" / "verify.json"));
        CHECK(vj.at("fidelity").get<double>() ==
              doctest::Approx(pj.at("plan").at("fidelity").get<double>()).epsilon(1e-12));
    }
}
