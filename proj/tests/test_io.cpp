#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "helpers.hpp"
#include "spdc/io.hpp"

using namespace spdc;

namespace
{

std::size_t file_count(const std::filesystem::path& dir)
{
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir))
        ++n;
    return n;
}

}  // namespace

TEST_SUITE("io")
{
    TEST_CASE("config hash is canonical")
    {
        const auto a = nlohmann::json::parse(R"({"b": 1, "a": [1, 2], "c": {"y": 0.5, "x": "s"}})");
        const auto b = nlohmann::json::parse(R"({"c": {"x": "s", "y": 0.5}, "a": [1, 2], "b": 1})");
        CHECK(config_hash(a) == config_hash(b));
        CHECK(config_hash(a) != config_hash(nlohmann::json::parse(R"({"b": 2})")));
        // FNV-1a offset basis for the empty string; "null" is hashed for a null document.
        CHECK(hash_hex(0xcbf29ce484222325ULL) == "cbf29ce484222325");
        CHECK(hash_hex(1).size() == 16);
        CHECK(!library_version().empty());
    }

    TEST_CASE("matrix and tensor round trips are exact")
    {
        const testcfg::TempDir dir;
        const OpticalConfig cfg = testcfg::unit();
        const double w_p = testcfg::pump_waist(cfg, 1.0);
        const Chi2Profile profile = testcfg::cosine_crystal(cfg.length_um);
        const ModeTensors t = build_mode_tensors(cfg, w_p, {{0, 0}, {0, 1}}, profile, {2, 2},
                                                 1.4 * w_p, 1.3 * w_p);
        Eigen::VectorXcd a(2);
        a << 0.8, cplx(0.0, 0.6);
        const CoincidenceMatrix m = coincidence_matrix(t, a);

        save_matrix(m, dir.path() / "m.json");
        CHECK(std::filesystem::exists(dir.path() / "m.bin"));
        const CoincidenceMatrix mb = load_matrix(dir.path() / "m.json");
        CHECK(mb.matrix == m.matrix);
        CHECK(mb.captured_norm == m.captured_norm);
        CHECK(mb.w_s == m.w_s);
        CHECK(mb.bounds.H == m.bounds.H);

        save_tensors(t, dir.path() / "t.json");
        const ModeTensors tb = load_tensors(dir.path() / "t.json");
        CHECK(tb.pump_modes == t.pump_modes);
        REQUIRE(tb.blocks.size() == t.blocks.size());
        for (std::size_t k = 0; k < t.blocks.size(); ++k)
            CHECK(tb.blocks[k] == t.blocks[k]);
        CHECK(tb.gram == t.gram);
        CHECK(tb.singles == t.singles);
        CHECK(tb.w_p == t.w_p);

        CHECK_THROWS(load_matrix(dir.path() / "missing.json"));
        std::filesystem::resize_file(dir.path() / "m.bin", 16);
        CHECK_THROWS(load_matrix(dir.path() / "m.json"));
    }

    TEST_CASE("tensor cache")
    {
        const testcfg::TempDir dir;
        ::setenv("SPDC_FORGE_CACHE", dir.path().c_str(), 1);
        REQUIRE(cache_directory().has_value());
        const OpticalConfig cfg = testcfg::unit();
        const double w_p = testcfg::pump_waist(cfg, 1.0);
        const Chi2Profile profile = Chi2Profile::gaussian(cfg.length_um, 0.25 * cfg.length_um);
        const ModeTensors first = cached_mode_tensors(cfg, w_p, {{0, 0}}, profile, {2, 1}, w_p, w_p);
        const std::size_t files = file_count(dir.path());
        CHECK(files > 0);
        const ModeTensors second = cached_mode_tensors(cfg, w_p, {{0, 0}}, profile, {2, 1}, w_p, w_p);
        CHECK(file_count(dir.path()) == files);
        CHECK(second.blocks[0] == first.blocks[0]);
        cached_mode_tensors(cfg, w_p, {{0, 0}}, profile, {2, 2}, w_p, w_p);
        CHECK(file_count(dir.path()) > files);
        ::unsetenv("SPDC_FORGE_CACHE");
        CHECK(!cache_directory().has_value());
    }

    TEST_CASE("run log appends lines")
    {
        const testcfg::TempDir dir;
        const auto log = dir.path() / "sub" / "runs.jsonl";
        append_run_log(log, {{"n", 1}});
        append_run_log(log, {{"n", 2}});
        std::ifstream in(log);
        std::string line;
        int n = 0;
        while (std::getline(in, line))
            CHECK(nlohmann::json::parse(line).at("n") == ++n);
        CHECK(n == 2);
    }
}
