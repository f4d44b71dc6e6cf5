#include "spdc/io.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

namespace spdc
{
namespace
{

static_assert(std::endian::native == std::endian::little, "binary artifacts assume little-endian");

void write_complex(std::ofstream& out, const Eigen::MatrixXcd& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double v[2] = {m(r, c).real(), m(r, c).imag()};
            out.write(reinterpret_cast<const char*>(v), sizeof v);
        }
    }
}

Eigen::MatrixXcd read_complex(std::ifstream& in, Eigen::Index rows, Eigen::Index cols)
{
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double v[2];
            in.read(reinterpret_cast<char*>(v), sizeof v);
            m(r, c) = cplx(v[0], v[1]);
        }
    }
    if (!in)
        throw ConfigError("binary artifact is truncated");
    return m;
}

std::filesystem::path data_path(const std::filesystem::path& path)
{
    std::filesystem::path p = path;
    p.replace_extension(".bin");
    return p;
}

nlohmann::json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open {}", path.string()));
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError(fmt::format("cannot write {}", path.string()));
    out << text;
}

}  // namespace

std::string library_version() { return SPDC_VERSION; }

std::uint64_t config_hash(const nlohmann::json& j)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

void save_matrix(const CoincidenceMatrix& m, const std::filesystem::path& path)
{
    const nlohmann::json header{{"H", m.bounds.H},
                                {"U", m.bounds.U},
                                {"w_s_um", m.w_s},
                                {"w_i_um", m.w_i},
                                {"captured_norm", m.captured_norm},
                                {"achieved_tol", m.achieved_tol},
                                {"rows", m.matrix.rows()},
                                {"cols", m.matrix.cols()},
                                {"layout", "row-major, signal-major, (re, im) float64 LE"},
                                {"data", data_path(path).filename().string()}};
    write_text(path, header.dump(2) + "\n");
    std::ofstream out(data_path(path), std::ios::binary);
    write_complex(out, m.matrix);
}

CoincidenceMatrix load_matrix(const std::filesystem::path& path)
{
    const nlohmann::json h = read_json(path);
    CoincidenceMatrix m;
    m.bounds = {h.at("H").get<int>(), h.at("U").get<int>()};
    m.bounds.validate();
    m.w_s = h.at("w_s_um").get<double>();
    m.w_i = h.at("w_i_um").get<double>();
    m.captured_norm = h.at("captured_norm").get<double>();
    m.achieved_tol = h.at("achieved_tol").get<double>();
    const auto rows = h.at("rows").get<Eigen::Index>();
    const auto cols = h.at("cols").get<Eigen::Index>();
    if (rows != static_cast<Eigen::Index>(m.bounds.dim()) || cols != rows)
        throw ConfigError("matrix header dimensions do not match its bounds");
    std::ifstream in(path.parent_path() / h.at("data").get<std::string>(), std::ios::binary);
    m.matrix = read_complex(in, rows, cols);
    return m;
}

void save_tensors(const ModeTensors& t, const std::filesystem::path& path)
{
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& [p, l] : t.pump_modes)
        modes.push_back({p, l});
    const nlohmann::json header{{"H", t.bounds.H},
                                {"U", t.bounds.U},
                                {"w_p_um", t.w_p},
                                {"w_s_um", t.w_s},
                                {"w_i_um", t.w_i},
                                {"pump_modes", modes},
                                {"achieved_tol", t.achieved_tol},
                                {"radial", t.radial},
                                {"azimuthal", t.azimuthal},
                                {"version", library_version()},
                                {"data", data_path(path).filename().string()}};
    write_text(path, header.dump(2) + "\n");
    std::ofstream out(data_path(path), std::ios::binary);
    for (const auto& b : t.blocks)
        write_complex(out, b);
    write_complex(out, t.gram);
    write_complex(out, t.singles);
}

ModeTensors load_tensors(const std::filesystem::path& path)
{
    const nlohmann::json h = read_json(path);
    ModeTensors t;
    t.bounds = {h.at("H").get<int>(), h.at("U").get<int>()};
    t.bounds.validate();
    t.w_p = h.at("w_p_um").get<double>();
    t.w_s = h.at("w_s_um").get<double>();
    t.w_i = h.at("w_i_um").get<double>();
    for (const auto& m : h.at("pump_modes"))
        t.pump_modes.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
    t.achieved_tol = h.at("achieved_tol").get<double>();
    t.radial = h.at("radial").get<std::size_t>();
    t.azimuthal = h.at("azimuthal").get<std::size_t>();
    std::ifstream in(path.parent_path() / h.at("data").get<std::string>(), std::ios::binary);
    const auto dim = static_cast<Eigen::Index>(t.bounds.dim());
    const auto n = static_cast<Eigen::Index>(t.pump_modes.size());
    for (Eigen::Index k = 0; k < n; ++k)
        t.blocks.push_back(read_complex(in, dim, dim));
    t.gram = read_complex(in, n, n);
    t.singles = read_complex(in, n, n);
    return t;
}

std::optional<std::filesystem::path> cache_directory()
{
    const char* dir = std::getenv("SPDC_FORGE_CACHE");
    if (dir == nullptr || *dir == '\0')
        return std::nullopt;
    return std::filesystem::path(dir);
}

ModeTensors cached_mode_tensors(const OpticalConfig& cfg, double w_p,
                                const std::vector<std::pair<int, int>>& pump_modes,
                                const Chi2Profile& profile, const SubspaceBounds& bounds,
                                double w_s, double w_i, const DecomposeOptions& opts)
{
    const auto dir = cache_directory();
    if (!dir)
        return build_mode_tensors(cfg, w_p, pump_modes, profile, bounds, w_s, w_i, opts);

    nlohmann::json modes = nlohmann::json::array();
    for (const auto& [p, l] : pump_modes)
        modes.push_back({p, l});
    const nlohmann::json key{{"config", to_json(cfg)},
                             {"w_p", w_p},
                             {"modes", modes},
                             {"profile", to_json(profile)},
                             {"H", bounds.H},
                             {"U", bounds.U},
                             {"w_s", w_s},
                             {"w_i", w_i},
                             {"rel_tol", opts.rel_tol},
                             {"radial", opts.radial},
                             {"azimuthal", opts.azimuthal},
                             {"max_refinements", opts.max_refinements},
                             {"version", library_version()}};
    const auto path = *dir / fmt::format("tensors-{}.json", hash_hex(config_hash(key)));
    if (std::filesystem::exists(path) && std::filesystem::exists(data_path(path)))
        return load_tensors(path);
    ModeTensors t = build_mode_tensors(cfg, w_p, pump_modes, profile, bounds, w_s, w_i, opts);
    std::filesystem::create_directories(*dir);
    save_tensors(t, path);
    return t;
}

void append_run_log(const std::filesystem::path& path, const nlohmann::json& record)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::app);
    if (!out)
        throw ConfigError(fmt::format("cannot append to {}", path.string()));
    out << record.dump() << '\n';
}

}  // namespace spdc
