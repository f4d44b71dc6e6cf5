#ifndef SPDC_TESTS_HELPERS_HPP
#define SPDC_TESTS_HELPERS_HPP

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "spdc/chi2.hpp"
#include "spdc/optics.hpp"

namespace testcfg
{

inline spdc::OpticalConfig ktp() { return spdc::make_config(775.0, 1550.0, 29.9, "ktp-typeII"); }
inline spdc::OpticalConfig unit(double length_mm = 2.0)
{
    return spdc::make_config(775.0, 1550.0, length_mm, "unit");
}

inline const std::vector<double>& published_coeffs()
{
    static const std::vector<double> c{-0.2904, 0.6799, -0.4851, 0.3903,
                                       -0.2195, 0.1242,  -0.0440, 0.01487};
    return c;
}

inline spdc::Chi2Profile cosine_crystal(double length_um)
{
    return spdc::Chi2Profile::cosine(length_um, published_coeffs(), 0.25 * length_um);
}

inline double pump_waist(const spdc::OpticalConfig& cfg, double xi)
{
    return spdc::waist_from_xi(cfg, {xi}, cfg.k_p);
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir
{
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("spdc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testcfg

#endif  // SPDC_TESTS_HELPERS_HPP
