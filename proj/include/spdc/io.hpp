#ifndef SPDC_IO_HPP
#define SPDC_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "spdc/biphoton.hpp"

namespace spdc
{

std::string library_version();

// 64-bit FNV-1a of the canonical (key-sorted, compact) JSON dump.
std::uint64_t config_hash(const nlohmann::json& j);
std::string hash_hex(std::uint64_t h);

// Header JSON (bounds, waists, captured_norm, layout) at `path` plus the
// entries as little-endian (re, im) double pairs in row-major, signal-major
// order at `path` with extension ".bin".
void save_matrix(const CoincidenceMatrix& m, const std::filesystem::path& path);
CoincidenceMatrix load_matrix(const std::filesystem::path& path);

void save_tensors(const ModeTensors& t, const std::filesystem::path& path);
ModeTensors load_tensors(const std::filesystem::path& path);

// Directory named by SPDC_FORGE_CACHE, if set and non-empty.
std::optional<std::filesystem::path> cache_directory();

// build_mode_tensors, memoized in the cache directory when one is set.
ModeTensors cached_mode_tensors(const OpticalConfig& cfg, double w_p,
                                const std::vector<std::pair<int, int>>& pump_modes,
                                const Chi2Profile& profile, const SubspaceBounds& bounds,
                                double w_s, double w_i, const DecomposeOptions& opts = {});

// Appends one compact JSON line, creating parent directories.
void append_run_log(const std::filesystem::path& path, const nlohmann::json& record);

}  // namespace spdc

#endif  // SPDC_IO_HPP
