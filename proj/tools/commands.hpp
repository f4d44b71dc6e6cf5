#ifndef SPDC_TOOLS_COMMANDS_HPP
#define SPDC_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace spdc::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunOptions
{
    std::filesystem::path config;
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
};

// Runs one command ("metrics", "scan", "optimize-crystal", "optimize-pump",
// "pole", "verify-plan") and maps failures to exit codes. Progress and
// errors go to `log`.
int run(const std::string& command, const RunOptions& opts, std::ostream& log);

}  // namespace spdc::cli

#endif  // SPDC_TOOLS_COMMANDS_HPP
