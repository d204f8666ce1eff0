#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evograph {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::optional<std::string> out_dir;
    bool approve = false;
};

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err, std::istream& in);
int cmd_validate(const std::string& config_path, const std::vector<std::string>& overrides, std::ostream& out,
                 std::ostream& err);
/// 0 when the scenario meets its pass bar, 1 when it does not.
int cmd_scenario(const std::string& name, std::ostream& out, std::ostream& err, int threads = 1);

/// Entry point shared by the executable and the tests.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in);

}  // namespace evograph
