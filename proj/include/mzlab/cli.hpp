#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mzlab {

/// Returns the process exit code; usage and config errors give 2.
int run_command(const std::string& command, const std::string& config_path,
                const std::vector<std::string>& overrides, const std::optional<std::string>& out_dir,
                std::ostream& out, std::ostream& err);

/// Entry point behind the `mzlab` executable.
int cli_main(int argc, char** argv);

const std::vector<std::string>& command_names();

}  // namespace mzlab
