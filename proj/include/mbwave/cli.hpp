#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mbwave/solver.hpp"

namespace mbwave {

struct RunOptions {
    std::optional<std::string> out;  // overrides the config's output directory
    std::optional<GridSpec> grid;
    std::optional<std::uint64_t> seed;
};

const std::vector<std::string>& subcommands();

// "400x1200" -> {400, 1200}; throws std::invalid_argument otherwise.
GridSpec parse_grid(const std::string& s);

// Runs one subcommand: 0 when every declared tolerance passes, 1 on a tolerance failure,
// 2 on a config or precondition error. Artifacts and manifest.json go to the output directory.
int dispatch(const std::string& subcommand, const std::string& config_path, const RunOptions& opt, std::ostream& out,
             std::ostream& err);

}  // namespace mbwave
