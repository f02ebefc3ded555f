#pragma once

#include <CLI11.hpp>

namespace bicr::cli {

// Adds every subcommand to `app`; each one runs from its own callback.
void register_commands(CLI::App& app);

}  // namespace bicr::cli
