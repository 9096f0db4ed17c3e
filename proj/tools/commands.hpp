#pragma once

#include "config.hpp"

#include <json.hpp>

#include <string>

namespace kamred::cli {

using ojson = nlohmann::ordered_json;

struct RunContext {
    std::string out_dir;
    unsigned seed = 12345;
};

/// Dispatches the config's command, writes report.json and the per-command
/// side files under ctx.out_dir, and returns the report.  Throws on error;
/// main() turns that into an error block and a nonzero exit status.
ojson run_experiment(const Config& cfg, const RunContext& ctx);

} // namespace kamred::cli
