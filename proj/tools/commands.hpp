#pragma once

#include <filesystem>
#include <string>

#include "config.hpp"

namespace fadrc::cli {

// Writes to a sibling temp file and renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

int cmd_mse(const RunConfig& rc);
int cmd_bode(const RunConfig& rc);
int cmd_step(const RunConfig& rc);
int cmd_design(const RunConfig& rc);
int cmd_stability(const RunConfig& rc);
int cmd_pmsm(const RunConfig& rc);

} // namespace fadrc::cli
