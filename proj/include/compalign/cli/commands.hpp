#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "compalign/cli/run_config.hpp"

namespace compalign::cli {

// Each command returns a process exit code and never throws.

int cmd_decompose(const std::string& caption, const RunConfig& config, std::ostream& out,
                  std::ostream& err);

int cmd_score_pair(const std::string& caption, const std::filesystem::path& image,
                   const RunConfig& config, std::ostream& out, std::ostream& err);

/// Writes the report to config.out and prints the accuracy table.
int cmd_match(const std::filesystem::path& pairs, const std::filesystem::path& images,
              const RunConfig& config, std::ostream& out, std::ostream& err);

/// Baseline top-k then re-rank per query; prints the before/after recall table.
int cmd_retrieve(const std::filesystem::path& queries, const std::filesystem::path& corpus,
                 const RunConfig& config, std::ostream& out, std::ostream& err);

/// Stdout tables, rendered from a parsed report document.
std::string render_match_table(const Json& report);
std::string render_recall_table(const Json& report);

/// argv front-end used by the executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace compalign::cli
