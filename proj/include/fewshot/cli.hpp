#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fewshot::cli {

/// Entry point of the `fewshot` tool. Returns the process exit code; errors
/// are written to `err` as one JSON object per line (or prose with --pretty).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fewshot::cli
