#pragma once

#include <filesystem>
#include <optional>

#include "viscon/farm/stats.hpp"
#include "viscon/farm/task.hpp"

namespace viscon::farm {

struct LocalOptions {
  unsigned workers = 1;
  // When set, the manifest is rewritten here after every task completes.
  std::optional<std::filesystem::path> persist_path;
};

// Executes every task not already DONE (with its output present) on a pool of
// `workers` threads. Per-task failures become FAILED with a message. Returns
// stats over the tasks executed by this call.
FarmStats run_local(TaskManifest& manifest, const LocalOptions& options);

// Loads the manifest, runs it, writes it back.
FarmStats run_local(const std::filesystem::path& manifest_path, unsigned workers);

}  // namespace viscon::farm
