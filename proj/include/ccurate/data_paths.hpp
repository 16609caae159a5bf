#pragma once

#include <filesystem>

namespace ccurate {

/// Root of the bundled data files. `CCURATE_DATA_DIR` in the environment
/// overrides the directory compiled into the library.
std::filesystem::path data_dir();

} // namespace ccurate
