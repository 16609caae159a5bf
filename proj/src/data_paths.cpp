#include "ccurate/data_paths.hpp"

#include <cstdlib>

#ifndef CCURATE_DEFAULT_DATA_DIR
#define CCURATE_DEFAULT_DATA_DIR "data"
#endif

namespace ccurate {

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("CCURATE_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return CCURATE_DEFAULT_DATA_DIR;
}

} // namespace ccurate
