#include "rsir/parallel.hpp"

#include <cstdlib>
#include <string>

namespace rsir {

std::size_t worker_count() {
    if (const char* env = std::getenv("RSIR_WORKERS")) {
        try {
            const long n = std::stol(env);
            if (n >= 1) return static_cast<std::size_t>(n);
        } catch (...) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace rsir
