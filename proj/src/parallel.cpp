#include "spdc/parallel.hpp"

#include <cstdlib>
#include <string>

#include "spdc/errors.hpp"

namespace spdc {

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SPDC_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("SPDC_THREADS must be a positive integer, got '") + env + "'");
    }
    return 1;
}

}  // namespace spdc
