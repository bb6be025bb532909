#include "nlwave/parallel.hpp"

#include <cstdlib>
#include <string>

namespace nlwave {

std::size_t worker_count() {
  if (const char* env = std::getenv("NLWAVE_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace nlwave
