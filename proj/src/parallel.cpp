#include "smoothgate/numerics/parallel.hpp"

#include <cstdlib>
#include <string>

namespace smoothgate::numerics {

std::size_t default_workers() {
  if (const char* env = std::getenv("PULSE_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace smoothgate::numerics
