#include "gridctrl/parallel.hpp"

#include <cstdlib>
#include <string>

namespace gridctrl {

int worker_count() {
  int requested = 0;
  if (const char* env = std::getenv("GRIDCTRL_THREADS")) {
    try {
      requested = std::stoi(env);
    } catch (const std::exception&) {
      requested = 0;
    }
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace gridctrl
