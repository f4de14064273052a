#include "polarmig/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

#include "polarmig/types.hpp"

namespace polarmig {

namespace {
int g_threads = 0;
}

void set_threads(int n) {
  if (n < 0) throw ValidationError("thread count must be non-negative");
  g_threads = n;
}

int threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

void threads_from_env() {
  const char* v = std::getenv("POLARMIG_THREADS");
  if (!v || !*v) return;
  try {
    set_threads(std::stoi(v));
  } catch (const std::logic_error&) {
    throw ValidationError(std::string("POLARMIG_THREADS: not a thread count: ") + v);
  }
}

}  // namespace polarmig
