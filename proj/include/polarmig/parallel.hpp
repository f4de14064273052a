#pragma once

namespace polarmig {

// Thread count used by parallel kernels. Zero restores the runtime default.
void set_threads(int n);
int threads();

// Reads POLARMIG_THREADS if set.
void threads_from_env();

}  // namespace polarmig
