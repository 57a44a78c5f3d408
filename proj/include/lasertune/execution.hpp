#pragma once

namespace lasertune {

/// Selects between the serial reference loop and the OpenMP kernel. Both
/// paths produce bit-identical results; the serial one is kept for testing.
enum class Execution { serial, parallel };

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();

/// Overrides the OpenMP thread count for subsequent parallel kernels.
void set_threads(int n);

}  // namespace lasertune
