#pragma once

#include "gzk/grid.hpp"

namespace gzk::fft {

/// Unnormalised 2D real-to-complex transform of an n1 x n2 row-major array into
/// n1 x (n2/2+1) coefficients. The input is preserved. Both buffers must come
/// from AlignedAllocator.
void r2c(int n1, int n2, const double* in, Complex* out);

/// Unnormalised inverse of r2c. The input buffer is overwritten.
void c2r(int n1, int n2, Complex* in, double* out);

/// Smallest size >= n of the form 2^a 3^b 5^c with a >= 1.
int good_size(int n);

}  // namespace gzk::fft
