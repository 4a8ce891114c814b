#pragma once

#include "gzk/grid.hpp"

namespace gzk {

/// M[u] = integral of u^2.
double mass(const RealField2D& u);
/// E[u] = 1/2 |grad u|^2 - 1/(p+1) integral u^{p+1}, the general-p energy.
/// The p+1 power is integrated exactly for the band-limited u.
double energy(const RealField2D& u, int p);
/// W[u] = E[u] + M[u]/2.
double weinstein(const RealField2D& u, int p);
/// Exact integral of u^q for band-limited u (dealiased, q >= 2).
double integrate_power(const RealField2D& u, int q);

}  // namespace gzk
