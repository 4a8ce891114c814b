#include "gzk/functionals.hpp"

#include "gzk/errors.hpp"
#include "gzk/spectral.hpp"

namespace gzk {

double mass(const RealField2D& u) { return inner(u, u); }

double integrate_power(const RealField2D& u, int q) {
  if (q < 2) throw InvalidArgument("integrate_power needs q >= 2");
  if (q == 2) return inner(u, u);
  // integral of P(u^{q-1}) u equals integral of u^q when u is band-limited.
  return inner(dealiased_power(u, q - 1), u);
}

double energy(const RealField2D& u, int p) {
  return 0.5 * gradient_norm_squared(u) - integrate_power(u, p + 1) / (p + 1);
}

double weinstein(const RealField2D& u, int p) { return energy(u, p) + 0.5 * mass(u); }

}  // namespace gzk
