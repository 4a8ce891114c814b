#pragma once

#include <memory>

#include "gzk/groundstate.hpp"
#include "gzk/linearized.hpp"
#include "gzk/modulation.hpp"

namespace fixtures {

// p = 4 ground state on the default 256^2 grid of side 32, computed once.
inline std::shared_ptr<const gzk::GroundState> ground4() {
  static const auto q = std::make_shared<const gzk::GroundState>(
      gzk::solve_ground_state(4, gzk::SpectralGrid(256, 32.0)));
  return q;
}

inline const gzk::LinearizedOperator& op4() {
  static const gzk::LinearizedOperator op(ground4());
  return op;
}

inline const gzk::EigenPair& chi0_4() {
  static const gzk::EigenPair e = gzk::lowest_spectrum(op4(), 1).front();
  return e;
}

inline const gzk::ModulationBasis& basis4() {
  static const gzk::ModulationBasis b = gzk::ModulationBasis::build(ground4());
  return b;
}

}  // namespace fixtures
