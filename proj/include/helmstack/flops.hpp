#pragma once

#include <cstdint>

namespace helmstack {

/// Work ledger. Costs are measured by counting stored nonzeros touched
/// (one unit per nonzero), not hardware flops. `cycle` collects smoothing,
/// residual, intergrid and right-hand-side distribution work; `coarse`
/// collects coarsest-grid factor solves so cycle costs can be reported
/// with and without the direct-solve part.
struct FlopLedger {
  std::uint64_t cycle = 0;
  std::uint64_t coarse = 0;
  std::uint64_t other = 0;

  void reset() { cycle = coarse = other = 0; }
  std::uint64_t total() const { return cycle + coarse + other; }
};

}  // namespace helmstack
