#pragma once

namespace gk {

// Invariant suite behind the `selftest` subcommand: pipeline shape chain,
// physics spot checks, CFAR calibration sanity, f64 gradient checks and
// in-memory serialization round-trips. Returns true when every check holds.
bool run_selftest(bool verbose);

}  // namespace gk
