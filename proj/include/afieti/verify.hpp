#pragma once

#include "afieti/experiment.hpp"

#include <string>
#include <vector>

namespace afieti {

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;  ///< measured quantity
    double limit = 0.0;  ///< pass threshold
};

/// Invariant and oracle checks on one problem: geometry, rigid modes, projectors, the initial
/// multiplier, FD and Schur blocks against dense elimination, and AF-IETI against the direct solve.
/// `seed` drives the random probe vectors.
std::vector<CheckResult> run_verification(const Problem& problem, Variant variant, unsigned seed);

}  // namespace afieti
