#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oaae {

// Fault injection points for exercising the self-test harness itself.
enum class Fault { none, ole_grad_sign };

struct CheckResult {
    std::string name;
    double margin = 0.0;    // measured worst-case error
    double tolerance = 0.0; // the bound it must stay under
    bool pass = false;
};

// Numerical self-test: finite-difference and oracle checks over the SVD,
// nuclear-norm subgradient, OLE gradient, every layer kind, and the AUROC
// ranking. Deterministic for a given seed.
std::vector<CheckResult> run_checks(std::uint64_t seed, Fault fault = Fault::none);

} // namespace oaae
