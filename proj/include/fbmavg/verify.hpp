#pragma once

// Property suite behind `fbmavg verify`: generator laws, integral identities,
// averaging conditions and the epsilon-trend checks for the example systems.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fbmavg {

enum class VerifySuite { fgn, integrals, averaging, theorems, all };
enum class Budget { quick, full };

std::string_view to_string(VerifySuite s);
std::string_view to_string(Budget b);
VerifySuite parse_verify_suite(std::string_view s);
Budget parse_budget(std::string_view s);

struct Check {
    /// Stable identifier, e.g. "fgn.covariance[circulant,H=0.55]".
    std::string id;
    std::string suite;
    bool passed = false;
    std::string tolerance;
    std::vector<std::pair<std::string, double>> statistics;
    std::string detail;
    double wall_ms = 0.0;
};

struct VerifyReport {
    VerifySuite suite = VerifySuite::all;
    Budget budget = Budget::quick;
    std::vector<Check> checks;

    bool all_passed() const;
    const Check* find(std::string_view id) const;
};

/// Sample sizes per budget. `full` uses the desk-scale sizes (5000 paths,
/// 2000 replicates, 100 Hurst seeds); `quick` scales them down.
struct BudgetSizes {
    std::size_t fgn_paths;
    std::size_t hurst_seeds;
    std::size_t coincidence_paths;
    std::size_t replicates;
};

BudgetSizes budget_sizes(Budget b);

/// `threads` <= 0 uses the OpenMP default; results do not depend on it.
VerifyReport run_verify(VerifySuite suite, Budget budget, int threads = 0);

}  // namespace fbmavg
