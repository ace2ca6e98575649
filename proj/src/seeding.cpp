#include "fbmavg/seeding.hpp"

#include <random>

namespace fbmavg {

void fill_standard_normal(std::span<double> out, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : out) x = normal(engine);
}

std::vector<double> standard_normal(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    fill_standard_normal(v, seed);
    return v;
}

}  // namespace fbmavg
