#include "fbmavg/ensemble.hpp"

#include <exception>
#include <optional>

#include "fbmavg/seeding.hpp"
#include "parallel.hpp"

namespace fbmavg {

FbmPath generate_member(const FbmGenerator& generator, std::uint64_t seed, std::size_t r) {
    const auto noise = standard_normal(generator.noise_size(), stream_seed(seed, r, 0));
    return generator.generate(noise);
}

std::vector<FbmPath> generate_ensemble(const FbmGenerator& generator, std::size_t count,
                                       std::uint64_t seed, int threads) {
    std::vector<std::optional<FbmPath>> slots(count);
    std::exception_ptr error;
    const int nthreads = detail::resolve_threads(threads);
    const auto n = static_cast<std::ptrdiff_t>(count);

#pragma omp parallel for schedule(static) num_threads(nthreads) if (nthreads != 1)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        try {
            slots[r].emplace(generate_member(generator, seed, static_cast<std::size_t>(r)));
        } catch (...) {
#pragma omp critical(fbmavg_ensemble_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    std::vector<FbmPath> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::vector<FbmPath> generate_ensemble_serial(const FbmGenerator& generator, std::size_t count,
                                              std::uint64_t seed) {
    std::vector<FbmPath> out;
    out.reserve(count);
    for (std::size_t r = 0; r < count; ++r) out.push_back(generate_member(generator, seed, r));
    return out;
}

}  // namespace fbmavg
