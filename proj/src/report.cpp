#include "fbmavg/report.hpp"

#include <array>
#include <charconv>

namespace fbmavg {

std::string format_double(double v) {
    std::array<char, 32> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void write_paths_csv(std::ostream& out, std::span<const FbmPath> paths) {
    out << "path_id,t,value\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const FbmPath& path = paths[p];
        for (std::size_t i = 0; i < path.size(); ++i) {
            out << p << ',' << format_double(path.grid().node(i)) << ',' << format_double(path[i]) << '\n';
        }
    }
}

void write_trajectories_csv(std::ostream& out, const PairedEnsemble& run) {
    out << "replicate,t,x,z\n";
    for (std::size_t r = 0; r < run.kept.size(); ++r) {
        const auto& [x, z] = run.kept[r];
        for (std::size_t i = 0; i < x.grid().n_nodes(); ++i) {
            out << r << ',' << format_double(x.grid().node(i)) << ',' << format_double(x.at(i)) << ','
                << format_double(z.at(i)) << '\n';
        }
    }
}

void write_mse_csv(std::ostream& out, const PairedEnsemble& run) {
    out << "t,mse,ci_lo,ci_hi\n";
    for (std::size_t i = 0; i < run.mse.size(); ++i) {
        out << format_double(run.grid.node(i)) << ',' << format_double(run.mse[i]) << ','
            << format_double(run.mse_ci_lo[i]) << ',' << format_double(run.mse_ci_hi[i]) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "epsilon,sup_mse,mse_ci_lo,mse_ci_hi,exceedance,exc_ci_lo,exc_ci_hi\n";
    for (const SweepRow& row : sweep.rows) {
        out << format_double(row.epsilon) << ',' << format_double(row.sup_mse) << ','
            << format_double(row.mse_ci.lo) << ',' << format_double(row.mse_ci.hi) << ','
            << format_double(row.exceedance) << ',' << format_double(row.exceedance_ci.lo) << ','
            << format_double(row.exceedance_ci.hi) << '\n';
    }
}

}  // namespace fbmavg
