#ifndef VTUBE_BENCH_HPP
#define VTUBE_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vtube/tube.hpp"

namespace vtube {

struct BenchConfig {
    std::vector<int> k_values{125, 250, 500, 1000};
    std::vector<double> epsilons;  // defaults to the tube's epsilon when empty
    int repetitions = 3;
    std::uint64_t seed = 1;
    /// Direct-LP timing subsample (full k direct solves would dwarf the
    /// affine path by construction).
    int lp_probe = 200;
};

struct BenchRow {
    double epsilon = 0.0;
    int leaf_count = 0;
    double partition_seconds = 0.0;
    int k = 0;
    double affine_total_seconds = 0.0;
    double affine_per_trajectory = 0.0;
    double lp_per_trajectory = 0.0;
};

struct BenchReport {
    int nt = 0;
    int kc = 0;
    std::vector<BenchRow> rows;

    /// Break-even trajectory count lambda(eps)(nt+kc)^3/(nt^3-nt) from the
    /// complexity model, and the measured equivalent.
    double predicted_crossover(double epsilon) const;
    double empirical_crossover(double epsilon) const;
    /// R^2 of the affine generation total time against k.
    double generation_fit_r2(double epsilon) const;

    std::string to_csv() const;
};

/// Measure partition time per epsilon and per-trajectory generation cost of
/// the affine path against direct LP solves on the same machine. Medians of
/// at least `repetitions` runs; short loops are batched until the monotonic
/// clock resolves them.
BenchReport run_bench(const VirtualTube& tube, const BenchConfig& config);

}  // namespace vtube

#endif  // VTUBE_BENCH_HPP
