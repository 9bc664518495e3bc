#include "vtube/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "vtube/format.hpp"
#include "vtube/bezier.hpp"
#include "vtube/mp_partition.hpp"

namespace vtube {

namespace {

using Clock = std::chrono::steady_clock;

/// Median-of-repetitions timer; reruns the payload in growing batches until
/// one batch is comfortably above the clock resolution.
template <typename Fn>
double median_seconds(int repetitions, Fn&& payload) {
    payload();  // warmup: touch code and data before sampling
    std::vector<double> samples;
    for (int rep = 0; rep < repetitions; ++rep) {
        int batch = 1;
        double elapsed = 0.0;
        while (true) {
            const auto t0 = Clock::now();
            for (int i = 0; i < batch; ++i) payload();
            elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
            if (elapsed > 1e-4 || batch >= (1 << 20)) break;
            batch *= 4;
        }
        samples.push_back(elapsed / batch);
    }
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

}  // namespace

double BenchReport::predicted_crossover(double epsilon) const {
    for (const auto& row : rows)
        if (row.epsilon == epsilon) {
            const double nt = this->nt;
            return row.leaf_count * std::pow(nt + kc, 3) / (nt * nt * nt - nt);
        }
    return 0.0;
}

double BenchReport::empirical_crossover(double epsilon) const {
    for (const auto& row : rows)
        if (row.epsilon == epsilon && row.lp_per_trajectory > row.affine_per_trajectory)
            return row.partition_seconds / (row.lp_per_trajectory - row.affine_per_trajectory);
    return std::numeric_limits<double>::infinity();
}

double BenchReport::generation_fit_r2(double epsilon) const {
    std::vector<double> xs, ys;
    for (const auto& row : rows)
        if (row.epsilon == epsilon) {
            xs.push_back(row.k);
            ys.push_back(row.affine_total_seconds);
        }
    const int n = static_cast<int>(xs.size());
    if (n < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (int i = 0; i < n; ++i) {
        const double fit = slope * xs[i] + intercept;
        ss_res += (ys[i] - fit) * (ys[i] - fit);
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
    }
    return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
}

std::string BenchReport::to_csv() const {
    std::ostringstream csv;
    csv << "epsilon,leaf_count,partition_s,k,affine_total_s,affine_per_traj_s,lp_per_traj_s,"
           "predicted_crossover_k,empirical_crossover_k\n";
    for (const auto& row : rows) {
        csv << format_double(row.epsilon) << ',' << row.leaf_count << ','
            << format_double(row.partition_seconds) << ',' << row.k << ','
            << format_double(row.affine_total_seconds) << ','
            << format_double(row.affine_per_trajectory) << ','
            << format_double(row.lp_per_trajectory) << ','
            << format_double(predicted_crossover(row.epsilon)) << ','
            << format_double(empirical_crossover(row.epsilon)) << '\n';
    }
    return csv.str();
}

BenchReport run_bench(const VirtualTube& tube, const BenchConfig& config) {
    BenchReport report;
    report.nt = tube.segment_count();
    report.kc = tube.boundary_count();

    std::vector<double> epsilons =
        config.epsilons.empty() ? std::vector<double>{tube.epsilon()} : config.epsilons;

    for (double epsilon : epsilons) {
        CriticalRegionTree tree = partition(tube.parametric(), epsilon);
        const double partition_s = median_seconds(config.repetitions, [&] {
            CriticalRegionTree rebuilt = partition(tube.parametric(), epsilon);
            (void)rebuilt;
        });

        // Per-trajectory cost of the from-scratch route: interpolate the
        // control points, rebuild the LP, solve it, assemble the curve.
        // Trajectories are kept during timing (as generation does) and
        // destroyed untimed.
        std::uint64_t probe_state = config.seed ^ 0x9e37;
        std::vector<Eigen::VectorXd> probes;
        for (int i = 0; i < config.lp_probe; ++i)
            probes.push_back(sample_simplex(report.kc, probe_state));
        std::vector<double> lp_samples;
        for (int rep = 0; rep < config.repetitions; ++rep) {
            std::vector<PiecewiseBezier> storage;
            storage.reserve(probes.size());
            const auto t0 = Clock::now();
            for (const auto& theta : probes) {
                std::vector<Eigen::MatrixXd> cps = combine(tube.spatial(), theta);
                const TimeAllocation sol = solve_lp(build_lp(cps, tube.v_max()));
                std::vector<BezierSegment> segments;
                segments.reserve(cps.size());
                for (std::size_t m = 0; m < cps.size(); ++m)
                    segments.emplace_back(std::move(cps[m]), sol.dt(static_cast<int>(m)));
                storage.emplace_back(std::move(segments));
            }
            lp_samples.push_back(std::chrono::duration<double>(Clock::now() - t0).count() /
                                 static_cast<double>(probes.size()));
        }
        std::sort(lp_samples.begin(), lp_samples.end());
        const double lp_per = lp_samples[lp_samples.size() / 2];

        for (int k : config.k_values) {
            std::uint64_t state = config.seed;
            std::vector<Eigen::VectorXd> thetas;
            thetas.reserve(k);
            for (int i = 0; i < k; ++i) thetas.push_back(sample_simplex(report.kc, state));

            // Rebuild the tube against this epsilon's tree so the affine
            // route is measured end to end (combine + locate + curve), with
            // the same keep-then-destroy protocol as the generation path.
            VirtualTube query_tube(tube.terminals(), tube.corridor(), tube.spatial(),
                                   tube.v_max(), partition(tube.parametric(), epsilon));
            std::vector<double> affine_samples;
            for (int rep = 0; rep < config.repetitions; ++rep) {
                std::vector<PiecewiseBezier> storage;
                storage.reserve(thetas.size());
                const auto t0 = Clock::now();
                for (const auto& theta : thetas)
                    storage.push_back(query_tube.trajectory(theta));
                affine_samples.push_back(
                    std::chrono::duration<double>(Clock::now() - t0).count());
            }
            std::sort(affine_samples.begin(), affine_samples.end());
            const double affine_total = affine_samples[affine_samples.size() / 2];

            BenchRow row;
            row.epsilon = epsilon;
            row.leaf_count = tree.leaf_count();
            row.partition_seconds = partition_s;
            row.k = k;
            row.affine_total_seconds = affine_total;
            row.affine_per_trajectory = affine_total / k;
            row.lp_per_trajectory = lp_per;
            report.rows.push_back(row);
        }
    }
    return report;
}

}  // namespace vtube
