#ifndef VTUBE_TIME_LP_HPP
#define VTUBE_TIME_LP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "vtube/lp_solver.hpp"

namespace vtube {

/// Time-allocation LP for fixed control points: decision vector is the
/// segment durations, cost is all-ones (total time), inequality rows encode
/// the two-sided per-component velocity bounds in the form
/// -v_c dt_m +- p (p_{m,k+1}-p_{m,k})_c <= 0, and equality rows the
/// cross-multiplied first-derivative joint continuity.
struct TimeLp {
    Eigen::MatrixXd a1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd a2;  // a2 x = 0
    double t_min = 1e-3;
    int segments = 0;
    int degree = 0;
    Eigen::VectorXd v_max;
};

struct TimeAllocation {
    Eigen::VectorXd dt;
    double total = 0.0;  // optimal value, seconds
    double gap = 0.0;
    int iterations = 0;
};

/// Assemble the LP from per-segment control point matrices (dims x (p+1)).
/// Throws ConfigError when any velocity limit component is nonpositive.
TimeLp build_lp(const std::vector<Eigen::MatrixXd>& control_points,
                const Eigen::VectorXd& v_max, double t_min = 1e-3);

/// Exact solve with the embedded simplex. Throws InfeasibleError when the
/// instance is infeasible.
TimeAllocation solve_lp(const TimeLp& lp);

/// The theta-affine family of boundary time LPs: b1 and a2 are barycentric
/// combinations of the boundary data, a1 and the row ordering are shared.
class ParametricTimeLp {
  public:
    explicit ParametricTimeLp(std::vector<TimeLp> boundary_lps);

    int boundary_count() const { return static_cast<int>(boundary_.size()); }
    int segment_count() const { return boundary_.front().segments; }
    const TimeLp& boundary(int k) const { return boundary_.at(k); }

    /// LP instance at barycentric theta; bit-exact boundary data at the
    /// simplex vertices. Throws std::domain_error off the simplex.
    TimeLp at(const Eigen::VectorXd& theta) const;

    /// Exact optimal allocation at theta (the oracle used by the partition
    /// and by every acceptance check).
    TimeAllocation solve(const Eigen::VectorXd& theta) const;
    double value(const Eigen::VectorXd& theta) const { return solve(theta).total; }

    /// Content hash of the parametric data, used for provenance checks.
    std::uint64_t content_hash() const;

  private:
    std::vector<TimeLp> boundary_;
};

/// Validates shared dimensions/row ordering and wraps the boundary LPs.
/// Throws AssemblyError on any mismatch.
ParametricTimeLp assemble_parametric(std::vector<TimeLp> boundary_lps);

/// Simplex membership used for theta vectors throughout: nonnegative within
/// 1e-9 and summing to 1 within 1e-9.
bool on_simplex(const Eigen::VectorXd& theta);

}  // namespace vtube

#endif  // VTUBE_TIME_LP_HPP
