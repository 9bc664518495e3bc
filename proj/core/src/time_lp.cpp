#include "vtube/time_lp.hpp"

#include <cmath>
#include <stdexcept>

#include "vtube/errors.hpp"
#include "vtube/hash.hpp"

namespace vtube {

bool on_simplex(const Eigen::VectorXd& theta) {
    return theta.size() > 0 && theta.minCoeff() >= -1e-9 &&
           std::abs(theta.sum() - 1.0) <= 1e-9;
}

TimeLp build_lp(const std::vector<Eigen::MatrixXd>& control_points,
                const Eigen::VectorXd& v_max, double t_min) {
    if (control_points.empty())
        throw std::invalid_argument("build_lp: no segments");
    const int dims = static_cast<int>(control_points.front().rows());
    const int p = static_cast<int>(control_points.front().cols()) - 1;
    if (v_max.size() != dims)
        throw ConfigError("build_lp: velocity limit dimension mismatch");
    if (v_max.minCoeff() <= 0.0)
        throw ConfigError("build_lp: velocity limit components must be > 0");
    const int segments = static_cast<int>(control_points.size());
    for (const auto& cp : control_points)
        if (cp.rows() != dims || cp.cols() != p + 1)
            throw std::invalid_argument("build_lp: inconsistent control point shapes");

    TimeLp lp;
    lp.segments = segments;
    lp.degree = p;
    lp.v_max = v_max;
    lp.t_min = t_min;

    // Two rows per (segment, velocity control point, component):
    //   -v_c dt_m <= -p dp   and   -v_c dt_m <= +p dp.
    const int rows = 2 * segments * p * dims;
    lp.a1 = Eigen::MatrixXd::Zero(rows, segments);
    lp.b1.resize(rows);
    int row = 0;
    for (int m = 0; m < segments; ++m)
        for (int k = 0; k < p; ++k)
            for (int c = 0; c < dims; ++c) {
                const double dp = p * (control_points[m](c, k + 1) - control_points[m](c, k));
                lp.a1(row, m) = -v_max(c);
                lp.b1(row) = -dp;
                ++row;
                lp.a1(row, m) = -v_max(c);
                lp.b1(row) = dp;
                ++row;
            }

    // Cross-multiplied joint continuity: a_m dt_{m+1} - a_{m+1} dt_m = 0
    // with a_m = p (p_{m,p} - p_{m,p-1}), linear in the durations.
    lp.a2 = Eigen::MatrixXd::Zero(std::max(0, segments - 1) * dims, segments);
    for (int m = 0; m + 1 < segments; ++m) {
        const Eigen::VectorXd end_vel =
            p * (control_points[m].col(p) - control_points[m].col(p - 1));
        const Eigen::VectorXd start_vel =
            p * (control_points[m + 1].col(1) - control_points[m + 1].col(0));
        for (int c = 0; c < dims; ++c) {
            lp.a2(m * dims + c, m + 1) = end_vel(c);
            lp.a2(m * dims + c, m) = -start_vel(c);
        }
    }
    return lp;
}

TimeAllocation solve_lp(const TimeLp& lp) {
    LpProblem problem;
    problem.c = Eigen::VectorXd::Ones(lp.segments);
    problem.a_ineq = lp.a1;
    problem.b_ineq = lp.b1;
    problem.a_eq = lp.a2;
    problem.b_eq = Eigen::VectorXd::Zero(lp.a2.rows());
    problem.lower = Eigen::VectorXd::Constant(lp.segments, lp.t_min);
    const LpSolution sol = solve_lp_simplex(problem);

    TimeAllocation out;
    out.dt = sol.x;
    out.total = sol.objective;
    out.gap = sol.gap;
    out.iterations = sol.iterations;
    return out;
}

ParametricTimeLp::ParametricTimeLp(std::vector<TimeLp> boundary_lps)
    : boundary_(std::move(boundary_lps)) {
    if (boundary_.size() < 2)
        throw AssemblyError("parametric lp: need at least two boundary LPs");
    const TimeLp& first = boundary_.front();
    for (const TimeLp& lp : boundary_) {
        if (lp.segments != first.segments || lp.degree != first.degree ||
            lp.a1.rows() != first.a1.rows() || lp.a2.rows() != first.a2.rows())
            throw AssemblyError("parametric lp: boundary LP dimensions differ");
        if (lp.t_min != first.t_min || lp.v_max != first.v_max)
            throw AssemblyError("parametric lp: boundary LP bounds differ");
        if ((lp.a1 - first.a1).cwiseAbs().maxCoeff() != 0.0)
            throw AssemblyError("parametric lp: inequality matrices must be identical");
    }
}

TimeLp ParametricTimeLp::at(const Eigen::VectorXd& theta) const {
    if (theta.size() != boundary_count() || !on_simplex(theta))
        throw std::domain_error("parametric lp: theta not on the simplex");
    TimeLp lp = boundary_.front();
    lp.b1.setZero();
    lp.a2.setZero();
    for (int k = 0; k < boundary_count(); ++k) {
        lp.b1 += theta(k) * boundary_[k].b1;
        lp.a2 += theta(k) * boundary_[k].a2;
    }
    return lp;
}

TimeAllocation ParametricTimeLp::solve(const Eigen::VectorXd& theta) const {
    return solve_lp(at(theta));
}

std::uint64_t ParametricTimeLp::content_hash() const {
    Fnv1a hash;
    hash.value(static_cast<int>(boundary_.size()));
    for (const TimeLp& lp : boundary_) {
        hash.value(lp.segments);
        hash.value(lp.degree);
        hash.value(lp.t_min);
        hash.vector(lp.v_max);
        hash.matrix(lp.a1);
        hash.vector(lp.b1);
        hash.matrix(lp.a2);
    }
    return hash.digest();
}

ParametricTimeLp assemble_parametric(std::vector<TimeLp> boundary_lps) {
    return ParametricTimeLp(std::move(boundary_lps));
}

}  // namespace vtube
