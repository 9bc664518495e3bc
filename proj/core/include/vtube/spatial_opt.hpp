#ifndef VTUBE_SPATIAL_OPT_HPP
#define VTUBE_SPATIAL_OPT_HPP

#include <Eigen/Dense>
#include <vector>

#include "vtube/bezier.hpp"
#include "vtube/corridor.hpp"

namespace vtube {

/// Inputs of the smoothness optimization for one tube: the sphere chain,
/// the fixed boundary terminal polylines, and the shared time allocation.
/// Start and goal states carry zero derivatives up to smooth_order-1
/// (rest-to-rest).
struct SpatialProblem {
    std::vector<CorridorSphere> spheres;            // sphere m hosts segment m
    std::vector<std::vector<Vec3>> boundary_paths;  // k_c polylines, length M+1
    std::vector<double> dt;                         // shared allocation, size M
    int degree = 5;
    int smooth_order = 3;  // derivative order d whose energy is minimized
    /// Componentwise bound on order-(i+1) derivative control points;
    /// non-finite entries disable the bound.
    std::vector<double> derivative_bounds;
};

struct BoundarySolution {
    std::vector<Eigen::MatrixXd> control_points;  // M matrices, 3 x (p+1)
    double objective = 0.0;                       // integral of squared d-th derivative
    double kkt_residual = 0.0;
    int iterations = 0;
};

struct SpatialSolution {
    std::vector<BoundarySolution> boundaries;
    std::vector<double> dt;
    int degree = 5;
    int smooth_order = 3;

    int boundary_count() const { return static_cast<int>(boundaries.size()); }
    int segment_count() const { return static_cast<int>(dt.size()); }

    /// Piecewise curve of boundary trajectory k at the shared allocation.
    PiecewiseBezier trajectory(int k) const;
};

struct AdmmOptions {
    double rho = 1.0;
    double tolerance = 1e-8;
    int max_iterations = 10000;
};

/// Solve the energy minimization for boundary index k. Throws
/// InfeasibleError (with the violating segment) when the sphere chain cannot
/// host the required continuity.
BoundarySolution solve_boundary(const SpatialProblem& problem, int boundary_index,
                                const AdmmOptions& options = {});

/// Solve every boundary of the problem.
SpatialSolution solve_spatial(const SpatialProblem& problem, const AdmmOptions& options = {});

/// Convex combination of the boundary control points: P_m(eta) = sum eta_k P_m^k.
/// Throws std::domain_error when eta is off the simplex beyond 1e-9.
std::vector<Eigen::MatrixXd> combine(const SpatialSolution& solution,
                                     const Eigen::VectorXd& eta);

/// Integral of the squared order-th derivative of the piecewise curve with
/// the given control points and durations; the optimization objective.
double trajectory_energy(const std::vector<Eigen::MatrixXd>& control_points,
                         const std::vector<double>& dt, int order);

/// Gradient of trajectory_energy with respect to every control point
/// coordinate, laid out dim-major then (segment, index); used by the
/// finite-difference checks.
Eigen::VectorXd trajectory_energy_gradient(const std::vector<Eigen::MatrixXd>& control_points,
                                           const std::vector<double>& dt, int order);

}  // namespace vtube

#endif  // VTUBE_SPATIAL_OPT_HPP
