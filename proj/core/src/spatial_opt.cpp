#include "vtube/spatial_opt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "vtube/errors.hpp"

namespace vtube {

namespace {

constexpr int kDims = 3;

struct ProblemShape {
    int segments;
    int degree;
    int order;
    int per_dim;  // variables per coordinate: segments * (degree + 1)
    int var(int segment, int index) const { return segment * (degree + 1) + index; }
};

/// Per-coordinate quadratic form of the d-th derivative energy.
Eigen::MatrixXd energy_matrix(const ProblemShape& s, const std::vector<double>& dt) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(s.per_dim, s.per_dim);
    for (int m = 0; m < s.segments; ++m) {
        const Eigen::MatrixXd e = derivative_matrix(s.degree, dt[m], s.order);
        const Eigen::MatrixXd g = bernstein_gram(s.degree - s.order, dt[m]);
        h.block(m * (s.degree + 1), m * (s.degree + 1), s.degree + 1, s.degree + 1) =
            e.transpose() * g * e;
    }
    return h;
}

/// Shared per-coordinate equality rows: pinned endpoint states, pinned joint
/// terminals, and derivative matching at joints. The right-hand side varies
/// per boundary/coordinate, the matrix does not.
struct EqualitySystem {
    Eigen::MatrixXd a;
    // b(c, k) built per boundary path: only pin rows are nonzero.
    std::vector<std::pair<int, std::pair<int, int>>> pins;  // row -> (segment point id)
};

EqualitySystem equality_matrix(const ProblemShape& s, const std::vector<double>& dt) {
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<std::pair<int, std::pair<int, int>>> pins;
    const int p = s.degree;

    const auto pin_row = [&](int segment, int index, int path_point) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(s.per_dim);
        r(s.var(segment, index)) = 1.0;
        pins.push_back({static_cast<int>(rows.size()), {path_point, 0}});
        rows.push_back(r);
    };
    const auto derivative_row = [&](int segment, int order, bool at_end,
                                    Eigen::RowVectorXd& out) {
        const Eigen::MatrixXd d = derivative_matrix(p, dt[segment], order);
        const Eigen::RowVectorXd coeff = at_end ? d.row(d.rows() - 1) : d.row(0);
        out.segment(s.var(segment, 0), p + 1) += coeff;
    };

    // Rest start: position pinned to path point 0, derivatives 1..d-1 zero.
    pin_row(0, 0, 0);
    for (int j = 1; j < s.order; ++j) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(s.per_dim);
        derivative_row(0, j, false, r);
        rows.push_back(r);
    }
    // Rest goal.
    pin_row(s.segments - 1, p, s.segments);
    for (int j = 1; j < s.order; ++j) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(s.per_dim);
        derivative_row(s.segments - 1, j, true, r);
        rows.push_back(r);
    }
    // Joints: both adjacent endpoints pinned at the shared terminal, and
    // derivative continuity up to order d-1.
    for (int m = 0; m + 1 < s.segments; ++m) {
        pin_row(m, p, m + 1);
        pin_row(m + 1, 0, m + 1);
        for (int j = 1; j < s.order; ++j) {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(s.per_dim);
            derivative_row(m, j, true, r);
            Eigen::RowVectorXd other = Eigen::RowVectorXd::Zero(s.per_dim);
            derivative_row(m + 1, j, false, other);
            rows.push_back(r - other);
        }
    }

    EqualitySystem sys;
    sys.a.resize(static_cast<int>(rows.size()), s.per_dim);
    for (std::size_t i = 0; i < rows.size(); ++i) sys.a.row(static_cast<int>(i)) = rows[i];
    sys.pins = std::move(pins);
    return sys;
}

Eigen::VectorXd equality_rhs(const EqualitySystem& sys, const std::vector<Vec3>& path,
                             int coordinate) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(sys.a.rows());
    for (const auto& pin : sys.pins) b(pin.first) = path[pin.second.first](coordinate);
    return b;
}

/// Stacked linear map whose image is constrained by projections: the raw
/// control points (ball per point) plus one difference block per bounded
/// derivative order (box).
struct ConstraintMap {
    Eigen::MatrixXd k;                  // rows x per_dim, shared across dims
    int position_rows = 0;              // first block: identity
    std::vector<int> box_offsets;       // start row of each bounded order block
    std::vector<int> box_rows;          // rows of each block
    std::vector<double> box_bounds;
};

ConstraintMap constraint_map(const ProblemShape& s, const std::vector<double>& dt,
                             const std::vector<double>& bounds) {
    ConstraintMap map;
    std::vector<Eigen::MatrixXd> blocks;
    blocks.push_back(Eigen::MatrixXd::Identity(s.per_dim, s.per_dim));
    map.position_rows = s.per_dim;
    int rows = s.per_dim;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (!std::isfinite(bounds[i])) continue;
        const int order = static_cast<int>(i) + 1;
        if (order > s.degree) break;
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(s.segments * (s.degree + 1 - order),
                                                      s.per_dim);
        for (int m = 0; m < s.segments; ++m) {
            const Eigen::MatrixXd d = derivative_matrix(s.degree, dt[m], order);
            block.block(m * (s.degree + 1 - order), m * (s.degree + 1), d.rows(), d.cols()) = d;
        }
        map.box_offsets.push_back(rows);
        map.box_rows.push_back(static_cast<int>(block.rows()));
        map.box_bounds.push_back(bounds[i]);
        rows += static_cast<int>(block.rows());
        blocks.push_back(std::move(block));
    }
    map.k.resize(rows, s.per_dim);
    int at = 0;
    for (const auto& b : blocks) {
        map.k.middleRows(at, static_cast<int>(b.rows())) = b;
        at += static_cast<int>(b.rows());
    }
    return map;
}

/// Project the stacked (rows x 3) image onto the constraint set: per-point
/// balls on the position block, symmetric boxes on derivative blocks.
void project(const ProblemShape& s, const ConstraintMap& map,
             const std::vector<CorridorSphere>& spheres, Eigen::MatrixXd& w) {
    for (int m = 0; m < s.segments; ++m) {
        for (int j = 0; j <= s.degree; ++j) {
            const int row = s.var(m, j);
            Vec3 point = w.row(row).transpose();
            const Vec3 delta = point - spheres[m].center;
            const double dist = delta.norm();
            if (dist > spheres[m].radius)
                w.row(row) = (spheres[m].center + delta * (spheres[m].radius / dist)).transpose();
        }
    }
    for (std::size_t b = 0; b < map.box_offsets.size(); ++b) {
        const double bound = map.box_bounds[b];
        w.middleRows(map.box_offsets[b], map.box_rows[b]) =
            w.middleRows(map.box_offsets[b], map.box_rows[b]).cwiseMax(-bound).cwiseMin(bound);
    }
}

int worst_ball_segment(const ProblemShape& s, const std::vector<CorridorSphere>& spheres,
                       const Eigen::MatrixXd& points, double* violation) {
    int seg = 1;
    double worst = 0.0;
    for (int m = 0; m < s.segments; ++m)
        for (int j = 0; j <= s.degree; ++j) {
            const Vec3 p = points.row(s.var(m, j)).transpose();
            const double v = (p - spheres[m].center).norm() - spheres[m].radius;
            if (v > worst) {
                worst = v;
                seg = m + 1;
            }
        }
    if (violation) *violation = worst;
    return seg;
}

}  // namespace

PiecewiseBezier SpatialSolution::trajectory(int k) const {
    const auto& b = boundaries.at(k);
    std::vector<BezierSegment> segs;
    for (std::size_t m = 0; m < b.control_points.size(); ++m)
        segs.emplace_back(b.control_points[m], dt[m]);
    return PiecewiseBezier(std::move(segs));
}

BoundarySolution solve_boundary(const SpatialProblem& problem, int boundary_index,
                                const AdmmOptions& options) {
    const int segments = static_cast<int>(problem.dt.size());
    if (segments < 1) throw std::invalid_argument("solve_boundary: no segments");
    if (static_cast<int>(problem.spheres.size()) != segments)
        throw std::invalid_argument("solve_boundary: spheres/segments mismatch");
    if (boundary_index < 0 || boundary_index >= static_cast<int>(problem.boundary_paths.size()))
        throw std::invalid_argument("solve_boundary: boundary index out of range");
    const auto& path = problem.boundary_paths[boundary_index];
    if (static_cast<int>(path.size()) != segments + 1)
        throw std::invalid_argument("solve_boundary: path length must be segments+1");
    if (problem.smooth_order < 1 || problem.smooth_order > problem.degree)
        throw std::invalid_argument("solve_boundary: smooth order outside [1, degree]");
    for (double dt : problem.dt)
        if (!(dt > 0.0)) throw std::invalid_argument("solve_boundary: nonpositive duration");

    // A segment whose pinned terminals already violate its sphere can never
    // be feasible; report it before iterating.
    for (int m = 0; m < segments; ++m) {
        for (const Vec3& endpoint : {path[m], path[m + 1]}) {
            if ((endpoint - problem.spheres[m].center).norm() >
                problem.spheres[m].radius + 1e-9)
                throw InfeasibleError(
                    "solve_boundary: terminal outside sphere of segment " + std::to_string(m + 1),
                    m + 1);
        }
    }

    const ProblemShape shape{segments, problem.degree, problem.smooth_order,
                             segments * (problem.degree + 1)};
    const Eigen::MatrixXd h = energy_matrix(shape, problem.dt);
    const EqualitySystem eq = equality_matrix(shape, problem.dt);
    const ConstraintMap cmap = constraint_map(shape, problem.dt, problem.derivative_bounds);

    // Eliminate the equalities: x = x0 + N y with N an orthonormal kernel
    // basis of the shared constraint matrix.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(eq.a, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const double pivot = svd.singularValues()(0) * 1e-12;
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > pivot) ++rank;
    const Eigen::MatrixXd kernel = svd.matrixV().rightCols(shape.per_dim - rank);
    const int free_dim = static_cast<int>(kernel.cols());

    Eigen::MatrixXd x0(shape.per_dim, kDims);
    for (int c = 0; c < kDims; ++c) {
        const Eigen::VectorXd b = equality_rhs(eq, path, c);
        const Eigen::VectorXd sol = svd.solve(b);
        if ((eq.a * sol - b).norm() > 1e-8 * std::max(1.0, b.norm()))
            throw InfeasibleError("solve_boundary: inconsistent endpoint/continuity states", 0);
        x0.col(c) = sol;
    }

    BoundarySolution result;
    Eigen::MatrixXd x = x0;

    if (free_dim > 0) {
        const Eigen::MatrixXd hn = kernel.transpose() * h * kernel;
        const Eigen::MatrixXd kn = cmap.k * kernel;
        const Eigen::MatrixXd kx0 = cmap.k * x0;  // rows x dims
        const Eigen::MatrixXd grad0 = kernel.transpose() * h * x0;

        double rho = options.rho;
        Eigen::LLT<Eigen::MatrixXd> llt(hn + rho * kn.transpose() * kn +
                                        1e-14 * Eigen::MatrixXd::Identity(free_dim, free_dim));

        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(free_dim, kDims);
        Eigen::MatrixXd z = kx0;
        project(shape, cmap, problem.spheres, z);
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(cmap.k.rows(), kDims);

        double primal = std::numeric_limits<double>::infinity();
        double dual = primal;
        int iter = 0;
        for (; iter < options.max_iterations; ++iter) {
            for (int c = 0; c < kDims; ++c) {
                const Eigen::VectorXd rhs =
                    -grad0.col(c) + rho * kn.transpose() * (z.col(c) - u.col(c) - kx0.col(c));
                y.col(c) = llt.solve(rhs);
            }
            const Eigen::MatrixXd v = kx0 + kn * y;
            Eigen::MatrixXd z_next = v + u;
            project(shape, cmap, problem.spheres, z_next);
            primal = (v - z_next).norm();
            dual = rho * (kn.transpose() * (z_next - z)).norm();
            u += v - z_next;
            z = z_next;

            if (primal <= options.tolerance && dual <= options.tolerance) {
                ++iter;
                break;
            }
            if ((iter + 1) % 50 == 0) {
                if (primal > 10.0 * dual && rho < 1e4) {
                    rho *= 2.0;
                    u *= 0.5;
                } else if (dual > 10.0 * primal && rho > 1e-4) {
                    rho *= 0.5;
                    u *= 2.0;
                } else {
                    continue;
                }
                llt.compute(hn + rho * kn.transpose() * kn +
                            1e-14 * Eigen::MatrixXd::Identity(free_dim, free_dim));
            }
        }
        x = x0 + kernel * y;
        result.iterations = iter;
        result.kkt_residual = std::max(primal, dual);
        if (result.kkt_residual > 1e-6) {
            double violation = 0.0;
            const int seg = worst_ball_segment(shape, problem.spheres, x, &violation);
            if (violation > 1e-6)
                throw InfeasibleError("solve_boundary: sphere constraints unsatisfiable at segment " +
                                          std::to_string(seg),
                                      seg);
            throw BudgetError("solve_boundary: ADMM did not reach tolerance",
                              result.kkt_residual);
        }
    } else {
        double violation = 0.0;
        const int seg = worst_ball_segment(shape, problem.spheres, x, &violation);
        if (violation > 1e-9)
            throw InfeasibleError("solve_boundary: fully pinned segment " + std::to_string(seg) +
                                      " violates its sphere",
                                  seg);
    }

    result.control_points.resize(segments);
    for (int m = 0; m < segments; ++m) {
        Eigen::MatrixXd cp(kDims, problem.degree + 1);
        for (int j = 0; j <= problem.degree; ++j)
            cp.col(j) = x.row(shape.var(m, j)).transpose();
        result.control_points[m] = cp;
    }
    for (int c = 0; c < kDims; ++c)
        result.objective += x.col(c).dot(h * x.col(c));
    return result;
}

SpatialSolution solve_spatial(const SpatialProblem& problem, const AdmmOptions& options) {
    SpatialSolution solution;
    solution.dt = problem.dt;
    solution.degree = problem.degree;
    solution.smooth_order = problem.smooth_order;
    for (std::size_t k = 0; k < problem.boundary_paths.size(); ++k)
        solution.boundaries.push_back(solve_boundary(problem, static_cast<int>(k), options));
    return solution;
}

std::vector<Eigen::MatrixXd> combine(const SpatialSolution& solution,
                                     const Eigen::VectorXd& eta) {
    if (eta.size() != solution.boundary_count())
        throw std::domain_error("combine: weight count mismatch");
    if (eta.minCoeff() < -1e-9 || std::abs(eta.sum() - 1.0) > 1e-9)
        throw std::domain_error("combine: weights off the simplex");
    std::vector<Eigen::MatrixXd> out;
    out.reserve(solution.segment_count());
    for (int m = 0; m < solution.segment_count(); ++m) {
        Eigen::MatrixXd cp = eta(0) * solution.boundaries[0].control_points[m];
        for (int k = 1; k < solution.boundary_count(); ++k)
            cp.noalias() += eta(k) * solution.boundaries[k].control_points[m];
        out.push_back(std::move(cp));
    }
    return out;
}

double trajectory_energy(const std::vector<Eigen::MatrixXd>& control_points,
                         const std::vector<double>& dt, int order) {
    double j = 0.0;
    for (std::size_t m = 0; m < control_points.size(); ++m) {
        const int p = static_cast<int>(control_points[m].cols()) - 1;
        const Eigen::MatrixXd e = derivative_matrix(p, dt[m], order);
        const Eigen::MatrixXd g = bernstein_gram(p - order, dt[m]);
        const Eigen::MatrixXd q = control_points[m] * e.transpose();  // dims x (p-order+1)
        for (int c = 0; c < q.rows(); ++c) j += q.row(c) * g * q.row(c).transpose();
    }
    return j;
}

Eigen::VectorXd trajectory_energy_gradient(const std::vector<Eigen::MatrixXd>& control_points,
                                           const std::vector<double>& dt, int order) {
    const int dims = static_cast<int>(control_points.front().rows());
    const int p = static_cast<int>(control_points.front().cols()) - 1;
    const int per_dim = static_cast<int>(control_points.size()) * (p + 1);
    Eigen::VectorXd grad(dims * per_dim);
    for (std::size_t m = 0; m < control_points.size(); ++m) {
        const Eigen::MatrixXd e = derivative_matrix(p, dt[m], order);
        const Eigen::MatrixXd q = e.transpose() * bernstein_gram(p - order, dt[m]) * e;
        for (int c = 0; c < dims; ++c) {
            const Eigen::VectorXd xc = control_points[m].row(c).transpose();
            grad.segment(c * per_dim + static_cast<int>(m) * (p + 1), p + 1) = 2.0 * q * xc;
        }
    }
    return grad;
}

}  // namespace vtube
