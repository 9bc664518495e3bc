#ifndef VTUBE_BEZIER_HPP
#define VTUBE_BEZIER_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace vtube {

/// Maximum curve degree and spatial dimension supported by the library;
/// control points live in fixed-capacity storage so trajectory queries and
/// simulation steps never touch the heap.
inline constexpr int kMaxBezierDegree = 7;
inline constexpr int kMaxBezierDim = 3;

/// Control-point matrix: runtime-sized, inline-allocated.
using CpMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                               kMaxBezierDim, kMaxBezierDegree + 1>;
using CpVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxBezierDim, 1>;

/// One Bezier segment of degree p in R^n. Control points are stored
/// column-wise (n x (p+1)); the curve is traversed over t in [0, duration].
class BezierSegment {
  public:
    /// Validates sizes before converting into the inline storage.
    template <typename Derived>
    BezierSegment(const Eigen::MatrixBase<Derived>& control_points, double duration)
        : duration_(duration) {
        check(static_cast<int>(control_points.rows()),
              static_cast<int>(control_points.cols()), duration);
        points_ = control_points;
    }
    BezierSegment(CpMatrix&& control_points, double duration)
        : points_(std::move(control_points)), duration_(duration) {
        check(dim(), degree() + 1, duration);
    }

    int degree() const { return static_cast<int>(points_.cols()) - 1; }
    int dim() const { return static_cast<int>(points_.rows()); }
    double duration() const { return duration_; }
    const CpMatrix& control_points() const { return points_; }

    /// Curve point at t in [0, duration] from the Bernstein sum.
    CpVector eval(double t) const;

    /// Same curve point through the power-basis matrix form; agrees with
    /// eval() to machine precision, kept as an independent route.
    CpVector eval_matrix_form(double t) const;

    /// Hodograph: degree p-1 segment with control points
    /// q_k = (p/dt)(p_{k+1} - p_k) over the same duration.
    BezierSegment derivative() const;

    /// True iff every control point lies in the closed ball (center, radius).
    /// By the convex-hull property this implies the whole curve does.
    bool inside_sphere(const Eigen::VectorXd& center, double radius) const;

  private:
    static void check(int rows, int cols, double duration) {
        if (cols < 2 || cols > kMaxBezierDegree + 1)
            throw std::invalid_argument("BezierSegment: degree must be in [1, 7]");
        if (rows < 1 || rows > kMaxBezierDim)
            throw std::invalid_argument("BezierSegment: dimension must be in [1, 3]");
        if (!(duration > 0.0))
            throw std::invalid_argument("BezierSegment: duration must be > 0");
    }

    CpMatrix points_;
    double duration_;
};

/// An ordered concatenation of same-degree, same-dimension segments.
class PiecewiseBezier {
  public:
    PiecewiseBezier() = default;
    explicit PiecewiseBezier(std::vector<BezierSegment> segments);

    int segment_count() const { return static_cast<int>(segments_.size()); }
    const BezierSegment& segment(int m) const { return segments_.at(m); }
    const std::vector<BezierSegment>& segments() const { return segments_; }
    double total_time() const { return total_time_; }
    int dim() const { return segments_.front().dim(); }

    /// Index of the segment owning global time t. Joints resolve to the
    /// later segment, except t = total_time which resolves to the last.
    int segment_index(double t) const;

    /// Local time within the owning segment corresponding to global t.
    double local_time(double t, int seg) const;

    /// order-th time derivative at global time t in [0, total_time].
    /// Orders above the degree evaluate to zero.
    Eigen::VectorXd eval(double t, int order = 0) const;

  private:
    std::vector<BezierSegment> segments_;
    double total_time_ = 0.0;
};

/// Bernstein-to-power change of basis for degree p: row i holds the
/// coefficients of u^i across the p+1 Bernstein polynomials, so that
/// h(t) = beta(t) * S_dt * M * P^T with beta = [1 t ... t^p].
Eigen::MatrixXd bernstein_power_basis(int degree);

/// Diagonal duration scaling diag(1, 1/dt, ..., 1/dt^p).
Eigen::MatrixXd duration_scaling(int degree, double dt);

/// Difference operator taking degree-p control points to the control points
/// of the order-th derivative: (p!/(p-order)!) scaled iterated differences,
/// including the 1/dt^order factor. Shape (p-order+1) x (p+1).
Eigen::MatrixXd derivative_matrix(int degree, double dt, int order);

/// Gram matrix of the degree-q Bernstein basis on [0, dt]:
/// G_ij = dt * C(q,i) C(q,j) / ((2q+1) C(2q,i+j)).
Eigen::MatrixXd bernstein_gram(int degree, double dt);

}  // namespace vtube

#endif  // VTUBE_BEZIER_HPP
