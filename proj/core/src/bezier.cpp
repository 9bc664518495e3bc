#include "vtube/bezier.hpp"

#include <cmath>
#include <stdexcept>

#include "vtube/errors.hpp"

namespace vtube {

namespace {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

BezierSegment::BezierSegment(Eigen::MatrixXd control_points, double duration)
    : points_(std::move(control_points)), duration_(duration) {
    if (points_.cols() < 2)
        throw std::invalid_argument("BezierSegment: degree must be >= 1");
    if (points_.rows() < 1)
        throw std::invalid_argument("BezierSegment: dimension must be >= 1");
    if (!(duration_ > 0.0))
        throw std::invalid_argument("BezierSegment: duration must be > 0");
}

Eigen::VectorXd BezierSegment::eval(double t) const {
    if (t < 0.0 || t > duration_)
        throw std::domain_error("BezierSegment::eval: t outside [0, duration]");
    const int p = degree();
    const double u = t / duration_;
    // Evaluate all Bernstein weights, then one matrix-vector product.
    Eigen::VectorXd w(p + 1);
    for (int k = 0; k <= p; ++k)
        w(k) = binomial(p, k) * std::pow(u, k) * std::pow(1.0 - u, p - k);
    return points_ * w;
}

Eigen::VectorXd BezierSegment::eval_matrix_form(double t) const {
    if (t < 0.0 || t > duration_)
        throw std::domain_error("BezierSegment::eval_matrix_form: t outside domain");
    const int p = degree();
    Eigen::RowVectorXd beta(p + 1);
    double tp = 1.0;
    for (int i = 0; i <= p; ++i) {
        beta(i) = tp;
        tp *= t;
    }
    const Eigen::MatrixXd coeffs =
        duration_scaling(p, duration_) * bernstein_power_basis(p) * points_.transpose();
    return (beta * coeffs).transpose();
}

BezierSegment BezierSegment::derivative() const {
    const int p = degree();
    Eigen::MatrixXd q(dim(), p);
    for (int k = 0; k < p; ++k)
        q.col(k) = (p / duration_) * (points_.col(k + 1) - points_.col(k));
    if (p == 1) {
        // Degree-0 hodograph: represent the constant as a degree-1 segment
        // with equal endpoints so the type invariant (degree >= 1) holds.
        Eigen::MatrixXd c(dim(), 2);
        c.col(0) = q.col(0);
        c.col(1) = q.col(0);
        return BezierSegment(c, duration_);
    }
    return BezierSegment(q, duration_);
}

bool BezierSegment::inside_sphere(const Eigen::VectorXd& center, double radius) const {
    for (int k = 0; k < points_.cols(); ++k)
        if ((points_.col(k) - center).norm() > radius) return false;
    return true;
}

PiecewiseBezier::PiecewiseBezier(std::vector<BezierSegment> segments)
    : segments_(std::move(segments)) {
    if (segments_.empty())
        throw std::invalid_argument("PiecewiseBezier: needs at least one segment");
    const int p = segments_.front().degree();
    const int n = segments_.front().dim();
    for (std::size_t m = 0; m < segments_.size(); ++m) {
        if (segments_[m].degree() != p || segments_[m].dim() != n)
            throw std::invalid_argument("PiecewiseBezier: mixed degree or dimension");
        total_time_ += segments_[m].duration();
        if (m > 0) {
            const Eigen::VectorXd gap = segments_[m].control_points().col(0) -
                                        segments_[m - 1].control_points().rightCols<1>();
            if (gap.norm() > 1e-9)
                throw std::invalid_argument("PiecewiseBezier: segments not C0-continuous");
        }
    }
}

int PiecewiseBezier::segment_index(double t) const {
    if (t < 0.0 || t > total_time_ + 1e-12)
        throw std::domain_error("PiecewiseBezier: t outside [0, total_time]");
    double acc = 0.0;
    for (std::size_t m = 0; m + 1 < segments_.size(); ++m) {
        acc += segments_[m].duration();
        // Right-continuous dispatch: a joint belongs to the later segment.
        if (t < acc) return static_cast<int>(m);
    }
    return static_cast<int>(segments_.size()) - 1;
}

double PiecewiseBezier::local_time(double t, int seg) const {
    double acc = 0.0;
    for (int m = 0; m < seg; ++m) acc += segments_[m].duration();
    double local = t - acc;
    if (local < 0.0) local = 0.0;
    const double dt = segments_[seg].duration();
    if (local > dt) local = dt;
    return local;
}

Eigen::VectorXd PiecewiseBezier::eval(double t, int order) const {
    if (order < 0) throw std::invalid_argument("PiecewiseBezier::eval: order < 0");
    const int seg = segment_index(t);
    const double local = local_time(t, seg);
    if (order > segments_[seg].degree())
        return Eigen::VectorXd::Zero(dim());
    BezierSegment s = segments_[seg];
    for (int j = 0; j < order; ++j) s = s.derivative();
    return s.eval(local);
}

Eigen::MatrixXd bernstein_power_basis(int degree) {
    if (degree < 1) throw std::invalid_argument("bernstein_power_basis: degree < 1");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
    for (int i = 0; i <= degree; ++i)
        for (int k = 0; k <= i; ++k)
            m(i, k) = ((i - k) % 2 == 0 ? 1.0 : -1.0) * binomial(degree, k) *
                      binomial(degree - k, i - k);
    return m;
}

Eigen::MatrixXd duration_scaling(int degree, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("duration_scaling: dt <= 0");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
    double f = 1.0;
    for (int i = 0; i <= degree; ++i) {
        s(i, i) = f;
        f /= dt;
    }
    return s;
}

Eigen::MatrixXd derivative_matrix(int degree, double dt, int order) {
    if (order < 0 || order > degree)
        throw std::invalid_argument("derivative_matrix: order outside [0, degree]");
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(degree + 1, degree + 1);
    int deg = degree;
    for (int j = 0; j < order; ++j) {
        Eigen::MatrixXd step = Eigen::MatrixXd::Zero(deg, deg + 1);
        for (int k = 0; k < deg; ++k) {
            step(k, k) = -deg / dt;
            step(k, k + 1) = deg / dt;
        }
        d = step * d;
        --deg;
    }
    return d;
}

Eigen::MatrixXd bernstein_gram(int degree, double dt) {
    const int q = degree;
    Eigen::MatrixXd g(q + 1, q + 1);
    for (int i = 0; i <= q; ++i)
        for (int j = 0; j <= q; ++j)
            g(i, j) = dt * binomial(q, i) * binomial(q, j) /
                      ((2 * q + 1) * binomial(2 * q, i + j));
    return g;
}

}  // namespace vtube
