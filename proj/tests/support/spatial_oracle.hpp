#ifndef VTUBE_TESTS_SPATIAL_ORACLE_HPP
#define VTUBE_TESTS_SPATIAL_ORACLE_HPP

#include <Eigen/Dense>

#include "support/oracles.hpp"
#include "vtube/spatial_opt.hpp"

// Collocation route for the smoothness QP: quadrature Hessian from
// subdivision-evaluated basis functions plus a dense KKT solve of the
// equality-constrained problem. Valid when no sphere or box constraint is
// active at the optimum.

namespace oracle {

inline Eigen::MatrixXd quadrature_hessian(const vtube::SpatialProblem& p, int nodes) {
    const int per_dim = static_cast<int>(p.dt.size()) * (p.degree + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(per_dim, per_dim);
    for (std::size_t m = 0; m < p.dt.size(); ++m) {
        int n = nodes % 2 == 0 ? nodes : nodes + 1;
        const double step = p.dt[m] / n;
        Eigen::MatrixXd phi(n + 1, p.degree + 1);
        for (int j = 0; j <= p.degree; ++j) {
            Eigen::MatrixXd q = Eigen::MatrixXd::Zero(1, p.degree + 1);
            q(0, j) = 1.0;
            int deg = p.degree;
            for (int d = 0; d < p.smooth_order; ++d) {
                Eigen::MatrixXd next(1, deg);
                for (int k = 0; k < deg; ++k)
                    next(0, k) = deg / p.dt[m] * (q(0, k + 1) - q(0, k));
                q = next;
                --deg;
            }
            for (int i = 0; i <= n; ++i)
                phi(i, j) = de_casteljau(q, i * step, p.dt[m])(0);
        }
        Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(p.degree + 1, p.degree + 1);
        for (int i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            hm += w * phi.row(i).transpose() * phi.row(i);
        }
        hm *= step / 3.0;
        h.block(m * (p.degree + 1), m * (p.degree + 1), p.degree + 1, p.degree + 1) = hm;
    }
    return h;
}

inline void equality_rows(const vtube::SpatialProblem& p, const std::vector<vtube::Vec3>& path,
                          int dim, Eigen::MatrixXd& a, Eigen::VectorXd& b) {
    const int cols = static_cast<int>(p.dt.size()) * (p.degree + 1);
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    const auto var = [&](int m, int j) { return m * (p.degree + 1) + j; };
    const auto pin = [&](int m, int j, double value) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(cols);
        r(var(m, j)) = 1.0;
        rows.push_back(r);
        rhs.push_back(value);
    };
    const auto deriv_row = [&](int m, int order, bool at_end) {
        const Eigen::MatrixXd d = vtube::derivative_matrix(p.degree, p.dt[m], order);
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(cols);
        r.segment(var(m, 0), p.degree + 1) = at_end ? d.row(d.rows() - 1) : d.row(0);
        return r;
    };
    const int last = static_cast<int>(p.dt.size()) - 1;
    pin(0, 0, path.front()(dim));
    pin(last, p.degree, path.back()(dim));
    for (int order = 1; order < p.smooth_order; ++order) {
        rows.push_back(deriv_row(0, order, false));
        rhs.push_back(0.0);
        rows.push_back(deriv_row(last, order, true));
        rhs.push_back(0.0);
    }
    for (int m = 0; m < last; ++m) {
        pin(m, p.degree, path[m + 1](dim));
        pin(m + 1, 0, path[m + 1](dim));
        for (int order = 1; order < p.smooth_order; ++order) {
            rows.push_back(deriv_row(m, order, true) - deriv_row(m + 1, order, false));
            rhs.push_back(0.0);
        }
    }
    a.resize(static_cast<int>(rows.size()), cols);
    b.resize(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        a.row(static_cast<int>(i)) = rows[i];
        b(static_cast<int>(i)) = rhs[i];
    }
}

/// Total collocation-QP objective over all coordinates.
inline double collocation_objective(const vtube::SpatialProblem& p, int boundary,
                                    int nodes = 1000) {
    const Eigen::MatrixXd h = quadrature_hessian(p, nodes);
    double objective = 0.0;
    for (int dim = 0; dim < 3; ++dim) {
        Eigen::MatrixXd a;
        Eigen::VectorXd b;
        equality_rows(p, p.boundary_paths[boundary], dim, a, b);
        const int n = static_cast<int>(h.rows());
        const int m = static_cast<int>(a.rows());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
        kkt.topLeftCorner(n, n) = 2.0 * h;
        kkt.topRightCorner(n, m) = a.transpose();
        kkt.bottomLeftCorner(m, n) = a;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
        rhs.tail(m) = b;
        const Eigen::VectorXd x = kkt.fullPivLu().solve(rhs).head(n);
        objective += x.dot(h * x);
    }
    return objective;
}

}  // namespace oracle

#endif  // VTUBE_TESTS_SPATIAL_ORACLE_HPP
