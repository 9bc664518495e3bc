#include "vtube/lp_solver.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "vtube/errors.hpp"

namespace vtube {

namespace {

struct SparseColumn {
    std::vector<std::pair<int, double>> entries;  // (row, value)
    double cost = 0.0;
    bool artificial = false;
};

/// Row-reduce the equality block, dropping dependent rows; throws when a
/// dependent row is inconsistent.
void reduce_equalities(Eigen::MatrixXd& a, Eigen::VectorXd& b) {
    if (a.rows() == 0) return;
    const int rows = static_cast<int>(a.rows());
    const int cols = static_cast<int>(a.cols());
    Eigen::MatrixXd m(rows, cols + 1);
    m.leftCols(cols) = a;
    m.col(cols) = b;
    const double scale = std::max(1.0, m.leftCols(cols).cwiseAbs().maxCoeff());
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int pivot = rank;
        for (int r = rank + 1; r < rows; ++r)
            if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
        if (std::abs(m(pivot, col)) < 1e-11 * scale) continue;
        m.row(rank).swap(m.row(pivot));
        for (int r = 0; r < rows; ++r) {
            if (r == rank) continue;
            const double f = m(r, col) / m(rank, col);
            if (f != 0.0) m.row(r) -= f * m.row(rank);
        }
        ++rank;
    }
    for (int r = rank; r < rows; ++r)
        if (std::abs(m(r, cols)) > 1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff()))
            throw InfeasibleError("lp: inconsistent equality constraints", 0);
    a = m.topLeftCorner(rank, cols);
    b = m.col(cols).head(rank);
}

class RevisedSimplex {
  public:
    RevisedSimplex(std::vector<SparseColumn> columns, Eigen::VectorXd rhs, int structural)
        : cols_(std::move(columns)), rhs_(std::move(rhs)),
          m_(static_cast<int>(rhs_.size())), structural_(structural) {}

    /// Runs phase 1 (if artificials present) then phase 2. Returns false on
    /// infeasibility, filling the Farkas dual.
    bool solve() {
        binv_ = Eigen::MatrixXd::Identity(m_, m_);
        xb_ = rhs_;
        bool has_artificial = false;
        for (int j : basis_)
            if (cols_[j].artificial) has_artificial = true;
        if (has_artificial) {
            phase_ = 1;
            run();
            double infeas = 0.0;
            for (int r = 0; r < m_; ++r)
                if (cols_[basis_[r]].artificial) infeas += std::max(0.0, xb_(r));
            if (infeas > 1e-7 * std::max(1.0, rhs_.cwiseAbs().maxCoeff())) {
                farkas_ = dual(phase_costs());
                return false;
            }
            drive_out_artificials();
        }
        phase_ = 2;
        run();
        return true;
    }

    void set_basis(std::vector<int> basis) { basis_ = std::move(basis); }
    const std::vector<int>& basis() const { return basis_; }
    const Eigen::VectorXd& basic_values() const { return xb_; }
    const Eigen::VectorXd& farkas() const { return farkas_; }
    int iterations() const { return iterations_; }

    Eigen::VectorXd dual(const Eigen::VectorXd& costs) const {
        Eigen::VectorXd cb(m_);
        for (int r = 0; r < m_; ++r) cb(r) = costs(basis_[r]);
        return binv_.transpose() * cb;
    }

    Eigen::VectorXd phase_costs() const {
        Eigen::VectorXd c(cols_.size());
        for (std::size_t j = 0; j < cols_.size(); ++j)
            c(j) = phase_ == 1 ? (cols_[j].artificial ? 1.0 : 0.0) : cols_[j].cost;
        return c;
    }

  private:
    double column_dot(const Eigen::VectorXd& y, int j) const {
        double s = 0.0;
        for (const auto& [row, value] : cols_[j].entries) s += y(row) * value;
        return s;
    }

    Eigen::VectorXd apply_binv(int j) const {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(m_);
        for (const auto& [row, value] : cols_[j].entries) d += value * binv_.col(row);
        return d;
    }

    void refactorize() {
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
        for (int r = 0; r < m_; ++r)
            for (const auto& [row, value] : cols_[basis_[r]].entries) b(row, r) = value;
        binv_ = b.partialPivLu().inverse();
        xb_ = binv_ * rhs_;
    }

    void run() {
        const Eigen::VectorXd costs = phase_costs();
        Eigen::VectorXd y = dual(costs);
        bool bland = false;
        int stall = 0;
        double last_objective = std::numeric_limits<double>::infinity();
        const double rc_tol = 1e-9 * std::max(1.0, costs.cwiseAbs().maxCoeff());

        std::vector<char> in_basis(cols_.size(), 0);
        for (int j : basis_) in_basis[j] = 1;

        while (iterations_ < 200000) {
            // Pricing: Dantzig by default, Bland once degeneracy stalls.
            int entering = -1;
            double best = -rc_tol;
            for (std::size_t j = 0; j < cols_.size(); ++j) {
                if (in_basis[j]) continue;
                if (phase_ == 2 && cols_[j].artificial) continue;
                const double rc = costs(j) - column_dot(y, static_cast<int>(j));
                if (bland) {
                    if (rc < -rc_tol) {
                        entering = static_cast<int>(j);
                        break;
                    }
                } else if (rc < best) {
                    best = rc;
                    entering = static_cast<int>(j);
                }
            }
            if (entering < 0) return;  // optimal for this phase

            const Eigen::VectorXd d = apply_binv(entering);
            int leaving = -1;
            double min_ratio = std::numeric_limits<double>::infinity();
            for (int r = 0; r < m_; ++r) {
                if (d(r) <= 1e-10) continue;
                const double ratio = xb_(r) / d(r);
                if (ratio < min_ratio - 1e-12 ||
                    (ratio < min_ratio + 1e-12 &&
                     (leaving < 0 || basis_[r] < basis_[leaving]))) {
                    min_ratio = ratio;
                    leaving = r;
                }
            }
            if (leaving < 0)
                throw Error("lp: internal error, problem reported unbounded");

            // Pivot: rank-1 update of the explicit inverse.
            const double pivot = d(leaving);
            if (std::abs(pivot) < 1e-9) {
                refactorize();
                continue;
            }
            in_basis[basis_[leaving]] = 0;
            in_basis[entering] = 1;
            basis_[leaving] = entering;
            binv_.row(leaving) /= pivot;
            for (int r = 0; r < m_; ++r) {
                if (r == leaving) continue;
                if (d(r) != 0.0) binv_.row(r) -= d(r) * binv_.row(leaving);
            }
            xb_ -= min_ratio * d;
            xb_(leaving) = min_ratio;
            ++iterations_;
            if (iterations_ % 256 == 0) refactorize();

            y = dual(costs);
            double objective = 0.0;
            for (int r = 0; r < m_; ++r) objective += costs(basis_[r]) * xb_(r);
            if (objective > last_objective - 1e-12) {
                if (++stall > 50) bland = true;
            } else {
                stall = 0;
            }
            last_objective = objective;
        }
        throw Error("lp: iteration limit exceeded");
    }

    void drive_out_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (!cols_[basis_[r]].artificial) continue;
            // Swap in any structural/slack column with a nonzero pivot in
            // this row; a fully zero row is redundant and the artificial
            // stays basic at value zero.
            for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
                if (cols_[j].artificial) continue;
                bool basic = false;
                for (int rr = 0; rr < m_; ++rr)
                    if (basis_[rr] == j) basic = true;
                if (basic) continue;
                const Eigen::VectorXd d = apply_binv(j);
                if (std::abs(d(r)) < 1e-8) continue;
                basis_[r] = j;
                binv_.row(r) /= d(r);
                for (int rr = 0; rr < m_; ++rr) {
                    if (rr == r) continue;
                    if (d(rr) != 0.0) binv_.row(rr) -= d(rr) * binv_.row(r);
                }
                xb_ = binv_ * rhs_;
                break;
            }
        }
    }

    std::vector<SparseColumn> cols_;
    Eigen::VectorXd rhs_;
    int m_;
    int structural_;
    int phase_ = 1;
    std::vector<int> basis_;
    Eigen::MatrixXd binv_;
    Eigen::VectorXd xb_;
    Eigen::VectorXd farkas_;
    int iterations_ = 0;
};

}  // namespace

LpSolution solve_lp_simplex(const LpProblem& problem) {
    const int n = static_cast<int>(problem.c.size());
    if (problem.lower.size() != n)
        throw std::invalid_argument("lp: lower bound size mismatch");

    // Presolve: singleton inequality rows are variable bounds. Tightened
    // lower bounds fold into the shift; finite upper bounds (rare here) stay
    // behind as explicit rows.
    Eigen::VectorXd lower = problem.lower;
    Eigen::VectorXd upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    std::vector<int> kept_rows;
    for (int r = 0; r < problem.a_ineq.rows(); ++r) {
        int nnz = 0, col = -1;
        for (int j = 0; j < n; ++j)
            if (problem.a_ineq(r, j) != 0.0) {
                ++nnz;
                col = j;
                if (nnz > 1) break;
            }
        if (nnz == 0) {
            if (problem.b_ineq(r) < -1e-9)
                throw InfeasibleError("lp: contradictory constant inequality row", 0);
            continue;
        }
        if (nnz == 1) {
            const double a = problem.a_ineq(r, col);
            const double bound = problem.b_ineq(r) / a;
            if (a > 0.0)
                upper(col) = std::min(upper(col), bound);
            else
                lower(col) = std::max(lower(col), bound);
            continue;
        }
        kept_rows.push_back(r);
    }
    for (int j = 0; j < n; ++j)
        if (lower(j) > upper(j) + 1e-9)
            throw InfeasibleError("lp: empty variable bound interval from presolve", 0);

    int extra_upper = 0;
    for (int j = 0; j < n; ++j)
        if (std::isfinite(upper(j))) ++extra_upper;
    const int mi = static_cast<int>(kept_rows.size()) + extra_upper;

    Eigen::MatrixXd ai = Eigen::MatrixXd::Zero(mi, n);
    Eigen::VectorXd bi(mi);
    for (std::size_t i = 0; i < kept_rows.size(); ++i) {
        ai.row(static_cast<int>(i)) = problem.a_ineq.row(kept_rows[i]);
        bi(static_cast<int>(i)) = problem.b_ineq(kept_rows[i]);
    }
    int at = static_cast<int>(kept_rows.size());
    for (int j = 0; j < n; ++j)
        if (std::isfinite(upper(j))) {
            ai(at, j) = 1.0;
            bi(at) = upper(j);
            ++at;
        }

    // Shift to w = x - lower >= 0 and reduce the equality block.
    if (mi > 0) bi -= ai * lower;
    Eigen::MatrixXd ae = problem.a_eq;
    Eigen::VectorXd be = problem.b_eq;
    if (ae.rows() > 0) be -= ae * lower;
    reduce_equalities(ae, be);
    const int me = static_cast<int>(ae.rows());
    const int m = mi + me;

    // Standard form [Ai I; Ae 0][w; s] = [bi; be] with rhs flipped
    // nonnegative. Initial basis: slacks where usable, artificials elsewhere.
    std::vector<double> row_sign(m, 1.0);
    Eigen::VectorXd rhs(m);
    for (int r = 0; r < mi; ++r) {
        row_sign[r] = bi(r) < 0.0 ? -1.0 : 1.0;
        rhs(r) = std::abs(bi(r));
    }
    for (int r = 0; r < me; ++r) {
        row_sign[mi + r] = be(r) < 0.0 ? -1.0 : 1.0;
        rhs(mi + r) = std::abs(be(r));
    }

    std::vector<SparseColumn> cols;
    cols.reserve(n + mi + m);
    for (int j = 0; j < n; ++j) {
        SparseColumn col;
        col.cost = problem.c(j);
        for (int r = 0; r < mi; ++r)
            if (ai(r, j) != 0.0) col.entries.push_back({r, row_sign[r] * ai(r, j)});
        for (int r = 0; r < me; ++r)
            if (std::abs(ae(r, j)) > 1e-14)
                col.entries.push_back({mi + r, row_sign[mi + r] * ae(r, j)});
        cols.push_back(std::move(col));
    }
    for (int r = 0; r < mi; ++r) {
        SparseColumn slack;
        slack.entries.push_back({r, row_sign[r]});
        cols.push_back(std::move(slack));
    }
    std::vector<int> basis(m, -1);
    for (int r = 0; r < m; ++r) {
        const bool slack_ok = r < mi && row_sign[r] > 0.0;
        if (slack_ok) {
            basis[r] = n + r;
        } else {
            SparseColumn art;
            art.artificial = true;
            art.entries.push_back({r, 1.0});
            basis[r] = static_cast<int>(cols.size());
            cols.push_back(std::move(art));
        }
    }

    RevisedSimplex simplex(std::move(cols), rhs, n);
    simplex.set_basis(std::move(basis));
    if (!simplex.solve())
        throw InfeasibleError("lp: infeasible (phase-1 optimum positive; Farkas dual norm " +
                                  std::to_string(simplex.farkas().norm()) + ")",
                              0);

    LpSolution solution;
    solution.x = lower;
    for (int r = 0; r < m; ++r) {
        const int j = simplex.basis()[r];
        if (j < n) solution.x(j) += simplex.basic_values()(r);
    }
    solution.objective = problem.c.dot(solution.x);
    solution.iterations = simplex.iterations();

    // Duality gap of the standard-form pair; zero (to roundoff) for an
    // optimal basic pair, reported as the complementary-slackness residual.
    const Eigen::VectorXd y = simplex.dual(simplex.phase_costs());
    double shifted_primal = solution.objective - problem.c.dot(lower);
    double dual_objective = y.dot(rhs);
    solution.gap = std::abs(shifted_primal - dual_objective) /
                   std::max(1.0, std::abs(shifted_primal));
    return solution;
}

}  // namespace vtube
