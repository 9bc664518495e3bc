#ifndef VTUBE_LP_SOLVER_HPP
#define VTUBE_LP_SOLVER_HPP

#include <Eigen/Dense>

namespace vtube {

/// min c.x  subject to  a_ineq x <= b_ineq,  a_eq x = b_eq,  x >= lower.
/// Either constraint block may be empty (0 rows).
struct LpProblem {
    Eigen::VectorXd c;
    Eigen::MatrixXd a_ineq;
    Eigen::VectorXd b_ineq;
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
    Eigen::VectorXd lower;
};

struct LpSolution {
    Eigen::VectorXd x;
    double objective = 0.0;
    /// Scaled duality gap of the returned basic solution; complementary
    /// slackness holds when this is ~0.
    double gap = 0.0;
    int iterations = 0;
};

/// Two-phase revised simplex with an explicit basis inverse. Pivoting uses
/// Dantzig pricing with index tie-breaks and falls back to Bland's rule on
/// degenerate stalls, so runs are deterministic and cycle-free. Throws
/// InfeasibleError with a Farkas certificate summary when the feasible set
/// is empty, and Error if unboundedness is ever reported (which the shifted
/// form rules out for positive costs).
LpSolution solve_lp_simplex(const LpProblem& problem);

}  // namespace vtube

#endif  // VTUBE_LP_SOLVER_HPP
