#ifndef VTUBE_MP_PARTITION_HPP
#define VTUBE_MP_PARTITION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "vtube/time_lp.hpp"

namespace vtube {

/// One simplex of the parameter partition. Vertices are stored as full
/// barycentric vectors; the square vertex matrix [1...1; reduced coords]
/// carries the affine interpolation, evaluated through a cached LU.
class CriticalRegion {
  public:
    CriticalRegion(Eigen::MatrixXd vertices, Eigen::VectorXd values,
                   Eigen::MatrixXd optimizers);

    int order() const { return static_cast<int>(vertices_.cols()); }  // k_c
    const Eigen::MatrixXd& vertices() const { return vertices_; }
    const Eigen::VectorXd& values() const { return values_; }
    const Eigen::MatrixXd& optimizers() const { return optimizers_; }
    const std::vector<CriticalRegion>& children() const { return children_; }
    bool leaf() const { return children_.empty(); }

    /// Local barycentric coordinates of theta with respect to this region:
    /// w = M^{-1} [1; theta_reduced].
    Eigen::VectorXd barycentric(const Eigen::VectorXd& theta) const;
    bool contains(const Eigen::VectorXd& theta, double tol = 1e-9) const;

    /// Affine value interpolation V~(theta) = v_opt . w.
    double interpolate_value(const Eigen::VectorXd& theta) const;

    /// Affine optimizer x~(theta) = X M^{-1} [1; theta]; no LP solve.
    Eigen::VectorXd interpolate_optimizer(const Eigen::VectorXd& theta) const;

    /// Simplex volume in the reduced coordinates.
    double volume() const;

  private:
    friend struct RegionBuilder;
    friend class CriticalRegionTree;
    Eigen::MatrixXd vertices_;    // k_c x k_c, column j = vertex j (barycentric)
    Eigen::VectorXd values_;      // V* at the vertices
    Eigen::MatrixXd optimizers_;  // n_t x k_c, column j = x* at vertex j
    Eigen::MatrixXd vertex_matrix_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    std::vector<CriticalRegion> children_;
};

struct PartitionOptions {
    int max_depth = 20;
    /// Barycentric lattice resolution of the concave max-error search.
    int lattice_resolution = 6;
    /// Shrink rounds of the search; each round halves the simplex around the
    /// incumbent.
    int max_search_rounds = 8;
};

struct PartitionStats {
    int lp_solves = 0;
    int regions = 0;
};

class CriticalRegionTree {
  public:
    CriticalRegionTree(CriticalRegion root, double epsilon, std::uint64_t provenance);

    const CriticalRegion& root() const { return root_; }
    double epsilon() const { return epsilon_; }
    int leaf_count() const { return leaf_count_; }
    std::uint64_t provenance_hash() const { return provenance_; }
    int parameter_count() const { return static_cast<int>(root_.optimizers().rows()); }

    /// Leaf containment query by tree descent; ties on shared faces go to
    /// the lowest-index child. Throws std::domain_error outside the root.
    const CriticalRegion& locate(const Eigen::VectorXd& theta) const;

    /// Interpolated allocation at theta through locate + the leaf's affine
    /// map; zero optimization solves.
    Eigen::VectorXd evaluate(const Eigen::VectorXd& theta) const;
    double approximate_value(const Eigen::VectorXd& theta) const;

    std::string to_json() const;
    static CriticalRegionTree from_json(const std::string& text);

  private:
    CriticalRegion root_;
    double epsilon_;
    std::uint64_t provenance_;
    int leaf_count_;
};

struct MaxErrorResult {
    double error = 0.0;          // max of V~ - V* over the region
    Eigen::VectorXd theta;       // maximizer
    Eigen::VectorXd optimizer;   // x*(theta) at the maximizer
    double value = 0.0;          // V*(theta)
};

/// Deterministic concave maximization of the interpolation error over the
/// region: barycentric lattice sweeps with simplex shrinking around the
/// incumbent, memoizing LP solves. Valid globally because V* is convex, so
/// the error is concave. Throws FeasibilityHoleError if an interior theta
/// is infeasible.
MaxErrorResult max_error(const CriticalRegion& region, const ParametricTimeLp& plp,
                         double tolerance, const PartitionOptions& options = {},
                         PartitionStats* stats = nullptr);

/// Recursive simplex partition of the whole parameter simplex to error
/// bound epsilon (Algorithm: solve vertices, test max error, star-subdivide
/// at the maximizer until every leaf passes).
CriticalRegionTree partition(const ParametricTimeLp& plp, double epsilon,
                             const PartitionOptions& options = {});

/// Seeded uniform sample on the barycentric simplex.
Eigen::VectorXd sample_simplex(int dims, std::uint64_t& state);

}  // namespace vtube

#endif  // VTUBE_MP_PARTITION_HPP
