#include "vtube/mp_partition.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vtube/errors.hpp"

namespace vtube {

/// Internal attorney: partitioning and deserialization attach children to
/// otherwise immutable regions.
struct RegionBuilder {
    static void attach(CriticalRegion& region, std::vector<CriticalRegion> children) {
        region.children_ = std::move(children);
    }
};

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Eigen::MatrixXd vertex_matrix_of(const Eigen::MatrixXd& vertices) {
    const int kc = static_cast<int>(vertices.cols());
    Eigen::MatrixXd m(kc, kc);
    m.row(0).setOnes();
    for (int j = 0; j < kc; ++j)
        m.col(j).tail(kc - 1) = vertices.col(j).head(kc - 1);
    return m;
}

struct Solved {
    double value;
    Eigen::VectorXd x;
};

/// Memoized exact solves shared by one partition run; keyed by quantized
/// theta so lattice points and shared vertices are solved once.
struct SolveCache {
    const ParametricTimeLp* plp;
    std::map<std::vector<std::int64_t>, Solved> map;
    PartitionStats* stats = nullptr;

    const Solved& get(const Eigen::VectorXd& theta) {
        std::vector<std::int64_t> key(theta.size());
        for (int i = 0; i < theta.size(); ++i)
            key[i] = static_cast<std::int64_t>(std::llround(theta(i) * 0x1p44));
        auto it = map.find(key);
        if (it != map.end()) return it->second;
        const TimeAllocation sol = plp->solve(theta);
        if (stats) ++stats->lp_solves;
        return map.emplace(key, Solved{sol.total, sol.dt}).first->second;
    }
};

/// All barycentric lattice multi-indices of resolution q over kc vertices,
/// lexicographic; the corresponding points are sum (i_j/q) s_j.
void lattice_indices(int kc, int q, std::vector<std::vector<int>>& out) {
    std::vector<int> idx(kc, 0);
    const std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == kc - 1) {
            idx[pos] = left;
            out.push_back(idx);
            return;
        }
        for (int i = left; i >= 0; --i) {
            idx[pos] = i;
            rec(pos + 1, left - i);
        }
    };
    rec(0, q);
}

MaxErrorResult max_error_impl(const CriticalRegion& region, SolveCache& cache,
                              double tolerance, const PartitionOptions& options) {
    const int kc = region.order();
    std::vector<std::vector<int>> indices;
    lattice_indices(kc, options.lattice_resolution, indices);
    const double q = options.lattice_resolution;

    Eigen::MatrixXd simplex = region.vertices();
    MaxErrorResult best;
    best.error = -std::numeric_limits<double>::infinity();

    const auto consider = [&](const Eigen::VectorXd& theta) {
        try {
            const Solved& sol = cache.get(theta);
            const double err = region.interpolate_value(theta) - sol.value;
            if (err > best.error + 1e-15) {
                best.error = err;
                best.theta = theta;
                best.optimizer = sol.x;
                best.value = sol.value;
            }
        } catch (const InfeasibleError& e) {
            throw FeasibilityHoleError(
                std::string("max_error: infeasible parameter inside a region (") + e.what() +
                ")");
        }
    };

    for (int round = 0; round <= options.max_search_rounds; ++round) {
        const double before = best.error;
        for (const auto& idx : indices) {
            Eigen::VectorXd theta = Eigen::VectorXd::Zero(kc);
            for (int j = 0; j < kc; ++j) theta += (idx[j] / q) * simplex.col(j);
            consider(theta);
        }
        if (round > 0 && best.error - before <= 0.1 * tolerance) break;
        // Shrink around the incumbent; concavity of the error keeps the
        // incumbent value monotone while the Lipschitz term vanishes.
        double diameter = 0.0;
        for (int j = 0; j < kc; ++j)
            diameter = std::max(diameter, (simplex.col(j) - best.theta).norm());
        if (diameter < 1e-9) break;
        for (int j = 0; j < kc; ++j)
            simplex.col(j) = best.theta + 0.5 * (simplex.col(j) - best.theta);
    }
    return best;
}

void refine(CriticalRegion& region, SolveCache& cache, double epsilon,
            const PartitionOptions& options, int depth) {
    const MaxErrorResult res = max_error_impl(region, cache, 0.01 * epsilon, options);
    if (res.error <= epsilon) return;  // leaf: interpolation is epsilon-sound
    if (depth >= options.max_depth)
        throw BudgetError("partition: recursion depth cap hit", res.error);

    const int kc = region.order();
    std::vector<CriticalRegion> children;
    for (int replaced = 0; replaced < kc; ++replaced) {
        Eigen::MatrixXd vertices = region.vertices();
        vertices.col(replaced) = res.theta;
        const Eigen::MatrixXd m = vertex_matrix_of(vertices);
        const double volume = std::abs(m.determinant()) / factorial(kc - 1);
        if (volume < 1e-12) continue;  // maximizer on this child's face
        Eigen::VectorXd values = region.values();
        values(replaced) = res.value;
        Eigen::MatrixXd optimizers = region.optimizers();
        optimizers.col(replaced) = res.optimizer;
        children.emplace_back(std::move(vertices), std::move(values), std::move(optimizers));
    }
    if (children.empty())
        throw GeometryError("partition: no valid split of a degenerate simplex");
    for (auto& child : children) refine(child, cache, epsilon, options, depth + 1);
    RegionBuilder::attach(region, std::move(children));
}

int count_leaves(const CriticalRegion& region) {
    if (region.leaf()) return 1;
    int n = 0;
    for (const auto& c : region.children()) n += count_leaves(c);
    return n;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

CriticalRegion::CriticalRegion(Eigen::MatrixXd vertices, Eigen::VectorXd values,
                               Eigen::MatrixXd optimizers)
    : vertices_(std::move(vertices)), values_(std::move(values)),
      optimizers_(std::move(optimizers)) {
    const int kc = static_cast<int>(vertices_.cols());
    if (vertices_.rows() != kc || values_.size() != kc || optimizers_.cols() != kc)
        throw AssemblyError("CriticalRegion: inconsistent vertex data");
    vertex_matrix_ = vertex_matrix_of(vertices_);
    lu_.compute(vertex_matrix_);
    if (std::abs(lu_.determinant()) < 1e-14)
        throw GeometryError("CriticalRegion: affinely dependent vertices");
}

Eigen::VectorXd CriticalRegion::barycentric(const Eigen::VectorXd& theta) const {
    if (theta.size() != order())
        throw std::domain_error("CriticalRegion: theta dimension mismatch");
    Eigen::VectorXd rhs(order());
    rhs(0) = 1.0;
    rhs.tail(order() - 1) = theta.head(order() - 1);
    return lu_.solve(rhs);
}

bool CriticalRegion::contains(const Eigen::VectorXd& theta, double tol) const {
    return barycentric(theta).minCoeff() >= -tol;
}

double CriticalRegion::interpolate_value(const Eigen::VectorXd& theta) const {
    return values_.dot(barycentric(theta));
}

Eigen::VectorXd CriticalRegion::interpolate_optimizer(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd w = barycentric(theta);
    if (w.minCoeff() < -1e-6)
        throw std::domain_error("CriticalRegion: theta outside the region");
    return optimizers_ * w;
}

double CriticalRegion::volume() const {
    return std::abs(lu_.determinant()) / factorial(order() - 1);
}

CriticalRegionTree::CriticalRegionTree(CriticalRegion root, double epsilon,
                                       std::uint64_t provenance)
    : root_(std::move(root)), epsilon_(epsilon), provenance_(provenance),
      leaf_count_(count_leaves(root_)) {}

const CriticalRegion& CriticalRegionTree::locate(const Eigen::VectorXd& theta) const {
    if (!root_.contains(theta, 1e-9))
        throw std::domain_error("locate: theta outside the parameter simplex");
    const int kc = root_.order();
    Eigen::VectorXd rhs(kc), w(kc);
    rhs(0) = 1.0;
    rhs.tail(kc - 1) = theta.head(kc - 1);

    const CriticalRegion* node = &root_;
    while (!node->leaf()) {
        const CriticalRegion* next = nullptr;
        double best_margin = -std::numeric_limits<double>::infinity();
        for (const auto& child : node->children()) {
            w = child.lu_.solve(rhs);
            const double margin = w.minCoeff();
            if (margin >= -1e-9) {
                next = &child;  // lowest-index child wins ties on shared faces
                break;
            }
            if (margin > best_margin) {
                best_margin = margin;
                next = &child;
            }
        }
        node = next;
    }
    return *node;
}

Eigen::VectorXd CriticalRegionTree::evaluate(const Eigen::VectorXd& theta) const {
    // Same descent as locate, reusing the final barycentric solve for the
    // affine optimizer map.
    if (!root_.contains(theta, 1e-9))
        throw std::domain_error("evaluate: theta outside the parameter simplex");
    const int kc = root_.order();
    Eigen::VectorXd rhs(kc), w(kc);
    rhs(0) = 1.0;
    rhs.tail(kc - 1) = theta.head(kc - 1);

    const CriticalRegion* node = &root_;
    w = node->lu_.solve(rhs);
    while (!node->leaf()) {
        const CriticalRegion* next = nullptr;
        Eigen::VectorXd next_w(kc);
        double best_margin = -std::numeric_limits<double>::infinity();
        for (const auto& child : node->children()) {
            const Eigen::VectorXd child_w = child.lu_.solve(rhs);
            const double margin = child_w.minCoeff();
            if (margin >= -1e-9) {
                next = &child;
                next_w = child_w;
                break;
            }
            if (margin > best_margin) {
                best_margin = margin;
                next = &child;
                next_w = child_w;
            }
        }
        node = next;
        w = next_w;
    }
    return node->optimizers() * w;
}

double CriticalRegionTree::approximate_value(const Eigen::VectorXd& theta) const {
    return locate(theta).interpolate_value(theta);
}

namespace {

nlohmann::json region_to_json(const CriticalRegion& region) {
    nlohmann::json node;
    const int kc = region.order();
    for (int j = 0; j < kc; ++j) {
        node["v"].push_back(std::vector<double>(region.vertices().col(j).data(),
                                                region.vertices().col(j).data() + kc));
        node["x"].push_back(std::vector<double>(
            region.optimizers().col(j).data(),
            region.optimizers().col(j).data() + region.optimizers().rows()));
    }
    node["val"] = std::vector<double>(region.values().data(), region.values().data() + kc);
    node["children"] = nlohmann::json::array();
    for (const auto& child : region.children())
        node["children"].push_back(region_to_json(child));
    return node;
}

CriticalRegion region_from_json(const nlohmann::json& node) {
    const auto& vertices = node.at("v");
    const int kc = static_cast<int>(vertices.size());
    const auto& values = node.at("val");
    const auto& optimizers = node.at("x");
    const int nt = static_cast<int>(optimizers.at(0).size());
    Eigen::MatrixXd v(kc, kc), x(nt, kc);
    Eigen::VectorXd val(kc);
    for (int j = 0; j < kc; ++j) {
        for (int i = 0; i < kc; ++i) v(i, j) = vertices.at(j).at(i).get<double>();
        for (int i = 0; i < nt; ++i) x(i, j) = optimizers.at(j).at(i).get<double>();
        val(j) = values.at(j).get<double>();
    }
    CriticalRegion region(std::move(v), std::move(val), std::move(x));
    std::vector<CriticalRegion> children;
    for (const auto& child : node.at("children"))
        children.push_back(region_from_json(child));
    if (!children.empty()) RegionBuilder::attach(region, std::move(children));
    return region;
}

}  // namespace

std::string CriticalRegionTree::to_json() const {
    nlohmann::json doc;
    doc["version"] = 1;
    doc["epsilon"] = epsilon_;
    doc["kc"] = root_.order();
    doc["nt"] = parameter_count();
    doc["leaf_count"] = leaf_count_;
    std::ostringstream hex;
    hex << std::hex << provenance_;
    doc["provenance"] = hex.str();
    doc["root"] = region_to_json(root_);
    return doc.dump();
}

CriticalRegionTree CriticalRegionTree::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.at("version").get<int>() != 1)
        throw IntegrityError("critical region tree: unsupported version");
    CriticalRegion root = region_from_json(doc.at("root"));
    std::uint64_t provenance = 0;
    std::istringstream hex(doc.at("provenance").get<std::string>());
    hex >> std::hex >> provenance;
    CriticalRegionTree tree(std::move(root), doc.at("epsilon").get<double>(), provenance);
    if (tree.leaf_count() != doc.at("leaf_count").get<int>())
        throw IntegrityError("critical region tree: leaf count mismatch");
    return tree;
}

MaxErrorResult max_error(const CriticalRegion& region, const ParametricTimeLp& plp,
                         double tolerance, const PartitionOptions& options,
                         PartitionStats* stats) {
    SolveCache cache{&plp, {}, stats};
    return max_error_impl(region, cache, tolerance, options);
}

CriticalRegionTree partition(const ParametricTimeLp& plp, double epsilon,
                             const PartitionOptions& options) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("partition: epsilon must be > 0");
    const int kc = plp.boundary_count();
    PartitionStats stats;
    SolveCache cache{&plp, {}, &stats};

    Eigen::MatrixXd vertices = Eigen::MatrixXd::Identity(kc, kc);
    Eigen::VectorXd values(kc);
    Eigen::MatrixXd optimizers(plp.boundary(0).segments, kc);
    for (int k = 0; k < kc; ++k) {
        const Solved& sol = cache.get(vertices.col(k));
        values(k) = sol.value;
        optimizers.col(k) = sol.x;
    }
    CriticalRegion root(std::move(vertices), std::move(values), std::move(optimizers));
    refine(root, cache, epsilon, options, 0);
    return CriticalRegionTree(std::move(root), epsilon, plp.content_hash());
}

Eigen::VectorXd sample_simplex(int dims, std::uint64_t& state) {
    Eigen::VectorXd theta(dims);
    for (int i = 0; i < dims; ++i) {
        const double u =
            std::max(0x1p-53, static_cast<double>(splitmix64(state) >> 11) * 0x1p-53);
        theta(i) = -std::log(u);
    }
    return theta / theta.sum();
}

}  // namespace vtube
