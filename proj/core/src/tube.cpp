#include "vtube/tube.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "vtube/errors.hpp"
#include "vtube/hash.hpp"

namespace vtube {

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json cols = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j)
        cols.push_back(std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows()));
    return cols;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& cols) {
    const int nc = static_cast<int>(cols.size());
    const int nr = static_cast<int>(cols.at(0).size());
    Eigen::MatrixXd m(nr, nc);
    for (int j = 0; j < nc; ++j)
        for (int i = 0; i < nr; ++i) m(i, j) = cols.at(j).at(i).get<double>();
    return m;
}

nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec3_from_json(const nlohmann::json& j) {
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

}  // namespace

std::vector<TimeLp> boundary_time_lps(const SpatialSolution& spatial,
                                      const Eigen::VectorXd& v_max, double t_min) {
    std::vector<TimeLp> lps;
    for (int k = 0; k < spatial.boundary_count(); ++k)
        lps.push_back(build_lp(spatial.boundaries[k].control_points, v_max, t_min));
    return lps;
}

VirtualTube::VirtualTube(Terminals terminals, SphereCorridor corridor,
                         SpatialSolution spatial, Eigen::VectorXd v_max,
                         CriticalRegionTree tree)
    : terminals_(std::move(terminals)), corridor_(std::move(corridor)),
      spatial_(std::move(spatial)), v_max_(std::move(v_max)),
      parametric_(boundary_time_lps(spatial_, v_max_)), tree_(std::move(tree)) {
    if (tree_.provenance_hash() != parametric_.content_hash())
        throw AssemblyError("VirtualTube: tree provenance does not match the spatial solution");
    if (static_cast<int>(terminals_.start_vertices().size()) < spatial_.boundary_count())
        throw AssemblyError("VirtualTube: fewer terminal vertices than boundaries");
    if (corridor_.segment_count() != spatial_.segment_count())
        throw AssemblyError("VirtualTube: corridor/spatial segment mismatch");

    boundary_starts_.resize(3, spatial_.boundary_count());
    for (int k = 0; k < spatial_.boundary_count(); ++k)
        boundary_starts_.col(k) = spatial_.boundaries[k].control_points.front().col(0);

    Fnv1a hash;
    hash.value(parametric_.content_hash());
    hash.value(tree_.leaf_count());
    hash.value(tree_.epsilon());
    for (int k = 0; k < spatial_.boundary_count(); ++k)
        for (const auto& cp : spatial_.boundaries[k].control_points) hash.matrix(cp);
    content_hash_ = hash.digest();
}

Eigen::VectorXd VirtualTube::durations(const Eigen::VectorXd& theta) const {
    if (theta.size() != boundary_count() || !on_simplex(theta))
        throw std::domain_error("VirtualTube: theta not on the simplex");
    Eigen::VectorXd dt = tree_.evaluate(theta);
    const double t_min = parametric_.boundary(0).t_min;
    for (int m = 0; m < dt.size(); ++m) dt(m) = std::max(dt(m), t_min);
    return dt;
}

PiecewiseBezier VirtualTube::trajectory(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd dt = durations(theta);
    std::vector<Eigen::MatrixXd> cps = combine(spatial_, theta);
    std::vector<BezierSegment> segments;
    segments.reserve(cps.size());
    for (int m = 0; m < segment_count(); ++m)
        segments.emplace_back(std::move(cps[m]), dt(m));
    return PiecewiseBezier(std::move(segments));
}

PiecewiseBezier VirtualTube::trajectory_initial_allocation(const Eigen::VectorXd& theta) const {
    if (theta.size() != boundary_count() || !on_simplex(theta))
        throw std::domain_error("VirtualTube: theta not on the simplex");
    std::vector<Eigen::MatrixXd> cps = combine(spatial_, theta);
    std::vector<BezierSegment> segments;
    segments.reserve(cps.size());
    for (int m = 0; m < segment_count(); ++m)
        segments.emplace_back(std::move(cps[m]), spatial_.dt[m]);
    return PiecewiseBezier(std::move(segments));
}

Eigen::VectorXd VirtualTube::assign(const Vec3& start) const {
    const int kc = boundary_count();
    // Simplex-constrained least squares by active-set elimination: solve the
    // equality-constrained problem on the support, drop the most negative
    // weight until feasible.
    std::vector<int> support(kc);
    for (int i = 0; i < kc; ++i) support[i] = i;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(kc);
    while (true) {
        const int s = static_cast<int>(support.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
        Eigen::VectorXd rhs(s + 1);
        for (int i = 0; i < s; ++i) {
            for (int j = 0; j < s; ++j)
                kkt(i, j) = 2.0 * boundary_starts_.col(support[i]).dot(
                                      boundary_starts_.col(support[j]));
            kkt(i, s) = 1.0;
            kkt(s, i) = 1.0;
            rhs(i) = 2.0 * boundary_starts_.col(support[i]).dot(start);
        }
        rhs(s) = 1.0;
        const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
        theta.setZero();
        for (int i = 0; i < s; ++i) theta(support[i]) = sol(i);
        int worst = -1;
        double most_negative = -1e-12;
        for (int i = 0; i < s; ++i)
            if (sol(i) < most_negative) {
                most_negative = sol(i);
                worst = i;
            }
        if (worst < 0 || s == 1) break;
        support.erase(support.begin() + worst);
    }
    theta = theta.cwiseMax(0.0);
    theta /= theta.sum();
    const double residual = (boundary_starts_ * theta - start).norm();
    if (residual > 1e-7)
        throw AssignmentError("assign: start point outside the boundary start hull", residual);
    return theta;
}

std::vector<Eigen::VectorXd> VirtualTube::assign_parameters(const std::vector<Vec3>& starts) const {
    std::vector<Eigen::VectorXd> thetas;
    thetas.reserve(starts.size());
    for (const auto& s : starts) thetas.push_back(assign(s));
    return thetas;
}

std::vector<Vec3> VirtualTube::cross_section(double fraction) const {
    if (fraction < 0.0 || fraction > 1.0)
        throw std::domain_error("cross_section: fraction outside [0,1]");
    const int m_count = segment_count();
    int m = std::min(static_cast<int>(fraction * m_count), m_count - 1);
    const double u = fraction * m_count - m;
    std::vector<Vec3> samples;
    for (int k = 0; k < boundary_count(); ++k) {
        const BezierSegment seg(spatial_.boundaries[k].control_points[m], spatial_.dt[m]);
        samples.push_back(seg.eval(std::clamp(u, 0.0, 1.0) * spatial_.dt[m]));
    }
    return samples;
}

std::string VirtualTube::to_json() const {
    nlohmann::json doc;
    doc["version"] = 1;
    doc["vmax"] = to_vec(v_max_);

    nlohmann::json terms;
    for (const auto& v : terminals_.start_vertices()) terms["start"].push_back(vec3_json(v));
    for (const auto& v : terminals_.goal_vertices()) terms["goal"].push_back(vec3_json(v));
    doc["terminals"] = terms;

    nlohmann::json corr;
    for (const auto& s : corridor_.spheres)
        corr["spheres"].push_back({{"o", vec3_json(s.center)}, {"r", s.radius}});
    corr["planes"] = nlohmann::json::array();
    for (const auto& p : corridor_.planes)
        corr["planes"].push_back({{"c", vec3_json(p.center)},
                                  {"lambda", p.lambda},
                                  {"t", vec3_json(p.tangent)},
                                  {"n", vec3_json(p.normal)},
                                  {"b", vec3_json(p.binormal)}});
    doc["corridor"] = corr;

    nlohmann::json spat;
    spat["dt"] = spatial_.dt;
    spat["degree"] = spatial_.degree;
    spat["order"] = spatial_.smooth_order;
    for (const auto& b : spatial_.boundaries) {
        nlohmann::json bj;
        bj["objective"] = b.objective;
        bj["kkt"] = b.kkt_residual;
        for (const auto& cp : b.control_points) bj["segments"].push_back(matrix_json(cp));
        spat["boundaries"].push_back(bj);
    }
    doc["spatial"] = spat;

    doc["tree"] = nlohmann::json::parse(tree_.to_json());

    // Hash over the canonical dump without the hash field itself.
    Fnv1a hash;
    hash.value(doc.dump());
    std::ostringstream hex;
    hex << std::hex << hash.digest();
    doc["content_hash"] = hex.str();
    return doc.dump(2);
}

VirtualTube VirtualTube::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("tube artifact: invalid JSON (") + e.what() + ")");
    }
    try {
        if (doc.at("version").get<int>() != 1)
            throw IntegrityError("tube artifact: unsupported version");

        const std::string stored_hash = doc.at("content_hash").get<std::string>();
        nlohmann::json unhashed = doc;
        unhashed.erase("content_hash");
        Fnv1a hash;
        hash.value(unhashed.dump());
        std::ostringstream hex;
        hex << std::hex << hash.digest();
        if (hex.str() != stored_hash)
            throw IntegrityError("tube artifact: content hash mismatch");

        std::vector<Vec3> starts, goals;
        for (const auto& v : doc.at("terminals").at("start")) starts.push_back(vec3_from_json(v));
        for (const auto& v : doc.at("terminals").at("goal")) goals.push_back(vec3_from_json(v));
        Terminals terminals(starts, goals);

        SphereCorridor corridor;
        for (const auto& s : doc.at("corridor").at("spheres"))
            corridor.spheres.push_back({vec3_from_json(s.at("o")), s.at("r").get<double>()});
        for (const auto& p : doc.at("corridor").at("planes")) {
            IntersectionPlane plane;
            plane.center = vec3_from_json(p.at("c"));
            plane.lambda = p.at("lambda").get<double>();
            plane.tangent = vec3_from_json(p.at("t"));
            plane.normal = vec3_from_json(p.at("n"));
            plane.binormal = vec3_from_json(p.at("b"));
            corridor.planes.push_back(plane);
        }

        SpatialSolution spatial;
        spatial.dt = doc.at("spatial").at("dt").get<std::vector<double>>();
        spatial.degree = doc.at("spatial").at("degree").get<int>();
        spatial.smooth_order = doc.at("spatial").at("order").get<int>();
        for (const auto& bj : doc.at("spatial").at("boundaries")) {
            BoundarySolution b;
            b.objective = bj.at("objective").get<double>();
            b.kkt_residual = bj.at("kkt").get<double>();
            for (const auto& cp : bj.at("segments")) b.control_points.push_back(matrix_from_json(cp));
            spatial.boundaries.push_back(std::move(b));
        }

        const std::vector<double> vmax_values = doc.at("vmax").get<std::vector<double>>();
        const Eigen::VectorXd v_max = Eigen::Map<const Eigen::VectorXd>(
            vmax_values.data(), static_cast<int>(vmax_values.size()));
        CriticalRegionTree tree = CriticalRegionTree::from_json(doc.at("tree").dump());
        return VirtualTube(std::move(terminals), std::move(corridor), std::move(spatial),
                           v_max, std::move(tree));
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("tube artifact: malformed field (") + e.what() + ")");
    }
}

}  // namespace vtube
