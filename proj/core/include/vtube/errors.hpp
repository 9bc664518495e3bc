#ifndef VTUBE_ERRORS_HPP
#define VTUBE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vtube {

/// Base class for all library errors that are not plain std domain/argument
/// violations.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad parameter combinations, duplicate boundary
/// offsets, zero velocity limits, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Degenerate or impossible geometry (tangent/nested/concentric spheres,
/// zero-length chords).
struct GeometryError : Error {
    using Error::Error;
};

/// Corridor search exhausted its sample budget without reaching the goal.
struct PlanningFailure : Error {
    PlanningFailure(const std::string& what, std::size_t explored_nodes)
        : Error(what), explored(explored_nodes) {}
    std::size_t explored;
};

/// An optimization problem has an empty feasible set. `segment` is the
/// 1-based index of the offending trajectory segment when known, 0 otherwise.
struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& what, int segment_index = 0)
        : Error(what), segment(segment_index) {}
    int segment;
};

/// Mismatched dimensions or provenance when assembling composite objects.
struct AssemblyError : Error {
    using Error::Error;
};

/// Serialized artifact failed its content-hash or version check.
struct IntegrityError : Error {
    using Error::Error;
};

/// Recursion/iteration budget exhausted before reaching the requested
/// tolerance; carries the worst residual error seen.
struct BudgetError : Error {
    BudgetError(const std::string& what, double worst)
        : Error(what), worst_residual(worst) {}
    double worst_residual;
};

/// An infeasible parameter was met strictly inside a region where convexity
/// guarantees feasibility; signals malformed input.
struct FeasibilityHoleError : Error {
    using Error::Error;
};

}  // namespace vtube

#endif  // VTUBE_ERRORS_HPP
