#pragma once

#include <string>
#include <vector>

namespace mergesim {

enum class ConstraintKind { hard, soft };

/// Halfspace p^T [v; eps] <= b over the decision speeds v and the shared
/// slack eps. Hard rows have a zero slack coefficient; soft rows carry -1,
/// so a positive slack relaxes them.
struct AffineConstraint {
    std::string id;
    std::vector<double> p;  // one entry per decision variable, then the slack coefficient
    double b = 0.0;
    ConstraintKind kind = ConstraintKind::hard;
    double h = 0.0;         // barrier value at the current state, for reporting

    static AffineConstraint hard(std::string id, std::vector<double> coeffs, double bound, double h = 0.0);
    static AffineConstraint soft(std::string id, std::vector<double> coeffs, double bound, double h = 0.0);

    std::size_t dimension() const { return p.empty() ? 0 : p.size() - 1; }
    double slack_coeff() const { return p.empty() ? 0.0 : p.back(); }

    /// p^T [v; eps] - b; non-positive when satisfied.
    double residual(const std::vector<double>& v, double eps) const;
};

enum class QpStatus { optimal, infeasible };

struct QpResult {
    QpStatus status = QpStatus::infeasible;
    std::vector<double> v;
    double slack = 0.0;
    double objective = 0.0;
    std::vector<double> multipliers;  // one per constraint, >= 0
    double slack_multiplier = 0.0;    // of eps >= 0
    std::vector<std::string> active;  // ids of the constraints in the optimal active set
};

/// Objective of the shield's quadratic program:
/// 0.5 * ||v - v_ref||^2 + k_eps * eps.
double qp_objective(const std::vector<double>& v, double eps, const std::vector<double>& v_ref, double k_eps);

/// Minimises 0.5 * ||v - v_ref||^2 + k_eps * eps subject to every
/// constraint and eps >= 0.
///
/// Exact active-set enumeration for small dense problems: candidate
/// working sets are tried in order of increasing size, each solved through
/// its KKT system, and the first primal and dual feasible point is the
/// unique global optimum. Reports `infeasible` when the hard constraints
/// admit no point.
QpResult solve_qp(const std::vector<double>& v_ref, const std::vector<AffineConstraint>& constraints,
                  double k_eps);

}  // namespace mergesim
