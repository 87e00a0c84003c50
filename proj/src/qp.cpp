#include "mergesim/qp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mergesim {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kDualTol = 1e-10;
constexpr double kPivotTol = 1e-12;
constexpr std::size_t kMaxSystem = 16;

// Dense square solve with partial pivoting; false when (numerically) singular.
bool gauss_solve(std::array<std::array<double, kMaxSystem + 1>, kMaxSystem>& m, std::size_t n,
                 std::array<double, kMaxSystem>& x) {
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(m[i][j]));
    if (scale == 0.0) return false;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) <= kPivotTol * scale) return false;
        std::swap(m[piv], m[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = m[i][n];
        for (std::size_t j = i + 1; j < n; ++j) s -= m[i][j] * x[j];
        x[i] = s / m[i][i];
    }
    return true;
}

struct Problem {
    std::size_t n = 0;      // decision speeds
    std::size_t dim = 0;    // n, plus one when the slack is a variable
    bool with_slack = false;
    std::vector<std::array<double, 4>> rows;  // coefficients over z (dim <= 4)
    std::vector<double> bounds;
    std::vector<double> v_ref;
    double k_eps = 0.0;
};

struct Candidate {
    std::array<double, 4> z{};
    std::array<double, kMaxSystem> lambda{};
};

bool primal_feasible(const Problem& pb, const std::array<double, 4>& z) {
    for (std::size_t r = 0; r < pb.rows.size(); ++r) {
        double lhs = 0.0, mag = std::abs(pb.bounds[r]);
        for (std::size_t j = 0; j < pb.dim; ++j) {
            lhs += pb.rows[r][j] * z[j];
            mag = std::max(mag, std::abs(pb.rows[r][j] * z[j]));
        }
        if (lhs - pb.bounds[r] > kFeasTol * std::max(1.0, mag)) return false;
    }
    return true;
}

bool solve_working_set(const Problem& pb, const std::vector<std::size_t>& ws, Candidate& out) {
    // With eps >= 0 in the working set the slack is fixed at zero and drops
    // out of the system; its multiplier then follows from the slack's
    // stationarity row. Solving with the slack column present would mix the
    // k_eps-sized multiplier into v through rounding.
    const std::size_t eps_row = pb.rows.size() - 1;
    const bool eps_fixed = pb.with_slack && std::find(ws.begin(), ws.end(), eps_row) != ws.end();
    const std::size_t vars = eps_fixed ? pb.n : pb.dim;
    std::vector<std::size_t> rows;
    for (std::size_t r : ws)
        if (!(eps_fixed && r == eps_row)) rows.push_back(r);

    const std::size_t size = vars + rows.size();
    std::array<std::array<double, kMaxSystem + 1>, kMaxSystem> m{};
    for (std::size_t j = 0; j < vars; ++j) {
        const bool is_speed = j < pb.n;
        m[j][j] = is_speed ? 1.0 : 0.0;
        m[j][size] = is_speed ? pb.v_ref[j] : -pb.k_eps;
        for (std::size_t k = 0; k < rows.size(); ++k) m[j][vars + k] = pb.rows[rows[k]][j];
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t j = 0; j < vars; ++j) m[vars + k][j] = pb.rows[rows[k]][j];
        m[vars + k][size] = pb.bounds[rows[k]];
    }
    std::array<double, kMaxSystem> x{};
    if (!gauss_solve(m, size, x)) return false;
    out.z.fill(0.0);
    for (std::size_t j = 0; j < vars; ++j) out.z[j] = x[j];
    out.lambda.fill(0.0);
    double eps_multiplier = pb.k_eps;
    for (std::size_t k = 0, r = 0; k < ws.size(); ++k) {
        if (eps_fixed && ws[k] == eps_row) continue;
        out.lambda[k] = x[vars + r++];
        if (eps_fixed) eps_multiplier += out.lambda[k] * pb.rows[ws[k]][pb.n];
    }
    if (eps_fixed)
        for (std::size_t k = 0; k < ws.size(); ++k)
            if (ws[k] == eps_row) out.lambda[k] = eps_multiplier;
    return true;
}

// Calls visit(ws) for every k-subset of {0..m-1} in lexicographic order;
// stops early when visit returns true.
template <typename Visit>
bool for_each_subset(std::size_t m, std::size_t k, Visit&& visit) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        if (visit(idx)) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

AffineConstraint AffineConstraint::hard(std::string id, std::vector<double> coeffs, double bound, double h) {
    coeffs.push_back(0.0);
    return {std::move(id), std::move(coeffs), bound, ConstraintKind::hard, h};
}

AffineConstraint AffineConstraint::soft(std::string id, std::vector<double> coeffs, double bound, double h) {
    coeffs.push_back(-1.0);
    return {std::move(id), std::move(coeffs), bound, ConstraintKind::soft, h};
}

double AffineConstraint::residual(const std::vector<double>& v, double eps) const {
    double lhs = slack_coeff() * eps;
    for (std::size_t j = 0; j < dimension(); ++j) lhs += p[j] * v[j];
    return lhs - b;
}

double qp_objective(const std::vector<double>& v, double eps, const std::vector<double>& v_ref, double k_eps) {
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += (v[j] - v_ref[j]) * (v[j] - v_ref[j]);
    return 0.5 * s + k_eps * eps;
}

QpResult solve_qp(const std::vector<double>& v_ref, const std::vector<AffineConstraint>& constraints,
                  double k_eps) {
    Problem pb;
    pb.n = v_ref.size();
    if (pb.n == 0 || pb.n > 3) throw std::invalid_argument("solve_qp: between 1 and 3 decision variables");
    pb.v_ref = v_ref;
    pb.k_eps = k_eps;
    for (const auto& c : constraints) {
        if (c.dimension() != pb.n) throw std::invalid_argument("solve_qp: constraint '" + c.id + "' has wrong dimension");
        if (c.slack_coeff() != 0.0) pb.with_slack = true;
    }
    pb.dim = pb.n + (pb.with_slack ? 1 : 0);
    for (const auto& c : constraints) {
        std::array<double, 4> row{};
        for (std::size_t j = 0; j < pb.dim; ++j) row[j] = c.p[j];
        pb.rows.push_back(row);
        pb.bounds.push_back(c.b);
    }
    const std::size_t m_user = constraints.size();
    if (pb.with_slack) {
        std::array<double, 4> row{};
        row[pb.n] = -1.0;
        pb.rows.push_back(row);
        pb.bounds.push_back(0.0);
    }
    const std::size_t m = pb.rows.size();
    if (pb.dim + std::min(m, pb.dim) > kMaxSystem) throw std::invalid_argument("solve_qp: problem too large");

    QpResult result;
    result.v = v_ref;
    result.multipliers.assign(m_user, 0.0);

    Candidate best;
    std::vector<std::size_t> best_ws;
    bool found = false;
    const std::size_t k_min = pb.with_slack ? 1 : 0;
    for (std::size_t k = k_min; k <= std::min(pb.dim, m) && !found; ++k) {
        found = for_each_subset(m, k, [&](const std::vector<std::size_t>& ws) {
            Candidate cand;
            if (!solve_working_set(pb, ws, cand)) return false;
            for (std::size_t i = 0; i < ws.size(); ++i)
                if (cand.lambda[i] < -kDualTol * std::max(1.0, k_eps)) return false;
            if (!primal_feasible(pb, cand.z)) return false;
            best = cand;
            best_ws = ws;
            return true;
        });
    }
    if (!found) {
        result.status = QpStatus::infeasible;
        return result;
    }

    result.status = QpStatus::optimal;
    for (std::size_t j = 0; j < pb.n; ++j) result.v[j] = best.z[j];
    result.slack = pb.with_slack ? std::max(0.0, best.z[pb.n]) : 0.0;
    for (std::size_t i = 0; i < best_ws.size(); ++i) {
        const double lam = std::max(0.0, best.lambda[i]);
        if (best_ws[i] < m_user) {
            result.multipliers[best_ws[i]] = lam;
            result.active.push_back(constraints[best_ws[i]].id);
        } else {
            result.slack_multiplier = lam;
        }
    }
    result.objective = qp_objective(result.v, result.slack, v_ref, k_eps);
    return result;
}

}  // namespace mergesim
