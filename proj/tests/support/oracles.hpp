#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the code under test except for plain data
// types and the world/config structures needed to describe scenes.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mergesim/qp.hpp"
#include "mergesim/topology.hpp"
#include "mergesim/world.hpp"

namespace oracle {

/// Objective with the slack eliminated: eps(v) is the smallest slack that
/// satisfies every soft row, and hard rows must hold up to `tol`.
struct QpEval {
    bool feasible = false;
    double objective = 0.0;
    double slack = 0.0;
};
QpEval evaluate_qp(const std::vector<double>& v, const std::vector<double>& v_ref,
                   const std::vector<mergesim::AffineConstraint>& rows, double k_eps, double tol = 1e-9);

/// Coarse-to-fine grid search over the box [0, v_cap]^n. The first pass
/// samples the box at 1 m/s, each later pass re-samples +/-10 cells around
/// the incumbent at a tenth of the spacing, down to `finest`. Returns the
/// best feasible grid value (feasible = false when no sample was).
struct GridResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> v;
};
GridResult grid_search_qp(const std::vector<double>& v_ref, const std::vector<mergesim::AffineConstraint>& rows,
                          double k_eps, double v_cap, double finest);

/// Exact optimum by brute force over every subset of constraints held with
/// equality (Eigen full-pivot LU on each equality-constrained problem),
/// keeping the best primal-feasible stationary point.
struct FaceResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> v;
    double slack = 0.0;
};
FaceResult face_enumeration_qp(const std::vector<double>& v_ref, const std::vector<mergesim::AffineConstraint>& rows,
                               double k_eps);

/// Random instance with 1..max_vars speeds and 1..max_rows rows. Hard rows
/// are generated to hold strictly at a hidden interior point, so the hard
/// set is never empty; soft rows are unrestricted.
struct QpInstance {
    std::vector<double> v_ref;
    std::vector<mergesim::AffineConstraint> rows;
    double k_eps = 1.0;
};
QpInstance random_qp(std::mt19937_64& rng, int max_vars, int max_rows);

/// KKT residuals of a reported solution, each scaled to be dimensionless.
struct KktResiduals {
    double stationarity = 0.0;
    double primal = 0.0;
    double dual = 0.0;
    double complementarity = 0.0;
    double max() const;
};
KktResiduals kkt_residuals(const mergesim::QpResult& result, const std::vector<double>& v_ref,
                           const std::vector<mergesim::AffineConstraint>& rows, double k_eps);

/// Straight-line transcription of the interaction-topology rules with a
/// brute-force neighbour scan.
mergesim::InteractionTopology naive_topology(const mergesim::World& world);

/// World with default parameters and no vehicles.
mergesim::World empty_world(mergesim::ShieldMode mode = mergesim::ShieldMode::mass);

/// Vehicle on the centerline of `lane` at (x, speed).
mergesim::Vehicle make_vehicle(const mergesim::World& world, int id, mergesim::Lane lane, double x, double speed);

/// Random snapshot of up to `max_vehicles` vehicles over both lanes with
/// random lane-change phases, lateral offsets and ties in position.
mergesim::World random_snapshot(std::mt19937_64& rng, int max_vehicles);

/// Bumper gap over speed for every same-lane (by lane field) leader pair
/// among active, uncrashed vehicles moving faster than v_floor.
double brute_min_headway(const mergesim::World& world, double v_floor = 1.0);

}  // namespace oracle
