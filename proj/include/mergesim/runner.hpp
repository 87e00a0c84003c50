#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mergesim/config.hpp"
#include "mergesim/metrics.hpp"
#include "mergesim/policy.hpp"
#include "mergesim/record.hpp"

namespace mergesim {

/// Runs one episode to completion (episode_steps, or until no vehicle is
/// left to act) and returns its full record with the summary filled in.
/// `policy` sees begin_episode / decide per step / end_episode.
EpisodeRecord run_episode(const SimConfig& config, std::uint64_t seed, Policy& policy,
                          const std::string& policy_label);

struct BatchResult {
    std::vector<EpisodeSummary> summaries;  // in seed order
    std::vector<AggregateRow> aggregate;
    int violations = 0;  // shielded episodes that broke the headway guarantee
};

/// Runs config.episodes episodes with seeds seed, seed + 1, ... on up to
/// config.jobs threads, each with its own policy instance. When
/// `write_outputs` is set, writes summaries.csv and aggregate.csv to the
/// output directory, plus one record per episode under episodes/ when
/// trajectories are enabled. Output does not depend on the job count.
BatchResult run_batch(const RunConfig& config, bool write_outputs = true);

/// File name of an episode record inside the output directory.
std::string episode_file_name(std::uint64_t seed);

/// Writes "dx,r_h" rows of the headway reward curve.
void write_reward_curve(std::ostream& out, double v_e, double tau, double dx_lo, double dx_hi, int points);

}  // namespace mergesim
