#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mergesim/record.hpp"

namespace mergesim {

/// Smallest time headway (bumper gap over follower speed) in one snapshot.
/// Each vehicle is attributed to the lane whose centerline is nearest to
/// it and follows the nearest vehicle ahead in that lane. Followers slower
/// than `v_floor` are skipped. +inf when no pair qualifies.
double snapshot_min_headway(const std::vector<VehicleSnapshot>& vehicles, const EpisodeRecord& record,
                            double v_floor = 1.0);

/// Minimum over the initial snapshot and every step; 0 if any vehicle
/// crashed during the episode.
double min_time_headway(const EpisodeRecord& record, double v_floor = 1.0);

/// Mean speed over all vehicle-steps of active, uncrashed vehicles.
double average_speed(const EpisodeRecord& record);

struct MergeCount {
    int spawned = 0;
    int merged = 0;
};
MergeCount merge_count(const EpisodeRecord& record);

/// 100 * merged / spawned over all records; throws UndefinedMetric when no
/// ramp vehicle was spawned.
double merging_percentage(const std::vector<EpisodeRecord>& records);
double merging_percentage(const std::vector<EpisodeSummary>& summaries);

/// Summary of a completed record (protocol warnings are left at 0).
EpisodeSummary summarize(const EpisodeRecord& record);

/// True when a shielded episode broke the headway guarantee: a collision
/// or a minimum headway below tau - slack.
bool is_violation(const EpisodeSummary& summary, double tau, double slack = 0.05);

struct AggregateRow {
    std::string metric;
    double mean = 0.0;
    double std_error = 0.0;
    int n = 0;
};

/// Mean and standard error of the per-episode metrics; non-finite and
/// undefined values are left out of each metric's sample.
std::vector<AggregateRow> aggregate(const std::vector<EpisodeSummary>& summaries);

void write_summaries_csv(std::ostream& out, const std::vector<EpisodeSummary>& summaries);
std::vector<EpisodeSummary> read_summaries_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Shortest decimal text that parses back to the same double; "inf" for
/// infinity.
std::string format_number(double v);

}  // namespace mergesim
