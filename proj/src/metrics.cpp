#include "mergesim/metrics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mergesim/errors.hpp"

namespace mergesim {

namespace {

constexpr const char* kSummaryHeader =
    "seed,shield,policy,reward,steps,n_vehicles,ramp_spawned,merged,merging_pct,min_headway,avg_speed,"
    "collisions,shield_faults,protocol_warnings,mean_reward";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("summary csv: bad number '" + s + "'");
    return v;
}

AggregateRow stats(std::string metric, const std::vector<double>& xs) {
    AggregateRow row;
    row.metric = std::move(metric);
    row.n = static_cast<int>(xs.size());
    if (xs.empty()) return row;
    double sum = 0.0;
    for (double x : xs) sum += x;
    row.mean = sum / xs.size();
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - row.mean) * (x - row.mean);
        row.std_error = std::sqrt(ss / (xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
    }
    return row;
}

}  // namespace

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double snapshot_min_headway(const std::vector<VehicleSnapshot>& vehicles, const EpisodeRecord& record,
                            double v_floor) {
    const RoadNetwork& road = record.config.road;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : vehicles) {
        if (!f.active() || f.crashed) continue;
        const double v = f.state.speed();
        if (v < v_floor) continue;
        const Lane lane = road.dominant_lane(f.state.x, f.state.y);
        const VehicleSnapshot* leader = nullptr;
        for (const auto& o : vehicles) {
            if (o.id == f.id || !o.active() || road.dominant_lane(o.state.x, o.state.y) != lane) continue;
            const bool ahead = o.state.x > f.state.x || (o.state.x == f.state.x && o.id < f.id);
            if (!ahead) continue;
            if (!leader || o.state.x < leader->state.x || (o.state.x == leader->state.x && o.id > leader->id))
                leader = &o;
        }
        if (!leader) continue;
        const double gap = (leader->state.x - 0.5 * record.info(leader->id)->length) -
                           (f.state.x + 0.5 * record.info(f.id)->length);
        best = std::min(best, std::max(0.0, gap) / v);
    }
    return best;
}

double min_time_headway(const EpisodeRecord& record, double v_floor) {
    auto crashed = [](const std::vector<VehicleSnapshot>& vs) {
        for (const auto& v : vs)
            if (v.crashed) return true;
        return false;
    };
    if (crashed(record.initial)) return 0.0;
    for (const auto& s : record.steps)
        if (crashed(s.vehicles)) return 0.0;
    double best = snapshot_min_headway(record.initial, record, v_floor);
    for (const auto& s : record.steps) best = std::min(best, snapshot_min_headway(s.vehicles, record, v_floor));
    return best;
}

double average_speed(const EpisodeRecord& record) {
    double sum = 0.0;
    long n = 0;
    for (const auto& s : record.steps) {
        for (const auto& v : s.vehicles) {
            if (!v.active() || v.crashed) continue;
            sum += v.state.speed();
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

MergeCount merge_count(const EpisodeRecord& record) {
    MergeCount c;
    for (const auto& v : record.vehicles)
        if (v.origin == Lane::ramp) ++c.spawned;
    const auto& last = record.steps.empty() ? record.initial : record.steps.back().vehicles;
    for (const auto& v : last)
        if (v.merged) ++c.merged;
    return c;
}

double merging_percentage(const std::vector<EpisodeRecord>& records) {
    MergeCount total;
    for (const auto& r : records) {
        const MergeCount c = merge_count(r);
        total.spawned += c.spawned;
        total.merged += c.merged;
    }
    if (total.spawned == 0) throw UndefinedMetric("merging percentage: no ramp vehicles were spawned");
    return 100.0 * total.merged / total.spawned;
}

double merging_percentage(const std::vector<EpisodeSummary>& summaries) {
    long spawned = 0, merged = 0;
    for (const auto& s : summaries) {
        spawned += s.ramp_spawned;
        merged += s.merged;
    }
    if (spawned == 0) throw UndefinedMetric("merging percentage: no ramp vehicles were spawned");
    return 100.0 * static_cast<double>(merged) / static_cast<double>(spawned);
}

EpisodeSummary summarize(const EpisodeRecord& record) {
    EpisodeSummary s;
    s.seed = record.seed;
    s.shield = std::string(shield_mode_name(record.config.shield.mode));
    s.policy = record.policy;
    s.reward = std::string(reward_function_name(record.config.reward_fn));
    s.steps = static_cast<int>(record.steps.size());
    s.n_vehicles = static_cast<int>(record.vehicles.size());
    const MergeCount c = merge_count(record);
    s.ramp_spawned = c.spawned;
    s.merged = c.merged;
    if (c.spawned > 0) s.merging_pct = 100.0 * c.merged / c.spawned;
    s.min_headway = min_time_headway(record, record.config.reward.v_floor);
    s.avg_speed = average_speed(record);
    const auto& last = record.steps.empty() ? record.initial : record.steps.back().vehicles;
    for (const auto& v : last)
        if (v.crashed) ++s.collisions;
    double reward_sum = 0.0;
    long reward_n = 0;
    for (const auto& step : record.steps) {
        for (const auto& o : step.outcomes)
            if (o.fault) ++s.shield_faults;
        for (const auto& [id, r] : step.rewards) {
            reward_sum += r;
            ++reward_n;
        }
    }
    s.mean_reward = reward_n == 0 ? 0.0 : reward_sum / static_cast<double>(reward_n);
    return s;
}

bool is_violation(const EpisodeSummary& summary, double tau, double slack) {
    return summary.collisions > 0 || summary.min_headway < tau - slack;
}

std::vector<AggregateRow> aggregate(const std::vector<EpisodeSummary>& summaries) {
    std::vector<double> headway, speed, merging, collisions, faults, reward;
    for (const auto& s : summaries) {
        if (std::isfinite(s.min_headway)) headway.push_back(s.min_headway);
        speed.push_back(s.avg_speed);
        if (s.merging_pct) merging.push_back(*s.merging_pct);
        collisions.push_back(s.collisions);
        faults.push_back(s.shield_faults);
        reward.push_back(s.mean_reward);
    }
    std::vector<AggregateRow> rows{stats("min_headway", headway), stats("avg_speed", speed),
                                   stats("merging_pct", merging), stats("collisions", collisions),
                                   stats("shield_faults", faults), stats("mean_reward", reward)};
    AggregateRow pooled{"merging_pct_pooled", 0.0, 0.0, 0};
    try {
        pooled.mean = merging_percentage(summaries);
        pooled.n = static_cast<int>(summaries.size());
    } catch (const UndefinedMetric&) {
    }
    rows.push_back(pooled);
    AggregateRow worst{"min_headway_worst", std::numeric_limits<double>::infinity(), 0.0,
                       static_cast<int>(summaries.size())};
    for (const auto& s : summaries) worst.mean = std::min(worst.mean, s.min_headway);
    rows.push_back(worst);
    return rows;
}

void write_summaries_csv(std::ostream& out, const std::vector<EpisodeSummary>& summaries) {
    out << kSummaryHeader << '\n';
    for (const auto& s : summaries) {
        out << s.seed << ',' << s.shield << ',' << s.policy << ',' << s.reward << ',' << s.steps << ','
            << s.n_vehicles << ',' << s.ramp_spawned << ',' << s.merged << ','
            << (s.merging_pct ? format_number(*s.merging_pct) : "") << ',' << format_number(s.min_headway) << ','
            << format_number(s.avg_speed) << ',' << s.collisions << ',' << s.shield_faults << ','
            << s.protocol_warnings << ',' << format_number(s.mean_reward) << '\n';
    }
}

std::vector<EpisodeSummary> read_summaries_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kSummaryHeader) throw ConfigError("summary csv: unexpected header");
    std::vector<EpisodeSummary> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 15) throw ConfigError("summary csv: expected 15 columns in '" + line + "'");
        EpisodeSummary s;
        s.seed = std::stoull(c[0]);
        s.shield = c[1];
        s.policy = c[2];
        s.reward = c[3];
        s.steps = std::stoi(c[4]);
        s.n_vehicles = std::stoi(c[5]);
        s.ramp_spawned = std::stoi(c[6]);
        s.merged = std::stoi(c[7]);
        if (!c[8].empty()) s.merging_pct = parse_number(c[8]);
        s.min_headway = parse_number(c[9]);
        s.avg_speed = parse_number(c[10]);
        s.collisions = std::stoi(c[11]);
        s.shield_faults = std::stoi(c[12]);
        s.protocol_warnings = std::stoi(c[13]);
        s.mean_reward = parse_number(c[14]);
        out.push_back(s);
    }
    return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << "metric,mean,std_error,n\n";
    for (const auto& r : rows)
        out << r.metric << ',' << format_number(r.mean) << ',' << format_number(r.std_error) << ',' << r.n << '\n';
}

}  // namespace mergesim
