#pragma once

#include <map>
#include <vector>

#include "mergesim/world.hpp"

namespace mergesim {

/// Each vehicle mapped to the vehicles whose safe controls it consumes.
/// Parent lists are sorted by id and hold at most two entries.
struct InteractionTopology {
    std::map<int, std::vector<int>> parents;

    const std::vector<int>& parents_of(int id) const;
    bool operator==(const InteractionTopology&) const = default;
};

/// Interaction topology of the active vehicles of `world`:
///  - a lane follower depends on its leader;
///  - an adjacent leader that is changing into the follower's lane ahead of
///    that leader (or with no leader) replaces it;
///  - a vehicle that is itself changing lanes also depends on the leader of
///    its target lane.
/// Adjacent rear vehicles are never parents.
InteractionTopology build_topology(const World& world);

/// Active vehicles ordered so that every parent precedes its children:
/// descending longitudinal position, ties by ascending id. Throws
/// InvariantError if an edge violates that order.
std::vector<int> evaluation_order(const InteractionTopology& topology, const World& world);

}  // namespace mergesim
