#include "mergesim/topology.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "mergesim/errors.hpp"

namespace mergesim {

const std::vector<int>& InteractionTopology::parents_of(int id) const {
    static const std::vector<int> kNone;
    auto it = parents.find(id);
    return it == parents.end() ? kNone : it->second;
}

InteractionTopology build_topology(const World& world) {
    InteractionTopology topology;
    for (const Vehicle* ego : world.active()) {
        const Neighbors n = neighbors(world, *ego);
        std::vector<int> parents;
        if (n.leader) parents.push_back(n.leader->id);

        const Vehicle* merger = n.adjacent_leader;
        if (merger && merger->changing() && merger->target_lane == ego->lane &&
            (!n.leader || ahead_of(*n.leader, *merger))) {
            parents = {merger->id};
        }
        if (ego->changing() && n.adjacent_leader) {
            if (std::find(parents.begin(), parents.end(), n.adjacent_leader->id) == parents.end())
                parents.push_back(n.adjacent_leader->id);
        }
        std::sort(parents.begin(), parents.end());
        topology.parents[ego->id] = std::move(parents);
    }
    return topology;
}

std::vector<int> evaluation_order(const InteractionTopology& topology, const World& world) {
    std::vector<const Vehicle*> order = world.active();
    std::sort(order.begin(), order.end(), [](const Vehicle* a, const Vehicle* b) { return ahead_of(*a, *b); });

    std::unordered_map<int, std::size_t> index;
    std::vector<int> ids;
    ids.reserve(order.size());
    for (const Vehicle* v : order) {
        index[v->id] = ids.size();
        ids.push_back(v->id);
    }
    for (const auto& [child, parents] : topology.parents) {
        auto c = index.find(child);
        if (c == index.end()) continue;
        for (int parent : parents) {
            auto p = index.find(parent);
            if (p == index.end() || p->second >= c->second)
                throw InvariantError("interaction topology: parent " + std::to_string(parent) +
                                     " does not precede child " + std::to_string(child));
        }
    }
    return ids;
}

}  // namespace mergesim
