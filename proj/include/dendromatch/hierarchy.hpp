#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dendromatch/mst.hpp"

namespace dendromatch {

/// Points leaving a cluster as the pruning radius shrinks past `eps`
/// (the fell-off side of a merge was below min_cluster_size, or a child was
/// pruned from the display).
struct ShedEvent {
    double eps;
    std::uint32_t count;
};

struct ClusterNode {
    std::uint32_t id = 0;
    std::optional<std::uint32_t> parent;
    std::vector<std::uint32_t> children;
    double birth_eps = std::numeric_limits<double>::infinity();  // infinity for the root
    double death_eps = 0.0;  // radius at which the node splits or dissolves
    std::vector<std::uint32_t> members;  // sorted; fixed at birth
    std::vector<ShedEvent> sheds;        // descending eps
    std::uint32_t size = 0;              // |members|
};

/// Condensed cluster tree: a node splits only when both sides of a merge
/// carry at least min_cluster_size points; smaller sides are shed and the
/// node persists. Node ids are breadth-first from the root (id 0) and remain
/// stable under display pruning.
class ClusterHierarchy {
public:
    std::size_t n = 0;
    std::uint32_t min_cluster_size = 1;
    std::uint32_t root = 0;
    std::vector<ClusterNode> nodes;  // ascending id; ids need not be contiguous after pruning

    const ClusterNode* find(std::uint32_t id) const;
    const ClusterNode& at(std::uint32_t id) const;
};

ClusterHierarchy build_hierarchy(const LinkageTree& link, std::uint32_t min_cluster_size);

struct MatchableCluster {
    std::uint32_t id;
    std::span<const std::uint32_t> members;
};

/// All nodes with at least min_match_size members (root included), ascending
/// id. Member sets are the birth member sets.
std::vector<MatchableCluster> clusters_for_matching(const ClusterHierarchy& h,
                                                    std::uint32_t min_match_size = 2);

/// Drop nodes with size <= threshold (the root always stays); each removed
/// child becomes a shed event on its parent so width profiles stay
/// conserved. threshold 0 is the identity.
ClusterHierarchy prune_for_display(const ClusterHierarchy& h, std::uint32_t threshold);

/// JSON schema: {n, min_cluster_size, variant?, min_pts?, nodes:[{id, parent,
/// children, birth_eps, death_eps, size, shed, members?}]}. birth_eps of the
/// root serializes as null (infinity). Members are large, so they are only
/// emitted on request.
std::string hierarchy_to_json(const ClusterHierarchy& h, bool emit_members,
                              int min_pts = -1);
ClusterHierarchy hierarchy_from_json(const std::string& text);

}  // namespace dendromatch
