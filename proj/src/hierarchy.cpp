#include "dendromatch/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include <json.hpp>

#include "dendromatch/errors.hpp"

namespace dendromatch {

using nlohmann::json;

const ClusterNode* ClusterHierarchy::find(std::uint32_t id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const ClusterNode& a, std::uint32_t b) { return a.id < b; });
    if (it == nodes.end() || it->id != id) return nullptr;
    return &*it;
}

const ClusterNode& ClusterHierarchy::at(std::uint32_t id) const {
    const ClusterNode* p = find(id);
    if (!p) throw std::invalid_argument("no hierarchy node with id " + std::to_string(id));
    return *p;
}

namespace {

// Sorted leaf indices under a linkage node (ids < n are leaves).
std::vector<std::uint32_t> leaves_under(const LinkageTree& link, std::uint32_t lid) {
    std::vector<std::uint32_t> out;
    std::vector<std::uint32_t> stack{lid};
    const auto n = static_cast<std::uint32_t>(link.n);
    while (!stack.empty()) {
        std::uint32_t cur = stack.back();
        stack.pop_back();
        if (cur < n) {
            out.push_back(cur);
        } else {
            const auto& m = link.merges[cur - n];
            stack.push_back(m.left);
            stack.push_back(m.right);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::uint32_t subtree_size(const LinkageTree& link, std::uint32_t lid) {
    const auto n = static_cast<std::uint32_t>(link.n);
    return lid < n ? 1 : link.merges[lid - n].size;
}

void add_shed(ClusterNode& node, double eps, std::uint32_t count) {
    if (!node.sheds.empty() && node.sheds.back().eps == eps)
        node.sheds.back().count += count;
    else
        node.sheds.push_back({eps, count});
}

}  // namespace

ClusterHierarchy build_hierarchy(const LinkageTree& link, std::uint32_t min_cluster_size) {
    const std::size_t n = link.n;
    if (min_cluster_size < 1) throw std::invalid_argument("min_cluster_size must be >= 1");
    if (min_cluster_size > n)
        throw std::invalid_argument("min_cluster_size " + std::to_string(min_cluster_size) +
                                    " exceeds point count " + std::to_string(n));

    ClusterHierarchy h;
    h.n = n;
    h.min_cluster_size = min_cluster_size;
    h.root = 0;

    struct Work {
        std::uint32_t lid;          // linkage node to descend from
        std::uint32_t cid;          // condensed node id
        std::optional<std::uint32_t> parent;
        double birth;
    };

    const std::uint32_t top =
        n == 1 ? 0u : static_cast<std::uint32_t>(n + link.merges.size() - 1);
    std::deque<Work> queue{{top, 0, std::nullopt, std::numeric_limits<double>::infinity()}};
    std::uint32_t next_id = 1;

    while (!queue.empty()) {
        Work w = queue.front();
        queue.pop_front();

        ClusterNode node;
        node.id = w.cid;
        node.parent = w.parent;
        node.birth_eps = w.birth;
        node.members = leaves_under(link, w.lid);
        node.size = static_cast<std::uint32_t>(node.members.size());

        std::uint32_t cur = w.lid;
        while (true) {
            if (cur < n) {  // single point: persists all the way down
                node.death_eps = 0.0;
                break;
            }
            const auto& m = link.merges[cur - n];
            const std::uint32_t left_size = subtree_size(link, m.left);
            const std::uint32_t right_size = subtree_size(link, m.right);
            const bool left_ok = left_size >= min_cluster_size;
            const bool right_ok = right_size >= min_cluster_size;

            if (left_ok && right_ok) {
                node.death_eps = m.height;
                node.children = {next_id, next_id + 1};
                queue.push_back({m.left, next_id, node.id, m.height});
                queue.push_back({m.right, next_id + 1, node.id, m.height});
                next_id += 2;
                break;
            }
            if (!left_ok && !right_ok) {  // both sides too small: dissolve
                node.death_eps = m.height;
                break;
            }
            // One side falls below the size floor: shed it and persist.
            add_shed(node, m.height, left_ok ? right_size : left_size);
            cur = left_ok ? m.left : m.right;
        }
        h.nodes.push_back(std::move(node));
    }

    std::sort(h.nodes.begin(), h.nodes.end(),
              [](const ClusterNode& a, const ClusterNode& b) { return a.id < b.id; });
    return h;
}

std::vector<MatchableCluster> clusters_for_matching(const ClusterHierarchy& h,
                                                    std::uint32_t min_match_size) {
    if (min_match_size < 2) throw std::invalid_argument("min_match_size must be >= 2");
    std::vector<MatchableCluster> out;
    for (const auto& node : h.nodes)
        if (node.size >= min_match_size) out.push_back({node.id, node.members});
    return out;
}

ClusterHierarchy prune_for_display(const ClusterHierarchy& h, std::uint32_t threshold) {
    ClusterHierarchy out;
    out.n = h.n;
    out.min_cluster_size = h.min_cluster_size;
    out.root = h.root;

    auto kept = [&](const ClusterNode& node) {
        return node.id == h.root || node.size > threshold;
    };

    for (const auto& node : h.nodes) {
        if (!kept(node)) continue;
        ClusterNode copy = node;
        copy.children.clear();
        for (std::uint32_t child_id : node.children) {
            const ClusterNode& child = h.at(child_id);
            if (kept(child))
                copy.children.push_back(child_id);
            else
                add_shed(copy, child.birth_eps, child.size);
        }
        out.nodes.push_back(std::move(copy));
    }
    return out;
}

namespace {

json eps_to_json(double eps) {
    if (std::isinf(eps)) return nullptr;
    return eps;
}

double eps_from_json(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

}  // namespace

std::string hierarchy_to_json(const ClusterHierarchy& h, bool emit_members, int min_pts) {
    json doc;
    doc["n"] = h.n;
    doc["min_cluster_size"] = h.min_cluster_size;
    if (min_pts >= 0) {
        doc["min_pts"] = min_pts;
        doc["variant"] = min_pts == 0 ? "slink" : "hdbscan";
    }
    json nodes = json::array();
    for (const auto& node : h.nodes) {
        json jn;
        jn["id"] = node.id;
        jn["parent"] = node.parent ? json(*node.parent) : json(nullptr);
        jn["children"] = node.children;
        jn["birth_eps"] = eps_to_json(node.birth_eps);
        jn["death_eps"] = node.death_eps;
        jn["size"] = node.size;
        json sheds = json::array();
        for (const auto& s : node.sheds) sheds.push_back({s.eps, s.count});
        jn["shed"] = sheds;
        if (emit_members) jn["members"] = node.members;
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

ClusterHierarchy hierarchy_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("hierarchy JSON parse error: ") + e.what());
    }
    try {
        ClusterHierarchy h;
        h.n = doc.at("n").get<std::size_t>();
        h.min_cluster_size = doc.at("min_cluster_size").get<std::uint32_t>();
        for (const auto& jn : doc.at("nodes")) {
            ClusterNode node;
            node.id = jn.at("id").get<std::uint32_t>();
            if (!jn.at("parent").is_null()) node.parent = jn.at("parent").get<std::uint32_t>();
            node.children = jn.at("children").get<std::vector<std::uint32_t>>();
            node.birth_eps = eps_from_json(jn.at("birth_eps"));
            node.death_eps = jn.at("death_eps").get<double>();
            node.size = jn.at("size").get<std::uint32_t>();
            if (jn.contains("shed"))
                for (const auto& js : jn.at("shed"))
                    node.sheds.push_back({js.at(0).get<double>(), js.at(1).get<std::uint32_t>()});
            if (jn.contains("members"))
                node.members = jn.at("members").get<std::vector<std::uint32_t>>();
            if (!node.parent) h.root = node.id;
            h.nodes.push_back(std::move(node));
        }
        std::sort(h.nodes.begin(), h.nodes.end(),
                  [](const ClusterNode& a, const ClusterNode& b) { return a.id < b.id; });
        return h;
    } catch (const json::exception& e) {
        throw InputError(std::string("hierarchy JSON missing or mistyped field: ") + e.what());
    }
}

}  // namespace dendromatch
