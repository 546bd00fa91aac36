#include "dendromatch/dendrogram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dendromatch/errors.hpp"
#include "internal/text.hpp"

namespace dendromatch {

using nlohmann::json;

namespace {

constexpr const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
    "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
};

// Stable class-to-color assignment across runs.
const char* class_color(const std::string& name) {
    std::uint64_t hash = 1469598103934665603ull;  // FNV-1a
    for (unsigned char ch : name) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    return kPalette[hash % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

struct Breakpoint {
    double lambda;
    double width;  // member count from this lambda until the next breakpoint
};

struct NodeLayout {
    const ClusterNode* node;
    std::vector<Breakpoint> profile;
};

struct Annotation {
    const MatchPair* pair;
    std::string label;
    std::string color;
};

struct Layout {
    ClusterHierarchy pruned;
    double lambda_cap;
    std::vector<NodeLayout> nodes;        // ascending id
    std::vector<Annotation> annotations;  // ascending rank
};

double max_finite_lambda(const ClusterHierarchy& h) {
    double best = 0.0;
    auto consider = [&](double eps) {
        if (std::isfinite(eps) && eps > 0.0) best = std::max(best, 1.0 / eps);
    };
    for (const auto& node : h.nodes) {
        consider(node.birth_eps);
        consider(node.death_eps);
        for (const auto& s : node.sheds) consider(s.eps);
    }
    return best;
}

Layout compute_layout(const ClusterHierarchy& h, const MatchReport& report,
                      const RenderSpec& spec) {
    if (h.nodes.empty()) throw std::invalid_argument("cannot render an empty hierarchy");
    for (const auto& p : report.pairs)
        if (!h.find(p.cluster_id))
            throw InputError("match report references cluster id " +
                             std::to_string(p.cluster_id) + " absent from the hierarchy");

    Layout layout;
    layout.pruned = prune_for_display(h, spec.display_size_threshold);

    const double max_lambda = max_finite_lambda(layout.pruned);
    if (spec.lambda_cap > 0.0) {
        if (spec.lambda_cap <= max_lambda)
            throw std::invalid_argument("lambda_cap must exceed the largest finite lambda");
        layout.lambda_cap = spec.lambda_cap;
    } else {
        layout.lambda_cap = max_lambda > 0.0 ? 1.05 * max_lambda : 1.0;
    }

    auto to_lambda = [&](double eps) {
        if (std::isinf(eps)) return 0.0;
        if (eps <= 0.0) return layout.lambda_cap;
        return std::min(1.0 / eps, layout.lambda_cap);
    };

    for (const auto& node : layout.pruned.nodes) {
        NodeLayout nl;
        nl.node = &node;
        double width = static_cast<double>(node.size);
        nl.profile.push_back({to_lambda(node.birth_eps), width});
        // sheds are stored by descending eps, i.e. ascending lambda
        for (const auto& s : node.sheds) {
            width -= static_cast<double>(s.count);
            nl.profile.push_back({to_lambda(s.eps), width});
        }
        double death_lambda = to_lambda(node.death_eps);
        if (nl.profile.back().lambda != death_lambda || nl.profile.back().width != width)
            nl.profile.push_back({death_lambda, width});
        layout.nodes.push_back(std::move(nl));
    }

    for (const auto& p : report.pairs) {
        if (p.score < spec.min_display_score) continue;
        if (!layout.pruned.find(p.cluster_id)) continue;  // pruned from display
        Annotation a;
        a.pair = &p;
        const char* prefix =
            p.detail.limiting_factor == LimitingFactor::recall ? "rec" : "pre";
        a.label = p.class_name + " " + prefix + ": " + detail::format_fixed(p.score, 2);
        a.color = class_color(p.class_name);
        layout.annotations.push_back(std::move(a));
    }
    return layout;
}

}  // namespace

std::string render_json(const ClusterHierarchy& h, const MatchReport& report,
                        const RenderSpec& spec) {
    Layout layout = compute_layout(h, report, spec);

    json doc;
    doc["lambda_cap"] = layout.lambda_cap;
    doc["n"] = layout.pruned.n;
    doc["display_size_threshold"] = spec.display_size_threshold;
    doc["min_display_score"] = spec.min_display_score;

    json nodes = json::array();
    for (const auto& nl : layout.nodes) {
        json jn;
        jn["id"] = nl.node->id;
        jn["parent"] = nl.node->parent ? json(*nl.node->parent) : json(nullptr);
        jn["children"] = nl.node->children;
        json bps = json::array();
        for (const auto& bp : nl.profile) bps.push_back({bp.lambda, bp.width});
        jn["breakpoints"] = std::move(bps);
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);

    json anns = json::array();
    for (const auto& a : layout.annotations) {
        json ja;
        ja["rank"] = a.pair->rank;
        ja["class"] = a.pair->class_name;
        ja["kind"] = a.pair->kind == DivisionKind::individual ? "individual" : "conjunctive";
        ja["cluster_id"] = a.pair->cluster_id;
        ja["score"] = a.pair->score;
        ja["limiting_factor"] = to_string(a.pair->detail.limiting_factor);
        ja["label"] = a.label;
        ja["color"] = a.color;
        anns.push_back(std::move(ja));
    }
    doc["annotations"] = std::move(anns);
    return doc.dump(2) + "\n";
}

std::string render_svg(const ClusterHierarchy& h, const MatchReport& report,
                       const RenderSpec& spec) {
    Layout layout = compute_layout(h, report, spec);
    const auto& pruned = layout.pruned;

    const double margin_left = 64.0, margin_top = 24.0, margin_right = 24.0,
                 margin_bottom = 32.0;
    const double plot_w = spec.width - margin_left - margin_right;
    const double plot_h = spec.height - margin_top - margin_bottom;
    const double ppu = plot_w / static_cast<double>(pruned.at(pruned.root).size);
    const double gap = 8.0;

    auto y_of = [&](double lambda) {
        return margin_top + lambda / layout.lambda_cap * plot_h;
    };
    auto fx = [](double v) { return detail::format_fixed(v, 2); };

    // Horizontal slot per node: children split the parent slot
    // proportionally to their birth sizes.
    std::map<std::uint32_t, std::pair<double, double>> slots;
    slots[pruned.root] = {margin_left, margin_left + plot_w};
    for (const auto& node : pruned.nodes) {
        auto [a, b] = slots.at(node.id);
        if (node.children.empty()) continue;
        double total = 0.0;
        for (auto c : node.children) total += pruned.at(c).size;
        double avail = (b - a) - gap * static_cast<double>(node.children.size() - 1);
        double x = a;
        for (auto c : node.children) {
            double w = avail * static_cast<double>(pruned.at(c).size) / total;
            slots[c] = {x, x + w};
            x += w + gap;
        }
    }

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fx(spec.width)
        << "\" height=\"" << fx(spec.height) << "\" viewBox=\"0 0 " << fx(spec.width) << " "
        << fx(spec.height) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    // lambda axis
    svg << "<g font-family=\"monospace\" font-size=\"11\" fill=\"#333333\">\n";
    svg << "<line x1=\"" << fx(margin_left - 10) << "\" y1=\"" << fx(margin_top) << "\" x2=\""
        << fx(margin_left - 10) << "\" y2=\"" << fx(margin_top + plot_h)
        << "\" stroke=\"#333333\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        double lambda = layout.lambda_cap * t / 5.0;
        double y = y_of(lambda);
        svg << "<line x1=\"" << fx(margin_left - 14) << "\" y1=\"" << fx(y) << "\" x2=\""
            << fx(margin_left - 10) << "\" y2=\"" << fx(y) << "\" stroke=\"#333333\"/>\n";
        svg << "<text x=\"" << fx(margin_left - 18) << "\" y=\"" << fx(y + 4)
            << "\" text-anchor=\"end\">" << detail::format_fixed(lambda, 3) << "</text>\n";
    }
    svg << "<text x=\"" << fx(margin_left - 44) << "\" y=\"" << fx(margin_top + plot_h / 2)
        << "\" transform=\"rotate(-90 " << fx(margin_left - 44) << " "
        << fx(margin_top + plot_h / 2) << ")\" text-anchor=\"middle\">lambda = 1/eps</text>\n";
    svg << "</g>\n";

    // Color annotated clusters by their first matched class.
    std::map<std::uint32_t, std::string> cluster_fill;
    for (const auto& a : layout.annotations)
        cluster_fill.emplace(a.pair->cluster_id, a.color);

    svg << "<g stroke=\"#455a64\" stroke-width=\"0.5\">\n";
    for (const auto& nl : layout.nodes) {
        auto [a, b] = slots.at(nl.node->id);
        double xc = (a + b) / 2.0;
        double slot_w = b - a;
        auto half = [&](double members) {
            return std::min(members * ppu, slot_w) / 2.0;
        };
        if (nl.profile.size() < 2) continue;  // zero-lifetime node, nothing to draw
        auto fill_it = cluster_fill.find(nl.node->id);
        const std::string fill = fill_it != cluster_fill.end() ? fill_it->second : "#b0bec5";

        // Step outline: down the left edge, across the bottom, up the right.
        std::ostringstream pts;
        const auto& bp = nl.profile;
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            double hw = half(bp[i].width);
            pts << fx(xc - hw) << ',' << fx(y_of(bp[i].lambda)) << ' ';
            pts << fx(xc - hw) << ',' << fx(y_of(bp[i + 1].lambda)) << ' ';
        }
        for (std::size_t i = bp.size() - 1; i-- > 0;) {
            double hw = half(bp[i].width);
            pts << fx(xc + hw) << ',' << fx(y_of(bp[i + 1].lambda)) << ' ';
            pts << fx(xc + hw) << ',' << fx(y_of(bp[i].lambda));
            if (i > 0) pts << ' ';
        }
        svg << "<polygon points=\"" << pts.str() << "\" fill=\"" << fill
            << "\" fill-opacity=\"0.85\"/>\n";
    }
    svg << "</g>\n";

    // Labels stack downward beside the matched cluster, in rank order.
    svg << "<g font-family=\"monospace\" font-size=\"11\">\n";
    std::map<std::uint32_t, int> stacked;
    for (const auto& a : layout.annotations) {
        const auto& node = pruned.at(a.pair->cluster_id);
        auto [sa, sb] = slots.at(node.id);
        int level = stacked[node.id]++;
        double birth_lambda = std::isinf(node.birth_eps)
                                  ? 0.0
                                  : std::min(1.0 / node.birth_eps, layout.lambda_cap);
        double ty = y_of(birth_lambda) + 14.0 * (level + 1);
        double tx = std::min((sa + sb) / 2.0 + 6.0, margin_left + plot_w - 4.0);
        svg << "<text x=\"" << fx(tx) << "\" y=\"" << fx(ty) << "\" fill=\"" << a.color
            << "\">" << a.label << "</text>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

}  // namespace dendromatch
