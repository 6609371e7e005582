#include "causalpanel/dot.hpp"

#include "causalpanel/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace causalpanel::cli {

namespace {

const char* fill_for(const std::string& label) {
    switch (features::family_of(label)) {
        case features::FeatureFamily::Pandemic: return "lightblue";
        case features::FeatureFamily::CountryStatic: return "gold";
        case features::FeatureFamily::Intervention: return "palegreen";
        case features::FeatureFamily::Attention: return "salmon";
        case features::FeatureFamily::Other: return "white";
    }
    return "white";
}

} // namespace

std::string to_dot(const notears::DagStructure& dag) {
    std::string out = "digraph G {\n  rankdir=LR;\n";

    std::vector<std::string> nodes = dag.labels;
    std::sort(nodes.begin(), nodes.end());
    for (const auto& label : nodes)
        out += "  \"" + label + "\" [style=filled, fillcolor=" + fill_for(label) + "];\n";

    std::vector<std::pair<std::pair<std::string, std::string>, double>> edges;
    for (const auto& e : dag.edges)
        edges.push_back({{dag.labels[static_cast<std::size_t>(e.from)],
                          dag.labels[static_cast<std::size_t>(e.to)]},
                         e.weight});
    std::sort(edges.begin(), edges.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    for (const auto& [pair, weight] : edges) {
        out += "  \"" + pair.first + "\" -> \"" + pair.second + "\"";
        if (!std::isnan(weight)) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", weight);
            out += " [label=\"" + std::string(buf) + "\"]";
        }
        out += ";\n";
    }
    out += "}\n";
    return out;
}

} // namespace causalpanel::cli
