#pragma once

#include "causalpanel/notears.hpp"

#include <string>

namespace causalpanel::cli {

// Graphviz rendering of a DAG. Node styling follows the four feature
// families (pandemic counts, static country attributes, interventions,
// attention); labels and edges are emitted in a stable sorted order so
// outputs diff cleanly.
std::string to_dot(const notears::DagStructure& dag);

} // namespace causalpanel::cli
