#pragma once

#include <ostream>

#include "skg/core/graph.hpp"

namespace skg::kgraph {

/// Line-delimited JSON: one {"kind":"node",...} line per node in id order,
/// then one {"kind":"triple","subject":..,"predicate":..,"object":..} line
/// per edge in key order. Returns the number of lines written.
std::size_t export_ndjson(const OntologyGraph& graph, std::ostream& out);

}  // namespace skg::kgraph
