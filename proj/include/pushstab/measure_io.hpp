#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "pushstab/measures.hpp"

namespace pushstab {

using MeasureLiteral = std::variant<Measure1D, GridDensity, DiscreteMeasure>;

/// Parses a measure literal (JSON object or key = value lines). Schema:
///   kind      "measure1d" | "grid" | "discrete"
///   domain    {"kind": "interval", "lo", "hi"} | {"kind": "box", "lo": [..], "hi": [..]}
///             | {"kind": "ball", "center": [..], "radius"}
///   measure1d intervals [[lo, hi, mass], ..], atoms [[x, mass], ..]
///   grid      grid {"resolution": [..], "support": {"lo": [..], "hi": [..]} (default: domain box),
///                   "masses": [..] (first axis fastest; default uniform), "density_bound" (default: max)}
///   discrete  points [[x1, .., xd], ..], weights [..] (default uniform; normalized)
MeasureLiteral parse_measure(const std::string& text);
MeasureLiteral load_measure(const std::filesystem::path& path);

}  // namespace pushstab
