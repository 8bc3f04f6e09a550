#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "pushstab/measures.hpp"

namespace pushstab {

/// Shortest round-trippable decimal ("%.17g"); used for every numeric cell so
/// output is byte-identical across runs.
std::string format_double(double x);

/// Point cloud: header "x1,...,xd,weight".
void write_point_cloud_csv(std::ostream& os, const DiscreteMeasure& m);
void write_point_cloud_csv(const std::filesystem::path& path, const DiscreteMeasure& m);

/// Reads "x1,...,xd[,weight]" rows (header optional). Missing weights mean
/// uniform; weights are normalized.
DiscreteMeasure read_point_cloud_csv(const std::filesystem::path& path, const Domain& domain);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);

/// Opens `path` for writing, creating parent directories; throws on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace pushstab
