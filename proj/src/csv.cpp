#include "pushstab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pushstab {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_point_cloud_csv(std::ostream& os, const DiscreteMeasure& m) {
  for (int k = 0; k < m.dim(); ++k) os << 'x' << (k + 1) << ',';
  os << "weight\n";
  for (Index i = 0; i < m.size(); ++i) {
    for (int k = 0; k < m.dim(); ++k) os << format_double(m.points()(k, i)) << ',';
    os << format_double(m.weight(i)) << '\n';
  }
}

void write_point_cloud_csv(const std::filesystem::path& path, const DiscreteMeasure& m) {
  auto os = open_output(path);
  write_point_cloud_csv(os, m);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

DiscreteMeasure read_point_cloud_csv(const std::filesystem::path& path, const Domain& domain) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  const int d = domain.dim();
  std::vector<double> coords;
  std::vector<double> weights;
  bool has_weight = false;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    std::vector<double> vals;
    try {
      for (const auto& c : cells) {
        std::size_t pos = 0;
        vals.push_back(std::stod(c, &pos));
        if (pos != c.size()) throw std::invalid_argument(c);
      }
    } catch (const std::exception&) {
      if (coords.empty() && line_no == 1) continue;  // header
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    if (vals.size() != static_cast<std::size_t>(d) && vals.size() != static_cast<std::size_t>(d + 1))
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(d) +
                               " or " + std::to_string(d + 1) + " columns");
    if (coords.empty()) has_weight = vals.size() == static_cast<std::size_t>(d + 1);
    if (has_weight != (vals.size() == static_cast<std::size_t>(d + 1)))
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": inconsistent column count");
    coords.insert(coords.end(), vals.begin(), vals.begin() + d);
    weights.push_back(has_weight ? vals[static_cast<std::size_t>(d)] : 1.0);
  }
  if (weights.empty()) throw std::runtime_error(path.string() + ": no points");
  const auto n = static_cast<Index>(weights.size());
  Mat pts = Eigen::Map<Mat>(coords.data(), d, n);
  Vec w = Eigen::Map<Vec>(weights.data(), n);
  return DiscreteMeasure::normalized(domain, std::move(pts), std::move(w));
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

}  // namespace pushstab
