#include "pushstab/measure_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "document.hpp"

namespace pushstab {

namespace detail {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

nlohmann::json parse_document(const std::string& text) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    try {
      return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("document: ") + e.what());
    }
  }
  nlohmann::json doc = nlohmann::json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("document: line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("document: empty key on line " + std::to_string(lineno));
    try {
      doc[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
      doc[key] = value;
    }
  }
  return doc;
}

nlohmann::json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

}  // namespace detail

namespace {

using nlohmann::json;

Vec to_vec(const json& j) {
  if (j.is_number()) return Vec::Constant(1, j.get<double>());
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
}

Domain parse_domain(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "interval") return Domain::interval(j.at("lo").get<double>(), j.at("hi").get<double>());
  if (kind == "box") return Domain::box(to_vec(j.at("lo")), to_vec(j.at("hi")));
  if (kind == "ball") return Domain::ball(to_vec(j.at("center")), j.at("radius").get<double>());
  throw std::invalid_argument("measure: unknown domain kind '" + kind + "'");
}

Measure1D parse_1d(const json& j, Domain domain) {
  std::vector<Interval> intervals;
  std::vector<Atom> atoms;
  if (j.contains("intervals"))
    for (const auto& iv : j.at("intervals")) {
      if (iv.size() != 3) throw std::invalid_argument("measure: interval rows are [lo, hi, mass]");
      intervals.push_back({iv[0].get<double>(), iv[1].get<double>(), iv[2].get<double>()});
    }
  if (j.contains("atoms"))
    for (const auto& at : j.at("atoms")) {
      if (at.size() != 2) throw std::invalid_argument("measure: atom rows are [x, mass]");
      atoms.push_back({at[0].get<double>(), at[1].get<double>()});
    }
  return Measure1D(std::move(domain), std::move(intervals), std::move(atoms));
}

GridDensity parse_grid(const json& j, Domain domain) {
  const json& g = j.at("grid");
  const auto resolution = g.at("resolution").get<std::vector<int>>();
  Box support = domain.bounding_box();
  if (g.contains("support")) support = Box{to_vec(g.at("support").at("lo")), to_vec(g.at("support").at("hi"))};
  if (!g.contains("masses")) return GridDensity::uniform(std::move(domain), std::move(support), resolution);
  auto masses = g.at("masses").get<std::vector<double>>();
  double total = 0.0;
  for (double m : masses) total += m;
  if (!(total > 0.0)) throw std::invalid_argument("measure: grid masses must have positive total");
  double top = 0.0;
  for (double& m : masses) {
    m /= total;
    top = std::max(top, m);
  }
  double cell = 1.0;
  for (int k = 0; k < support.dim(); ++k) cell *= (support.hi[k] - support.lo[k]) / resolution[static_cast<std::size_t>(k)];
  const double bound = g.contains("density_bound") ? g.at("density_bound").get<double>() : top / cell;
  return GridDensity::from_masses(std::move(domain), std::move(support), resolution, std::move(masses), bound);
}

DiscreteMeasure parse_discrete(const json& j, Domain domain) {
  const auto& pts = j.at("points");
  const Index n = static_cast<Index>(pts.size());
  if (n == 0) throw std::invalid_argument("measure: no points");
  Mat points(domain.dim(), n);
  for (Index i = 0; i < n; ++i) {
    const json& row = pts[static_cast<std::size_t>(i)];
    const Vec x = to_vec(row);
    if (x.size() != domain.dim()) throw std::invalid_argument("measure: point dimension mismatch");
    points.col(i) = x;
  }
  if (!j.contains("weights")) return DiscreteMeasure::uniform(std::move(domain), std::move(points));
  const Vec w = to_vec(j.at("weights"));
  if (w.size() != n) throw std::invalid_argument("measure: weight count mismatch");
  return DiscreteMeasure::normalized(std::move(domain), std::move(points), w);
}

}  // namespace

MeasureLiteral parse_measure(const std::string& text) {
  const json j = detail::parse_document(text);
  try {
    const std::string kind = j.at("kind").get<std::string>();
    Domain domain = parse_domain(j.at("domain"));
    if (kind == "measure1d") return parse_1d(j, std::move(domain));
    if (kind == "grid") return parse_grid(j, std::move(domain));
    if (kind == "discrete") return parse_discrete(j, std::move(domain));
    throw std::invalid_argument("measure: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("measure: ") + e.what());
  }
}

MeasureLiteral load_measure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_measure(ss.str());
}

}  // namespace pushstab
