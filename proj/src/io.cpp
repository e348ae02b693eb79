#include "delaysde/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "delaysde/errors.hpp"

namespace delaysde::io {

namespace {

double number_at(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("missing field \"") + key + "\"");
  const json& v = j.at(key);
  if (!v.is_number()) throw InvalidArgument(std::string("field \"") + key + "\" is not a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number_at(j, key) : fallback;
}

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number()) throw InvalidArgument(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

json complex_json(cdouble z) { return json::array({z.real(), z.imag()}); }

cdouble complex_from(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  const auto parts = numbers(j, "complex value");
  if (parts.size() != 2) throw InvalidArgument("complex value must be [re, im]");
  return {parts[0], parts[1]};
}

json root_json(const RootRecord& root) {
  json coeffs = json::array();
  for (cdouble c : root.coeffs) coeffs.push_back(complex_json(c));
  return {{"re", root.lambda.real()},
          {"im", root.lambda.imag()},
          {"mult", root.multiplicity},
          {"coeffs", coeffs},
          {"poly_degree", root.poly_degree ? json(*root.poly_degree) : json(nullptr)}};
}

RootRecord root_from(const json& j) {
  RootRecord root;
  root.lambda = {number_at(j, "re"), number_at(j, "im")};
  root.multiplicity = j.value("mult", 1);
  if (j.contains("coeffs")) {
    for (const json& c : j.at("coeffs")) root.coeffs.push_back(complex_from(c));
  }
  if (j.contains("poly_degree") && !j.at("poly_degree").is_null()) {
    root.poly_degree = j.at("poly_degree").get<int>();
  }
  return root;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("path CSV: cannot parse \"" + s + "\" as a number");
  }
  if (used != s.size()) throw InvalidArgument("path CSV: trailing characters in \"" + s + "\"");
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

SignedMeasure measure_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("measure must be a JSON object");
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    for (const json& a : j.at("atoms")) atoms.push_back({number_at(a, "u"), number_at(a, "w")});
  }
  std::vector<DensityPiece> density;
  if (j.contains("density")) {
    for (const json& p : j.at("density")) {
      density.push_back({number_at(p, "lo"), number_at(p, "hi"),
                         numbers(p.at("coeffs"), "density coeffs")});
    }
  }
  const int max_order = j.value("max_order", SignedMeasure::kDefaultMaxOrder);
  return SignedMeasure(number_at(j, "r"), std::move(atoms), std::move(density), max_order);
}

json measure_to_json(const SignedMeasure& measure) {
  json atoms = json::array();
  for (const Atom& a : measure.atoms()) atoms.push_back({{"u", a.location}, {"w", a.weight}});
  json density = json::array();
  for (const DensityPiece& p : measure.density()) {
    density.push_back({{"lo", p.lo}, {"hi", p.hi}, {"coeffs", p.coeffs}});
  }
  return {{"r", measure.delay()}, {"atoms", atoms}, {"density", density}};
}

CharacteristicModel model_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("model must be a JSON object");
  const json& m = j.contains("measure") ? j.at("measure") : j;
  return {measure_from_json(m), number_or(j, "theta", 0.0)};
}

json model_to_json(const CharacteristicModel& model) {
  json j = measure_to_json(model.measure);
  j["theta"] = model.theta;
  return j;
}

InitialSegment initial_segment_from_json(const json& j) {
  if (j.is_number()) return InitialSegment::constant(j.get<double>());
  if (j.is_object() && j.contains("polynomial")) {
    return InitialSegment::polynomial(numbers(j.at("polynomial"), "x0 polynomial"));
  }
  if (j.is_object() && j.contains("tabulated")) {
    return InitialSegment::tabulated(numbers(j.at("tabulated"), "x0 table"));
  }
  throw InvalidArgument("x0 must be a number, {\"polynomial\": [...]} or {\"tabulated\": [...]}");
}

SearchRegion region_from_json(const json& j) {
  return {number_at(j, "re_min"), number_at(j, "re_max"), number_at(j, "im_max")};
}

json region_to_json(const SearchRegion& region) {
  return {{"re_min", region.re_min}, {"re_max", region.re_max}, {"im_max", region.im_max}};
}

json summary_to_json(const SpectralSummary& summary, double theta) {
  json roots = json::array();
  for (const RootRecord& r : summary.roots) roots.push_back(root_json(r));
  json dominant = json::array();
  for (const RootRecord& r : summary.dominant_roots) dominant.push_back(root_json(r));
  const bool finite_v = std::isfinite(summary.v_star);
  return {{"roots", roots},
          {"v_star", finite_v ? json(summary.v_star) : json(nullptr)},
          {"m_star", summary.m_star ? json(*summary.m_star) : json(nullptr)},
          {"regime", std::string(to_string(summary.regime))},
          {"winding_count", summary.winding_count},
          {"region", region_to_json(summary.search_region)},
          {"theta", theta},
          {"dominant", dominant}};
}

SpectralSummary summary_from_json(const json& j) {
  if (!j.is_object() || !j.contains("roots")) {
    throw InvalidArgument("spectral report must be an object with \"roots\"");
  }
  SpectralSummary s;
  for (const json& r : j.at("roots")) s.roots.push_back(root_from(r));
  if (j.contains("dominant")) {
    for (const json& r : j.at("dominant")) s.dominant_roots.push_back(root_from(r));
  }
  s.v_star = j.contains("v_star") && !j.at("v_star").is_null()
                 ? j.at("v_star").get<double>()
                 : -std::numeric_limits<double>::infinity();
  if (j.contains("m_star") && !j.at("m_star").is_null()) s.m_star = j.at("m_star").get<int>();
  const std::string regime = j.value("regime", "degenerate");
  for (Regime r : {Regime::stable, Regime::unstable, Regime::explosive, Regime::degenerate}) {
    if (to_string(r) == regime) s.regime = r;
  }
  s.winding_count = j.value("winding_count", 0);
  if (j.contains("region")) s.search_region = region_from_json(j.at("region"));
  return s;
}

ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("experiment config must be a JSON object");
  if (!j.contains("model")) throw InvalidArgument("experiment config: missing \"model\"");
  ExperimentConfig c(model_from_json(j.at("model")));
  c.alpha = number_or(j, "alpha", 0.0);
  if (j.contains("horizons")) c.horizons = numbers(j.at("horizons"), "horizons");
  c.dt = number_or(j, "dt", c.dt);
  if (!j.contains("replications") || !j.at("replications").is_number_integer()) {
    throw InvalidArgument("experiment config: \"replications\" must be an integer");
  }
  c.replications = j.at("replications").get<int>();
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() &&
                                                j.at("seed").get<long long>() >= 0)) {
      throw InvalidArgument("experiment config: \"seed\" must be an unsigned integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.limit_dt = number_or(j, "limit_dt", c.limit_dt);
  if (j.contains("x0")) c.x0 = initial_segment_from_json(j.at("x0"));
  if (j.contains("region")) c.region = region_from_json(j.at("region"));
  if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
  c.validate();
  return c;
}

std::string path_to_csv(const SamplePath& path, const SignedMeasure& measure) {
  const std::vector<double> y = delayed_functional_series(path, measure);
  std::string out = "t,X,Y,dW\n";
  const int n = path.grid.steps;
  for (int k = -path.grid.delay_steps; k <= n; ++k) {
    out += format_double(path.time(k));
    out += ',';
    out += format_double(path.at(k));
    out += ',';
    if (k >= 0) out += format_double(y[static_cast<std::size_t>(k)]);
    out += ',';
    if (k >= 0 && k < n && path.noise) out += format_double((*path.noise)[static_cast<std::size_t>(k)]);
    out += '\n';
  }
  return out;
}

SamplePath path_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("path CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "t" || header[1] != "X") {
    throw InvalidArgument("path CSV: header must start with t,X");
  }
  std::vector<double> t;
  std::vector<double> x;
  std::vector<std::string> dw;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() < 2) throw InvalidArgument("path CSV: short row \"" + line + "\"");
    t.push_back(parse_double(fields[0]));
    x.push_back(parse_double(fields[1]));
    dw.push_back(fields.size() >= 4 ? fields[3] : std::string());
  }
  if (t.size() < 2) throw InvalidArgument("path CSV: need at least two rows");

  SamplePath path;
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(dt > 0.0)) throw InvalidArgument("path CSV: time column must increase");
  const long delay_steps = std::lround(-t.front() / dt);
  if (delay_steps < 0 || static_cast<std::size_t>(delay_steps) >= t.size()) {
    throw InvalidArgument("path CSV: the first time must be -r <= 0");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double expected = (static_cast<double>(i) - static_cast<double>(delay_steps)) * dt;
    if (std::abs(t[i] - expected) > 1e-6 * dt + 1e-9 * std::abs(expected)) {
      throw InvalidArgument("path CSV: times are not on a uniform grid");
    }
  }
  path.grid.dt = dt;
  path.grid.delay_steps = static_cast<int>(delay_steps);
  path.grid.steps = static_cast<int>(t.size()) - 1 - path.grid.delay_steps;
  path.x = std::move(x);

  std::vector<double> noise;
  for (int k = 0; k < path.grid.steps; ++k) {
    const std::string& s = dw[static_cast<std::size_t>(k + path.grid.delay_steps)];
    if (s.empty()) break;
    noise.push_back(parse_double(s));
  }
  if (static_cast<int>(noise.size()) == path.grid.steps) path.noise = std::move(noise);
  return path;
}

}  // namespace delaysde::io
