#include "cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tdlab/errors.hpp"

namespace tdlab::cli {

using nlohmann::json;

namespace {

// Typed access to one JSON object that remembers which keys were consumed
// and reports every problem with the dotted path of the field.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "configuration" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key, double def) { return has(key) ? as_number(raw(key), path(key)) : def; }

  std::size_t count(const std::string& key, std::size_t def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_unsigned()) fail(path(key), "expected a nonnegative integer");
    return v.get<std::size_t>();
  }

  bool flag(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }

  Fields object(const std::string& key) { return Fields(raw(key), path(key)); }

  /// Rejects every key that was not consumed.
  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) fail(path(key), "unknown key");
    }
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& what) {
    throw ConfigError(field + ": " + what);
  }

  static double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) fail(field, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field, "expected a finite number");
    return x;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

double positive(double v, const std::string& field) {
  if (!(v > 0.0)) Fields::fail(field, "must be positive");
  return v;
}

Vec2 parse_point(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) Fields::fail(field, "expected [x, y]");
  return {Fields::as_number(v[0], field + "[0]"), Fields::as_number(v[1], field + "[1]")};
}

std::vector<Vec2> parse_points(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) Fields::fail(field, "expected a nonempty array of [x, y] points");
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(parse_point(v[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

double parse_p(const json& v, const std::string& field) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInfinity;
    Fields::fail(field, "expected a number >= 1 or \"inf\"");
  }
  const double p = Fields::as_number(v, field);
  if (p < 1.0) Fields::fail(field, "p must be at least 1");
  return p;
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    const std::size_t pos = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
    const std::size_t last_nl = text.rfind('\n', pos == 0 ? 0 : pos - 1);
    const std::size_t column = last_nl == std::string::npos ? pos + 1 : pos - last_nl;
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": malformed JSON (" +
                      e.what() + ")");
  }
}

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what + ": cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Which optional top-level blocks each scenario reads.
struct KeyRules {
  bool domain = false;
  bool source = false;
  bool p = false;
  bool tolerance = false;
  const char* block = nullptr;
};

KeyRules rules_for(Scenario s) {
  switch (s) {
    case Scenario::kProject: return {true, true, false, false, "project"};
    case Scenario::kSymmetrize: return {true, true, true, false, "symmetrize"};
    case Scenario::kDensity: return {true, true, false, false, "density"};
    case Scenario::kBeckmann: return {true, true, false, true, "beckmann"};
    case Scenario::kCounterexample: return {false, false, true, false, "counterexample"};
    case Scenario::kEstimate: return {true, false, true, false, "estimate"};
    case Scenario::kApproxStudy: return {true, false, false, false, "approxstudy"};
  }
  return {};
}

void parse_block(ScenarioConfig& cfg, Fields& f) {
  switch (cfg.scenario) {
    case Scenario::kProject:
      if (f.has("bin_width")) cfg.project.bin_width = positive(f.number("bin_width", 0.0), f.path("bin_width"));
      break;
    case Scenario::kSymmetrize: {
      if (f.has("jacobian")) {
        Fields j = f.object("jacobian");
        cfg.symmetrize.jacobian_r = positive(j.number("r", cfg.symmetrize.jacobian_r), j.path("r"));
        cfg.symmetrize.jacobian_L = positive(j.number("L", cfg.symmetrize.jacobian_L), j.path("L"));
        cfg.symmetrize.jacobian_samples = j.count("samples", cfg.symmetrize.jacobian_samples);
        j.finish();
      }
      cfg.symmetrize.direct_samples = f.count("direct_samples", cfg.symmetrize.direct_samples);
      break;
    }
    case Scenario::kDensity:
      cfg.density.refinements = f.count("refinements", cfg.density.refinements);
      break;
    case Scenario::kBeckmann:
      cfg.beckmann.max_iter = f.count("max_iter", cfg.beckmann.max_iter);
      cfg.beckmann.uniqueness = f.flag("uniqueness", cfg.beckmann.uniqueness);
      break;
    case Scenario::kCounterexample: {
      CounterexampleConfig& c = cfg.counterexample;
      if (f.has("source_resolution")) {
        const std::size_t n = f.count("source_resolution", 0);
        if (n == 0) Fields::fail(f.path("source_resolution"), "must be positive");
        c.source_h = 1.0 / static_cast<double>(n);
      }
      cfg.counterexample_refinements = f.count("refinements", cfg.counterexample_refinements);
      if (f.has("radii")) {
        Fields r = f.object("radii");
        c.r_min = positive(r.number("min", c.r_min), r.path("min"));
        c.r_max = positive(r.number("max", c.r_max), r.path("max"));
        c.r_count = r.count("count", c.r_count);
        if (c.r_max <= c.r_min) Fields::fail(r.path("max"), "must exceed radii.min");
        if (c.r_count < 2) Fields::fail(r.path("count"), "must be at least 2");
        r.finish();
      }
      c.mass_balance_count = f.count("mass_balance_count", c.mass_balance_count);
      if (f.has("window")) {
        Fields w = f.object("window");
        c.window_eps = positive(w.number("eps", c.window_eps), w.path("eps"));
        c.window_n = w.count("n", c.window_n);
        w.finish();
      }
      if (f.has("tangency_radii")) {
        const json& v = f.raw("tangency_radii");
        if (!v.is_array()) Fields::fail(f.path("tangency_radii"), "expected an array");
        c.tangency_r.clear();
        for (std::size_t k = 0; k < v.size(); ++k) {
          const std::string p = f.path("tangency_radii") + "[" + std::to_string(k) + "]";
          c.tangency_r.push_back(positive(Fields::as_number(v[k], p), p));
        }
      }
      c.histogram_bins = f.count("histogram_bins", c.histogram_bins);
      c.roundtrip_samples = f.count("roundtrip_samples", c.roundtrip_samples);
      break;
    }
    case Scenario::kEstimate:
      cfg.estimate.radius = positive(f.number("radius", cfg.estimate.radius), f.path("radius"));
      cfg.estimate.spacing = positive(f.number("spacing", cfg.estimate.spacing), f.path("spacing"));
      break;
    case Scenario::kApproxStudy:
      cfg.approx.radius = positive(f.number("radius", cfg.approx.radius), f.path("radius"));
      cfg.approx.spacing = positive(f.number("spacing", cfg.approx.spacing), f.path("spacing"));
      cfg.approx.halvings = f.count("halvings", cfg.approx.halvings);
      break;
  }
  f.finish();
}

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::kProject: return "project";
    case Scenario::kSymmetrize: return "symmetrize";
    case Scenario::kDensity: return "density";
    case Scenario::kBeckmann: return "beckmann";
    case Scenario::kCounterexample: return "counterexample";
    case Scenario::kEstimate: return "estimate";
    case Scenario::kApproxStudy: return "approxstudy";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::kProject, Scenario::kSymmetrize, Scenario::kDensity, Scenario::kBeckmann,
                     Scenario::kCounterexample, Scenario::kEstimate, Scenario::kApproxStudy}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("scenario: unknown scenario '" + name +
                    "' (expected project, symmetrize, density, beckmann, counterexample, estimate or approxstudy)");
}

ScenarioConfig parse_config(const std::string& text, const std::string& scenario, const std::string& base_dir) {
  const json doc = parse_json(text, "config");
  Fields top(doc, "");
  ScenarioConfig cfg;
  cfg.scenario = parse_scenario(scenario);
  if (top.has("scenario") && top.text("scenario") != scenario)
    Fields::fail("scenario", "config is for '" + doc["scenario"].get<std::string>() + "', not '" + scenario + "'");

  const KeyRules rules = rules_for(cfg.scenario);
  auto reject_unused = [&](bool allowed, const char* key) {
    if (!allowed && top.has(key)) Fields::fail(key, std::string("not used by the ") + scenario + " scenario");
  };
  reject_unused(rules.domain, "domain");
  reject_unused(rules.source, "source");
  reject_unused(rules.p, "p");
  reject_unused(rules.tolerance, "tolerance");
  for (const char* block : {"project", "symmetrize", "density", "beckmann", "counterexample", "estimate", "approxstudy"})
    reject_unused(std::string(block) == rules.block, block);

  if (!top.has("grid")) Fields::fail("grid", "missing required field");
  {
    Fields g = top.object("grid");
    if (!g.has("resolution")) Fields::fail("grid.resolution", "missing required field");
    cfg.resolution = g.count("resolution", 0);
    if (cfg.resolution < 8) Fields::fail("grid.resolution", "must be at least 8");
    g.finish();
  }
  if (top.has("quadrature")) {
    Fields q = top.object("quadrature");
    cfg.subdivision = q.count("subdivision", cfg.subdivision);
    if (cfg.subdivision == 0) Fields::fail("quadrature.subdivision", "must be at least 1");
    q.finish();
  }
  if (rules.domain) {
    if (!top.has("domain")) Fields::fail("domain", "missing required field");
    std::filesystem::path p(top.text("domain"));
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    cfg.domain_path = p.lexically_normal().string();
    if (!std::filesystem::is_regular_file(cfg.domain_path)) Fields::fail("domain", "file not found: " + cfg.domain_path);
  }
  if (top.has("source")) {
    Fields s = top.object("source");
    if (s.has("polygon")) cfg.source.polygon = parse_points(s.raw("polygon"), s.path("polygon"));
    cfg.source.value = positive(s.number("value", cfg.source.value), s.path("value"));
    s.finish();
  }
  if (top.has("p")) {
    const json& v = top.raw("p");
    if (!v.is_array() || v.empty()) Fields::fail("p", "expected a nonempty array");
    cfg.p_list.clear();
    for (std::size_t k = 0; k < v.size(); ++k) cfg.p_list.push_back(parse_p(v[k], "p[" + std::to_string(k) + "]"));
  }
  if (top.has("tolerance")) {
    Fields t = top.object("tolerance");
    cfg.solver_tolerance = positive(t.number("solver", cfg.solver_tolerance), t.path("solver"));
    t.finish();
  }
  if (top.has("output")) cfg.output = top.text("output");
  cfg.deterministic = top.flag("deterministic", false);
  if (top.has("seed")) {
    const json& v = top.raw("seed");
    if (!v.is_number_unsigned()) Fields::fail("seed", "expected a nonnegative integer");
    cfg.seed = v.get<std::uint64_t>();
  }
  cfg.workers = top.count("workers", 0);
  if (rules.block != nullptr && top.has(rules.block)) {
    Fields b = top.object(rules.block);
    parse_block(cfg, b);
  }
  top.finish();
  if (cfg.seed) cfg.counterexample.seed = *cfg.seed;
  return cfg;
}

ScenarioConfig load_config(const std::string& path, const std::string& scenario) {
  const std::string text = read_file(path, "config");
  try {
    ScenarioConfig cfg = parse_config(text, scenario, std::filesystem::path(path).parent_path().string());
    cfg.config_path = path;
    return cfg;
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Domain parse_domain(const std::string& text, const std::string& origin) {
  try {
    const json doc = parse_json(text, origin);
    Fields f(doc, "");
    const std::string type = f.has("type") ? f.text("type") : "";
    if (type == "polygon") {
      if (!f.has("vertices")) Fields::fail("vertices", "missing required field");
      auto vertices = parse_points(f.raw("vertices"), "vertices");
      f.finish();
      return Domain(ConvexPolygon(std::move(vertices)));
    }
    if (type == "round") {
      if (!f.has("centers")) Fields::fail("centers", "missing required field");
      if (!f.has("radius")) Fields::fail("radius", "missing required field");
      auto centers = parse_points(f.raw("centers"), "centers");
      const double r = positive(f.number("radius", 0.0), "radius");
      f.finish();
      return Domain(RoundPolygon(std::move(centers), r));
    }
    if (type == "round_approximation") {
      for (const char* key : {"polygon", "radius", "spacing"})
        if (!f.has(key)) Fields::fail(key, "missing required field");
      auto polygon = parse_points(f.raw("polygon"), "polygon");
      const double r = positive(f.number("radius", 0.0), "radius");
      const double spacing = positive(f.number("spacing", 0.0), "spacing");
      f.finish();
      return Domain(round_approximate(ConvexPolygon(std::move(polygon)), r, spacing));
    }
    Fields::fail("type", "expected \"polygon\", \"round\" or \"round_approximation\"");
  } catch (const ConfigError& e) {
    throw ConfigError("domain file " + origin + ": " + e.what());
  } catch (const InvalidDomain& e) {
    throw ConfigError("domain file " + origin + ": " + e.what());
  } catch (const InvalidSpacing& e) {
    throw ConfigError("domain file " + origin + ": " + e.what());
  }
}

Domain load_domain(const std::string& path) { return parse_domain(read_file(path, "domain"), path); }

}  // namespace tdlab::cli
