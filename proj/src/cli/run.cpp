#include "cli/run.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "tdlab/errors.hpp"
#include "tdlab/scenarios.hpp"

namespace tdlab::cli {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// JSON has no infinities: non-finite values are written as strings.
ojson num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ojson num_array(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::string cell(double v) { return std::isinf(v) ? (v > 0 ? "inf" : "-inf") : format_double(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(const char* v) { return v; }
std::string cell(bool v) { return v ? "true" : "false"; }

class Table {
 public:
  Table(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path);
    line(header);
  }
  template <class... T>
  void row(const T&... v) {
    line({cell(v)...});
  }

 private:
  void line(const std::vector<std::string>& cols) {
    for (std::size_t k = 0; k < cols.size(); ++k) out_ << (k ? "," : "") << cols[k];
    out_ << '\n';
  }
  std::ofstream out_;
};

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::string path(const std::string& name) {
    names_.push_back(name);
    return (dir_ / name).string();
  }

  Table table(const std::string& name, const std::vector<std::string>& header) { return Table(path(name), header); }

  void density(const std::string& stem, const DensityField& f) {
    write_density_csv(f, path(stem + ".csv"), path(stem + ".json"));
  }

  void json(const std::string& name, const ojson& doc) { write_json((dir_ / name).string(), doc, &names_, name); }

  static void write_json(const std::string& file, const ojson& doc, std::vector<std::string>* names = nullptr,
                         const std::string& name = {}) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << doc.dump(2) << '\n';
    if (names) names->push_back(name);
  }

  const fs::path& dir() const { return dir_; }
  std::vector<std::string> names() const {
    auto n = names_;
    std::sort(n.begin(), n.end());
    return n;
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

ExecutionOptions execution(const ScenarioConfig& cfg) {
  ExecutionOptions o;
  o.deterministic = cfg.deterministic;
  o.workers = std::getenv("TDLAB_WORKERS") ? worker_count() : cfg.workers;
  return o;
}

std::uint64_t seed_of(const ScenarioConfig& cfg) { return cfg.seed.value_or(7); }

std::vector<double> halvings(double h, std::size_t n) {
  std::vector<double> out{h};
  for (std::size_t k = 0; k < n; ++k) out.push_back(out.back() / 2.0);
  return out;
}

const ConvexPolygon& require_polygon(const Domain& d, const char* scenario) {
  if (!d.is_polygon()) throw ConfigError(std::string("domain: the ") + scenario + " scenario needs a polygon domain");
  return d.polygon();
}

ojson domain_json(const Domain& d) {
  ojson j;
  j["kind"] = d.is_polygon() ? "polygon" : "round";
  j["faces"] = d.face_count();
  j["diameter"] = num(d.diameter());
  if (!d.is_polygon()) {
    j["radius"] = num(d.round().radius());
    j["centers"] = d.round().centers().size();
  }
  return j;
}

// ---------------------------------------------------------------- scenarios

void run_project(const ScenarioConfig& cfg, const Domain& domain, Artifacts& art, ojson& rep) {
  const double d = cfg.h() / static_cast<double>(cfg.subdivision);
  const Quadrature q = source_quadrature(domain, cfg.source, d);
  const ProjectStudy s = project_study(domain, q, cfg.project.bin_width.value_or(cfg.h()));
  write_boundary_csv(s.measure, art.path("boundary.csv"));
  rep["quadrature_points"] = s.points;
  rep["source_mass"] = num(s.source_mass);
  rep["boundary_mass"] = num(s.boundary_mass);
  rep["max_boundary_density"] = num(s.max_density);
  rep["ties"] = s.ties;
  rep["transport_cost"] = num(s.cost);
}

void run_symmetrize(const ScenarioConfig& cfg, const Domain& domain, Artifacts& art, ojson& rep) {
  const SymmetrizationContext ctx(domain);
  const double d = cfg.h() / static_cast<double>(cfg.subdivision);
  const Quadrature q = source_quadrature(domain, cfg.source, d);
  const CertificateStudy c = certificate_study(ctx, q);
  ojson cert;
  cert["map"] = c.map;
  cert["points"] = c.points;
  cert["seam_points"] = c.seam_points;
  cert["transport_cost"] = num(c.cost);
  cert["duality_gap"] = num(c.gap);
  cert["relative_gap"] = num(c.relative_gap);
  cert["lipschitz_ratio"] = num(c.lipschitz_ratio);
  cert["lipschitz_pairs"] = c.lipschitz_pairs;
  cert["ray_checked"] = c.ray_checked;
  cert["ray_violations"] = c.ray_violations;
  cert["max_ray_error"] = num(c.max_ray_error);
  rep["certificate"] = cert;

  // Image measure f- of the symmetrization map (mass-conserving binning).
  const PreparedSource ps = resolve_seams(ctx, q);
  const DensityField fminus = pushforward_by_map(ps.quadrature, symmetrization_map(ctx), symmetrization_jacobian(ctx),
                                                 aligned_grid(ctx.enclosing, cfg.h()), PushforwardMode::kMass);
  art.density("pushforward", fminus);
  rep["pushforward_mass"] = num(fminus.mass());

  if (!domain.is_polygon()) {
    ojson radial;
    radial["r"] = num(ctx.radius);
    radial["L"] = num(ctx.diameter);
    radial["jacobian_lower_bound"] = num(jacobian_lower_bound(ctx.radius, ctx.diameter, 2));
    ojson lp = ojson::array();
    for (double p : cfg.p_list) {
      ojson row;
      row["p"] = num(p);
      row["pushforward_norm"] = num(pushforward_lp_norm(ps.quadrature, symmetrization_jacobian(ctx), p));
      // The identity map (unit Jacobian) gives ||f+||_p itself.
      row["source_norm"] = num(pushforward_lp_norm(ps.quadrature, [](const Vec2&) { return 1.0; }, p));
      row["lp_constant"] = num(lp_constant(ctx.radius, ctx.diameter, 2, p));
      lp.push_back(row);
    }
    radial["lp"] = lp;
    const DirectMapStudy dm = direct_map_study(ctx, cfg.symmetrize.direct_samples, seed_of(cfg));
    radial["direct_map"] = {{"c", num(dm.c)},
                            {"samples", dm.sweep.samples},
                            {"min_abs_det", num(dm.sweep.min_abs_det)},
                            {"max_abs_det", num(dm.sweep.max_abs_det)}};
    rep["radial"] = radial;
  }

  const JacobianStudy j = jacobian_study(cfg.symmetrize.jacobian_r, cfg.symmetrize.jacobian_L,
                                         cfg.symmetrize.jacobian_samples, seed_of(cfg), cfg.h(), cfg.p_list);
  ojson jac;
  jac["r"] = num(j.r);
  jac["L"] = num(j.L);
  jac["samples"] = j.samples;
  jac["min_det"] = num(j.min_det);
  jac["det_bound"] = num(j.det_bound);
  jac["max_fd_relative_error"] = num(j.max_fd_relative_error);
  jac["max_pushforward_density"] = num(j.max_pushforward_density);
  jac["density_bound"] = num(j.density_bound);
  ojson lp = ojson::array();
  auto t = art.table("jacobian_lp.csv", {"p", "ratio", "lp_constant"});
  for (const auto& row : j.lp) {
    lp.push_back({{"p", num(row.p)}, {"ratio", num(row.ratio)}, {"lp_constant", num(row.constant)}});
    t.row(row.p, row.ratio, row.constant);
  }
  jac["lp"] = lp;
  rep["jacobian"] = jac;
}

void run_density(const ScenarioConfig& cfg, const Domain& domain, const ExecutionOptions& ex, Artifacts& art,
                 ojson& rep) {
  const SymmetrizationContext ctx(domain);
  const double d = cfg.h() / static_cast<double>(cfg.subdivision);
  const RestrictionStudy s = restriction_study(ctx, source_quadrature(domain, cfg.source, d),
                                               halvings(cfg.h(), cfg.density.refinements), ex);
  art.density("sigma", s.sigma);
  rep["quadrature_points"] = s.points;
  rep["projection_cost"] = num(s.projection_cost);
  rep["symmetric_cost"] = num(s.symmetric_cost);
  ojson rows = ojson::array();
  auto t = art.table("restriction.csv", {"h", "grid", "discrepancy"});
  for (const auto& r : s.rows) {
    const char* grid = r.offset ? "offset" : "aligned";
    rows.push_back({{"h", num(r.h)}, {"grid", grid}, {"discrepancy", num(r.discrepancy)}});
    t.row(r.h, grid, r.discrepancy);
  }
  rep["restriction"] = rows;
}

void run_beckmann(const ScenarioConfig& cfg, const Domain& domain, Artifacts& art, ojson& rep) {
  const ConvexPolygon& poly = require_polygon(domain, "beckmann");
  SolveOptions o;
  o.tol = cfg.solver_tolerance;
  o.max_iter = cfg.beckmann.max_iter;
  const BeckmannStudy s =
      beckmann_study(poly, cfg.source, cfg.resolution, cfg.subdivision, o, cfg.beckmann.uniqueness ? seed_of(cfg) + 1 : 0);
  art.density("sigma", s.sigma);
  art.density("flow_magnitude", s.magnitude);
  art.density("potential", s.report.u);
  {
    auto t = art.table("flow_x.csv", {"i", "j", "value"});
    for (std::size_t j = 0; j < s.flow.grid.ny; ++j)
      for (std::size_t i = 0; i <= s.flow.grid.nx; ++i) t.row(i, j, s.flow.x(i, j));
  }
  {
    auto t = art.table("flow_y.csv", {"i", "j", "value"});
    for (std::size_t j = 0; j <= s.flow.grid.ny; ++j)
      for (std::size_t i = 0; i < s.flow.grid.nx; ++i) t.row(i, j, s.flow.y(i, j));
  }
  ojson hist = ojson::array();
  {
    auto t = art.table("history.csv", {"iteration", "objective", "residual", "gap"});
    for (const auto& h : s.report.history) {
      t.row(h.iteration, h.objective, h.residual, h.gap);
      hist.push_back({{"iteration", h.iteration}, {"objective", num(h.objective)}, {"residual", num(h.residual)},
                      {"gap", num(h.gap)}});
    }
  }
  rep["n"] = s.n;
  rep["mass"] = num(s.mass);
  rep["plan_cost"] = num(s.plan_cost);
  rep["iterations"] = s.report.iterations;
  rep["converged"] = s.report.converged;
  rep["objective"] = num(s.report.objective);
  rep["divergence_residual"] = num(s.report.residual);
  rep["relative_residual"] = num(s.relative_residual);
  rep["gap"] = num(s.report.gap);
  rep["discrepancy_vs_sigma"] = num(s.discrepancy);
  rep["mk_residuals"] = {{"equation", num(s.mk.equation)}, {"lipschitz", num(s.mk.lipschitz)},
                         {"deficit", num(s.mk.deficit)}};
  if (s.uniqueness_discrepancy >= 0.0) rep["uniqueness_discrepancy"] = num(s.uniqueness_discrepancy);
  rep["history"] = hist;
}

void run_counterexample(const ScenarioConfig& cfg, const ExecutionOptions& ex, Artifacts& art, ojson& rep) {
  CounterexampleConfig c = cfg.counterexample;
  c.subdivision = cfg.subdivision;
  c.h_list = halvings(cfg.h(), cfg.counterexample_refinements);
  c.p_list = cfg.p_list;
  const CounterexampleStudy s = counterexample_study(c, ex);

  rep["quadrature_points"] = s.points;
  rep["source_mass"] = num(s.source_mass);
  rep["max_mass_balance_error"] = num(s.max_mass_balance_error);
  {
    auto t = art.table("mass_balance.csv", {"eps", "error"});
    for (std::size_t k = 0; k < s.mass_balance_eps.size(); ++k) t.row(s.mass_balance_eps[k], s.mass_balance_error[k]);
  }
  rep["tangency"] = {{"r", num_array(s.tangency_r)}, {"eps_over_sqrt_r", num_array(s.tangency_ratio)}};
  rep["sigma_window"] = {{"eps0", num(c.window_eps)}, {"c1", num(s.window.c1)}, {"c2", num(s.window.c2)},
                         {"samples", s.window.samples}};
  rep["ball_scaling"] = {{"h", num(c.h_list.back())}, {"slope", num(s.balls.slope)}, {"C", num(s.balls.C)},
                         {"r", num_array(s.balls.r)}, {"mass", num_array(s.balls.mass)}};
  {
    auto t = art.table("ball_mass.csv", {"r", "ball_mass"});
    for (std::size_t k = 0; k < s.balls.r.size(); ++k) t.row(s.balls.r[k], s.balls.mass[k]);
  }
  ojson rows = ojson::array();
  {
    auto t = art.table("lp_table.csv", {"p", "h", "norm", "power", "analytic_power"});
    for (const auto& r : s.lp.rows) {
      t.row(r.p, r.h, r.norm, r.power, r.analytic_power);
      rows.push_back({{"p", num(r.p)}, {"h", num(r.h)}, {"norm", num(r.norm)}, {"power", num(r.power)},
                      {"analytic_power", num(r.analytic_power)}});
    }
  }
  ojson classes = ojson::array();
  {
    auto t = art.table("classification.csv",
                       {"p", "classification", "growth_exponent", "raw_exponent", "predicted_exponent"});
    for (const auto& cl : s.lp.classes) {
      t.row(cl.p, to_string(cl.verdict), cl.growth_exponent, cl.raw_exponent, cl.predicted_exponent);
      classes.push_back({{"p", num(cl.p)},
                         {"classification", to_string(cl.verdict)},
                         {"growth_exponent", num(cl.growth_exponent)},
                         {"raw_exponent", num(cl.raw_exponent)},
                         {"predicted_exponent", num(cl.predicted_exponent)},
                         {"relative_changes", num_array(cl.relative_changes)}});
    }
  }
  rep["lp_table"] = rows;
  rep["lp_classification"] = classes;
  rep["l4_increasing"] = s.l4_increasing;
  rep["max_near_apex"] = num_array(s.max_near_apex);
  rep["analytic_discrepancy"] = num_array(s.analytic_discrepancy);
  {
    auto t = art.table("histogram.csv", {"bin_start", "bin_end", "mass"});
    const double w = 1.0 / static_cast<double>(s.histogram.size());
    for (std::size_t k = 0; k < s.histogram.size(); ++k)
      t.row(2.0 + w * static_cast<double>(k), 2.0 + w * static_cast<double>(k + 1), s.histogram[k]);
  }
  rep["ks_statistic"] = num(s.ks_statistic);
  rep["ks_threshold"] = num(s.ks_threshold);
  rep["roundtrip_error"] = num(s.roundtrip_error);
  art.density("sigma", s.sigma_by_h.front());
}

void run_estimate(const ScenarioConfig& cfg, const Domain& domain, const ExecutionOptions& ex, Artifacts& art,
                  ojson& rep) {
  const ConvexPolygon& poly = require_polygon(domain, "estimate");
  const EstimateStudy s = estimate_study(poly, cfg.estimate.radius, cfg.estimate.spacing, cfg.h(),
                                         cfg.h() / static_cast<double>(cfg.subdivision), cfg.p_list, ex);
  art.density("sigma", s.sigma);
  rep["r"] = num(s.r);
  rep["spacing"] = num(s.spacing);
  rep["L"] = num(s.L);
  rep["h"] = num(s.h);
  rep["centers"] = s.centers;
  rep["quadrature_points"] = s.points;
  rep["seam_points"] = s.seam_points;
  rep["hausdorff"] = num(s.hausdorff);
  rep["restriction_discrepancy"] = num(s.restriction_discrepancy);
  ojson rows = ojson::array();
  auto t = art.table("estimate.csv", {"p", "sigma_norm", "radial_norm", "source_norm", "ratio", "lp_constant",
                                      "diam_factor", "bound", "holds"});
  for (const auto& r : s.rows) {
    t.row(r.p, r.sigma_norm, r.radial_norm, r.source_norm, r.ratio, r.constant, r.diam_factor, r.bound, r.holds);
    rows.push_back({{"p", num(r.p)},
                    {"sigma_norm", num(r.sigma_norm)},
                    {"radial_norm", num(r.radial_norm)},
                    {"source_norm", num(r.source_norm)},
                    {"ratio", num(r.ratio)},
                    {"lp_constant", num(r.constant)},
                    {"diam_factor", num(r.diam_factor)},
                    {"bound", num(r.bound)},
                    {"holds", r.holds}});
  }
  rep["estimates"] = rows;
}

void run_approx(const ScenarioConfig& cfg, const Domain& domain, Artifacts& art, ojson& rep) {
  const ConvexPolygon& poly = require_polygon(domain, "approxstudy");
  const StabilityStudy s = stability_study(poly, cfg.approx.radius, halvings(cfg.approx.spacing, cfg.approx.halvings),
                                           cfg.h() / static_cast<double>(cfg.subdivision));
  rep["r"] = num(s.r);
  rep["limit_integrals"] = num_array(s.limit_integrals);
  ojson rows = ojson::array();
  auto t = art.table("stability.csv", {"spacing", "centers", "hausdorff", "discrepancy"});
  for (const auto& r : s.rows) {
    t.row(r.spacing, r.centers, r.hausdorff, r.discrepancy);
    rows.push_back({{"spacing", num(r.spacing)},
                    {"centers", r.centers},
                    {"hausdorff", num(r.hausdorff)},
                    {"discrepancy", num(r.discrepancy)},
                    {"integrals", num_array(r.integrals)}});
  }
  rep["rows"] = rows;
  rep["monotone"] = s.monotone;
  rep["final_over_initial"] = num(s.final_over_initial);
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
  return hex.str();
}

void run_scenario(const ScenarioConfig& cfg, const fs::path& out_dir) {
  const char* name = to_string(cfg.scenario);
  if (cfg.deterministic && !cfg.seed) throw ConfigError("seed: required when running deterministically");
  const auto t0 = std::chrono::steady_clock::now();
  Artifacts art(out_dir);
  ojson rep;
  rep["scenario"] = name;
  rep["deterministic"] = cfg.deterministic;
  rep["resolution"] = cfg.resolution;
  rep["h"] = num(cfg.h());
  rep["subdivision"] = cfg.subdivision;
  rep["seed"] = seed_of(cfg);
  const ExecutionOptions ex = execution(cfg);
  try {
    if (cfg.scenario == Scenario::kCounterexample) {
      run_counterexample(cfg, ex, art, rep);
    } else {
      const Domain domain = load_domain(cfg.domain_path);
      rep["domain"] = domain_json(domain);
      switch (cfg.scenario) {
        case Scenario::kProject: run_project(cfg, domain, art, rep); break;
        case Scenario::kSymmetrize: run_symmetrize(cfg, domain, art, rep); break;
        case Scenario::kDensity: run_density(cfg, domain, ex, art, rep); break;
        case Scenario::kBeckmann: run_beckmann(cfg, domain, art, rep); break;
        case Scenario::kEstimate: run_estimate(cfg, domain, ex, art, rep); break;
        case Scenario::kApproxStudy: run_approx(cfg, domain, art, rep); break;
        case Scenario::kCounterexample: break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(std::string("scenario ") + name + ": " + e.what());
  }
  art.json("report.json", rep);

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Artifacts::write_json((art.dir() / "timings.json").string(), ojson{{"scenario", name}, {"seconds", seconds}});

  ojson manifest;
  manifest["scenario"] = name;
  manifest["config_sha256"] = cfg.config_path.empty() ? "" : sha256_file(cfg.config_path);
  ojson files = ojson::array();
  for (const auto& n : art.names()) {
    const fs::path p = art.dir() / n;
    files.push_back({{"path", n}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  manifest["artifacts"] = files;
  Artifacts::write_json((art.dir() / "manifest.json").string(), manifest);
}

}  // namespace tdlab::cli
