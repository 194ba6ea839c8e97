#include "ovals/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "ovals/ansatz.hpp"
#include "ovals/asymptotics.hpp"
#include "ovals/barriers.hpp"
#include "ovals/error.hpp"
#include "ovals/heat_kernel.hpp"
#include "ovals/numerics.hpp"
#include "ovals/rescaled.hpp"

namespace ovals {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::Configuration, "config: " + key + " expects a number, got '" + v + "'");
  }
  if (used != v.size()) fail(ErrorKind::Configuration, "config: " + key + " expects a number, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  fail(ErrorKind::Configuration, "config: " + key + " expects true/false, got '" + v + "'");
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const double x = to_number(key, v);
  if (!(x >= 0) || x != std::floor(x)) fail(ErrorKind::Configuration, "config: " + key + " expects a count");
  return static_cast<std::size_t>(x);
}

// finite numbers as JSON numbers, the rest as null
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json series(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json error_entry(const Error& e) {
  return json{{"status", "inapplicable"}, {"kind", std::string(to_string(e.kind()))}, {"reason", e.what()}};
}

std::vector<double> snapshot_times(const RunConfig& cfg) {
  const double t0 = cfg.start_time(), t1 = cfg.end_time();
  std::vector<double> ts;
  if (cfg.is_oval()) {
    const double l0 = std::log(-t0), l1 = std::log(-t1);
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround((l0 - l1) / cfg.snapshot_dtau)));
    for (std::size_t i = 1; i <= k; ++i) ts.push_back(-std::exp(l0 - (l0 - l1) * static_cast<double>(i) / k));
  } else {
    for (int i = 1; i <= 10; ++i) ts.push_back(t0 + (t1 - t0) * i / 10.0);
  }
  ts.back() = t1;
  return ts;
}

StepControl step_control(const RunConfig& cfg) {
  StepControl ctl;
  ctl.cfl_safety = cfg.cfl;
  ctl.regrid_threshold = cfg.is_oval() ? cfg.regrid_threshold : 0.0;
  return ctl;
}

CutoffPolicy cutoff_policy(const RunConfig& cfg) { return CutoffPolicy{0.01, cfg.cutoff_floor}; }

Profile oval_initial(const BryantSolution& sol, const RunConfig& cfg, double s) {
  OvalOptions o;
  o.h_tip = cfg.h_tip;
  o.h_bulk = cfg.h_bulk;
  return oval_ansatz(sol, s * cfg.start_time(), o);
}

std::string csv_of(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << format_double(r[j]);
    os << '\n';
  }
  return os.str();
}

double ratio_gap(double r) { return std::abs(r - 1); }

json tip_side_json(const TipSide& s) {
  return json{{"resolved", s.resolved},
              {"distance_ratio", num(s.distance_ratio)},
              {"curvature_ratio", num(s.curvature_ratio)},
              {"velocity_ratio", num(s.velocity_ratio)},
              {"bryant_closeness", num(s.bryant_closeness)}};
}

}  // namespace

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> d{
      {"cylinder_rel", 1e-4}, {"sphere_rel", 1e-3},   {"kappa_rel", 0.15},
      {"projection_rel", 0.2}, {"shape_rel", 0.2},    {"tip_c0_rel", 0.02},
      {"tip_curvature", 1e-6}, {"second_tail_rel", 0.1}, {"ray_integral_rel", 0.01},
      {"tuning_c0", 2e-4}};
  return d;
}

double RunConfig::tol(const std::string& key) const {
  if (auto it = tolerances.find(key); it != tolerances.end()) return it->second;
  return default_tolerances().at(key);
}

double RunConfig::start_time() const {
  if (t0 != 0) return t0;
  return is_oval() ? -std::exp(tau0) : -100.0;
}

double RunConfig::end_time() const {
  if (t_end != 0) return t_end;
  return is_oval() ? -std::exp(tau0 - dtau) : -50.0;
}

void set_option(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "scenario") {
    if (v != "cylinder" && v != "sphere" && v != "oval-tau10")
      fail(ErrorKind::Configuration, "config: unknown scenario '" + v + "'");
    cfg.scenario = v;
  } else if (key == "t0") {
    cfg.t0 = to_number(key, v);
  } else if (key == "t_end") {
    cfg.t_end = to_number(key, v);
  } else if (key == "grid_points") {
    cfg.grid_points = to_count(key, v);
  } else if (key == "half_width") {
    cfg.half_width = to_number(key, v);
  } else if (key == "tau0") {
    cfg.tau0 = to_number(key, v);
  } else if (key == "dtau") {
    cfg.dtau = to_number(key, v);
  } else if (key == "time_scale") {
    cfg.time_scale = to_number(key, v);
  } else if (key == "h_tip") {
    cfg.h_tip = to_number(key, v);
  } else if (key == "h_bulk") {
    cfg.h_bulk = to_number(key, v);
  } else if (key == "cfl") {
    cfg.cfl = to_number(key, v);
  } else if (key == "regrid_threshold") {
    cfg.regrid_threshold = to_number(key, v);
  } else if (key == "snapshot_dtau") {
    cfg.snapshot_dtau = to_number(key, v);
  } else if (key == "cutoff_floor") {
    cfg.cutoff_floor = to_number(key, v);
  } else if (key == "spectral") {
    cfg.spectral = to_bool(key, v);
  } else if (key == "barriers") {
    cfg.barriers = to_bool(key, v);
  } else if (key == "regimes") {
    cfg.regimes = to_bool(key, v);
  } else if (key == "barrier_a") {
    cfg.barrier_a.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.barrier_a.push_back(to_number(key, trim(item)));
  } else if (key == "L") {
    cfg.L = to_number(key, v);
  } else if (key == "theta") {
    cfg.theta = to_number(key, v);
  } else if (key == "M") {
    cfg.M = to_number(key, v);
  } else if (key == "star_alpha") {
    cfg.star_alpha = to_number(key, v);
  } else if (key == "seed") {
    cfg.seed = to_count(key, v);
  } else if (key == "caloric_samples") {
    cfg.caloric_samples = to_count(key, v);
  } else if (key.rfind("tol.", 0) == 0) {
    const auto name = key.substr(4);
    if (!default_tolerances().count(name)) fail(ErrorKind::Configuration, "config: unknown tolerance '" + name + "'");
    cfg.tolerances[name] = to_number(key, v);
  } else {
    fail(ErrorKind::Configuration, "config: unknown key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Configuration, "config line " + std::to_string(lineno) + ": expected key = value");
    set_option(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  const double t0 = cfg.start_time(), t1 = cfg.end_time();
  if (!(t0 < t1 && t1 < 0)) fail(ErrorKind::Configuration, "config: need t0 < t_end < 0");
  if (cfg.grid_points < 64 || cfg.grid_points % 2 == 0)
    fail(ErrorKind::Configuration, "config: grid_points must be odd and at least 64");
  if (!(cfg.snapshot_dtau > 0)) fail(ErrorKind::Configuration, "config: snapshot_dtau must be positive");
  if (!(cfg.theta > 0 && cfg.theta < 0.5)) fail(ErrorKind::Configuration, "config: theta must lie in (0, 1/2)");
  if (!(cfg.star_alpha > 0 && cfg.star_alpha < 1)) fail(ErrorKind::Configuration, "config: star_alpha in (0,1)");
  if (cfg.time_scale < 0) fail(ErrorKind::Configuration, "config: time_scale must be >= 0");
  if (cfg.is_oval() && std::log(-t1) < 5)
    fail(ErrorKind::Configuration, "config: the oval scenario needs log(-t_end) >= 5");
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errs(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned k = 0; k < w; ++k)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

double tune_time_scale(const BryantSolution& sol, const RunConfig& cfg, json* log) {
  const double t0 = cfg.start_time(), t1 = cfg.end_time();
  const auto ctl = step_control(cfg);
  const auto pol = cutoff_policy(cfg);
  auto c0_at_end = [&](double s) {
    auto st = make_state(oval_initial(sol, cfg, s), t0);
    evolve(st, t1, ctl);
    const double c0 = project(to_rescaled(st.profile, t1), pol).coeffs[0];
    if (log) log->push_back(json{{"time_scale", s}, {"c0_end", c0}});
    return c0;
  };
  double s0 = 1.0, s1 = 1.01;
  double c0 = c0_at_end(s0), c1 = c0_at_end(s1);
  for (int it = 0; it < 6 && std::abs(c1) > cfg.tol("tuning_c0"); ++it) {
    if (c1 == c0) break;
    const double s2 = s1 - c1 * (s1 - s0) / (c1 - c0);
    if (!(s2 > 0.9 && s2 < 1.1)) fail(ErrorKind::ConstructionFailed, "tune_time_scale: secant left [0.9, 1.1]");
    s0 = s1;
    c0 = c1;
    s1 = s2;
    c1 = c0_at_end(s1);
  }
  return std::abs(c1) <= std::abs(c0) ? s1 : s0;
}

Trajectory run_trajectory(const RunConfig& cfg, const BryantSolution& sol) {
  validate(cfg);
  const double t0 = cfg.start_time();
  Trajectory tr;
  tr.tuning = json::array();
  Profile p;
  double r0 = 0;
  if (cfg.scenario == "cylinder") {
    p = cylinder_profile(t0, cfg.half_width, cfg.grid_points);
  } else if (cfg.scenario == "sphere") {
    r0 = std::sqrt(-4 * t0);
    p = sphere_profile(r0, cfg.grid_points);
  } else {
    tr.time_scale = cfg.time_scale > 0 ? cfg.time_scale : tune_time_scale(sol, cfg, &tr.tuning);
    p = oval_initial(sol, cfg, tr.time_scale);
  }
  tr.state = make_state(std::move(p), t0);
  tr.snapshots.push_back({t0, tr.state.profile});
  const auto ctl = step_control(cfg);
  const double c = r0 * r0 + 4 * t0;
  auto observe = [&](const FlowState& s) {
    if (cfg.scenario == "cylinder") {
      const double exact = std::sqrt(-2 * s.t);
      for (double f : s.profile.f()) tr.max_cylinder_error = std::max(tr.max_cylinder_error, std::abs(f / exact - 1));
    } else if (cfg.scenario == "sphere") {
      const double r = s.profile.r_max();
      tr.max_sphere_drift = std::max(tr.max_sphere_drift, std::abs(r * r + 4 * s.t - c) / (r0 * r0));
    }
  };
  for (double t : snapshot_times(cfg)) {
    evolve(tr.state, t, ctl, observe);
    tr.snapshots.push_back({tr.state.t, tr.state.profile});
  }
  return tr;
}

StageResult evolve_stage(const RunConfig& cfg, const Trajectory& tr) {
  StageResult r;
  r.name = "evolve";
  const auto& st = tr.state;
  const auto inv = st.profile.check_invariants();
  const auto rchk = rmax_derivative_check(st.history);
  json checks = json::object();
  checks["invariants"] = inv.ok();
  if (cfg.scenario == "cylinder") {
    checks["cylinder_error"] = tr.max_cylinder_error <= cfg.tol("cylinder_rel");
    checks["rmax_identity"] = !rchk.flagged;
  } else if (cfg.scenario == "sphere") {
    checks["sphere_drift"] = tr.max_sphere_drift <= cfg.tol("sphere_rel");
  }
  json snaps = json::array();
  for (const auto& s : tr.snapshots)
    snaps.push_back(json{{"t", s.t},
                         {"r_max", s.profile.r_max()},
                         {"d_tip_left", s.profile.d_tip_left()},
                         {"d_tip_right", s.profile.d_tip_right()},
                         {"nodes", s.profile.size()}});
  r.report = json{{"scenario", cfg.scenario},
                  {"t0", cfg.start_time()},
                  {"t_end", st.t},
                  {"steps", st.steps},
                  {"regrids", st.regrids},
                  {"time_scale", tr.time_scale},
                  {"tuning", tr.tuning},
                  {"max_cylinder_error", tr.max_cylinder_error},
                  {"max_sphere_drift", tr.max_sphere_drift},
                  {"slope_excess", inv.slope_excess},
                  {"concavity_excess", inv.concavity_excess},
                  {"warnings", st.warnings.size()},
                  {"snapshots", snaps},
                  {"checks", checks}};
  for (const auto& [k, v] : checks.items()) r.pass = r.pass && v.get<bool>();
  std::ostringstream traj, prof;
  write_trajectory_csv(traj, st.history);
  write_profile_csv(prof, st.profile);
  r.files.push_back({"trajectory.csv", traj.str()});
  r.files.push_back({"profile_final.csv", prof.str()});
  return r;
}

StageResult spectral_stage(const RunConfig& cfg, const Trajectory& tr) {
  StageResult r;
  r.name = "spectral";
  if (!cfg.is_oval()) {
    r.report = json{{"status", "inapplicable"}, {"reason", "spectral analysis runs on the oval scenario"}};
    return r;
  }
  const auto pol = cutoff_policy(cfg);
  const double ref_sup = 2 / (4 * std::numbers::sqrt2);
  const auto xs = linspace(-2, 2, 401);
  std::vector<SpectralRecord> rows;
  std::vector<double> tau, alpha, gp, g0, gm, npv, npp, shape;
  DeltaTracker tracker;
  for (const auto& s : tr.snapshots) {
    const auto g = to_rescaled(s.profile, s.t);
    const auto rep = project(g, pol);
    const auto E = nonlinear_source(s.profile, s.t);
    const auto np = neutral_source_projection(g, E, pol);
    double worst = 0;
    for (double x : xs) {
      const double ref = -(x * x - 2) / (4 * std::numbers::sqrt2);
      worst = std::max(worst, std::abs(-g.tau * g.value(x) - ref));
    }
    rows.push_back({g.tau, rep.alpha, rep.gamma_plus, rep.gamma_zero, rep.gamma_minus, tracker.update(g), g.rho_max()});
    tau.push_back(g.tau);
    alpha.push_back(rep.alpha);
    gp.push_back(rep.gamma_plus);
    g0.push_back(rep.gamma_zero);
    gm.push_back(rep.gamma_minus);
    npv.push_back(np.value);
    npp.push_back(np.predicted);
    shape.push_back(worst / ref_sup);
  }
  // the classifier reads entry k as k steps into the past
  std::vector<double> rp(gp.rbegin(), gp.rend()), r0(g0.rbegin(), g0.rend()), rm(gm.rbegin(), gm.rend());
  const auto dom = classify_modes(rp, r0, rm);
  const auto fit = alpha_ode_fit(tau, alpha);
  double proj_worst = 0, shape_worst = 0;
  std::vector<double> ratio;
  for (std::size_t i = 0; i < npv.size(); ++i) {
    ratio.push_back(npv[i] / npp[i]);
    proj_worst = std::max(proj_worst, std::abs(ratio.back() - 1));
    shape_worst = std::max(shape_worst, shape[i]);
  }
  json checks{{"neutral_dominates", dom == ModeDominance::NeutralDominates},
              {"kappa", std::abs(fit.kappa / -8 - 1) <= cfg.tol("kappa_rel")},
              {"neutral_projection", proj_worst <= cfg.tol("projection_rel")},
              {"neutral_shape", shape_worst <= cfg.tol("shape_rel")}};
  r.report = json{{"mode_dominance", to_string(dom)},
                  {"kappa", fit.kappa},
                  {"sup_8tau_alpha_deviation", fit.sup_deviation},
                  {"projection_worst_rel", proj_worst},
                  {"shape_worst_rel", shape_worst},
                  {"series", json{{"tau", series(tau)},
                                  {"alpha", series(alpha)},
                                  {"gamma_plus", series(gp)},
                                  {"gamma_zero", series(g0)},
                                  {"gamma_minus", series(gm)},
                                  {"neutral_projection", series(npv)},
                                  {"neutral_predicted", series(npp)},
                                  {"projection_ratio", series(ratio)},
                                  {"shape_rel", series(shape)}}},
                  {"checks", checks}};
  for (const auto& [k, v] : checks.items()) r.pass = r.pass && v.get<bool>();
  std::ostringstream os;
  write_spectral_csv(os, rows);
  r.files.push_back({"spectral.csv", os.str()});
  std::vector<std::vector<double>> nrows;
  for (std::size_t i = 0; i < tau.size(); ++i) nrows.push_back({tau[i], npv[i], npp[i], ratio[i], shape[i]});
  r.files.push_back({"neutral.csv", csv_of({"tau", "projection", "predicted", "ratio", "shape_rel"}, nrows)});
  return r;
}

StageResult regimes_stage(const RunConfig& cfg, const Trajectory& tr, const BryantSolution& sol) {
  StageResult r;
  r.name = "regimes";
  const auto& st = tr.state;
  const double t = st.t;
  json checks = json::object();

  json par, inter;
  try {
    const auto f = parabolic_fit(st.profile, t, cfg.L);
    par = json{{"t", t}, {"L", cfg.L}, {"coefficient", f.coefficient}, {"residual", f.residual},
               {"unit_residual", f.unit_residual}, {"n_points", f.n_points}};
    if (cfg.is_oval()) checks["parabolic_coefficient"] = f.coefficient >= 0.8 && f.coefficient <= 1.2;
  } catch (const Error& e) {
    par = error_entry(e);
  }
  try {
    const auto f = intermediate_fit(st.profile, t, cfg.theta);
    inter = json{{"t", t}, {"theta", cfg.theta}, {"deviation", f.deviation}, {"predicted_width", f.predicted},
                 {"z_left", f.z_left}, {"z_right", f.z_right}, {"ratio_left", f.ratio_left},
                 {"ratio_right", f.ratio_right}};
  } catch (const Error& e) {
    inter = error_entry(e);
  }
  const auto tip = tip_report(st, sol);
  json tl = tip_side_json(tip.left), trt = tip_side_json(tip.right);
  tl["applicable"] = trt["applicable"] = tip.applicable;
  tl["neck_ratio"] = trt["neck_ratio"] = tip.neck_ratio;
  if (cfg.is_oval()) {
    bool ok = tip.applicable;
    for (const auto* s : {&tip.left, &tip.right})
      for (double v : {s->distance_ratio, s->curvature_ratio, s->velocity_ratio}) ok = ok && v >= 0.8 && v <= 1.25;
    checks["tip_ratios"] = ok;
  }

  json star;
  try {
    const auto c = check_star(st.history, cfg.star_alpha);
    star = json{{"alpha", cfg.star_alpha}, {"pass", c.pass}, {"sup", c.sup}, {"t_at_sup", c.t_at_sup},
                {"growth", c.growth}, {"diameter_ratio", num(c.diameter_ratio)}};
  } catch (const Error& e) {
    star = error_entry(e);
    star["alpha"] = cfg.star_alpha;
  }
  try {
    star["gradient_bound"] = star_gradient_bound(tr.snapshots, cfg.star_alpha);
  } catch (const Error& e) {
    star["gradient_bound"] = error_entry(e);
  }
  const auto it = bootstrap_iterates(cfg.star_alpha);
  json boot{{"alpha0", cfg.star_alpha}, {"steps_to_one", it.size() - 1}, {"final", it.back()},
            {"first", series(std::vector<double>(it.begin(), it.begin() + std::min<std::size_t>(5, it.size())))}};

  // ratio series over the snapshots
  std::vector<std::vector<double>> rows;
  for (const auto& s : tr.snapshots) {
    double coef = kNaN, dev = kNaN, wl = kNaN, wr = kNaN;
    try {
      coef = parabolic_fit(s.profile, s.t, cfg.L).coefficient;
    } catch (const Error&) {
    }
    try {
      const auto f = intermediate_fit(s.profile, s.t, cfg.theta);
      dev = f.deviation;
      wl = f.ratio_left;
      wr = f.ratio_right;
    } catch (const Error&) {
    }
    const auto tp = tip_report(make_state(s.profile, s.t), sol);
    rows.push_back({s.t, coef, dev, wl, wr, tp.left.distance_ratio, tp.right.distance_ratio,
                    tp.left.curvature_ratio, tp.right.curvature_ratio, tp.left.bryant_closeness});
  }
  r.files.push_back({"regimes.csv", csv_of({"t", "parabolic_coefficient", "intermediate_deviation", "width_ratio_left",
                                             "width_ratio_right", "distance_ratio_left", "distance_ratio_right",
                                             "curvature_ratio_left", "curvature_ratio_right", "bryant_closeness"},
                                            rows)});

  r.report = json{{"parabolic", par},  {"intermediate", inter}, {"tip_left", tl}, {"tip_right", trt},
                  {"star_conditions", star}, {"bootstrap_map", boot}};

  if (cfg.is_oval()) {
    // two-time decay of the composite ansatz
    const double ta = -std::exp(10.0), tb = -std::exp(20.0);
    const auto ra = ansatz_residual(sol, ta, AnsatzPiece::Oval, cfg.L, cfg.theta);
    const auto rb = ansatz_residual(sol, tb, AnsatzPiece::Oval, cfg.L, cfg.theta);
    const auto pa = oval_ansatz(sol, ta), pb = oval_ansatz(sol, tb);
    const auto wa = intermediate_fit(pa, ta, cfg.theta), wb = intermediate_fit(pb, tb, cfg.theta);
    const auto xa = tip_report(make_state(pa, ta), sol), xb = tip_report(make_state(pb, tb), sol);
    json d{{"t", series({ta, tb})},
           {"residual_parabolic", series({ra.parabolic, rb.parabolic})},
           {"residual_intermediate", series({ra.intermediate, rb.intermediate})},
           {"width_ratio", series({wa.ratio_right, wb.ratio_right})},
           {"distance_ratio", series({xa.right.distance_ratio, xb.right.distance_ratio})},
           {"curvature_ratio", series({xa.right.curvature_ratio, xb.right.curvature_ratio})}};
    r.report["ansatz_decay"] = d;
    checks["residual_parabolic_decreases"] = rb.parabolic < ra.parabolic;
    checks["residual_intermediate_decreases"] = rb.intermediate < ra.intermediate;
    checks["widths_approach_one"] = ratio_gap(wb.ratio_left) < ratio_gap(wa.ratio_left) &&
                                    ratio_gap(wb.ratio_right) < ratio_gap(wa.ratio_right);
    checks["tip_ratios_approach_one"] =
        ratio_gap(xb.left.distance_ratio) < ratio_gap(xa.left.distance_ratio) &&
        ratio_gap(xb.right.distance_ratio) < ratio_gap(xa.right.distance_ratio) &&
        ratio_gap(xb.left.curvature_ratio) < ratio_gap(xa.left.curvature_ratio) &&
        ratio_gap(xb.right.curvature_ratio) < ratio_gap(xa.right.curvature_ratio);
  }
  r.report["checks"] = checks;
  for (const auto& [k, v] : checks.items()) r.pass = r.pass && v.get<bool>();
  return r;
}

StageResult barrier_stage(const RunConfig& cfg, const Trajectory& tr, unsigned threads) {
  StageResult r;
  r.name = "barriers";
  const std::size_t n = cfg.barrier_a.size();
  std::vector<json> entries(n);
  std::vector<std::string> csv(n);
  std::vector<char> ok(n, 1);
  parallel_for(n, threads, [&](std::size_t i) {
    const double a = cfg.barrier_a[i];
    const auto b = build_barrier(a);
    const auto p = verify_properties(b);
    json e{{"a", a},          {"eps", b.eps},           {"slope", b.slope},
           {"max_N", p.max_N}, {"plateau_C", p.plateau_C}, {"min_psi_a4", p.min_psi_a4},
           {"psi_inner", p.psi_inner}, {"outer_margin_a4", p.outer_margin_a4}, {"properties_ok", p.ok()}};
    ok[i] = p.ok();
    try {
      const auto o = check_ordering(tr.snapshots, b);
      e["ordering"] = o.status == OrderingStatus::Pass ? "pass" : "violation";
      e["worst_ratio"] = o.worst_ratio.empty() ? json(nullptr) : num(*std::max_element(o.worst_ratio.begin(), o.worst_ratio.end()));
      if (o.status != OrderingStatus::Pass) {
        ok[i] = 0;
        e["violation"] = json{{"t", o.t_violation}, {"z", o.z_violation}, {"lhs", o.lhs}, {"rhs", o.rhs}};
      }
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::Inapplicable) throw;
      e["ordering"] = error_entry(err);
    }
    std::ostringstream os;
    write_barrier_csv(os, b);
    csv[i] = os.str();
    entries[i] = std::move(e);
  });
  json fam = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    fam.push_back(entries[i]);
    r.pass = r.pass && ok[i];
    r.files.push_back({"barrier_a" + format_double(cfg.barrier_a[i]) + ".csv", csv[i]});
  }
  r.report["family"] = fam;
  const auto& last = tr.snapshots.back();
  try {
    const auto g = intermediate_gradient_bound(last.profile, last.t, cfg.theta, cfg.M);
    r.report["intermediate_gradient_bound"] =
        json{{"t", last.t}, {"M", cfg.M}, {"precondition", g.precondition}, {"points", g.z.size()},
             {"pass_fraction", g.pass_fraction}};
  } catch (const Error& e) {
    r.report["intermediate_gradient_bound"] = error_entry(e);
  }
  return r;
}

StageResult bryant_stage(const RunConfig& cfg, const BryantSolution& sol) {
  StageResult r;
  r.name = "bryant";
  const double R = sol.tip_scalar_curvature();
  const double second = sol.tail_d / (2 * sol.tail_c0_two_param * sol.tail_c0_two_param);
  const double ray = ray_ricci_integral(sol);
  json checks{{"tip_curvature", std::abs(R - 1) <= cfg.tol("tip_curvature")},
              {"c0", std::abs(sol.c0 - 1) <= cfg.tol("tip_c0_rel")},
              {"second_tail", std::abs(second - 1) <= cfg.tol("second_tail_rel")},
              {"ray_integral", std::abs(ray - 1) <= cfg.tol("ray_integral_rel")}};
  r.report = json{{"b0", sol.b0},
                  {"tip_scalar_curvature", R},
                  {"c0", sol.c0},
                  {"c0_two_param", sol.tail_c0_two_param},
                  {"second_tail_ratio", second},
                  {"ray_ricci_integral", ray},
                  {"phi_ode_residual", phi_ode_residual(sol)},
                  {"checks", checks}};
  for (const auto& [k, v] : checks.items()) r.pass = r.pass && v.get<bool>();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < sol.r_grid.size(); ++i)
    rows.push_back({sol.r_grid[i], sol.phi_values[i], sol.z_of_r[i], sol.scalar_curvature(i)});
  r.files.push_back({"bryant_phi.csv", csv_of({"r", "phi", "z", "R"}, rows)});
  return r;
}

StageResult heatkernel_stage(const RunConfig& cfg, unsigned threads) {
  StageResult r;
  r.name = "heatkernel";
  const auto tab = lemma_A1_scan();
  const double mus[] = {0.05, 0.1, 0.3};
  const std::size_t n = cfg.caloric_samples;
  std::vector<std::array<BoundCheck, 3>> checks(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto data = random_caloric_data(cfg.seed + i);
    for (int k = 0; k < 3; ++k) checks[i][k] = second_derivative_bound_check(data, mus[k], tab.C);
  });
  std::ostringstream scan, bound;
  scan << "item,t_or_y,ratio\n";
  for (const auto& row : tab.rows)
    scan << row.item << ',' << format_double(row.t_or_y) << ',' << format_double(row.ratio) << '\n';
  bound << "mu,lhs,rhs,pass\n";
  std::size_t passed = 0;
  for (const auto& c : checks)
    for (const auto& b : c) {
      bound << format_double(b.mu) << ',' << format_double(b.lhs) << ',' << format_double(b.rhs) << ','
            << (b.pass ? 1 : 0) << '\n';
      passed += b.pass;
    }
  bool finite = true;
  for (double c : tab.c) finite = finite && std::isfinite(c);
  json checks_j{{"constants_finite", finite}, {"bound_holds", passed == 3 * n}};
  r.report = json{{"c", series({tab.c[0], tab.c[1], tab.c[2], tab.c[3]})},
                  {"C", tab.C},
                  {"samples", n},
                  {"seed", cfg.seed},
                  {"bound_checks", 3 * n},
                  {"bound_passed", passed},
                  {"checks", checks_j}};
  r.pass = finite && passed == 3 * n;
  r.files.push_back({"lemma_a1.csv", scan.str()});
  r.files.push_back({"bound_check.csv", bound.str()});
  return r;
}

std::vector<StageResult> run_all(const RunConfig& cfg, unsigned threads) {
  validate(cfg);
  const auto sol = solve_phi(-1.0 / 6);
  StageResult bry, heat;
  std::vector<StageResult> chain;
  parallel_for(3, threads, [&](std::size_t k) {
    if (k == 0) bry = bryant_stage(cfg, sol);
    if (k == 1) heat = heatkernel_stage(cfg, threads);
    if (k == 2) {
      const auto tr = run_trajectory(cfg, sol);
      chain.push_back(evolve_stage(cfg, tr));
      if (cfg.spectral) chain.push_back(spectral_stage(cfg, tr));
      if (cfg.regimes) chain.push_back(regimes_stage(cfg, tr, sol));
      if (cfg.barriers) chain.push_back(barrier_stage(cfg, tr, threads));
    }
  });
  std::vector<StageResult> out{bry, heat};
  for (auto& s : chain) out.push_back(std::move(s));
  StageResult sum;
  sum.name = "summary";
  json stages = json::object();
  for (const auto& s : out) {
    stages[s.name] = s.pass;
    sum.pass = sum.pass && s.pass;
  }
  sum.report = json{{"scenario", cfg.scenario}, {"stages", stages}, {"pass", sum.pass}};
  out.push_back(std::move(sum));
  return out;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_stage(const std::filesystem::path& dir, const StageResult& r) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) fail(ErrorKind::Configuration, "cannot write " + (dir / name).string());
    os << content;
  };
  put(r.name + ".json", dump_json(r.report));
  for (const auto& f : r.files) put(f.name, f.content);
}

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) fail(ErrorKind::Incompatible, "compare: missing " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void note(CompareReport& rep, const std::string& field, const json& g, const json& v, double rel) {
  rep.pass = false;
  rep.diffs.push_back(json{{"field", field}, {"golden", g}, {"run", v}, {"rel", num(rel)}});
}

double rel_diff(double a, double b) {
  if (a == b) return 0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

void compare_json(const json& g, const json& v, const std::string& path, double tol, CompareReport& rep) {
  const bool gnum = g.is_number() || g.is_null(), vnum = v.is_number() || v.is_null();
  if (gnum && vnum) {
    ++rep.compared;
    if (g.is_null() != v.is_null()) return note(rep, path, g, v, kNaN);
    if (g.is_null()) return;
    const double d = rel_diff(g.get<double>(), v.get<double>());
    if (d > tol) note(rep, path, g, v, d);
    return;
  }
  if (g.type() != v.type()) fail(ErrorKind::Incompatible, "compare: type mismatch at " + path);
  if (g.is_object()) {
    for (const auto& [k, gv] : g.items()) {
      if (!v.contains(k)) fail(ErrorKind::Incompatible, "compare: missing key " + path + "/" + k);
      compare_json(gv, v.at(k), path + "/" + k, tol, rep);
    }
    for (const auto& [k, vv] : v.items())
      if (!g.contains(k)) fail(ErrorKind::Incompatible, "compare: unexpected key " + path + "/" + k);
  } else if (g.is_array()) {
    if (g.size() != v.size()) fail(ErrorKind::Incompatible, "compare: length mismatch at " + path);
    for (std::size_t i = 0; i < g.size(); ++i) compare_json(g[i], v[i], path + "/" + std::to_string(i), tol, rep);
  } else {
    ++rep.compared;
    if (g != v) note(rep, path, g, v, kNaN);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

void compare_csv(const std::string& g, const std::string& v, const std::string& name, double tol,
                 CompareReport& rep) {
  const auto gl = split(g, '\n'), vl = split(v, '\n');
  if (gl.empty() || vl.empty() || gl[0] != vl[0]) fail(ErrorKind::Incompatible, "compare: header mismatch in " + name);
  if (gl.size() != vl.size()) fail(ErrorKind::Incompatible, "compare: row count mismatch in " + name);
  const auto cols = split(gl[0], ',');
  for (std::size_t i = 1; i < gl.size(); ++i) {
    const auto a = split(gl[i], ','), b = split(vl[i], ',');
    if (a.size() != b.size()) fail(ErrorKind::Incompatible, "compare: column count mismatch in " + name);
    for (std::size_t j = 0; j < a.size(); ++j) {
      ++rep.compared;
      if (a[j] == b[j]) continue;
      const std::string field = name + ":" + std::to_string(i) + ":" + (j < cols.size() ? cols[j] : std::to_string(j));
      char* ea = nullptr;
      char* eb = nullptr;
      const double x = std::strtod(a[j].c_str(), &ea), y = std::strtod(b[j].c_str(), &eb);
      if (a[j].empty() || b[j].empty() || *ea || *eb) {
        note(rep, field, a[j], b[j], kNaN);
        continue;
      }
      const double d = rel_diff(x, y);
      if (d > tol) note(rep, field, x, y, d);
    }
  }
}

}  // namespace

CompareReport compare_trees(const std::filesystem::path& golden, const std::filesystem::path& run, double rel_tol) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(golden) || !fs::is_directory(run))
    fail(ErrorKind::Incompatible, "compare: both trees must exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(golden))
    if (e.is_regular_file() && (e.path().extension() == ".json" || e.path().extension() == ".csv"))
      files.push_back(fs::relative(e.path(), golden));
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorKind::Incompatible, "compare: golden tree has no reports");
  CompareReport rep;
  for (const auto& f : files) {
    const auto g = slurp(golden / f), v = slurp(run / f);
    if (f.extension() == ".json") {
      json gj, vj;
      try {
        gj = json::parse(g);
        vj = json::parse(v);
      } catch (const json::exception& e) {
        fail(ErrorKind::Incompatible, "compare: " + f.string() + " is not JSON: " + e.what());
      }
      compare_json(gj, vj, f.string() + ":", rel_tol, rep);
    } else {
      compare_csv(g, v, f.string(), rel_tol, rep);
    }
  }
  return rep;
}

}  // namespace ovals
