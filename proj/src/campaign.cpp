#include "botune/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "artifacts.hpp"
#include "botune/error.hpp"

namespace botune {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- config ---

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json* find(const char* k) {
    seen_.insert(k);
    const auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* k, double& out) {
    if (const json* v = find(k)) {
      if (!v->is_number()) throw ConfigError(field(k) + ": expected a number");
      out = v->get<double>();
    }
  }
  void count(const char* k, std::size_t& out) {
    if (const json* v = find(k)) {
      if (!v->is_number_integer() || v->get<long long>() < 0)
        throw ConfigError(field(k) + ": expected a nonnegative integer");
      out = v->get<std::size_t>();
    }
  }
  void integer(const char* k, int& out) {
    if (const json* v = find(k)) {
      if (!v->is_number_integer()) throw ConfigError(field(k) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void seed(const char* k, std::uint64_t& out) {
    if (const json* v = find(k)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        throw ConfigError(field(k) + ": expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }
  bool text(const char* k, std::string& out) {
    if (const json* v = find(k)) {
      if (!v->is_string()) throw ConfigError(field(k) + ": expected a string");
      out = v->get<std::string>();
      return true;
    }
    return false;
  }
  void numbers(const char* k, std::vector<double>& out) {
    if (const json* v = find(k)) {
      if (!v->is_array()) throw ConfigError(field(k) + ": expected an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(field(k) + ": expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }
  // Enumerated string value; parser errors are reported against the field.
  template <typename Parse>
  void choice(const char* k, Parse&& parse) {
    std::string v;
    if (!text(k, v)) return;
    try {
      parse(v);
    } catch (const Error& e) {
      const std::string msg = e.what(), f = field(k);
      throw ConfigError(msg.rfind(f, 0) == 0 ? msg : f + ": " + msg);
    }
  }
  std::optional<Section> sub(const char* k) {
    if (const json* v = find(k)) return Section(*v, field(k));
    return std::nullopt;
  }
  void done() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(field(k) + ": unknown key");
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
auto as_config_error(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    const std::string w = e.what();
    throw ConfigError(w.starts_with(field) ? w : field + ": " + w);
  }
}

std::string_view fantasy_mode_name(FantasyMode m) {
  return m == FantasyMode::kGaussHermite ? "gauss-hermite" : "monte-carlo";
}

FantasyMode parse_fantasy_mode(const std::string& s) {
  if (s == "gauss-hermite") return FantasyMode::kGaussHermite;
  if (s == "monte-carlo") return FantasyMode::kMonteCarlo;
  throw ConfigError("acquisition.fantasy_mode: expected 'gauss-hermite' or 'monte-carlo', got '" + s + "'");
}

std::string_view trajectories_name(TrajectoryOutput t) {
  switch (t) {
    case TrajectoryOutput::kAll: return "all";
    case TrajectoryOutput::kBest: return "best";
    case TrajectoryOutput::kNone: return "none";
  }
  return "?";
}

TrajectoryOutput parse_trajectories(const std::string& s) {
  if (s == "all") return TrajectoryOutput::kAll;
  if (s == "best") return TrajectoryOutput::kBest;
  if (s == "none") return TrajectoryOutput::kNone;
  throw ConfigError("output.trajectories: expected 'all', 'best' or 'none', got '" + s + "'");
}

// ------------------------------------------------------------ json forms ---

ojson theta_json(const ParamVector& th) {
  ojson j;
  const auto a = th.as_array();
  for (std::size_t i = 0; i < kNumParams; ++i) j[std::string(param_name(i))] = a[i];
  return j;
}

ojson vec_json(const Eigen::VectorXd& v) {
  ojson j = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Eigen::VectorXd vec_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw IoError(what + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

ojson design_json(const AdrcDesign& d) {
  return ojson{{"a1", d.a1},       {"a2", d.a2},       {"b", d.b},
               {"p_obs", d.p_obs}, {"p_ctr", d.p_ctr}, {"L", {d.L[0], d.L[1], d.L[2]}},
               {"K", {d.K[0], d.K[1]}}, {"v", d.v}};
}

ojson hyper_json(const GpHyper& h) {
  ojson j{{"family", kernel_family_name(h.kernel.family)},
          {"lengthscales", vec_json(h.kernel.lengthscales)},
          {"signal_std", h.kernel.signal_std},
          {"noise_std", h.noise_std},
          {"prior_mean", h.prior_mean}};
  if (h.kernel.family == KernelFamily::kRationalQuadratic) j["alpha"] = h.kernel.alpha;
  if (h.kernel.family == KernelFamily::kGammaExponential) j["gamma"] = h.kernel.gamma;
  return j;
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson record_json(const IterationRecord& r, const Bounds& bounds, const char* phase) {
  ojson metrics = ojson::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  return ojson{{"schema_version", kSchemaVersion},
               {"iteration", r.iteration},
               {"phase", phase},
               {"theta", theta_json(decode(r.x, bounds))},
               {"x", vec_json(r.x)},
               {"cost", r.cost},
               {"failed", r.failed},
               {"error", r.failed ? ojson(r.error) : ojson(nullptr)},
               {"metrics", metrics},
               {"acquisition", optional_json(r.acquisition)},
               {"acquisition_error", optional_json(r.acquisition_error)},
               {"incumbent", {{"theta", theta_json(decode(r.incumbent, bounds))}, {"x", vec_json(r.incumbent)}}}};
}

IterationRecord record_from_json(const json& j, std::size_t line) {
  const std::string what = "run log line " + std::to_string(line);
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw IoError(what + ": unsupported schema_version");
    IterationRecord r;
    r.iteration = j.at("iteration").get<std::size_t>();
    r.init = j.at("phase").get<std::string>() == "init";
    r.x = vec_from(j.at("x"), what);
    r.cost = j.at("cost").get<double>();
    r.failed = j.at("failed").get<bool>();
    if (j.at("error").is_string()) r.error = j.at("error").get<std::string>();
    for (const auto& [k, v] : j.at("metrics").items())
      r.metrics.emplace_back(k, v.is_number() ? v.get<double>() : std::nan(""));
    if (j.at("acquisition").is_number()) r.acquisition = j.at("acquisition").get<double>();
    if (j.at("acquisition_error").is_number())
      r.acquisition_error = j.at("acquisition_error").get<double>();
    r.incumbent = vec_from(j.at("incumbent").at("x"), what);
    return r;
  } catch (const json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

// ------------------------------------------------------------- artifacts ---

std::string index_name(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, i, ext);
  return buf;
}

void prepare_output_dir(const fs::path& out, const CampaignConfig& cfg) {
  fs::create_directories(out);
  for (const char* f : {"run_log.jsonl", "timing.jsonl", "report.json", "cost_vs_iteration.csv",
                        "cost_vs_iteration.svg", "freq_response.csv", "freq_response.svg"})
    fs::remove(out / f);
  for (const char* d : {"trajectories", "pmin", "freq_response"}) fs::remove_all(out / d);
  CampaignConfig snapshot = cfg;
  snapshot.output_dir.clear();
  artifacts::write_text(out / "config.json", dump_config(snapshot));
}

Metrics metrics_of(const Evaluation& ev) {
  if (ev.functional == Functional::kHeur) {
    double unreached = 0.0;
    for (const auto& s : ev.heur.steps) unreached += s.reached ? 0.0 : 1.0;
    return {{"mean_t90", ev.heur.mean_t90},
            {"mean_overshoot", ev.heur.mean_overshoot},
            {"unreached_steps", unreached}};
  }
  return {{"s_inf", ev.norm.s_inf},
          {"t_2", ev.norm.t_2},
          {"f_s", ev.norm.f_s},
          {"dropped_bins", static_cast<double>(ev.response.dropped.size())}};
}

void write_freq_response(const fs::path& csv, const FrequencyResponse& fr) {
  std::ostringstream os;
  os << "f,mag_s,mag_t\n";
  for (std::size_t k = 0; k < fr.freq.size(); ++k)
    os << artifacts::fmt(fr.freq[k]) << ',' << artifacts::fmt(fr.mag_s[k]) << ','
       << artifacts::fmt(fr.mag_t[k]) << '\n';
  artifacts::write_text(csv, os.str());
}

void write_eval_artifacts(const fs::path& out, const CampaignConfig& cfg, std::size_t i,
                          std::uint64_t seed, const ParamVector& theta, const Evaluation& ev) {
  artifacts::write_trajectory_csv(out / "trajectories" / index_name("eval", i, "csv"), ev.trajectory);
  const ojson meta{{"schema_version", kSchemaVersion},
                   {"iteration", i},
                   {"functional", functional_name(cfg.functional)},
                   {"seed", seed},
                   {"theta", theta_json(theta)},
                   {"design", design_json(ev.design)},
                   {"sample_time", kSampleTime},
                   {"columns", {"t", "r", "y", "u", "d", "x1"}},
                   {"units", {"s", "deg", "deg", "1", "deg/s^2", "deg"}},
                   {"cost", ev.cost}};
  artifacts::write_text(out / "trajectories" / index_name("eval", i, "json"), meta.dump(2) + "\n");
  if (ev.functional == Functional::kNorm)
    write_freq_response(out / "freq_response" / index_name("eval", i, "csv"), ev.response);
}

void write_pmin(const fs::path& out, std::size_t i, const PminGrid& g, const Bounds& bounds) {
  std::ostringstream os;
  os << "t_set,t_obs,p1,p2,mass\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto th = decode(g.points[k], bounds).as_array();
    for (double v : th) os << artifacts::fmt(v) << ',';
    os << artifacts::fmt(g.mass[static_cast<Eigen::Index>(k)]) << '\n';
  }
  artifacts::write_text(out / "pmin" / index_name("iter", i, "csv"), os.str());
}

struct LoggedCost {
  std::size_t iteration;
  double cost;
  bool failed;
};

void write_cost_plot(const fs::path& out, const std::vector<LoggedCost>& rows) {
  std::ostringstream os;
  os << "iteration,cost,best_so_far,failed\n";
  artifacts::Series cost{"observed cost", {}, {}}, best{"best so far", {}, {}};
  double b = INFINITY;
  for (const auto& r : rows) {
    if (!r.failed) b = std::min(b, r.cost);
    os << r.iteration << ',' << artifacts::fmt(r.cost) << ',' << artifacts::fmt(b) << ','
       << (r.failed ? 1 : 0) << '\n';
    cost.x.push_back(static_cast<double>(r.iteration));
    cost.y.push_back(r.cost);
    best.x.push_back(static_cast<double>(r.iteration));
    best.y.push_back(b);
  }
  artifacts::write_text(out / "cost_vs_iteration.csv", os.str());
  artifacts::write_svg_plot(out / "cost_vs_iteration.svg", {"Cost per evaluation", "evaluation", "J", false},
                            {cost, best});
}

double impute_simple(const std::vector<IterationRecord>& history) {
  std::vector<double> ok;
  for (const auto& r : history)
    if (!r.failed) ok.push_back(r.cost);
  if (ok.empty()) return 3.0;
  double m = 0.0;
  for (double c : ok) m += c;
  m /= static_cast<double>(ok.size());
  double s = 0.0;
  for (double c : ok) s += (c - m) * (c - m);
  const double sd = ok.size() > 1 ? std::sqrt(s / static_cast<double>(ok.size() - 1)) : 1.0;
  return *std::max_element(ok.begin(), ok.end()) + 3.0 * sd;
}

const IterationRecord* best_record(const std::vector<IterationRecord>& h) {
  const IterationRecord* best = nullptr;
  for (const auto& r : h)
    if (!r.failed && (best == nullptr || r.cost < best->cost)) best = &r;
  return best;
}

// Re-runs the best observed evaluation for its trajectory and plots.
void write_best_artifacts(const fs::path& out, const CampaignConfig& cfg,
                          const std::vector<IterationRecord>& history) {
  const IterationRecord* best = best_record(history);
  if (best == nullptr) return;
  const ParamVector th = decode(best->x, cfg.bounds);
  const std::uint64_t s = derive_seed(cfg.seed, kStreamEval, best->iteration);
  const Evaluation ev = evaluate(th, cfg.functional, cfg.experiment, s, cfg.bounds);
  if (cfg.trajectories != TrajectoryOutput::kNone)
    write_eval_artifacts(out, cfg, best->iteration, s, th, ev);
  if (cfg.functional == Functional::kNorm) {
    write_freq_response(out / "freq_response.csv", ev.response);
    artifacts::write_svg_plot(out / "freq_response.svg",
                              {"Estimated |S| and |T| of the best evaluation", "f [Hz]", "magnitude", true},
                              {{"|S|", ev.response.freq, ev.response.mag_s},
                               {"|T|", ev.response.freq, ev.response.mag_t}});
  }
}

ojson common_report(const CampaignConfig& cfg, const std::vector<IterationRecord>& history) {
  std::size_t failed = 0;
  for (const auto& r : history) failed += r.failed ? 1 : 0;
  ojson rep{{"schema_version", kSchemaVersion},
            {"functional", functional_name(cfg.functional)},
            {"seed", cfg.seed},
            {"evaluations", history.size()},
            {"failed", failed}};
  if (const IterationRecord* best = best_record(history))
    rep["best_observed"] = {{"iteration", best->iteration},
                            {"theta", theta_json(decode(best->x, cfg.bounds))},
                            {"cost", best->cost}};
  else
    rep["best_observed"] = nullptr;
  return rep;
}

std::vector<LoggedCost> costs_of(const std::vector<IterationRecord>& h) {
  std::vector<LoggedCost> rows;
  for (const auto& r : h) rows.push_back({r.iteration, r.cost, r.failed});
  return rows;
}

}  // namespace

// ------------------------------------------------------------------ config --

void CampaignConfig::validate() const {
  if (budget < 1) throw ConfigError("budget: must be at least 1");
  if (init < 1) throw ConfigError("init: must be at least 1");
  as_config_error("bounds", [&] { bounds.validate(); });
  const Bounds safe = Bounds::safety();
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const std::string f = "bounds." + std::string(param_name(i));
    if (bounds.scale[i] != safe.scale[i]) throw ConfigError(f + ": scale cannot be changed");
    const double tol = 1e-12 * std::abs(safe.upper[i] - safe.lower[i]);
    if (bounds.lower[i] < safe.lower[i] - tol || bounds.upper[i] > safe.upper[i] + tol) {
      std::ostringstream os;
      os << f << ": [" << bounds.lower[i] << ", " << bounds.upper[i] << "] exceeds the safety range ["
         << safe.lower[i] << ", " << safe.upper[i] << "]";
      throw ConfigError(os.str());
    }
  }
  as_config_error("experiment", [&] { experiment.validate(); });
  acquisition.validate();
  if (hyper.restarts < 1) throw ConfigError("hyper.restarts: must be at least 1");
  if (hyper.mode == HyperMode::kFixed) {
    if (hyper.profile.empty()) throw ConfigError("hyper.profile: required when hyper.mode is 'fixed'");
    as_config_error("hyper.profile", [&] { return hyper_profile(hyper.profile, bounds); });
  }
}

CampaignConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // e.what() reads "[json.exception.parse_error.N] parse error at line L, column C: ..."
    const std::string w = e.what();
    const auto p = w.find("] ");
    throw ConfigError(p == std::string::npos ? w : w.substr(p + 2));
  }

  CampaignConfig c;
  Section s(root, "");
  int version = kSchemaVersion;
  s.integer("schema_version", version);
  if (version != kSchemaVersion)
    throw ConfigError("schema_version: unsupported version " + std::to_string(version));
  s.seed("seed", c.seed);
  std::string str;
  if (s.text("functional", str)) c.functional = as_config_error("functional", [&] { return parse_functional(str); });
  s.count("budget", c.budget);
  s.count("init", c.init);

  if (auto b = s.sub("bounds")) {
    for (std::size_t i = 0; i < kNumParams; ++i) {
      std::vector<double> pair{c.bounds.lower[i], c.bounds.upper[i]};
      const std::string name(param_name(i));
      b->numbers(name.c_str(), pair);
      if (pair.size() != 2) throw ConfigError(b->field(name) + ": expected [lower, upper]");
      c.bounds.lower[i] = pair[0];
      c.bounds.upper[i] = pair[1];
    }
    b->done();
  }

  if (auto p = s.sub("plant")) {
    auto& pl = c.experiment.plant;
    p->number("b", pl.b);
    p->number("c", pl.c);
    p->number("k_lo", pl.spring.k_lo);
    p->number("k_hi", pl.spring.k_hi);
    p->number("theta_lh", pl.spring.theta_lh);
    p->number("theta_sw", pl.spring.theta_sw);
    p->number("coulomb", pl.friction.coulomb);
    p->number("v_eps", pl.friction.v_eps);
    p->number("theta_min", pl.theta_min);
    p->number("theta_max", pl.theta_max);
    p->done();
  }

  if (auto e = s.sub("experiment")) {
    auto& ex = c.experiment;
    e->number("nominal_b", ex.nominal_b);
    e->number("noise_std", ex.noise_std);
    e->integer("substeps", ex.substeps);
    e->number("filter_cutoff", ex.filter_cutoff);
    if (auto st = e->sub("steps")) {
      st->number("initial_level", ex.steps.initial_level);
      st->numbers("levels", ex.steps.levels);
      st->number("hold", ex.steps.hold);
      st->done();
    }
    if (auto ch = e->sub("chirp")) {
      ch->number("f_lo", ex.chirp.f_lo);
      ch->number("f_hi", ex.chirp.f_hi);
      ch->number("amplitude", ex.chirp.amplitude);
      ch->number("center", ex.chirp.center);
      ch->number("duration", ex.chirp.duration);
      ch->number("preroll", ex.chirp.preroll);
      if (ch->text("law", str)) {
        if (str == "log") ex.chirp.law = SweepLaw::kLogarithmic;
        else if (str == "linear") ex.chirp.law = SweepLaw::kLinear;
        else throw ConfigError(ch->field("law") + ": expected 'log' or 'linear'");
      }
      ch->done();
    }
    e->numbers("hold_setpoints", ex.hold_setpoints);
    e->number("hold_duration", ex.hold_duration);
    e->number("hold_settle", ex.hold_settle);
    if (auto d = e->sub("disturbance")) {
      d->number("setpoint", ex.disturbance_setpoint);
      d->number("onset", ex.disturbance_onset);
      d->number("magnitude", ex.disturbance_magnitude);
      d->number("duration", ex.disturbance_duration);
      d->done();
    }
    e->done();
  }

  if (auto a = s.sub("acquisition")) {
    auto& ac = c.acquisition;
    a->choice("kind", [&](const std::string& v) { ac.kind = parse_acquisition_kind(v); });
    a->count("n_representers", ac.n_representers);
    a->count("n_function_samples", ac.n_function_samples);
    a->count("n_starts", ac.n_starts);
    a->count("n_fantasies", ac.n_fantasies);
    a->choice("fantasy_mode", [&](const std::string& v) { ac.fantasy_mode = parse_fantasy_mode(v); });
    a->integer("local_max_evals", ac.local_max_evals);
    a->done();
  }

  if (auto h = s.sub("hyper")) {
    h->choice("mode", [&](const std::string& v) { c.hyper.mode = parse_hyper_mode(v); });
    h->text("profile", c.hyper.profile);
    h->choice("family", [&](const std::string& v) { c.hyper.family = parse_kernel_family(v); });
    h->integer("restarts", c.hyper.restarts);
    if (h->text("prior_mean", str)) {
      if (str == "zero") c.hyper.prior_mean = PriorMeanMode::kZero;
      else if (str == "empirical") c.hyper.prior_mean = PriorMeanMode::kEmpirical;
      else throw ConfigError(h->field("prior_mean") + ": expected 'zero' or 'empirical'");
    }
    h->done();
  }

  if (auto o = s.sub("output")) {
    o->text("dir", c.output_dir);
    o->choice("trajectories", [&](const std::string& v) { c.trajectories = parse_trajectories(v); });
    o->done();
  }
  s.done();
  c.validate();
  return c;
}

CampaignConfig load_config(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str());
}

std::string dump_config(const CampaignConfig& c) {
  ojson bounds;
  for (std::size_t i = 0; i < kNumParams; ++i)
    bounds[std::string(param_name(i))] = {c.bounds.lower[i], c.bounds.upper[i]};
  const auto& ex = c.experiment;
  const auto& pl = ex.plant;
  ojson j{
      {"schema_version", kSchemaVersion},
      {"seed", c.seed},
      {"functional", functional_name(c.functional)},
      {"budget", c.budget},
      {"init", c.init},
      {"bounds", bounds},
      {"plant",
       {{"b", pl.b}, {"c", pl.c}, {"k_lo", pl.spring.k_lo}, {"k_hi", pl.spring.k_hi},
        {"theta_lh", pl.spring.theta_lh}, {"theta_sw", pl.spring.theta_sw}, {"coulomb", pl.friction.coulomb},
        {"v_eps", pl.friction.v_eps}, {"theta_min", pl.theta_min}, {"theta_max", pl.theta_max}}},
      {"experiment",
       {{"nominal_b", ex.nominal_b},
        {"noise_std", ex.noise_std},
        {"substeps", ex.substeps},
        {"filter_cutoff", ex.filter_cutoff},
        {"steps", {{"initial_level", ex.steps.initial_level}, {"levels", ex.steps.levels}, {"hold", ex.steps.hold}}},
        {"chirp",
         {{"f_lo", ex.chirp.f_lo}, {"f_hi", ex.chirp.f_hi}, {"amplitude", ex.chirp.amplitude},
          {"center", ex.chirp.center}, {"duration", ex.chirp.duration}, {"preroll", ex.chirp.preroll},
          {"law", ex.chirp.law == SweepLaw::kLogarithmic ? "log" : "linear"}}},
        {"hold_setpoints", ex.hold_setpoints},
        {"hold_duration", ex.hold_duration},
        {"hold_settle", ex.hold_settle},
        {"disturbance",
         {{"setpoint", ex.disturbance_setpoint}, {"onset", ex.disturbance_onset},
          {"magnitude", ex.disturbance_magnitude}, {"duration", ex.disturbance_duration}}}}},
      {"acquisition",
       {{"kind", acquisition_kind_name(c.acquisition.kind)},
        {"n_representers", c.acquisition.n_representers},
        {"n_function_samples", c.acquisition.n_function_samples},
        {"n_starts", c.acquisition.n_starts},
        {"n_fantasies", c.acquisition.n_fantasies},
        {"fantasy_mode", fantasy_mode_name(c.acquisition.fantasy_mode)},
        {"local_max_evals", c.acquisition.local_max_evals}}},
      {"hyper",
       {{"mode", hyper_mode_name(c.hyper.mode)},
        {"profile", c.hyper.profile},
        {"family", kernel_family_name(c.hyper.family)},
        {"restarts", c.hyper.restarts},
        {"prior_mean", c.hyper.prior_mean == PriorMeanMode::kZero ? "zero" : "empirical"}}},
      {"output", {{"dir", c.output_dir}, {"trajectories", trajectories_name(c.trajectories)}}}};
  return j.dump(2) + "\n";
}

fs::path resolve_output_dir(const CampaignConfig& cfg, const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("BOTUNE_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "botune_out";
}

TuningProblem make_problem(const CampaignConfig& cfg, Objective objective) {
  TuningProblem p;
  p.objective = std::move(objective);
  p.dim = kNumParams;
  p.budget = cfg.budget;
  p.init_design = cfg.init;
  p.hyper.mode = cfg.hyper.mode;
  p.hyper.family = cfg.hyper.family;
  p.hyper.restarts = cfg.hyper.restarts;
  p.hyper.prior_mean = cfg.hyper.prior_mean;
  if (cfg.hyper.mode == HyperMode::kFixed) {
    p.hyper.fixed = hyper_profile(cfg.hyper.profile, cfg.bounds);
    p.hyper.family = p.hyper.fixed.kernel.family;
  }
  return p;
}

// ---------------------------------------------------------------- campaign --

Campaign::Campaign(CampaignConfig cfg, fs::path out) : cfg_(std::move(cfg)), out_(std::move(out)) {
  cfg_.validate();
  tuner_ = std::make_unique<Tuner>(
      make_problem(cfg_, [this](const Point& x, std::size_t i) { return run_objective(x, i); }),
      cfg_.acquisition, cfg_.seed);
}

std::unique_ptr<Campaign> Campaign::create(CampaignConfig cfg, const fs::path& out) {
  std::unique_ptr<Campaign> c(new Campaign(std::move(cfg), out));
  prepare_output_dir(out, c->cfg_);
  return c;
}

std::unique_ptr<Campaign> Campaign::resume(const fs::path& out) {
  const fs::path log = out / "run_log.jsonl";
  if (!fs::is_regular_file(out / "config.json")) throw IoError("no campaign at " + out.string());
  std::unique_ptr<Campaign> c(new Campaign(load_config(out / "config.json"), out));
  std::ifstream f(log, std::ios::binary);
  if (!f) throw IoError("cannot read " + log.string());
  std::ostringstream os;
  os << f.rdbuf();
  f.close();
  const std::string text = os.str();

  // A line without its newline was cut off mid-write; it is dropped and
  // re-evaluated.
  std::size_t pos = 0, line = 1, good = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    const json j = json::parse(text.substr(pos, nl - pos), nullptr, false);
    if (j.is_discarded()) throw IoError(log.string() + ": line " + std::to_string(line) + " is not valid JSON");
    if (j.value("phase", "") == "baseline") throw StateError("baseline logs cannot be resumed");
    c->tuner_->replay(record_from_json(j, line));
    pos = nl + 1;
    good = pos;
    ++line;
  }
  if (good != text.size()) artifacts::write_text(log, text.substr(0, good));
  return c;
}

EvalOutcome Campaign::run_objective(const Point& x, std::size_t index) {
  last_.reset();
  const ParamVector th = decode(x, cfg_.bounds);
  cfg_.bounds.check(th);
  Evaluation ev = evaluate(th, cfg_.functional, cfg_.experiment, derive_seed(cfg_.seed, kStreamEval, index),
                           cfg_.bounds);
  EvalOutcome out;
  out.cost = ev.cost;
  out.metrics = metrics_of(ev);
  last_ = std::move(ev);
  return out;
}

const IterationRecord& Campaign::step() {
  const IterationRecord& rec = tuner_->step();
  last_line_ = record_json(rec, cfg_.bounds, rec.init ? "init" : "bo").dump();
  artifacts::append_line(out_ / "run_log.jsonl", last_line_);
  artifacts::append_line(out_ / "timing.jsonl",
                         ojson{{"iteration", rec.iteration}, {"wall_time", rec.wall_time}}.dump());
  if (last_ && !rec.failed && cfg_.trajectories == TrajectoryOutput::kAll)
    write_eval_artifacts(out_, cfg_, rec.iteration, derive_seed(cfg_.seed, kStreamEval, rec.iteration),
                         decode(rec.x, cfg_.bounds), *last_);
  if (rec.belief) write_pmin(out_, rec.iteration, *rec.belief, cfg_.bounds);
  last_.reset();
  return rec;
}

std::string Campaign::finish() {
  if (!complete()) throw StateError("campaign is not complete");
  const TuningReport rep = tuner_->report();
  ojson j = common_report(cfg_, rep.history);
  j["command"] = "tune";
  j["acquisition"] = acquisition_kind_name(cfg_.acquisition.kind);
  j["init"] = cfg_.init;
  j["budget"] = cfg_.budget;

  const ParamVector inc = decode(rep.incumbent, cfg_.bounds);
  ojson incumbent{{"theta", theta_json(inc)}, {"x", vec_json(rep.incumbent)},
                  {"posterior_mean", optional_json(rep.incumbent_mean)}};
  try {
    const auto ev = evaluate(inc, cfg_.functional, cfg_.experiment, derive_seed(cfg_.seed, kStreamVerify, 0),
                             cfg_.bounds);
    incumbent["verified_cost"] = ev.cost;
    incumbent["design"] = design_json(ev.design);
  } catch (const Error& e) {
    incumbent["verified_cost"] = nullptr;
    incumbent["verify_error"] = e.what();
  }
  j["incumbent"] = incumbent;
  j["hyper"] = rep.hyper ? hyper_json(*rep.hyper) : ojson(nullptr);

  const std::string text = j.dump(2) + "\n";
  artifacts::write_text(out_ / "report.json", text);
  write_cost_plot(out_, costs_of(rep.history));
  write_best_artifacts(out_, cfg_, rep.history);
  return text;
}

// ---------------------------------------------------------------- baseline --

BaselineMethod parse_baseline_method(std::string_view name) {
  if (name == "random") return BaselineMethod::kRandom;
  if (name == "grid") return BaselineMethod::kGrid;
  throw ConfigError("baseline method must be 'random' or 'grid', got '" + std::string(name) + "'");
}

std::string run_baseline(const CampaignConfig& cfg, const fs::path& out, BaselineMethod method,
                         std::size_t points_per_dim, std::optional<std::size_t> n_evals) {
  cfg.validate();
  std::vector<Point> pts;
  if (method == BaselineMethod::kRandom) {
    const std::size_t n = n_evals.value_or(cfg.init + cfg.budget);
    if (n < 1) throw InvalidArgument("baseline needs at least one evaluation");
    pts = sample_unit_cube(kNumParams, n, cfg.seed);
  } else {
    if (points_per_dim < 1) throw InvalidArgument("grid baseline needs at least one point per dimension");
    std::size_t n = 1;
    for (std::size_t d = 0; d < kNumParams; ++d) n *= points_per_dim;
    for (std::size_t k = 0; k < n; ++k) {
      Point x(kNumParams);
      std::size_t rem = k;
      for (std::size_t d = kNumParams; d-- > 0;) {
        x[static_cast<Eigen::Index>(d)] =
            (static_cast<double>(rem % points_per_dim) + 0.5) / static_cast<double>(points_per_dim);
        rem /= points_per_dim;
      }
      pts.push_back(x);
    }
    if (n_evals && *n_evals < pts.size()) pts.resize(*n_evals);
  }

  prepare_output_dir(out, cfg);
  std::vector<IterationRecord> history;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    IterationRecord rec;
    rec.iteration = i;
    rec.init = false;
    rec.x = pts[i];
    const ParamVector th = decode(rec.x, cfg.bounds);
    const std::uint64_t s = derive_seed(cfg.seed, kStreamEval, i);
    try {
      cfg.bounds.check(th);
      const Evaluation ev = evaluate(th, cfg.functional, cfg.experiment, s, cfg.bounds);
      rec.cost = ev.cost;
      rec.metrics = metrics_of(ev);
      if (cfg.trajectories == TrajectoryOutput::kAll) write_eval_artifacts(out, cfg, i, s, th, ev);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
      rec.cost = impute_simple(history);
    }
    history.push_back(rec);
    history.back().incumbent = best_record(history) ? best_record(history)->x : history.front().x;
    artifacts::append_line(out / "run_log.jsonl", record_json(history.back(), cfg.bounds, "baseline").dump());
  }

  ojson j = common_report(cfg, history);
  j["command"] = "baseline";
  j["method"] = method == BaselineMethod::kRandom ? "random" : "grid";
  if (method == BaselineMethod::kGrid) j["points_per_dim"] = points_per_dim;
  const std::string text = j.dump(2) + "\n";
  artifacts::write_text(out / "report.json", text);
  write_cost_plot(out, costs_of(history));
  write_best_artifacts(out, cfg, history);
  return text;
}

// ---------------------------------------------------------------- evaluate --

std::string evaluate_point(const CampaignConfig& cfg, const ParamVector& theta, bool secondary) {
  cfg.validate();
  cfg.bounds.check(theta);
  const std::uint64_t s = derive_seed(cfg.seed, kStreamEval, 0);
  const Evaluation ev = evaluate(theta, cfg.functional, cfg.experiment, s, cfg.bounds);
  ojson j{{"schema_version", kSchemaVersion},
          {"theta", theta_json(theta)},
          {"functional", functional_name(cfg.functional)},
          {"seed", s},
          {"cost", ev.cost},
          {"design", design_json(ev.design)}};
  if (ev.functional == Functional::kHeur) {
    ojson steps = ojson::array();
    double from = cfg.experiment.steps.initial_level;
    for (std::size_t i = 0; i < ev.heur.steps.size(); ++i) {
      const double to = cfg.experiment.steps.levels[i];
      steps.push_back({{"step", i}, {"from", from}, {"to", to}, {"t90", ev.heur.steps[i].t90},
                       {"overshoot", ev.heur.steps[i].overshoot}, {"reached", ev.heur.steps[i].reached}});
      from = to;
    }
    j["breakdown"] = {{"mean_t90", ev.heur.mean_t90}, {"mean_overshoot", ev.heur.mean_overshoot}, {"steps", steps}};
  } else {
    j["breakdown"] = {{"s_inf", ev.norm.s_inf}, {"t_2", ev.norm.t_2}, {"f_s", ev.norm.f_s},
                      {"bins", ev.response.freq.size()}, {"dropped_bins", ev.response.dropped.size()}};
  }
  if (secondary) {
    const auto m = evaluate_secondary(theta, cfg.experiment, s, cfg.bounds);
    j["secondary"] = {{"robustness", m.robustness}, {"noise", m.noise}, {"t_dist", m.t_dist}, {"h_dist", m.h_dist}};
  }
  return j.dump(2) + "\n";
}

// ------------------------------------------------------------------ report --

std::string summarize_run(const fs::path& out) {
  const fs::path log = out / "run_log.jsonl";
  std::ifstream f(log, std::ios::binary);
  if (!f) throw IoError("cannot read " + log.string());
  std::vector<IterationRecord> history;
  std::string line;
  std::size_t n = 0;
  while (std::getline(f, line)) {
    ++n;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw IoError(log.string() + ": line " + std::to_string(n) + " is not valid JSON");
    history.push_back(record_from_json(j, n));
  }
  write_cost_plot(out, costs_of(history));

  if (fs::exists(out / "report.json")) {
    std::ifstream r(out / "report.json", std::ios::binary);
    std::ostringstream os;
    os << r.rdbuf();
    return os.str();
  }
  const CampaignConfig cfg = load_config(out / "config.json");
  ojson j = common_report(cfg, history);
  j["command"] = "partial";
  if (!history.empty())
    j["incumbent"] = {{"theta", theta_json(decode(history.back().incumbent, cfg.bounds))},
                      {"x", vec_json(history.back().incumbent)}};
  return j.dump(2) + "\n";
}

}  // namespace botune
