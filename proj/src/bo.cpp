#include "botune/bo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "botune/error.hpp"

namespace botune {

namespace {

constexpr std::uint64_t kStreamPropose = 1;
constexpr std::uint64_t kStreamFit = 2;
constexpr std::uint64_t kStreamIncumbent = 3;

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

std::string_view hyper_mode_name(HyperMode m) {
  switch (m) {
    case HyperMode::kFixed: return "fixed";
    case HyperMode::kFitOnce: return "fit-once";
    case HyperMode::kRefit: return "refit";
  }
  return "?";
}

HyperMode parse_hyper_mode(std::string_view name) {
  if (name == "fixed") return HyperMode::kFixed;
  if (name == "fit-once") return HyperMode::kFitOnce;
  if (name == "refit") return HyperMode::kRefit;
  throw ConfigError("hyper.mode must be 'fixed', 'fit-once' or 'refit', got '" + std::string(name) + "'");
}

void TuningProblem::validate() const {
  if (!objective) throw ConfigError("tuning problem has no objective");
  if (dim < 1) throw ConfigError("tuning problem dimension must be at least 1");
  if (budget < 1) throw ConfigError("budget must be at least 1");
  if (init_design < 1) throw ConfigError("init must be at least 1");
  if (hyper.mode != HyperMode::kFixed && init_design < 2)
    throw ConfigError("init must be at least 2 when hyperparameters are fitted");
  if (hyper.restarts < 1) throw ConfigError("hyper.restarts must be at least 1");
  if (hyper.mode == HyperMode::kFixed) {
    hyper.fixed.kernel.validate();
    if (static_cast<std::size_t>(hyper.fixed.kernel.lengthscales.size()) != dim)
      throw ConfigError("fixed hyperparameters have the wrong number of lengthscales");
    if (!(hyper.fixed.noise_std > 0.0)) throw ConfigError("fixed noise std must be positive");
  }
}

Tuner::Tuner(TuningProblem problem, AcquisitionConfig acq, std::uint64_t seed)
    : problem_(std::move(problem)), acq_(acq), seed_(seed) {
  problem_.validate();
  acq_.validate();
  init_points_ = sample_unit_cube(problem_.dim, problem_.init_design, seed_);
}

GpHyper Tuner::hyper_for_current_data() const {
  const auto& pol = problem_.hyper;
  GpHyper h;
  if (pol.mode == HyperMode::kFixed) {
    h = pol.fixed;
  } else {
    const bool once = pol.mode == HyperMode::kFitOnce;
    if (once && frozen_) {
      h = *frozen_;
    } else {
      Dataset fit_data = data_;
      if (once && fit_data.size() > problem_.init_design) {
        fit_data.inputs.resize(problem_.init_design);
        fit_data.targets.resize(problem_.init_design);
      }
      const HyperBox box = pol.box ? *pol.box : HyperBox::for_targets(fit_data.targets);
      const double m0 = pol.prior_mean == PriorMeanMode::kEmpirical ? mean_of(fit_data.targets) : 0.0;
      h = fit_hyperparameters(fit_data, pol.family, box, pol.restarts,
                              derive_seed(seed_, kStreamFit, fit_data.size()), m0)
              .hyper;
      if (once) frozen_ = h;
    }
  }
  h.prior_mean = pol.prior_mean == PriorMeanMode::kEmpirical ? mean_of(data_.targets) : 0.0;
  return h;
}

const GpPosterior& Tuner::posterior() const {
  if (data_.empty()) throw StateError("no data recorded yet");
  if (!cache_ || cache_->first != data_.size())
    cache_.emplace(data_.size(), GpPosterior(data_, hyper_for_current_data()));
  return cache_->second;
}

double Tuner::impute_failure() const {
  std::vector<double> ok;
  for (const auto& r : history_)
    if (!r.failed) ok.push_back(r.cost);
  double sd = 1.0;
  if (problem_.hyper.mode == HyperMode::kFixed) {
    sd = problem_.hyper.fixed.kernel.signal_std;
  } else if (!data_.empty() && data_.size() >= problem_.init_design) {
    sd = posterior().hyper().kernel.signal_std;
  } else if (ok.size() >= 2) {
    const double m = mean_of(ok);
    double s = 0.0;
    for (double c : ok) s += (c - m) * (c - m);
    sd = std::sqrt(s / static_cast<double>(ok.size() - 1));
  }
  const double worst = ok.empty() ? 0.0 : *std::max_element(ok.begin(), ok.end());
  return worst + 3.0 * sd;
}

Point Tuner::incumbent_for_current_data() const {
  const bool bo_phase = history_.size() > problem_.init_design;
  if (acq_.kind == AcquisitionKind::kES && bo_phase) {
    LocalSearchOptions local;
    local.max_evals = 400;
    return estimate_incumbent(posterior(), acq_.n_starts,
                              derive_seed(seed_, kStreamIncumbent, history_.size()), local);
  }
  const IterationRecord* best = nullptr;
  for (const auto& r : history_)
    if (!r.failed && (best == nullptr || r.cost < best->cost)) best = &r;
  if (best == nullptr) best = &history_.front();
  return best->x;
}

const IterationRecord& Tuner::step() {
  if (complete()) throw StateError("tuning budget is already spent");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t i = history_.size();
  IterationRecord rec;
  rec.iteration = i;
  rec.init = i < problem_.init_design;

  if (rec.init) {
    rec.x = init_points_[i];
  } else {
    const GpPosterior& post = posterior();
    const std::uint64_t s = derive_seed(seed_, kStreamPropose, i);
    MaximizeOptions mo;
    mo.n_starts = acq_.n_starts;
    mo.seed = s;
    mo.local.max_evals = acq_.local_max_evals;
    mo.tie_break = [&post](const Point& x) { return post.mean(x); };
    MaximizeResult res;
    if (acq_.kind == AcquisitionKind::kEI) {
      const double eta = *std::min_element(data_.targets.begin(), data_.targets.end());
      res = maximize_acquisition([&](const Point& x) { return ei(post, x, eta); }, problem_.dim, mo);
    } else {
      const PminGrid grid = build_representer_grid(post, acq_.n_representers, s);
      AcquisitionConfig cfg = acq_;
      cfg.seed = s;
      const EntropySearch es(post, grid, cfg);
      mo.extra_candidates = grid.points;
      res = maximize_acquisition([&](const Point& x) { return es.expected_change(x).value; },
                                 problem_.dim, mo);
      rec.acquisition_error = es.expected_change(res.x).mc_error;
      rec.belief = es.belief();
    }
    rec.x = res.x;
    rec.acquisition = res.value;
  }

  EvalOutcome out;
  try {
    out = problem_.objective(rec.x, i);
  } catch (const std::exception& e) {
    out = {};
    out.failed = true;
    out.error = e.what();
  }
  if (!out.failed && !std::isfinite(out.cost)) {
    out.failed = true;
    out.error = "objective returned a non-finite cost";
  }
  rec.failed = out.failed;
  rec.error = out.error;
  rec.metrics = std::move(out.metrics);
  rec.cost = out.failed ? impute_failure() : out.cost;

  data_.add(rec.x, rec.cost);
  history_.push_back(std::move(rec));
  history_.back().incumbent = incumbent_for_current_data();
  history_.back().wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return history_.back();
}

void Tuner::replay(IterationRecord rec) {
  if (complete()) throw StateError("replayed record beyond the budget");
  if (rec.iteration != history_.size())
    throw StateError("replayed record " + std::to_string(rec.iteration) + " out of order, expected " +
                     std::to_string(history_.size()));
  if (static_cast<std::size_t>(rec.x.size()) != problem_.dim)
    throw StateError("replayed record has the wrong dimension");
  if (rec.iteration < problem_.init_design &&
      (rec.x - init_points_[rec.iteration]).cwiseAbs().maxCoeff() > 1e-12)
    throw StateError("replayed record " + std::to_string(rec.iteration) +
                     " does not match the initial design of this seed");
  rec.init = rec.iteration < problem_.init_design;
  data_.add(rec.x, rec.cost);
  history_.push_back(std::move(rec));
}

TuningReport Tuner::report() const {
  TuningReport rep;
  rep.history = history_;
  rep.kind = acq_.kind;
  rep.seed = seed_;
  if (history_.empty()) return rep;
  const IterationRecord* best = nullptr;
  for (const auto& r : history_)
    if (!r.failed && (best == nullptr || r.cost < best->cost)) best = &r;
  if (best == nullptr) best = &history_.front();
  rep.best_observed = best->x;
  rep.best_cost = best->cost;
  rep.incumbent = history_.back().incumbent;
  if (history_.size() > problem_.init_design || problem_.hyper.mode != HyperMode::kFitOnce) {
    const auto& post = posterior();
    rep.incumbent_mean = post.mean(rep.incumbent);
    rep.hyper = post.hyper();
  }
  return rep;
}

TuningReport run(TuningProblem problem, const AcquisitionConfig& acq, std::uint64_t seed,
                 const std::function<void(const IterationRecord&)>& on_record) {
  Tuner t(std::move(problem), acq, seed);
  while (!t.complete()) {
    const auto& rec = t.step();
    if (on_record) on_record(rec);
  }
  return t.report();
}

}  // namespace botune
