#pragma once

// Outer tuning loop: seeded initial design, then propose / evaluate / update
// until the evaluation budget is spent.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "botune/acquisition.hpp"
#include "botune/gp.hpp"

namespace botune {

// splitmix64 over (seed, stream, index); used for every per-iteration seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

using Metrics = std::vector<std::pair<std::string, double>>;

struct EvalOutcome {
  double cost = 0.0;
  bool failed = false;
  std::string error;
  Metrics metrics;
};

// Called with the encoded point and the 0-based evaluation index. May throw;
// any std::exception marks the evaluation failed.
using Objective = std::function<EvalOutcome(const Point& x, std::size_t index)>;

enum class HyperMode {
  kFixed,    // use `fixed` throughout
  kFitOnce,  // maximum likelihood on the initial design, then frozen
  kRefit,    // maximum likelihood before every proposal
};
enum class PriorMeanMode { kZero, kEmpirical };

std::string_view hyper_mode_name(HyperMode m);
HyperMode parse_hyper_mode(std::string_view name);

struct HyperPolicy {
  HyperMode mode = HyperMode::kFitOnce;
  GpHyper fixed;
  KernelFamily family = KernelFamily::kSquaredExponential;
  std::optional<HyperBox> box;  // default: HyperBox::for_targets on the fit data
  int restarts = 5;
  PriorMeanMode prior_mean = PriorMeanMode::kEmpirical;
};

struct TuningProblem {
  Objective objective;
  std::size_t dim = kNumParams;
  std::size_t budget = 10;
  std::size_t init_design = 10;
  HyperPolicy hyper;

  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  bool init = true;  // from the initial design
  Point x;
  double cost = 0.0;  // imputed value when failed
  bool failed = false;
  std::string error;
  Metrics metrics;
  std::optional<double> acquisition;
  std::optional<double> acquisition_error;  // ES Monte-Carlo bound
  Point incumbent;
  double wall_time = 0.0;  // [s] not part of any reproducible artifact
  std::optional<PminGrid> belief;  // ES belief the proposal was made under
};

struct TuningReport {
  std::vector<IterationRecord> history;
  Point incumbent;
  std::optional<double> incumbent_mean;  // posterior mean at the incumbent
  Point best_observed;
  double best_cost = 0.0;
  std::optional<GpHyper> hyper;  // last hyperparameters used
  AcquisitionKind kind = AcquisitionKind::kES;
  std::uint64_t seed = 0;
};

class Tuner {
 public:
  Tuner(TuningProblem problem, AcquisitionConfig acq, std::uint64_t seed);

  bool complete() const { return history_.size() >= total(); }
  std::size_t total() const { return problem_.init_design + problem_.budget; }

  // Proposes, evaluates and records one point. Throws StateError when the
  // budget is spent.
  const IterationRecord& step();

  // Appends a previously logged record without evaluating it. Records must
  // arrive in iteration order.
  void replay(IterationRecord rec);

  const std::vector<IterationRecord>& history() const { return history_; }
  TuningReport report() const;

  // Current posterior over all recorded data. Requires at least one record.
  const GpPosterior& posterior() const;

 private:
  GpHyper hyper_for_current_data() const;
  Point incumbent_for_current_data() const;
  double impute_failure() const;

  TuningProblem problem_;
  AcquisitionConfig acq_;
  std::uint64_t seed_;
  std::vector<Point> init_points_;
  std::vector<IterationRecord> history_;
  Dataset data_;
  mutable std::optional<GpHyper> frozen_;
  mutable std::optional<std::pair<std::size_t, GpPosterior>> cache_;
};

TuningReport run(TuningProblem problem, const AcquisitionConfig& acq, std::uint64_t seed,
                 const std::function<void(const IterationRecord&)>& on_record = {});

}  // namespace botune
