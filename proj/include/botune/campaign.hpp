#pragma once

// Configuration-driven campaigns: config parsing, tuning and baseline runs,
// single evaluations, and the persisted artifacts (JSONL run log, report,
// trajectories, plot data).

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "botune/bo.hpp"
#include "botune/experiment.hpp"

namespace botune {

inline constexpr int kSchemaVersion = 1;

// Seed streams shared by tune and baseline runs so that equal seeds give
// equal initial designs and equal measurement noise.
inline constexpr std::uint64_t kStreamEval = 7;
inline constexpr std::uint64_t kStreamVerify = 8;

enum class TrajectoryOutput { kAll, kBest, kNone };

struct HyperSettings {
  HyperMode mode = HyperMode::kFitOnce;
  std::string profile;  // fixed mode only
  KernelFamily family = KernelFamily::kSquaredExponential;
  int restarts = 5;
  PriorMeanMode prior_mean = PriorMeanMode::kEmpirical;
};

struct CampaignConfig {
  std::uint64_t seed = 0;
  Functional functional = Functional::kHeur;
  std::size_t budget = 10;
  std::size_t init = 10;
  Bounds bounds = Bounds::safety();
  ExperimentConfig experiment;
  AcquisitionConfig acquisition;
  HyperSettings hyper;
  std::string output_dir;  // empty: BOTUNE_OUTPUT_DIR, then "botune_out"
  TrajectoryOutput trajectories = TrajectoryOutput::kBest;

  void validate() const;
};

// Throws ConfigError naming the offending field (or line and column for
// syntax errors). Unknown keys are rejected.
CampaignConfig parse_config(const std::string& text);
CampaignConfig load_config(const std::filesystem::path& path);
// Complete, normalized JSON form; parse_config(dump_config(c)) == c.
std::string dump_config(const CampaignConfig& cfg);

std::filesystem::path resolve_output_dir(const CampaignConfig& cfg, const std::string& override_dir);

TuningProblem make_problem(const CampaignConfig& cfg, Objective objective);

class Campaign {
 public:
  // Starts a fresh campaign in `out`, replacing earlier campaign artifacts.
  static std::unique_ptr<Campaign> create(CampaignConfig cfg, const std::filesystem::path& out);
  // Continues the campaign logged in `out`.
  static std::unique_ptr<Campaign> resume(const std::filesystem::path& out);

  Campaign(const Campaign&) = delete;
  Campaign& operator=(const Campaign&) = delete;

  bool complete() const { return tuner_->complete(); }
  std::size_t done() const { return tuner_->history().size(); }
  std::size_t total() const { return tuner_->total(); }
  const std::filesystem::path& output_dir() const { return out_; }
  const CampaignConfig& config() const { return cfg_; }

  const IterationRecord& step();
  // Run-log line of the latest step.
  const std::string& last_log_line() const { return last_line_; }
  // Writes report.json and the plot files. Requires a complete campaign.
  // Returns the report text.
  std::string finish();

 private:
  Campaign(CampaignConfig cfg, std::filesystem::path out);
  EvalOutcome run_objective(const Point& x, std::size_t index);

  CampaignConfig cfg_;
  std::filesystem::path out_;
  std::unique_ptr<Tuner> tuner_;
  std::optional<Evaluation> last_;
  std::string last_line_;
};

enum class BaselineMethod { kRandom, kGrid };
BaselineMethod parse_baseline_method(std::string_view name);

// Random: `n_evals` seeded uniform points (default init + budget), sharing the
// initial design of a tune run with the same seed. Grid: points_per_dim^4
// cell centers. Returns the report text.
std::string run_baseline(const CampaignConfig& cfg, const std::filesystem::path& out,
                         BaselineMethod method, std::size_t points_per_dim,
                         std::optional<std::size_t> n_evals);

// JSON text with the cost, its breakdown, the design and optionally the
// secondary metrics. Throws DomainError outside the configured bounds.
std::string evaluate_point(const CampaignConfig& cfg, const ParamVector& theta, bool secondary);

// Summary of a logged run (report.json when present, else rebuilt from the
// log). Also regenerates cost_vs_iteration.csv/svg.
std::string summarize_run(const std::filesystem::path& out);

}  // namespace botune
