// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "botune/botune.h"

namespace {

int exit_code(bt_status s) {
  switch (s) {
    case BT_OK: return 0;
    case BT_ERR_CONFIG: return 2;
    case BT_ERR_OUT_OF_BOUNDS: return 3;
    default: return 1;
  }
}

int fail(bt_status s) {
  std::fprintf(stderr, "botune: %s\n", bt_last_error());
  return exit_code(s);
}

void print_and_free(char* s) {
  if (s == nullptr) return;
  std::fputs(s, stdout);
  bt_free_string(s);
}

void progress(const char* record, std::size_t total) {
  const auto j = nlohmann::json::parse(record, nullptr, false);
  if (j.is_discarded()) return;
  const auto i = j.value("iteration", std::size_t{0});
  if (j.value("failed", false))
    std::fprintf(stderr, "[%3zu/%zu] %-4s failed: %s\n", i + 1, total, j.value("phase", "").c_str(),
                 j.value("error", "").c_str());
  else
    std::fprintf(stderr, "[%3zu/%zu] %-4s cost %.5f\n", i + 1, total, j.value("phase", "").c_str(),
                 j.value("cost", 0.0));
}

// Steps until the budget is spent or `stop_after` records exist in total
// (0: no limit), then finishes the campaign when complete.
int drive(bt_campaign* c, std::size_t stop_after) {
  std::size_t done = 0, total = 0;
  bt_status s = bt_campaign_progress(c, &done, &total);
  if (s != BT_OK) return fail(s);
  int complete = done >= total ? 1 : 0;
  while (!complete) {
    if (stop_after > 0 && done >= stop_after) {
      std::fprintf(stderr, "stopped after %zu of %zu evaluations\n", done, total);
      return 0;
    }
    char* rec = nullptr;
    s = bt_campaign_step(c, &complete, &rec);
    if (s != BT_OK) return fail(s);
    progress(rec, total);
    bt_free_string(rec);
    ++done;
  }
  char* report = nullptr;
  s = bt_campaign_finish(c, &report);
  if (s != BT_OK) return fail(s);
  print_and_free(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian-optimization auto-tuning of ADRC throttle-valve controllers"};
  app.set_version_flag("--version", std::string(bt_version()));
  app.require_subcommand(1);

  std::string config, output, method = "random";
  std::size_t stop_after = 0, points_per_dim = 2, evals = 0;
  std::vector<double> theta;
  bool secondary = false;

  auto* tune = app.add_subcommand("tune", "run a tuning campaign");
  tune->add_option("config", config, "campaign config (JSON)")->required();
  tune->add_option("-o,--output", output, "output directory");
  tune->add_option("--stop-after", stop_after, "stop once this many evaluations are logged");

  auto* baseline = app.add_subcommand("baseline", "random or grid search with the same logging");
  baseline->add_option("config", config, "campaign config (JSON)")->required();
  baseline->add_option("-o,--output", output, "output directory");
  baseline->add_option("--method", method, "random | grid")->check(CLI::IsMember({"random", "grid"}));
  baseline->add_option("--points-per-dim", points_per_dim, "grid resolution");
  baseline->add_option("--evals", evals, "evaluation count (random default: init + budget)");

  auto* evaluate = app.add_subcommand("evaluate", "score one parameter vector");
  evaluate->add_option("config", config, "campaign config (JSON)")->required();
  evaluate->add_option("--theta", theta, "t_set t_obs p1 p2")->required()->expected(4);
  evaluate->add_flag("--secondary", secondary, "also run the robustness/noise/disturbance experiments");

  auto* resume = app.add_subcommand("resume", "continue an interrupted campaign");
  resume->add_option("output_dir", output, "campaign output directory")->required();
  resume->add_option("--stop-after", stop_after, "stop once this many evaluations are logged");

  auto* report = app.add_subcommand("report", "summarize a logged run");
  report->add_option("output_dir", output, "campaign output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const char* out = output.empty() ? nullptr : output.c_str();
  if (*tune) {
    bt_campaign* c = nullptr;
    const bt_status s = bt_campaign_create(config.c_str(), out, &c);
    if (s != BT_OK) return fail(s);
    const int rc = drive(c, stop_after);
    bt_campaign_destroy(c);
    return rc;
  }
  if (*resume) {
    bt_campaign* c = nullptr;
    const bt_status s = bt_campaign_resume(out, &c);
    if (s != BT_OK) return fail(s);
    const int rc = drive(c, stop_after);
    bt_campaign_destroy(c);
    return rc;
  }
  if (*baseline) {
    char* rep = nullptr;
    const bt_status s = bt_baseline(config.c_str(), out, method.c_str(), points_per_dim, evals, &rep);
    if (s != BT_OK) return fail(s);
    print_and_free(rep);
    return 0;
  }
  if (*evaluate) {
    char* res = nullptr;
    const bt_status s = bt_evaluate(config.c_str(), theta.data(), secondary ? 1 : 0, &res);
    if (s != BT_OK) return fail(s);
    print_and_free(res);
    return 0;
  }
  char* rep = nullptr;
  const bt_status s = bt_report(out, &rep);
  if (s != BT_OK) return fail(s);
  print_and_free(rep);
  return 0;
}
