#include "botune/botune.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "botune/campaign.hpp"
#include "botune/error.hpp"

struct bt_campaign {
  std::unique_ptr<botune::Campaign> impl;
};

namespace {

thread_local std::string g_last_error;

bt_status to_status(botune::ErrorCode c) {
  using botune::ErrorCode;
  switch (c) {
    case ErrorCode::kDomain: return BT_ERR_OUT_OF_BOUNDS;
    case ErrorCode::kIllConditioned: return BT_ERR_ILL_CONDITIONED;
    case ErrorCode::kDiverged: return BT_ERR_DIVERGED;
    case ErrorCode::kConfig: return BT_ERR_CONFIG;
    case ErrorCode::kState: return BT_ERR_STATE;
    case ErrorCode::kIo: return BT_ERR_IO;
    case ErrorCode::kInvalidArgument: return BT_ERR_INVALID_ARGUMENT;
  }
  return BT_ERR_INTERNAL;
}

template <typename F>
bt_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return BT_OK;
  } catch (const botune::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return BT_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BT_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw botune::InvalidArgument(std::string(what) + " must not be NULL");
}

std::string opt(const char* s) { return s == nullptr ? std::string() : std::string(s); }

}  // namespace

extern "C" {

const char* bt_version(void) { return "1.0.0"; }

const char* bt_last_error(void) { return g_last_error.c_str(); }

void bt_free_string(char* s) { std::free(s); }

bt_status bt_campaign_create(const char* config_path, const char* output_dir, bt_campaign** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    *out = nullptr;
    auto cfg = botune::load_config(config_path);
    const auto dir = botune::resolve_output_dir(cfg, opt(output_dir));
    *out = new bt_campaign{botune::Campaign::create(std::move(cfg), dir)};
  });
}

bt_status bt_campaign_create_from_string(const char* config_json, const char* output_dir, bt_campaign** out) {
  return guarded([&] {
    require(config_json, "config_json");
    require(out, "out");
    *out = nullptr;
    auto cfg = botune::parse_config(config_json);
    const auto dir = botune::resolve_output_dir(cfg, opt(output_dir));
    *out = new bt_campaign{botune::Campaign::create(std::move(cfg), dir)};
  });
}

bt_status bt_campaign_resume(const char* output_dir, bt_campaign** out) {
  return guarded([&] {
    require(output_dir, "output_dir");
    require(out, "out");
    *out = nullptr;
    *out = new bt_campaign{botune::Campaign::resume(output_dir)};
  });
}

void bt_campaign_destroy(bt_campaign* c) { delete c; }

bt_status bt_campaign_step(bt_campaign* c, int* done, char** record_json) {
  return guarded([&] {
    require(c, "campaign");
    c->impl->step();
    if (done != nullptr) *done = c->impl->complete() ? 1 : 0;
    if (record_json != nullptr) *record_json = dup(c->impl->last_log_line());
  });
}

bt_status bt_campaign_progress(const bt_campaign* c, size_t* evaluated, size_t* total) {
  return guarded([&] {
    require(c, "campaign");
    if (evaluated != nullptr) *evaluated = c->impl->done();
    if (total != nullptr) *total = c->impl->total();
  });
}

bt_status bt_campaign_finish(bt_campaign* c, char** report_json) {
  return guarded([&] {
    require(c, "campaign");
    const std::string r = c->impl->finish();
    if (report_json != nullptr) *report_json = dup(r);
  });
}

bt_status bt_campaign_output_dir(const bt_campaign* c, char** path) {
  return guarded([&] {
    require(c, "campaign");
    require(path, "path");
    *path = dup(c->impl->output_dir().string());
  });
}

bt_status bt_baseline(const char* config_path, const char* output_dir, const char* method,
                      size_t points_per_dim, size_t n_evals, char** report_json) {
  return guarded([&] {
    require(config_path, "config_path");
    require(method, "method");
    const auto cfg = botune::load_config(config_path);
    const auto m = botune::parse_baseline_method(method);
    std::optional<std::size_t> n;
    if (n_evals > 0) n = n_evals;
    const std::string r =
        botune::run_baseline(cfg, botune::resolve_output_dir(cfg, opt(output_dir)), m, points_per_dim, n);
    if (report_json != nullptr) *report_json = dup(r);
  });
}

bt_status bt_evaluate(const char* config_path, const double theta[4], int secondary, char** result_json) {
  return guarded([&] {
    require(config_path, "config_path");
    require(theta, "theta");
    require(result_json, "result_json");
    const auto cfg = botune::load_config(config_path);
    const botune::ParamVector th{theta[0], theta[1], theta[2], theta[3]};
    *result_json = dup(botune::evaluate_point(cfg, th, secondary != 0));
  });
}

bt_status bt_report(const char* output_dir, char** summary_json) {
  return guarded([&] {
    require(output_dir, "output_dir");
    require(summary_json, "summary_json");
    *summary_json = dup(botune::summarize_run(output_dir));
  });
}

}  // extern "C"
