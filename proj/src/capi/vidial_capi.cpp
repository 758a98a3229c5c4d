#include "vidial/vidial.h"

#include <new>
#include <string>

#include "app/commands.hpp"
#include "common/error.hpp"

struct vidial_config {
  vidial::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

vidial_status status_of(vidial::ErrorCode code) {
  return static_cast<vidial_status>(static_cast<int>(code) + 1);
}

template <typename F>
vidial_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return VIDIAL_OK;
  } catch (const vidial::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  }
  return VIDIAL_ERR_INTERNAL;
}

vidial_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return VIDIAL_ERR_USAGE;
}

}  // namespace

static_assert(static_cast<int>(vidial::ErrorCode::NumericFailure) + 1 == VIDIAL_ERR_NUMERIC_FAILURE,
              "status codes must track ErrorCode");

extern "C" {

vidial_status vidial_config_create(vidial_config** out) {
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto* c = new vidial_config;
    try {
      vidial::apply_seed_override(c->cfg);
    } catch (...) {
      delete c;
      throw;
    }
    *out = c;
  });
}

vidial_status vidial_config_load(const char* path, vidial_config** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new vidial_config{vidial::RunConfig::load(path)}; });
}

vidial_status vidial_config_set(vidial_config* cfg, const char* key, const char* value) {
  if (cfg == nullptr) return null_argument("cfg");
  if (key == nullptr || value == nullptr) return null_argument("key/value");
  return guarded([&] { cfg->cfg.set(key, value); });
}

void vidial_config_destroy(vidial_config* cfg) { delete cfg; }

size_t vidial_config_key_count(void) { return vidial::RunConfig::keys().size(); }

const char* vidial_config_key(size_t index) {
  const auto& keys = vidial::RunConfig::keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

vidial_status vidial_synth(const vidial_config* cfg, const char* out_dir) {
  if (cfg == nullptr) return null_argument("cfg");
  if (out_dir == nullptr) return null_argument("out_dir");
  return guarded([&] { vidial::cmd_synth(cfg->cfg, out_dir); });
}

vidial_status vidial_train(const vidial_config* cfg, const char* target, const char* out_ckpt) {
  if (cfg == nullptr) return null_argument("cfg");
  if (target == nullptr || out_ckpt == nullptr) return null_argument("target/out_ckpt");
  return guarded([&] { vidial::cmd_train(cfg->cfg, target, out_ckpt); });
}

vidial_status vidial_generate(const vidial_config* cfg, const char* out_responses) {
  if (cfg == nullptr) return null_argument("cfg");
  if (out_responses == nullptr) return null_argument("out_responses");
  return guarded([&] { vidial::cmd_generate(cfg->cfg, out_responses); });
}

vidial_status vidial_eval(const vidial_config* cfg, const char* responses, const char* out_report) {
  if (cfg == nullptr) return null_argument("cfg");
  if (responses == nullptr || out_report == nullptr) return null_argument("responses/out_report");
  return guarded([&] { vidial::cmd_eval(cfg->cfg, responses, out_report); });
}

const char* vidial_last_error(void) { return g_last_error.c_str(); }

const char* vidial_status_name(vidial_status status) {
  if (status == VIDIAL_OK) return "Ok";
  if (status == VIDIAL_ERR_INTERNAL) return "Internal";
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(vidial::ErrorCode::NumericFailure)) return "Unknown";
  return vidial::to_string(static_cast<vidial::ErrorCode>(code)).data();
}

int vidial_status_exit_code(vidial_status status) {
  switch (status) {
    case VIDIAL_OK:
      return 0;
    case VIDIAL_ERR_USAGE:
    case VIDIAL_ERR_SPEC_INVALID:
    case VIDIAL_ERR_INVALID_WEIGHTS:
      return 1;
    default:
      return 2;
  }
}

const char* vidial_version(void) { return "0.1.0"; }

}  // extern "C"
