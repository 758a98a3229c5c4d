#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <vidial/vidial.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct ConfigDeleter {
  void operator()(vidial_config* c) const { vidial_config_destroy(c); }
};
using Config = std::unique_ptr<vidial_config, ConfigDeleter>;

Config make_config() {
  vidial_config* raw = nullptr;
  REQUIRE(vidial_config_create(&raw) == VIDIAL_OK);
  return Config(raw);
}

void set(vidial_config* c, const char* key, const std::string& value) {
  INFO(key);
  REQUIRE(vidial_config_set(c, key, value.c_str()) == VIDIAL_OK);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "vidial_capi" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("status names and exit codes") {
  CHECK(std::string(vidial_status_name(VIDIAL_OK)) == "Ok");
  CHECK(std::string(vidial_status_name(VIDIAL_ERR_MODE_MISMATCH)) == "ModeMismatch");
  CHECK(vidial_status_exit_code(VIDIAL_OK) == 0);
  CHECK(vidial_status_exit_code(VIDIAL_ERR_USAGE) == 1);
  CHECK(vidial_status_exit_code(VIDIAL_ERR_SPEC_INVALID) == 1);
  CHECK(vidial_status_exit_code(VIDIAL_ERR_INVALID_WEIGHTS) == 1);
  CHECK(vidial_status_exit_code(VIDIAL_ERR_IO) == 2);
  CHECK(vidial_status_exit_code(VIDIAL_ERR_MODE_MISMATCH) == 2);
  CHECK(vidial_status_exit_code(VIDIAL_ERR_SPLIT_OVERLAP) == 2);
  CHECK(vidial_status_exit_code(VIDIAL_ERR_INTERNAL) == 2);
  CHECK(std::string(vidial_version()).size() > 0);
}

TEST_CASE("config errors surface as status codes") {
  auto cfg = make_config();
  CHECK(vidial_config_set(cfg.get(), "no.such.key", "1") == VIDIAL_ERR_USAGE);
  CHECK(std::string(vidial_last_error()).find("no.such.key") != std::string::npos);
  CHECK(vidial_config_set(cfg.get(), "mi.lambdas", "0.5,0.6,0.1") == VIDIAL_ERR_INVALID_WEIGHTS);
  CHECK(vidial_config_set(nullptr, "seed", "1") == VIDIAL_ERR_USAGE);
  CHECK(vidial_config_set(cfg.get(), nullptr, "1") == VIDIAL_ERR_USAGE);
  CHECK(vidial_config_create(nullptr) == VIDIAL_ERR_USAGE);

  vidial_config* raw = nullptr;
  CHECK(vidial_config_load("/nonexistent/vidial.cfg", &raw) == VIDIAL_ERR_IO);
  CHECK(raw == nullptr);

  REQUIRE(vidial_config_key_count() > 0);
  CHECK(vidial_config_key(0) != nullptr);
  CHECK(vidial_config_key(vidial_config_key_count()) == nullptr);
  vidial_config_destroy(nullptr);
}

TEST_CASE("synth, train, generate and eval through the C interface") {
  const auto dir = fresh_dir("pipeline");
  auto cfg = make_config();
  set(cfg.get(), "synth.episodes", "6");
  set(cfg.get(), "seed", "4");
  REQUIRE(vidial_synth(cfg.get(), (dir / "data").c_str()) == VIDIAL_OK);
  for (const char* f : {"episodes.jsonl", "coarse.vdf", "objects.vof", "manifest.json"}) {
    CHECK(fs::exists(dir / "data" / f));
  }

  set(cfg.get(), "data.episodes", (dir / "data/episodes.jsonl").string());
  set(cfg.get(), "data.coarse", (dir / "data/coarse.vdf").string());
  set(cfg.get(), "data.objects", (dir / "data/objects.vof").string());
  set(cfg.get(), "model.mode", "fv");
  set(cfg.get(), "train.steps", "3");
  set(cfg.get(), "train.batch_size", "4");
  const auto ckpt = dir / "fwd.ckpt";
  REQUIRE(vidial_train(cfg.get(), "forward", ckpt.c_str()) == VIDIAL_OK);
  CHECK(fs::exists(ckpt));
  CHECK(vidial_train(cfg.get(), "sideways", ckpt.c_str()) == VIDIAL_ERR_USAGE);

  set(cfg.get(), "generate.forward_ckpt", ckpt.string());
  set(cfg.get(), "decode.beam_size", "2");
  set(cfg.get(), "decode.nbest", "2");
  const auto responses = dir / "responses.jsonl";
  REQUIRE(vidial_generate(cfg.get(), responses.c_str()) == VIDIAL_OK);
  CHECK(slurp(responses).find("\"forward_logprob\"") != std::string::npos);

  const auto report = dir / "report.json";
  REQUIRE(vidial_eval(cfg.get(), responses.c_str(), report.c_str()) == VIDIAL_OK);
  CHECK(slurp(report).find("\"bleu1\"") != std::string::npos);

  set(cfg.get(), "model.mode", "cv");
  CHECK(vidial_generate(cfg.get(), (dir / "cv.jsonl").c_str()) == VIDIAL_ERR_MODE_MISMATCH);
  CHECK(vidial_eval(cfg.get(), (dir / "missing.jsonl").c_str(), report.c_str()) == VIDIAL_ERR_IO);
}
