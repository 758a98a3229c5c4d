#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "vidial_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + VIDIAL_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(raw));
  return WEXITSTATUS(raw);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// A small corpus and config shared by the command tests.
struct Workspace {
  fs::path dir;
  fs::path cfg;

  Workspace() : dir(kRoot / "ws"), cfg(dir / "run.cfg") {
    fs::remove_all(dir);
    fs::create_directories(dir);
    REQUIRE(run("synth --episodes 8 --seed 3 --out " + q(dir / "data")) == 0);
    write(cfg,
          "data.episodes = data/episodes.jsonl\n"
          "data.coarse = data/coarse.vdf\n"
          "data.objects = data/objects.vof\n"
          "model.mode = cv\n"
          "model.dropout = 0\n"
          "train.steps = 4\n"
          "train.batch_size = 4\n"
          "train.warmup_steps = 2\n"
          "decode.beam_size = 3\n"
          "decode.nbest = 3\n");
  }

  std::string base() const { return "--config " + q(cfg) + " "; }
};

Workspace& workspace() {
  static Workspace ws;
  return ws;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("synth is reproducible and validates its arguments") {
  const auto a = kRoot / "synth_a";
  const auto b = kRoot / "synth_b";
  fs::remove_all(a);
  fs::remove_all(b);
  CHECK(run("synth --episodes 50 --seed 7 --out " + q(a)) == 0);
  CHECK(run("synth --episodes 50 --seed 7 --out " + q(b)) == 0);
  for (const char* f : {"episodes.jsonl", "coarse.vdf", "objects.vof", "manifest.json"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(!slurp(a / f).empty());
  }
  CHECK(run("synth --episodes 50") == 1);
  CHECK(run("synth --turns-min 1 --out " + q(kRoot / "bad")) == 1);
  CHECK(run("frobnicate") == 1);
}

TEST_CASE("train writes a tagged checkpoint and one loss line per step") {
  auto& ws = workspace();
  const auto ckpt = ws.dir / "fv.ckpt";
  REQUIRE(run(ws.base() + "train --mode fv --target forward --out " + q(ckpt)) == 0);
  CHECK(slurp(ckpt).find("\"mode\":\"FV\"") != std::string::npos);
  CHECK(count_lines(slurp(ckpt.string() + ".loss")) == 4);

  REQUIRE(run(ws.base() + "train --target disc --steps 3 --out " + q(ws.dir / "disc.ckpt")) == 0);
  CHECK(count_lines(slurp(ws.dir.string() + "/disc.ckpt.loss")) == 3);
  CHECK(run(ws.base() + "train --target nonsense --out " + q(ws.dir / "x.ckpt")) == 1);
}

TEST_CASE("generate honors the reranking flags") {
  auto& ws = workspace();
  const auto fwd = ws.dir / "cv.ckpt";
  const auto bwd = ws.dir / "bwd.ckpt";
  const auto disc = ws.dir / "disc_cv.ckpt";
  REQUIRE(run(ws.base() + "train --target forward --out " + q(fwd)) == 0);
  REQUIRE(run(ws.base() + "train --target backward --out " + q(bwd)) == 0);
  REQUIRE(run(ws.base() + "train --target disc --out " + q(disc)) == 0);

  const std::string gen = ws.base() + "generate --ckpt " + q(fwd) + " ";
  const std::string mi = " --mi --backward-ckpt " + q(bwd) + " --disc-ckpt " + q(disc) + " --lambdas ";
  REQUIRE(run(gen + "--out " + q(ws.dir / "plain.jsonl")) == 0);
  REQUIRE(run(gen + "--out " + q(ws.dir / "mi100.jsonl") + mi + "1,0,0") == 0);
  CHECK(slurp(ws.dir / "plain.jsonl") == slurp(ws.dir / "mi100.jsonl"));
  REQUIRE(run(gen + "--out " + q(ws.dir / "plain2.jsonl")) == 0);
  CHECK(slurp(ws.dir / "plain.jsonl") == slurp(ws.dir / "plain2.jsonl"));

  REQUIRE(run(gen + "--out " + q(ws.dir / "mi.jsonl") + mi + "0.8,0.1,0.1") == 0);
  const auto first = slurp(ws.dir / "mi.jsonl");
  CHECK(first.find("\"rerank_score\":null") == std::string::npos);

  CHECK(run(gen + "--out " + q(ws.dir / "bad.jsonl") + mi + "0.5,0.6,0.1") == 1);
  CHECK(run(gen + "--out " + q(ws.dir / "bad.jsonl") + " --mi --lambdas 1,0,0") == 1);
  CHECK(run(gen + "--mode fv --out " + q(ws.dir / "fv.jsonl")) == 2);
  CHECK(run(ws.base() + "generate --ckpt " + q(ws.dir / "absent.ckpt") + " --out " + q(ws.dir / "x.jsonl")) == 2);
}

TEST_CASE("eval reports metrics and checks adversarial splits") {
  auto& ws = workspace();
  const auto responses = ws.dir / "gold.jsonl";
  write(responses,
        "{\"episode\":\"a\",\"j\":1,\"hypothesis\":\"w1 w2 w3\",\"reference\":\"w1 w2 w3\",\"forward_logprob\":-1.0,"
        "\"rerank_score\":null}\n"
        "{\"episode\":\"b\",\"j\":1,\"hypothesis\":\"w4 w5\",\"reference\":\"w4 w5\",\"forward_logprob\":-2.0,"
        "\"rerank_score\":null}\n");
  const auto report = ws.dir / "report.json";
  REQUIRE(run(ws.base() + "eval --responses " + q(responses) + " --out " + q(report)) == 0);
  const auto j = nlohmann::json::parse(slurp(report));
  CHECK(j["bleu1"].get<double>() == doctest::Approx(100.0));
  CHECK(j["rouge1_f"].get<double>() == doctest::Approx(1.0));

  const auto again = ws.dir / "report2.json";
  REQUIRE(run(ws.base() + "eval --responses " + q(responses) + " --out " + q(again)) == 0);
  CHECK(slurp(report) == slurp(again));

  write(ws.dir / "train.txt", "a\nb\n");
  write(ws.dir / "test.txt", "b\nc\n");
  CHECK(run(ws.base() + "eval --adversarial --train-split " + q(ws.dir / "train.txt") + " --test-split " +
            q(ws.dir / "test.txt") + " --responses " + q(responses) + " --out " + q(ws.dir / "adv.json")) == 2);

  write(ws.dir / "broken.jsonl", "{not json}\n");
  CHECK(run(ws.base() + "eval --responses " + q(ws.dir / "broken.jsonl") + " --out " + q(ws.dir / "r.json")) == 2);
  CHECK(run(ws.base() + "eval --out " + q(ws.dir / "r.json")) == 1);
}
