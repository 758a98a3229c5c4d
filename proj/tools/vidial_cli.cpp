#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vidial/vidial.h"

namespace {

struct ConfigDeleter {
  void operator()(vidial_config* c) const { vidial_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<vidial_config, ConfigDeleter>;

int report(vidial_status status) {
  if (status != VIDIAL_OK) {
    std::fprintf(stderr, "error: %s\n", vidial_last_error());
  }
  return vidial_status_exit_code(status);
}

// Flag values collected by CLI11, applied to the config as dotted keys.
struct Overrides {
  std::map<std::string, std::string> values;

  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    return app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vidial: dialog generation with visual context"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  Overrides global;
  app.add_option("--config", config_path, "config file of dotted.key = value lines");
  global.add(&app, "--seed", "seed", "global seed (overrides VIDIAL_SEED and the config)");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  Overrides synth_flags;
  synth->add_option("--out", out, "output directory")->required();
  synth_flags.add(synth, "--episodes", "synth.episodes", "number of episodes");
  synth_flags.add(synth, "--turns-min", "synth.turns_min", "minimum turns per episode");
  synth_flags.add(synth, "--turns-max", "synth.turns_max", "maximum turns per episode");
  synth_flags.add(synth, "--vocab-size", "synth.vocab_size", "vocabulary size including specials");
  synth_flags.add(synth, "--classes", "synth.classes", "latent visual classes");
  synth_flags.add(synth, "--coarse-dim", "synth.coarse_dim", "feature width");
  synth_flags.add(synth, "--objects-per-image", "synth.objects_per_image", "objects per image");
  synth_flags.add(synth, "--noise", "synth.noise_scale", "feature noise scale");
  synth_flags.add(synth, "--seed", "seed", "seed");

  // train
  auto* train = app.add_subcommand("train", "train a forward, backward or discriminator model");
  Overrides train_flags;
  std::string target = "forward";
  train->add_option("--target", target, "forward | backward | disc")
      ->check(CLI::IsMember({"forward", "backward", "disc"}));
  train->add_option("--out", out, "checkpoint path")->required();
  train_flags.add(train, "--mode", "model.mode", "nv | cv | fv");
  train_flags.add(train, "--steps", "train.steps", "optimizer steps");
  train_flags.add(train, "--seed", "seed", "seed");

  // generate
  auto* generate = app.add_subcommand("generate", "decode responses for every dialog item");
  Overrides gen_flags;
  bool use_mi = false;
  generate->add_option("--out", out, "responses file")->required();
  gen_flags.add(generate, "--mode", "model.mode", "nv | cv | fv");
  gen_flags.add(generate, "--ckpt", "generate.forward_ckpt", "forward checkpoint");
  gen_flags.add(generate, "--nbest", "decode.nbest", "N-best size (default 5)");
  gen_flags.add(generate, "--beam", "decode.beam_size", "beam size");
  auto* mi_flag = generate->add_flag("--mi", use_mi, "rerank the N-best list");
  auto* bw = gen_flags.add(generate, "--backward-ckpt", "mi.backward_ckpt", "backward model checkpoint");
  auto* dc = gen_flags.add(generate, "--disc-ckpt", "mi.disc_ckpt", "discriminator checkpoint");
  auto* lambdas = gen_flags.add(generate, "--lambdas", "mi.lambdas", "forward,backward,visual weights");
  mi_flag->needs(bw)->needs(dc)->needs(lambdas);
  gen_flags.add(generate, "--seed", "seed", "seed");

  // eval
  auto* eval = app.add_subcommand("eval", "score a responses file");
  Overrides eval_flags;
  std::string responses;
  bool adversarial = false;
  eval->add_option("--responses", responses, "responses file")->required();
  eval->add_option("--out", out, "report file")->required();
  auto* adv_flag = eval->add_flag("--adversarial", adversarial, "also run the adversarial evaluator");
  auto* train_split = eval_flags.add(eval, "--train-split", "eval.train_split", "episode ids for training");
  auto* test_split = eval_flags.add(eval, "--test-split", "eval.test_split", "episode ids for testing");
  adv_flag->needs(train_split)->needs(test_split);
  eval_flags.add(eval, "--seed", "seed", "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fprintf(stderr, "%s", app.help().c_str());
    return 1;
  }

  vidial_config* raw = nullptr;
  const vidial_status loaded =
      config_path.empty() ? vidial_config_create(&raw) : vidial_config_load(config_path.c_str(), &raw);
  if (loaded != VIDIAL_OK) return report(loaded);
  ConfigPtr cfg(raw);

  std::vector<const Overrides*> layers{&global, &synth_flags, &train_flags, &gen_flags, &eval_flags};
  for (const Overrides* layer : layers) {
    for (const auto& [key, value] : layer->values) {
      if (const vidial_status s = vidial_config_set(cfg.get(), key.c_str(), value.c_str()); s != VIDIAL_OK) {
        return report(s);
      }
    }
  }
  if (use_mi) {
    if (const vidial_status s = vidial_config_set(cfg.get(), "mi.enabled", "true"); s != VIDIAL_OK) return report(s);
  }
  if (adversarial) {
    if (const vidial_status s = vidial_config_set(cfg.get(), "eval.adversarial", "true"); s != VIDIAL_OK) {
      return report(s);
    }
  }

  if (synth->parsed()) return report(vidial_synth(cfg.get(), out.c_str()));
  if (train->parsed()) return report(vidial_train(cfg.get(), target.c_str(), out.c_str()));
  if (generate->parsed()) return report(vidial_generate(cfg.get(), out.c_str()));
  return report(vidial_eval(cfg.get(), responses.c_str(), out.c_str()));
}
