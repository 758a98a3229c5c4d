#include "app/run_config.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace vidial {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  const std::string text(value);
  std::istringstream in(text);
  T out{};
  in >> out;
  if (in.fail() || !in.eof() || text.empty()) {
    fail(ErrorCode::Usage, "bad value '" + text + "' for " + std::string(key));
  }
  if constexpr (std::is_integral_v<T>) {
    if (text.front() == '-') fail(ErrorCode::Usage, "negative value for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  fail(ErrorCode::Usage, "bad boolean '" + std::string(value) + "' for " + std::string(key));
}

std::filesystem::path resolve(std::string_view value, const std::filesystem::path& base) {
  std::filesystem::path p{std::string(value)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view, const std::filesystem::path&)>;

template <typename T, typename Owner>
Setter number(T Owner::*field, Owner RunConfig::*owner) {
  return [=](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
    (c.*owner).*field = parse_number<T>(k, v);
  };
}

template <typename T>
Setter number(T RunConfig::*field) {
  return [=](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
    c.*field = parse_number<T>(k, v);
  };
}

Setter path(std::filesystem::path RunConfig::*field) {
  return [=](RunConfig& c, std::string_view, std::string_view v, const std::filesystem::path& base) {
    c.*field = resolve(v, base);
  };
}

Setter flag(bool RunConfig::*field) {
  return [=](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
    c.*field = parse_bool(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["seed"] = number(&RunConfig::seed);

    t["synth.episodes"] = number(&SyntheticSpec::num_episodes, &RunConfig::synth);
    t["synth.turns_min"] = number(&SyntheticSpec::turns_min, &RunConfig::synth);
    t["synth.turns_max"] = number(&SyntheticSpec::turns_max, &RunConfig::synth);
    t["synth.vocab_size"] = number(&SyntheticSpec::vocab_size, &RunConfig::synth);
    t["synth.classes"] = number(&SyntheticSpec::num_classes, &RunConfig::synth);
    t["synth.coarse_dim"] = number(&SyntheticSpec::coarse_dim, &RunConfig::synth);
    t["synth.objects_per_image"] = number(&SyntheticSpec::objects_per_image, &RunConfig::synth);
    t["synth.noise_scale"] = number(&SyntheticSpec::noise_scale, &RunConfig::synth);
    t["synth.tokens_per_turn"] = number(&SyntheticSpec::tokens_per_turn, &RunConfig::synth);
    t["synth.copy_previous"] = [](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
      c.synth.copy_previous = parse_bool(k, v);
    };
    t["synth.deterministic_text"] = [](RunConfig& c, std::string_view k, std::string_view v,
                                       const std::filesystem::path&) { c.synth.deterministic_text = parse_bool(k, v); };

    t["data.episodes"] = path(&RunConfig::episodes);
    t["data.eval_episodes"] = path(&RunConfig::eval_episodes);
    t["data.coarse"] = path(&RunConfig::coarse);
    t["data.objects"] = path(&RunConfig::objects);
    t["data.vocab_size"] = number(&RunConfig::vocab_size);
    t["data.min_freq"] = number(&RunConfig::min_freq);

    t["model.mode"] = [](RunConfig& c, std::string_view, std::string_view v, const std::filesystem::path&) {
      c.model.mode = parse_mode(v);
    };
    t["model.enc_layers"] = number(&ModelConfig::enc_layers, &RunConfig::model);
    t["model.dec_layers"] = number(&ModelConfig::dec_layers, &RunConfig::model);
    t["model.heads"] = number(&ModelConfig::heads, &RunConfig::model);
    t["model.d_model"] = number(&ModelConfig::d_model, &RunConfig::model);
    t["model.ffn_dim"] = number(&ModelConfig::ffn_dim, &RunConfig::model);
    t["model.dropout"] = number(&ModelConfig::dropout, &RunConfig::model);
    t["model.max_src_len"] = number(&ModelConfig::max_src_len, &RunConfig::model);
    t["model.max_turns"] = number(&ModelConfig::max_turns, &RunConfig::model);
    t["model.max_tgt_len"] = number(&ModelConfig::max_tgt_len, &RunConfig::model);

    t["train.steps"] = number(&TrainOptions::max_steps, &RunConfig::train);
    t["train.batch_size"] = number(&TrainOptions::batch_size, &RunConfig::train);
    t["train.peak_lr"] = [](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
      c.train.adam.peak_lr = parse_number<double>(k, v);
    };
    t["train.warmup_steps"] = [](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
      c.train.adam.warmup_steps = parse_number<int>(k, v);
    };
    t["train.beta1"] = [](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
      c.train.adam.beta1 = parse_number<double>(k, v);
    };
    t["train.beta2"] = [](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
      c.train.adam.beta2 = parse_number<double>(k, v);
    };
    t["train.eps"] = [](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
      c.train.adam.eps = parse_number<double>(k, v);
    };
    t["train.max_grad_norm"] = [](RunConfig& c, std::string_view k, std::string_view v, const std::filesystem::path&) {
      c.train.adam.max_grad_norm = parse_number<double>(k, v);
    };

    t["disc.negatives"] = number(&RunConfig::disc_negatives);
    t["disc.objective"] = [](RunConfig& c, std::string_view, std::string_view v, const std::filesystem::path&) {
      c.disc_objective = parse_objective(v);
    };
    t["disc.share_encoder"] = flag(&RunConfig::disc_share_encoder);
    t["disc.forward_ckpt"] = path(&RunConfig::disc_forward_ckpt);

    t["generate.forward_ckpt"] = path(&RunConfig::forward_ckpt);
    t["decode.beam_size"] = number(&RunConfig::beam_size);
    t["decode.nbest"] = number(&RunConfig::nbest);
    t["decode.max_tgt_len"] = number(&RunConfig::decode_max_len);

    t["mi.enabled"] = flag(&RunConfig::mi);
    t["mi.backward_ckpt"] = path(&RunConfig::backward_ckpt);
    t["mi.disc_ckpt"] = path(&RunConfig::disc_ckpt);
    t["mi.lambdas"] = [](RunConfig& c, std::string_view, std::string_view v, const std::filesystem::path&) {
      c.lambdas = parse_weights(v);
    };

    t["eval.adversarial"] = flag(&RunConfig::adversarial);
    t["eval.train_split"] = path(&RunConfig::train_split);
    t["eval.test_split"] = path(&RunConfig::test_split);
    t["eval.adv.layers"] = number(&AdvConfig::layers, &RunConfig::adv);
    t["eval.adv.heads"] = number(&AdvConfig::heads, &RunConfig::adv);
    t["eval.adv.width"] = number(&AdvConfig::width, &RunConfig::adv);
    t["eval.adv.ffn_dim"] = number(&AdvConfig::ffn_dim, &RunConfig::adv);
    t["eval.adv.dropout"] = number(&AdvConfig::dropout, &RunConfig::adv);
    t["eval.adv.max_turns"] = number(&AdvConfig::max_turns, &RunConfig::adv);
    t["eval.adv.steps"] = number(&AdvConfig::steps, &RunConfig::adv);
    t["eval.adv.batch_size"] = number(&AdvConfig::batch_size, &RunConfig::adv);
    t["eval.adv.peak_lr"] = number(&AdvConfig::peak_lr, &RunConfig::adv);
    t["eval.adv.warmup_steps"] = number(&AdvConfig::warmup_steps, &RunConfig::adv);
    return t;
  }();
  return table;
}

}  // namespace

RunConfig::RunConfig() {
  model = ModelConfig::tiny(Mode::NV, 0, 0);
  model.dropout = 0.1;
}

void RunConfig::set(std::string_view key, std::string_view value, const std::filesystem::path& base_dir) {
  const auto it = setters().find(key);
  if (it == setters().end()) fail(ErrorCode::Usage, "unknown config key '" + std::string(key) + "'");
  it->second(*this, key, trim(value), base_dir);
}

void RunConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::Usage, "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set(trim(std::string_view(content).substr(0, eq)), std::string_view(content).substr(eq + 1), base_dir);
  }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  RunConfig cfg;
  cfg.parse(read_file_text(path), path.parent_path());
  apply_seed_override(cfg);
  return cfg;
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return names;
}

void apply_seed_override(RunConfig& cfg) {
  if (const char* env = std::getenv("VIDIAL_SEED"); env != nullptr && *env != '\0') {
    cfg.set("seed", env);
  }
}

}  // namespace vidial
