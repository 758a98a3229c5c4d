#include "decode/generate.hpp"

#include <json.hpp>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace vidial {

namespace {

RerankVisual visual_of(Mode mode, const Turn& turn, const CoarseFeatureStore* coarse,
                       const ObjectFeatureStore* objects) {
  if (mode == Mode::CV) return CoarseVisual{discriminator_visual(mode, turn.coarse_idx, 0, coarse, nullptr)};
  const std::size_t m = objects->objects_in(turn.object_idx);
  const auto data = objects->objects(turn.object_idx);
  nn::Matrix rows(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(objects->dim()));
  for (Eigen::Index k = 0; k < rows.size(); ++k) rows.data()[k] = data[static_cast<std::size_t>(k)];
  return ObjectVisual{rows};
}

}  // namespace

std::vector<ResponseRecord> generate_split(const Seq2Seq& net, const nn::ParamSet& params, const Dataset& dataset,
                                          const Vocabulary& vocab, Mode mode, const CoarseFeatureStore* coarse,
                                          const ObjectFeatureStore* objects, const MiConfig* mi,
                                          const BeamOptions& beam) {
  if (net.config().mode != mode) {
    fail(ErrorCode::ModeMismatch, "model was trained in " + std::string(to_string(net.config().mode)) +
                                      " mode, generation requested " + std::string(to_string(mode)));
  }
  const bool rerank_active = mi != nullptr && !mi->weights.forward_only();
  if (rerank_active) {
    mi->weights.validate();
    if (mode == Mode::NV) fail(ErrorCode::ModeMismatch, "visual reranking needs CV or FV mode");
  }
  std::vector<ResponseRecord> out;
  for (const ItemRef& item : enumerate_items(dataset)) {
    const Episode& ep = dataset.episodes[item.episode];
    const auto source = assemble(ep, item.j, net.config(), coarse, objects);
    const NBestList nbest = beam_nbest(net, params, source, beam);
    ResponseRecord rec;
    rec.episode = ep.id;
    rec.j = item.j;
    rec.reference = decode_ids(vocab, ep.turns[item.j].tokens);
    std::size_t pick = 0;
    if (rerank_active) {
      const Turn& next = ep.turns[item.j];
      const auto choice = rerank(nbest, mi->weights, mi->backward, mi->disc, visual_of(mode, next, coarse, objects),
                                 ep.turns[item.j - 1].tokens, mode);
      pick = choice.index;
      rec.rerank_score = choice.score;
    }
    rec.hypothesis = decode_ids(vocab, strip_eos(nbest[pick].tokens));
    rec.forward_logprob = nbest[pick].forward_logprob;
    out.push_back(std::move(rec));
  }
  return out;
}

std::string serialize_responses(const std::vector<ResponseRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["episode"] = r.episode;
    j["j"] = r.j;
    j["hypothesis"] = r.hypothesis;
    j["reference"] = r.reference;
    j["forward_logprob"] = r.forward_logprob;
    j["rerank_score"] = r.rerank_score ? nlohmann::ordered_json(*r.rerank_score) : nlohmann::ordered_json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ResponseRecord> parse_responses(std::string_view text) {
  std::vector<ResponseRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ResponseRecord r;
      r.episode = j.at("episode").get<std::string>();
      r.j = j.at("j").get<std::size_t>();
      r.hypothesis = j.at("hypothesis").get<std::string>();
      r.reference = j.at("reference").get<std::string>();
      r.forward_logprob = j.value("forward_logprob", 0.0);
      if (j.contains("rerank_score") && !j.at("rerank_score").is_null()) r.rerank_score = j.at("rerank_score").get<double>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::MalformedRecord, "responses line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) fail(ErrorCode::MalformedRecord, "responses file holds no records");
  return out;
}

void write_responses(const std::vector<ResponseRecord>& records, const std::filesystem::path& path) {
  write_file_text(path, serialize_responses(records));
}

std::vector<ResponseRecord> read_responses(const std::filesystem::path& path) {
  return parse_responses(read_file_text(path));
}

}  // namespace vidial
