#include "corpus/dataset.hpp"

#include <json.hpp>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace vidial {

namespace {

std::size_t read_index(const nlohmann::json& turn, const char* key, std::size_t line) {
  if (!turn.contains(key) || !turn[key].is_number_integer() || turn[key].get<long long>() < 0) {
    fail(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": turn field '" + key +
                                         "' must be a non-negative integer");
  }
  return turn[key].get<std::size_t>();
}

}  // namespace

TextDataset parse_episodes(std::string_view text, const CoarseFeatureStore* coarse,
                           const ObjectFeatureStore* objects) {
  TextDataset out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
        !record.contains("turns") || !record["turns"].is_array()) {
      fail(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": expected {\"id\", \"turns\"}");
    }
    TextEpisode episode;
    episode.id = record["id"].get<std::string>();
    for (const auto& t : record["turns"]) {
      if (!t.is_object() || !t.contains("text") || !t["text"].is_string()) {
        fail(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": turn without text");
      }
      TextTurn turn;
      turn.text = t["text"].get<std::string>();
      if (tokenize(turn.text).empty()) {
        fail(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": empty turn text");
      }
      turn.coarse = read_index(t, "coarse", line_no);
      turn.objects = read_index(t, "objects", line_no);
      if (coarse != nullptr && turn.coarse >= coarse->count()) {
        fail(ErrorCode::IndexOutOfRange, "episode " + episode.id + ": coarse index " +
                                             std::to_string(turn.coarse) + " >= " + std::to_string(coarse->count()));
      }
      if (objects != nullptr && turn.objects >= objects->count()) {
        fail(ErrorCode::IndexOutOfRange, "episode " + episode.id + ": object index " +
                                             std::to_string(turn.objects) + " >= " + std::to_string(objects->count()));
      }
      episode.turns.push_back(std::move(turn));
    }
    if (episode.turns.size() < 2) {
      fail(ErrorCode::EpisodeTooShort, "episode " + episode.id + " has " + std::to_string(episode.turns.size()) +
                                           " turn(s)");
    }
    out.push_back(std::move(episode));
  }
  return out;
}

TextDataset load_episodes(const std::filesystem::path& path, const CoarseFeatureStore* coarse,
                          const ObjectFeatureStore* objects) {
  return parse_episodes(read_file_text(path), coarse, objects);
}

std::string serialize_episodes(const TextDataset& episodes) {
  std::string out;
  for (const auto& ep : episodes) {
    nlohmann::ordered_json record;
    record["id"] = ep.id;
    record["turns"] = nlohmann::ordered_json::array();
    for (const auto& t : ep.turns) {
      nlohmann::ordered_json turn;
      turn["text"] = t.text;
      turn["coarse"] = t.coarse;
      turn["objects"] = t.objects;
      record["turns"].push_back(std::move(turn));
    }
    out += record.dump();
    out += '\n';
  }
  return out;
}

void write_episodes(const TextDataset& episodes, const std::filesystem::path& path) {
  write_file_text(path, serialize_episodes(episodes));
}

std::vector<std::string> collect_texts(const TextDataset& episodes) {
  std::vector<std::string> texts;
  for (const auto& ep : episodes) {
    for (const auto& t : ep.turns) texts.push_back(t.text);
  }
  return texts;
}

Dataset encode_dataset(const TextDataset& episodes, const Vocabulary& vocab) {
  Dataset out;
  out.episodes.reserve(episodes.size());
  for (const auto& ep : episodes) {
    Episode e{ep.id, {}};
    for (const auto& t : ep.turns) e.turns.push_back(Turn{encode_text(vocab, t.text), t.coarse, t.objects});
    out.episodes.push_back(std::move(e));
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& episodes_path, const Vocabulary& vocab,
                     const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects) {
  return encode_dataset(load_episodes(episodes_path, coarse, objects), vocab);
}

std::vector<ItemRef> enumerate_items(const Dataset& dataset) {
  std::vector<ItemRef> items;
  for (std::size_t e = 0; e < dataset.episodes.size(); ++e) {
    for (std::size_t j = 1; j < dataset.episodes[e].turns.size(); ++j) items.push_back({e, j});
  }
  return items;
}

}  // namespace vidial
