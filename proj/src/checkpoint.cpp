#include "tnet/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tnet/error.hpp"
#include "tnet/report.hpp"

namespace tnet {

using nlohmann::json;

TNet Checkpoint::model() const { return TNet(hyper.model_config(vocab.size()), params); }

std::string serialize_checkpoint(const Checkpoint& c) {
  json params = json::object();
  for (const auto& [name, t] : c.params) params[name] = {{"shape", t.shape()}, {"values", t.values()}};
  json doc{{"format", Checkpoint::kFormat},
           {"version", Checkpoint::kVersion},
           {"hyperparams", report::to_json(c.hyper)},
           {"pad_len", c.pad_len},
           {"vocab_hash", data::hash_hex(c.vocab.hash())},
           {"vocabulary", c.vocab.tokens()},
           {"parameters", params}};
  return doc.dump();
}

Checkpoint parse_checkpoint(std::string_view text, const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source_name, 0, e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != Checkpoint::kFormat) {
      throw ContractError(source_name + ": not a tnet checkpoint");
    }
    const int version = doc.at("version").get<int>();
    if (version != Checkpoint::kVersion) {
      throw ContractError(source_name + ": unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    c.hyper = report::hyperparams_from_json(doc.at("hyperparams"));
    c.pad_len = doc.at("pad_len").get<std::size_t>();
    c.vocab = data::Vocabulary(doc.at("vocabulary").get<std::vector<std::string>>());
    const auto stored = doc.at("vocab_hash").get<std::string>();
    if (stored != data::hash_hex(c.vocab.hash())) {
      throw ContractError(source_name + ": vocabulary hash mismatch (stored " + stored + ", computed " +
                          data::hash_hex(c.vocab.hash()) + ")");
    }
    for (const auto& [name, entry] : doc.at("parameters").items()) {
      c.params.emplace(name, Tensor(entry.at("shape").get<Shape>(), entry.at("values").get<std::vector<double>>()));
    }
    (void)c.model();
    return c;
  } catch (const json::exception& e) {
    throw ParseError(source_name, 0, e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << serialize_checkpoint(checkpoint);
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str(), path.string());
}

}  // namespace tnet
