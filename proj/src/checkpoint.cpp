#include "carryover/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

namespace carryover {

using nlohmann::json;

namespace {

json config_json(const ModelConfig& c) {
  return {{"decoder", to_string(c.decoder)},
          {"value_encoding", to_string(c.value_encoding)},
          {"emb_dim", c.emb_dim},
          {"lstm_hidden", c.lstm_hidden},
          {"d_model", c.d_model},
          {"heads", c.heads},
          {"d_k", c.d_k},
          {"d_v", c.d_v},
          {"layers", c.layers},
          {"ff_width", c.ff_width},
          {"pointer_hidden", c.pointer_hidden},
          {"dropout", c.dropout},
          {"threshold", c.threshold},
          {"d_max", c.d_max}};
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.decoder = decoder_from_string(j.at("decoder").get<std::string>());
  c.value_encoding =
      value_encoding_from_string(j.at("value_encoding").get<std::string>());
  c.emb_dim = j.at("emb_dim").get<Index>();
  c.lstm_hidden = j.at("lstm_hidden").get<Index>();
  c.d_model = j.value("d_model", c.d_model);
  c.heads = j.value("heads", c.heads);
  c.d_k = j.value("d_k", c.d_k);
  c.d_v = j.value("d_v", c.d_v);
  c.layers = j.value("layers", c.layers);
  c.ff_width = j.value("ff_width", c.ff_width);
  c.pointer_hidden = j.value("pointer_hidden", c.pointer_hidden);
  c.dropout = j.value("dropout", c.dropout);
  c.threshold = j.value("threshold", c.threshold);
  c.d_max = j.value("d_max", c.d_max);
  return c;
}

void write_values(std::ostream& out, const Tensor& t) {
  for (Index i = 0; i < t.size(); ++i) {
    const double v = t[i];
    char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    out.write(bytes, sizeof(double));
  }
}

void read_values(std::istream& in, Tensor& t) {
  for (Index i = 0; i < t.size(); ++i) {
    char bytes[sizeof(double)];
    in.read(bytes, sizeof(double));
    if (!in) throw CorruptCheckpoint("truncated tensor payload");
    std::memcpy(&t[i], bytes, sizeof(double));
  }
}

json manifest_entry(const Parameter& p) {
  return {{"name", p.name}, {"shape", p.value.shape()}};
}

void check_shape(const Parameter& p, const json& entry) {
  const auto shape = entry.at("shape").get<std::vector<Index>>();
  if (shape != p.value.shape())
    throw CorruptCheckpoint("shape mismatch for tensor '" + p.name + "'");
}

}  // namespace

void save_checkpoint(CarryoverModel& model, const std::string& path) {
  json header;
  header["config"] = config_json(model.config());
  header["vocab"] = model.embeddings().tokens();
  header["trainable_embeddings"] = model.embeddings().trainable();
  json manifest = json::array();
  for (const auto& p : model.embeddings().params().all())
    manifest.push_back(manifest_entry(*p));
  for (const auto& p : model.params().all())
    manifest.push_back(manifest_entry(*p));
  header["tensors"] = manifest;
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorruptCheckpoint("cannot open '" + path + "' for writing");
  out.write(kCheckpointMagic,
            static_cast<std::streamsize>(std::strlen(kCheckpointMagic)));
  const std::uint32_t version = kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(),
            static_cast<std::streamsize>(header_text.size()));
  for (const auto& p : model.embeddings().params().all())
    write_values(out, p->value);
  for (const auto& p : model.params().all()) write_values(out, p->value);
  if (!out) throw CorruptCheckpoint("write failure on '" + path + "'");
}

CarryoverModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptCheckpoint("cannot open '" + path + "'");

  const std::size_t magic_len = std::strlen(kCheckpointMagic);
  std::string magic(magic_len, '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic_len));
  if (!in || magic != kCheckpointMagic)
    throw CorruptCheckpoint("bad magic in '" + path + "'");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in) throw CorruptCheckpoint("truncated version field");
  if (version != kCheckpointVersion)
    throw VersionMismatch("checkpoint version " + std::to_string(version) +
                          ", reader expects " +
                          std::to_string(kCheckpointVersion));
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in) throw CorruptCheckpoint("truncated header length");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw CorruptCheckpoint("truncated header");
  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception&) {
    throw CorruptCheckpoint("header is not valid JSON");
  }

  const ModelConfig config = config_from(header.at("config"));
  const auto vocab = header.at("vocab").get<std::vector<std::string>>();
  // Vocabulary order in the header matches the stored row order, so the
  // rebuilt table lines up with the payload; values are overwritten below.
  Rng scratch(0);
  EmbeddingTable table = EmbeddingTable::random_init(
      vocab, config.emb_dim, scratch,
      header.value("trainable_embeddings", true));
  CarryoverModel model = CarryoverModel::create(config, std::move(table), 0);

  const json& manifest = header.at("tensors");
  std::size_t next = 0;
  auto restore_store = [&](ParameterStore& store) {
    for (const auto& p : store.all()) {
      if (next >= manifest.size())
        throw CorruptCheckpoint("tensor manifest too short");
      const json& entry = manifest[next++];
      if (entry.at("name").get<std::string>() != p->name)
        throw CorruptCheckpoint("unexpected tensor '" + p->name + "'");
      check_shape(*p, entry);
      read_values(in, p->value);
    }
  };
  restore_store(model.embeddings().params());
  restore_store(model.params());
  if (next != manifest.size())
    throw CorruptCheckpoint("tensor manifest too long");
  return model;
}

std::string config_to_json(const ModelConfig& config) {
  return config_json(config).dump(2);
}

ModelConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  try {
    return config_from(j);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

DecoderKind decoder_from_string(const std::string& s) {
  if (s == "independent") return DecoderKind::Independent;
  if (s == "pointer") return DecoderKind::Pointer;
  if (s == "transformer") return DecoderKind::Transformer;
  throw ParseError("unknown decoder '" + s + "'");
}

OrderingMode ordering_from_string(const std::string& s) {
  if (s == "none") return OrderingMode::NoOrder;
  if (s == "turn") return OrderingMode::TurnOnlyOrder;
  if (s == "temporal") return OrderingMode::TemporalOrder;
  throw ParseError("unknown ordering '" + s + "'");
}

ValueEncoding value_encoding_from_string(const std::string& s) {
  if (s == "ctx_lstm") return ValueEncoding::Ctx;
  if (s == "ctx_avg") return ValueEncoding::Avg;
  throw ParseError("unknown value encoding '" + s + "'");
}

}  // namespace carryover
