#pragma once

#include <string>

#include "carryover/model.hpp"

namespace carryover {

inline constexpr const char* kCheckpointMagic = "carryover-ckpt";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint: magic, version, JSON header (architecture config,
/// vocabulary, tensor manifest), then raw little-endian 64-bit values.
/// Round trip reproduces bit-identical forward outputs.
void save_checkpoint(CarryoverModel& model, const std::string& path);
CarryoverModel load_checkpoint(const std::string& path);

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

DecoderKind decoder_from_string(const std::string& s);
OrderingMode ordering_from_string(const std::string& s);
ValueEncoding value_encoding_from_string(const std::string& s);

}  // namespace carryover
