#pragma once

#include <vector>

#include "carryover/eval.hpp"
#include "carryover/model.hpp"

namespace carryover {

struct TrainConfig {
  double lr = 0.001;
  double dropout = 0.3;
  int epochs = 40;  // paper budget: 40 pointer/independent, 200 transformer
  int batch_size = 16;
  std::uint64_t seed = 0;
  OrderingPolicy ordering;
  BucketPreset preset = internal_preset();
  double early_stop_dev_f1 = -1.0;  // stop once dev F1 reaches this; <0 = off
};

int default_epochs(DecoderKind kind);

struct EpochStats {
  double train_loss = 0.0;
  double dev_f1 = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // maximizes dev F1, earliest on ties
};

/// Mini-batch Adam training; dev F1 (aggregate bucket) selects the epoch
/// whose parameters the model keeps. Falls back to the train set when dev
/// is empty.
TrainHistory train(CarryoverModel& model, const TrainConfig& config,
                   const std::vector<CarryoverInstance>& train_set,
                   const std::vector<CarryoverInstance>& dev_set);

}  // namespace carryover
