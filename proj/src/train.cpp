#include "carryover/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "carryover/errors.hpp"

namespace carryover {

int default_epochs(DecoderKind kind) {
  return kind == DecoderKind::Transformer ? 200 : 40;
}

TrainHistory train(CarryoverModel& model, const TrainConfig& config,
                   const std::vector<CarryoverInstance>& train_set,
                   const std::vector<CarryoverInstance>& dev_set) {
  if (train_set.empty()) throw EmptyDataset();
  model.config().dropout = config.dropout;
  const std::vector<CarryoverInstance>& dev =
      dev_set.empty() ? train_set : dev_set;

  TrainHistory history;
  double best_f1 = -1.0;
  CarryoverModel::Snapshot best = model.snapshot();

  std::vector<std::size_t> indices(train_set.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

  Rng run_rng(config.seed);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng = run_rng.fork(static_cast<std::uint64_t>(epoch));
    epoch_rng.shuffle(indices);

    double epoch_loss = 0.0;
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < indices.size(); start += bs) {
      const std::size_t end = std::min(indices.size(), start + bs);
      model.zero_grads();
      for (std::size_t k = start; k < end; ++k) {
        Tape tape;
        Var loss = model.loss(tape, train_set[indices[k]], config.ordering,
                              DropoutMode::Train, &epoch_rng);
        const double value = loss.value().value();
        if (!std::isfinite(value))
          throw NonFiniteLoss("epoch " + std::to_string(epoch) + ", batch at " +
                              std::to_string(start) + ", instance " +
                              std::to_string(indices[k]));
        epoch_loss += value;
        // Mean over the batch.
        tape.backward(scale(loss, 1.0 / static_cast<double>(end - start)));
      }
      model.apply_adam(config.lr);
    }

    const EvalReport report =
        corpus_eval(model, dev, config.preset, config.ordering,
                    /*include_grid=*/false);
    history.epochs.push_back(EpochStats{epoch_loss, report.overall.f1});
    if (report.overall.f1 > best_f1) {
      best_f1 = report.overall.f1;
      history.best_epoch = epoch;
      best = model.snapshot();
    }
    if (config.early_stop_dev_f1 >= 0.0 && report.overall.f1 >= config.early_stop_dev_f1)
      break;
  }

  model.restore(best);
  return history;
}

}  // namespace carryover
