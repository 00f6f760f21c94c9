#include "carryover/eval.hpp"

#include <algorithm>

namespace carryover {

PRF prf_from_counts(long tp, long fp, long fn) {
  PRF out;
  out.precision = (tp + fp == 0) ? (fn == 0 ? 1.0 : 0.0)
                                 : static_cast<double>(tp) / (tp + fp);
  out.recall = (tp + fn == 0) ? (fp == 0 ? 1.0 : 0.0)
                              : static_cast<double>(tp) / (tp + fn);
  out.f1 = (out.precision + out.recall == 0.0)
               ? 0.0
               : 2.0 * out.precision * out.recall /
                     (out.precision + out.recall);
  return out;
}

PRF prf1(const std::set<std::size_t>& hyp, const std::set<std::size_t>& ref) {
  long tp = 0;
  for (std::size_t h : hyp) tp += ref.count(h) ? 1 : 0;
  const long fp = static_cast<long>(hyp.size()) - tp;
  const long fn = static_cast<long>(ref.size()) - tp;
  return prf_from_counts(tp, fp, fn);
}

BucketPreset internal_preset() {
  BucketPreset p;
  p.name = "internal";
  p.buckets = {Bucket{"1", 1, 1}, Bucket{"2", 2, 2}, Bucket{">=3", 3, -1}};
  p.aggregate = Bucket{">=1", 1, -1};
  return p;
}

BucketPreset dstc2_preset() {
  BucketPreset p;
  p.name = "dstc2";
  p.buckets = {Bucket{"0", 0, 0}, Bucket{"2", 2, 2}, Bucket{"4", 4, 4},
               Bucket{">=6", 6, -1}};
  p.aggregate = Bucket{"all", 0, -1};
  return p;
}

EvalReport corpus_eval(CarryoverModel& model,
                       const std::vector<CarryoverInstance>& dataset,
                       const BucketPreset& preset,
                       const OrderingPolicy& ordering, bool include_grid) {
  EvalReport report;
  std::vector<CountStats> per_bucket(preset.buckets.size());
  CountStats agg;

  for (const CarryoverInstance& inst : dataset) {
    const Prediction pred = model.predict(inst, ordering);
    for (std::size_t j = 0; j < inst.candidates.size(); ++j) {
      const int d = inst.candidates[j].source.distance;
      const bool hyp = pred.selected.count(j) > 0;
      const bool ref = inst.labels.count(j) > 0;
      report.total_candidates += 1;
      auto tally = [&](CountStats& s) {
        s.total += 1;
        if (hyp && ref) s.tp += 1;
        if (hyp && !ref) s.fp += 1;
        if (!hyp && ref) s.fn += 1;
      };
      for (std::size_t b = 0; b < preset.buckets.size(); ++b)
        if (preset.buckets[b].contains(d)) tally(per_bucket[b]);
      if (preset.aggregate.contains(d)) tally(agg);
    }
  }

  agg.prf = prf_from_counts(agg.tp, agg.fp, agg.fn);
  report.overall = agg.prf;
  for (std::size_t b = 0; b < preset.buckets.size(); ++b) {
    per_bucket[b].prf =
        prf_from_counts(per_bucket[b].tp, per_bucket[b].fp, per_bucket[b].fn);
    report.by_distance.emplace_back(preset.buckets[b].label, per_bucket[b]);
  }
  report.by_distance.emplace_back(preset.aggregate.label, agg);
  if (include_grid) report.grid = grid_eval(model, dataset, ordering);
  return report;
}

std::map<std::pair<int, int>, GridCell> grid_eval(
    CarryoverModel& model, const std::vector<CarryoverInstance>& dataset,
    const OrderingPolicy& ordering) {
  std::map<std::pair<int, int>, GridCell> grid;
  for (const CarryoverInstance& inst : dataset) {
    const Prediction pred = model.predict(inst, ordering);
    int s_final = 0, s_carry = 0;
    for (std::size_t j : inst.labels) {
      s_final += 1;
      if (inst.candidates[j].source.distance >= 1) s_carry += 1;
    }
    GridCell& cell = grid[{s_final, s_carry}];
    cell.instances += 1;
    for (std::size_t j = 0; j < inst.candidates.size(); ++j) {
      const bool hyp = pred.selected.count(j) > 0;
      const bool ref = inst.labels.count(j) > 0;
      if (hyp && ref) cell.tp += 1;
      if (hyp && !ref) cell.fp += 1;
      if (!hyp && ref) cell.fn += 1;
    }
  }
  for (auto& [key, cell] : grid)
    cell.f1 = prf_from_counts(cell.tp, cell.fp, cell.fn).f1;
  return grid;
}

}  // namespace carryover
