#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "carryover/model.hpp"

namespace carryover {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Standard P/R/F1 over sets. Empty hyp and ref: precision 1; F1 is 0 when
/// P + R = 0.
PRF prf1(const std::set<std::size_t>& hyp, const std::set<std::size_t>& ref);

PRF prf_from_counts(long tp, long fp, long fn);

/// Distance bucket [lo, hi]; hi < 0 means unbounded above.
struct Bucket {
  std::string label;
  int lo = 0;
  int hi = -1;

  bool contains(int d) const { return d >= lo && (hi < 0 || d <= hi); }
};

struct BucketPreset {
  std::string name;
  std::vector<Bucket> buckets;
  Bucket aggregate;  // dev-selection / overall scores use this range
};

BucketPreset internal_preset();  // 1, 2, >=3; aggregate >=1
BucketPreset dstc2_preset();     // 0, 2, 4, >=6; aggregate >=0

struct CountStats {
  long tp = 0, fp = 0, fn = 0;
  long total = 0;  // candidates in range
  PRF prf;
};

struct GridCell {
  long instances = 0;
  long tp = 0, fp = 0, fn = 0;
  double f1 = 0.0;
};

struct EvalReport {
  PRF overall;  // aggregate bucket, micro-averaged
  long total_candidates = 0;
  std::vector<std::pair<std::string, CountStats>> by_distance;
  std::map<std::pair<int, int>, GridCell> grid;  // (S_Final, S_Carry)
};

/// Micro-averaged corpus P/R/F1, overall and per distance bucket.
EvalReport corpus_eval(CarryoverModel& model,
                       const std::vector<CarryoverInstance>& dataset,
                       const BucketPreset& preset,
                       const OrderingPolicy& ordering,
                       bool include_grid = true);

/// Instance-level grid: S_Final = |labels|, S_Carry = |labels at d >= 1|.
std::map<std::pair<int, int>, GridCell> grid_eval(
    CarryoverModel& model, const std::vector<CarryoverInstance>& dataset,
    const OrderingPolicy& ordering);

}  // namespace carryover
