#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "carryover/dialogue.hpp"
#include "carryover/embeddings.hpp"
#include "carryover/eval.hpp"

namespace carryover {

inline constexpr const char* kCorpusMagic = "carryover-corpus";
inline constexpr int kCorpusVersion = 1;

/// Candidate counts by distance, mirroring the dataset breakdown tables.
struct CorpusStats {
  long instances = 0;
  std::map<std::string, long> total_by_distance;     // 0, 1, 2, >=3
  std::map<std::string, long> positive_by_distance;
  long tokens = 0;
  long oov_tokens = 0;  // only when a table is supplied

  long total_candidates() const;
};

/// Line-delimited JSON corpus. First line is a header record with the
/// format magic and version; each further line is one dialogue with its
/// candidate slots and label indices.
std::vector<CarryoverInstance> parse_corpus(std::istream& in);

void serialize_corpus(const std::vector<CarryoverInstance>& instances,
                      std::ostream& out);

CorpusStats compute_stats(const std::vector<CarryoverInstance>& instances,
                          const EmbeddingTable* table = nullptr);

/// DSTC2-style ingestion: user turns use their top ASR hypothesis when
/// present, candidate slots at distance >= 1 need an SLU score and pass
/// only with score strictly above the threshold, and only even-distance
/// (user-mentioned) slots are kept.
std::vector<CarryoverInstance> ingest_dstc2_like(std::istream& in,
                                                 double threshold = 0.1);

// ---- report serialization ------------------------------------------------

std::string report_table(const EvalReport& report);
std::string report_json(const EvalReport& report);

}  // namespace carryover
