#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "carryover/optim.hpp"
#include "carryover/tape.hpp"

namespace carryover {

/// Token embedding table. Rows are Parameters so they can be fine-tuned;
/// lookups are case-folded and fall back to the unk vector.
class EmbeddingTable {
 public:
  /// Text format: one "token v1 .. vD" line each, optional "count dim"
  /// header line, LF or CRLF. Duplicate tokens: last wins.
  static EmbeddingTable load_vectors(std::istream& in, bool trainable = true);

  static EmbeddingTable random_init(const std::vector<std::string>& vocab,
                                    Index dim, Rng& rng,
                                    bool trainable = true);

  Index dim() const { return dim_; }
  bool trainable() const { return trainable_; }
  void set_trainable(bool t) { trainable_ = t; }
  std::size_t vocab_size() const { return index_.size(); }
  std::size_t duplicate_count() const { return duplicates_; }

  bool contains(const std::string& token) const;
  /// Never fails: unknown tokens resolve to the unk vector.
  Parameter& lookup(const std::string& token);
  const Parameter& lookup(const std::string& token) const;

  /// Add a (random) row for a token if absent, e.g. reserved separators.
  void ensure(const std::string& token, Rng& rng);

  /// Arithmetic mean of lookups; untracked.
  Tensor average_tokens(const std::vector<std::string>& tokens) const;

  /// Tape-tracked single lookup / mean; gradients reach the rows when
  /// the table is trainable.
  Var embed(Tape& tape, const std::string& token);
  Var embed_avg(Tape& tape, const std::vector<std::string>& tokens);

  /// Tokens in insertion order (checkpoint layout).
  std::vector<std::string> tokens() const;

  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }

 private:
  EmbeddingTable() = default;
  Parameter& row(std::size_t i) { return *store_.all()[i]; }

  Index dim_ = 0;
  bool trainable_ = true;
  ParameterStore store_;              // unk row first, then vocab rows
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> order_;
  std::size_t duplicates_ = 0;
};

}  // namespace carryover
