#include "carryover/embeddings.hpp"

#include <sstream>

#include "carryover/dialogue.hpp"
#include "carryover/errors.hpp"

namespace carryover {

namespace {
constexpr const char* kUnkName = "<unk>";
}

EmbeddingTable EmbeddingTable::load_vectors(std::istream& in, bool trainable) {
  EmbeddingTable table;
  table.trainable_ = trainable;

  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    if (!ls.eof())
      throw UnparsableLine("line " + std::to_string(line_no));

    if (first_content_line) {
      first_content_line = false;
      // "count dim" header: a bare integer token followed by one number.
      if (values.size() == 1 &&
          token.find_first_not_of("0123456789") == std::string::npos &&
          values[0] == static_cast<double>(static_cast<long>(values[0]))) {
        continue;
      }
    }
    if (values.empty()) throw UnparsableLine("line " + std::to_string(line_no));

    if (table.dim_ == 0) {
      table.dim_ = static_cast<Index>(values.size());
      table.store_.create("emb/" + std::string(kUnkName), {table.dim_});
      table.index_[kUnkName] = 0;
      table.order_.push_back(kUnkName);
    } else if (static_cast<Index>(values.size()) != table.dim_) {
      throw InconsistentDim("line " + std::to_string(line_no));
    }

    const std::string key = to_lower(token);
    Tensor row({table.dim_});
    for (Index i = 0; i < table.dim_; ++i)
      row[i] = values[static_cast<std::size_t>(i)];

    auto it = table.index_.find(key);
    if (it != table.index_.end() && key != kUnkName) {
      table.row(it->second).value = row;
      ++table.duplicates_;
    } else if (it == table.index_.end()) {
      Parameter& p = table.store_.create("emb/" + key, {table.dim_});
      p.value = row;
      table.index_[key] = table.store_.all().size() - 1;
      table.order_.push_back(key);
    }
  }
  if (table.dim_ == 0) throw EmptyFile();

  // unk = mean of all loaded vectors
  Parameter& unk = table.row(table.index_[kUnkName]);
  std::size_t n = 0;
  for (const auto& tok : table.order_) {
    if (tok == kUnkName) continue;
    unk.value.flat() += table.row(table.index_[tok]).value.flat();
    ++n;
  }
  if (n > 0) unk.value.flat() /= static_cast<double>(n);
  return table;
}

EmbeddingTable EmbeddingTable::random_init(
    const std::vector<std::string>& vocab, Index dim, Rng& rng,
    bool trainable) {
  if (dim <= 0) throw ShapeMismatch("embedding dim must be positive");
  EmbeddingTable table;
  table.trainable_ = trainable;
  table.dim_ = dim;
  table.store_.create("emb/" + std::string(kUnkName), {dim});  // zeros
  table.index_[kUnkName] = 0;
  table.order_.push_back(kUnkName);
  for (const auto& tok : vocab) table.ensure(tok, rng);
  return table;
}

bool EmbeddingTable::contains(const std::string& token) const {
  return index_.count(to_lower(token)) != 0;
}

Parameter& EmbeddingTable::lookup(const std::string& token) {
  auto it = index_.find(to_lower(token));
  return *store_.all()[it == index_.end() ? index_.at(kUnkName) : it->second];
}

const Parameter& EmbeddingTable::lookup(const std::string& token) const {
  auto it = index_.find(to_lower(token));
  return *store_.all()[it == index_.end() ? index_.at(kUnkName) : it->second];
}

void EmbeddingTable::ensure(const std::string& token, Rng& rng) {
  const std::string key = to_lower(token);
  if (index_.count(key)) return;
  Parameter& p = store_.create_uniform_vec("emb/" + key, dim_, rng);
  index_[key] = store_.all().size() - 1;
  order_.push_back(key);
}

Tensor EmbeddingTable::average_tokens(
    const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw EmptyTokenList();
  Tensor out({dim_});
  for (const auto& tok : tokens) out.flat() += lookup(tok).value.flat();
  out.flat() /= static_cast<double>(tokens.size());
  return out;
}

Var EmbeddingTable::embed(Tape& tape, const std::string& token) {
  Parameter& p = lookup(token);
  return trainable_ ? tape.leaf(p) : tape.input(p.value);
}

Var EmbeddingTable::embed_avg(Tape& tape,
                              const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw EmptyTokenList();
  Var acc = embed(tape, tokens[0]);
  for (std::size_t i = 1; i < tokens.size(); ++i)
    acc = add(acc, embed(tape, tokens[i]));
  return scale(acc, 1.0 / static_cast<double>(tokens.size()));
}

std::vector<std::string> EmbeddingTable::tokens() const { return order_; }

}  // namespace carryover
