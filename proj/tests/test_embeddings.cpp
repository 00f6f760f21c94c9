#include <doctest.h>

#include <sstream>

#include "carryover/embeddings.hpp"
#include "carryover/errors.hpp"

using namespace carryover;

TEST_CASE("load_vectors parses the text format") {
  std::istringstream in("a 1 0\nb 0 1\n");
  EmbeddingTable t = EmbeddingTable::load_vectors(in);
  CHECK(t.dim() == 2);
  CHECK(t.contains("a"));
  CHECK(t.contains("b"));
  CHECK(t.lookup("a").value[0] == doctest::Approx(1.0));
  CHECK(t.lookup("b").value[1] == doctest::Approx(1.0));
  // unk = mean of loaded vectors
  CHECK(t.lookup("zzz").value[0] == doctest::Approx(0.5));
  CHECK(t.lookup("zzz").value[1] == doctest::Approx(0.5));
}

TEST_CASE("load_vectors handles header lines, CRLF and duplicates") {
  std::istringstream with_header("2 3\na 1 0 0\r\nb 0 1 0\n");
  EmbeddingTable t = EmbeddingTable::load_vectors(with_header);
  CHECK(t.dim() == 3);
  CHECK(t.vocab_size() == 3);  // unk + 2 tokens

  std::istringstream dup("a 1 0\na 2 0\n");
  EmbeddingTable t2 = EmbeddingTable::load_vectors(dup);
  CHECK(t2.duplicate_count() == 1);
  CHECK(t2.lookup("a").value[0] == doctest::Approx(2.0));  // last wins
}

TEST_CASE("load_vectors error cases") {
  std::istringstream bad_dim("a 1 0\nb 1\n");
  CHECK_THROWS_AS(EmbeddingTable::load_vectors(bad_dim), InconsistentDim);

  std::istringstream empty("");
  CHECK_THROWS_AS(EmbeddingTable::load_vectors(empty), EmptyFile);

  std::istringstream garbage("a 1 zebra\n");
  CHECK_THROWS_AS(EmbeddingTable::load_vectors(garbage), UnparsableLine);
}

TEST_CASE("lookup case-folds and never fails") {
  std::istringstream in("arlington 1 2\n");
  EmbeddingTable t = EmbeddingTable::load_vectors(in);
  CHECK(t.lookup("Arlington").value[1] == doctest::Approx(2.0));
  CHECK(t.lookup("ARLINGTON").value[0] == doctest::Approx(1.0));
}

TEST_CASE("average_tokens is the arithmetic mean and permutation-invariant") {
  std::istringstream in("a 1 0\nb 0 1\n");
  EmbeddingTable t = EmbeddingTable::load_vectors(in);

  Tensor one = t.average_tokens({"a"});
  CHECK(one[0] == doctest::Approx(1.0));

  Tensor ab = t.average_tokens({"a", "b"});
  Tensor ba = t.average_tokens({"b", "a"});
  CHECK(ab[0] == doctest::Approx(0.5));
  CHECK(ab[1] == doctest::Approx(0.5));
  CHECK(ab[0] == ba[0]);
  CHECK(ab[1] == ba[1]);

  CHECK_THROWS_AS(t.average_tokens({}), EmptyTokenList);
}

TEST_CASE("trainable embedding rows receive gradients") {
  Rng rng(7);
  EmbeddingTable t = EmbeddingTable::random_init({"a", "b"}, 3, rng);
  REQUIRE(t.trainable());

  Tape tape;
  Var e = t.embed_avg(tape, {"a", "b"});
  tape.backward(sum(e));
  double grad_norm = 0.0;
  grad_norm += t.lookup("a").grad.flat().norm();
  grad_norm += t.lookup("b").grad.flat().norm();
  CHECK(grad_norm > 0.0);
  // each row enters the mean with weight 1/2
  CHECK(t.lookup("a").grad[0] == doctest::Approx(0.5));
}

TEST_CASE("frozen table keeps rows out of the tape") {
  Rng rng(7);
  EmbeddingTable t = EmbeddingTable::random_init({"a"}, 3, rng,
                                                 /*trainable=*/false);
  Tape tape;
  Var e = t.embed(tape, "a");
  tape.backward(sum(e));
  CHECK(t.lookup("a").grad.flat().norm() == 0.0);
}
