#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccyopt/multi_index.hpp"

using namespace ccyopt;

TEST_CASE("graded lexicographic order in two dimensions") {
  MultiIndexSet set(2, 2);
  REQUIRE(set.size() == 6);
  const int expected[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (Index i = 0; i < 6; ++i) {
    CHECK(set[i][0] == expected[i][0]);
    CHECK(set[i][1] == expected[i][1]);
  }
}

TEST_CASE("size matches binomial(dim + p, p)") {
  CHECK(MultiIndexSet(4, 2).size() == 15);
  CHECK(MultiIndexSet(8, 2).size() == 45);
  CHECK(MultiIndexSet(8, 4).size() == 495);
  for (int dim = 1; dim <= 5; ++dim) {
    for (int order = 0; order <= 4; ++order) {
      CHECK(MultiIndexSet(dim, order).size() == MultiIndexSet::count(dim, order));
    }
  }
}

TEST_CASE("univariate indices are plain degrees") {
  MultiIndexSet set(1, 3);
  REQUIRE(set.size() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(set[i][0] == static_cast<int>(i));
}

TEST_CASE("first index is the zero vector and degrees ascend") {
  MultiIndexSet set(3, 4);
  CHECK(set[0].sum() == 0);
  for (Index i = 1; i < set.size(); ++i) {
    CHECK(set.total_degree(i) >= set.total_degree(i - 1));
  }
}

TEST_CASE("enumeration is deterministic across runs") {
  MultiIndexSet a(4, 3), b(4, 3);
  CHECK(a.rows() == b.rows());
}

TEST_CASE("find reports the graded-lex position") {
  MultiIndexSet set(3, 2);
  IntVector idx(3);
  idx << 0, 1, 1;
  const Index pos = set.find(idx);
  REQUIRE(pos >= 0);
  CHECK((set[pos].transpose().array() == idx.array()).all());
  idx << 3, 0, 0;  // degree above the order
  CHECK(set.find(idx) == -1);
}

TEST_CASE("dimension zero is rejected") {
  CHECK_THROWS_AS(MultiIndexSet(0, 2), std::invalid_argument);
}
