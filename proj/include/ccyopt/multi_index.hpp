#pragma once

#include "ccyopt/types.hpp"

namespace ccyopt {

// All exponent vectors alpha in N^dim with |alpha| <= order, stored in graded
// lexicographic order: total degree ascending, ties broken so that within a
// degree the leading coordinate carries the highest power first. The first
// index is always the zero vector and the count equals binomial(dim+order, order).
class MultiIndexSet {
 public:
  MultiIndexSet(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  Index size() const { return indices_.rows(); }

  // Row view of the i-th exponent vector.
  auto operator[](Index i) const { return indices_.row(i); }
  const IntMatrix& rows() const { return indices_; }

  // Position of an exponent vector in the ordering; -1 if absent.
  Index find(const IntVector& alpha) const;

  int total_degree(Index i) const { return indices_.row(i).sum(); }

  static Index count(int dim, int order);

 private:
  int dim_;
  int order_;
  IntMatrix indices_;  // size() x dim
};

}  // namespace ccyopt
