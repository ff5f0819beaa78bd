#include "ccyopt/multi_index.hpp"

#include <vector>

namespace ccyopt {

namespace {

void enumerate_degree(int dim, int degree, std::vector<int>& prefix,
                      std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == dim - 1) {
    prefix.push_back(degree);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int a = degree; a >= 0; --a) {
    prefix.push_back(a);
    enumerate_degree(dim, degree - a, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

MultiIndexSet::MultiIndexSet(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1) throw std::invalid_argument("MultiIndexSet: dim must be >= 1");
  if (order < 0) throw std::invalid_argument("MultiIndexSet: order must be >= 0");
  std::vector<std::vector<int>> all;
  std::vector<int> prefix;
  for (int degree = 0; degree <= order; ++degree) {
    enumerate_degree(dim, degree, prefix, all);
  }
  indices_.resize(static_cast<Index>(all.size()), dim);
  for (Index i = 0; i < indices_.rows(); ++i) {
    for (int j = 0; j < dim; ++j) indices_(i, j) = all[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
}

Index MultiIndexSet::find(const IntVector& alpha) const {
  if (alpha.size() != dim_) return -1;
  for (Index i = 0; i < indices_.rows(); ++i) {
    if ((indices_.row(i).transpose().array() == alpha.array()).all()) return i;
  }
  return -1;
}

Index MultiIndexSet::count(int dim, int order) {
  // binomial(dim + order, order) without overflow for the sizes in use
  long double value = 1.0L;
  for (int k = 1; k <= order; ++k) {
    value = value * static_cast<long double>(dim + k) / static_cast<long double>(k);
  }
  return static_cast<Index>(value + 0.5L);
}

}  // namespace ccyopt
