#include "relay/linalg.hpp"

#include <cmath>

namespace relay {

bool cholesky_factor(Matrix& a, double min_pivot) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > min_pivot)) return false;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
  }
  return true;
}

void cholesky_solve(const Matrix& chol, std::vector<double>& rhs) {
  const std::size_t n = chol.rows();
  // forward: L y = rhs
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= chol(i, k) * rhs[k];
    rhs[i] = s / chol(i, i);
  }
  // backward: L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    double s = rhs[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= chol(k, ii) * rhs[k];
    rhs[ii] = s / chol(ii, ii);
  }
}

}  // namespace relay
