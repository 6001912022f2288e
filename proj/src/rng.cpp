#include "sintheta/rng.hpp"

#include <Eigen/QR>

namespace sintheta {

Matrix Rng::gaussian(Index rows, Index cols, double sigma) {
  std::normal_distribution<double> dist(0.0, sigma);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(engine_);
  return m;
}

Vector Rng::rademacher(Index size) {
  std::uniform_int_distribution<int> dist(0, 1);
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = dist(engine_) == 0 ? -1.0 : 1.0;
  return v;
}

Matrix Rng::haar_orthogonal(Index dim) {
  const Matrix g = gaussian(dim, dim);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace sintheta
