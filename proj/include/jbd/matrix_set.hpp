#ifndef JBD_MATRIX_SET_HPP
#define JBD_MATRIX_SET_HPP

#include <Eigen/Dense>
#include <vector>

namespace jbd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// An ordered collection of m real n-by-n matrices.
using MatrixSet = std::vector<Matrix>;

/// Stacked Frobenius norm (sum_i ||A_i||_F^2)^{1/2}.
double set_norm(const MatrixSet& a);

/// (sum_i ||A_i - B_i||_F^2)^{1/2}; the sets must have equal shapes.
double set_distance(const MatrixSet& a, const MatrixSet& b);

}  // namespace jbd

#endif
