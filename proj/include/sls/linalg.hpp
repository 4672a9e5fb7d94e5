#pragma once

#include <Eigen/Dense>

#include "sls/errors.hpp"

namespace sls {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using IntMat = Eigen::MatrixXi;
using IntVec = Eigen::VectorXi;

// Largest |eigenvalue| of a (generally nonsymmetric) square matrix.
double spectral_radius(const Mat& a);

// Smallest eigenvalue of the symmetrized matrix.
double min_symmetric_eigenvalue(const Mat& a);

// Throws NumericError unless a is symmetric (to tol) with all eigenvalues > floor.
void require_spd(const Mat& a, const char* name, double floor = 0.0, double sym_tol = 1e-9);

// Symmetric positive (semi)definite square root via eigendecomposition.
Mat symmetric_sqrt(const Mat& a);

inline Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

inline double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace sls
