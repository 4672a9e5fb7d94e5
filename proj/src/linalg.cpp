#include "sls/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace sls {

double spectral_radius(const Mat& a) {
    if (a.rows() == 0) return 0.0;
    Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_symmetric_eigenvalue(const Mat& a) {
    if (a.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void require_spd(const Mat& a, const char* name, double floor, double sym_tol) {
    if (a.rows() != a.cols())
        throw NumericError(std::string(name) + " is not square");
    if (max_abs(a - a.transpose()) > sym_tol)
        throw NumericError(std::string(name) + " is not symmetric");
    double lo = min_symmetric_eigenvalue(a);
    if (!(lo > floor))
        throw NumericError(std::string(name) + " is not positive definite (min eig " +
                           std::to_string(lo) + ")");
}

Mat symmetric_sqrt(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a));
    Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace sls
