#pragma once

#include <complex>

#include <Eigen/Dense>

namespace dimer {

using cplx = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixC = Matrix<cplx>;
using VectorC = Vector<cplx>;
using VectorR = Vector<double>;
using MatrixR = Matrix<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Largest entrywise modulus of a matrix expression.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

// Largest entrywise deviation from Hermiticity.
template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
    return max_abs(a - a.adjoint());
}

}  // namespace dimer
