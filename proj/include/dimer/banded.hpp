#pragma once

// Square band matrices stored by diagonal, with dense left/right products.
//
// Every operator of the two-mode model is at most pentadiagonal in the Fock
// basis, so products with a d x d dense matrix cost O(w d^2) instead of O(d^3).

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dimer/types.hpp"

namespace dimer {

template <typename Scalar>
class BandedMatrix {
public:
    BandedMatrix() = default;

    BandedMatrix(Eigen::Index dim, Eigen::Index half_width)
        : dim_(dim), half_width_(half_width), diags_(2 * half_width + 1) {
        if (dim <= 0 || half_width < 0) {
            throw std::invalid_argument("BandedMatrix: invalid shape");
        }
        for (Eigen::Index k = -half_width; k <= half_width; ++k) {
            diag(k) = Vector<Scalar>::Zero(len(k));
        }
    }

    // Entries outside the band must be below `tol` in modulus.
    template <typename Derived>
    static BandedMatrix from_dense(const Eigen::MatrixBase<Derived>& a, Eigen::Index half_width,
                                   double tol = 0.0) {
        if (a.rows() != a.cols()) {
            throw std::invalid_argument("BandedMatrix::from_dense: matrix not square");
        }
        const Eigen::Index d = a.rows();
        const Eigen::Index w = std::min<Eigen::Index>(half_width, d - 1);
        BandedMatrix out(d, w);
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) {
                const Eigen::Index k = j - i;
                if (k < -w || k > w) {
                    if (std::abs(a(i, j)) > tol) {
                        throw std::invalid_argument("BandedMatrix::from_dense: entry outside band");
                    }
                    continue;
                }
                out.at(i, j) = a(i, j);
            }
        }
        return out;
    }

    Eigen::Index dim() const { return dim_; }
    Eigen::Index half_width() const { return half_width_; }

    // Diagonal k holds A(i, i + k); it is indexed by min(i, i + k).
    Vector<Scalar>& diag(Eigen::Index k) { return diags_[static_cast<std::size_t>(k + half_width_)]; }
    const Vector<Scalar>& diag(Eigen::Index k) const {
        return diags_[static_cast<std::size_t>(k + half_width_)];
    }

    Scalar& at(Eigen::Index i, Eigen::Index j) { return diag(j - i)(std::min(i, j)); }
    Scalar at(Eigen::Index i, Eigen::Index j) const {
        const Eigen::Index k = j - i;
        if (k < -half_width_ || k > half_width_) return Scalar(0);
        return diag(k)(std::min(i, j));
    }

    Matrix<Scalar> to_dense() const {
        Matrix<Scalar> a = Matrix<Scalar>::Zero(dim_, dim_);
        for (Eigen::Index k = -half_width_; k <= half_width_; ++k) {
            const auto& v = diag(k);
            for (Eigen::Index m = 0; m < v.size(); ++m) {
                const Eigen::Index i = k >= 0 ? m : m - k;
                a(i, i + k) = v(m);
            }
        }
        return a;
    }

    BandedMatrix adjoint() const {
        BandedMatrix out(dim_, half_width_);
        for (Eigen::Index k = -half_width_; k <= half_width_; ++k) {
            out.diag(-k) = diag(k).conjugate();
        }
        return out;
    }

    // this <- this + alpha * other, widening the band when needed.
    BandedMatrix& add_scaled(const BandedMatrix& other, Scalar alpha) {
        if (other.dim_ != dim_) throw std::invalid_argument("BandedMatrix: dimension mismatch");
        if (other.half_width_ > half_width_) {
            BandedMatrix wide(dim_, other.half_width_);
            for (Eigen::Index k = -half_width_; k <= half_width_; ++k) wide.diag(k) = diag(k);
            *this = std::move(wide);
        }
        for (Eigen::Index k = -other.half_width_; k <= other.half_width_; ++k) {
            diag(k) += alpha * other.diag(k);
        }
        return *this;
    }

private:
    Eigen::Index len(Eigen::Index k) const { return dim_ - (k < 0 ? -k : k); }

    Eigen::Index dim_ = 0;
    Eigen::Index half_width_ = 0;
    std::vector<Vector<Scalar>> diags_;
};

// out += alpha * A * x
template <typename Scalar, typename In, typename Out>
void banded_left_multiply_add(const BandedMatrix<Scalar>& a, const Eigen::MatrixBase<In>& x,
                              Eigen::MatrixBase<Out>& out, Scalar alpha = Scalar(1)) {
    const Eigen::Index d = a.dim();
    const Eigen::Index cols = x.cols();
    for (Eigen::Index k = -a.half_width(); k <= a.half_width(); ++k) {
        const Vector<Scalar> coeff = alpha * a.diag(k);
        const Eigen::Index n = d - (k < 0 ? -k : k);
        if (n <= 0) continue;
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (k >= 0) {
                out.col(j).head(n) += coeff.cwiseProduct(x.col(j).tail(n));
            } else {
                out.col(j).tail(n) += coeff.cwiseProduct(x.col(j).head(n));
            }
        }
    }
}

// out += alpha * x * B
template <typename Scalar, typename In, typename Out>
void banded_right_multiply_add(const Eigen::MatrixBase<In>& x, const BandedMatrix<Scalar>& b,
                               Eigen::MatrixBase<Out>& out, Scalar alpha = Scalar(1)) {
    for (Eigen::Index k = -b.half_width(); k <= b.half_width(); ++k) {
        const auto& v = b.diag(k);
        // B(l, l + k) contributes x.col(l) to out.col(l + k)
        for (Eigen::Index m = 0; m < v.size(); ++m) {
            const Eigen::Index l = k >= 0 ? m : m - k;
            out.col(l + k) += (alpha * v(m)) * x.col(l);
        }
    }
}

template <typename Scalar, typename Derived>
Matrix<Scalar> operator*(const BandedMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& x) {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(a.dim(), x.cols());
    banded_left_multiply_add(a, x, out);
    return out;
}

template <typename Scalar, typename Derived>
Matrix<Scalar> operator*(const Eigen::MatrixBase<Derived>& x, const BandedMatrix<Scalar>& b) {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(x.rows(), b.dim());
    banded_right_multiply_add(x, b, out);
    return out;
}

}  // namespace dimer
