#include "copoly/mat.hpp"

#include <cmath>

namespace copoly {

Mat Mat::operator*(const Mat& rhs) const {
    Mat out(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = 0; k < n_; ++k) {
            const double aik = (*this)(i, k);
            for (std::size_t j = 0; j < n_; ++j) out(i, j) += aik * rhs(k, j);
        }
    return out;
}

Mat Mat::operator+(const Mat& rhs) const {
    Mat out = *this;
    for (std::size_t i = 0; i < n_ * n_; ++i) out.a_[i] += rhs.a_[i];
    return out;
}

Mat Mat::operator-(const Mat& rhs) const {
    Mat out = *this;
    for (std::size_t i = 0; i < n_ * n_; ++i) out.a_[i] -= rhs.a_[i];
    return out;
}

Mat Mat::scaled(double s) const {
    Mat out = *this;
    for (auto& v : out.a_) v *= s;
    return out;
}

std::vector<double> Mat::apply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) acc += (*this)(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

double Mat::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::fabs(v));
    return m;
}

namespace {

// LU factorization with partial pivoting, in place. perm holds row swaps.
void lu_factor(Mat& a, std::vector<std::size_t>& perm) {
    const std::size_t n = a.dim();
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::fabs(a(i, k)) > best) {
                best = std::fabs(a(i, k));
                piv = i;
            }
        }
        if (best < 1e-300) throw std::runtime_error("singular matrix in linear solve");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(perm[k], perm[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            a(i, k) /= a(k, k);
            const double lik = a(i, k);
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
        }
    }
}

void lu_solve_inplace(const Mat& lu, const std::vector<std::size_t>& perm,
                      const std::vector<double>& rhs, std::vector<double>& x) {
    const std::size_t n = lu.dim();
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[perm[i]];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
        x[i] /= lu(i, i);
    }
}

}  // namespace

std::vector<double> solve(const Mat& a, const std::vector<double>& rhs) {
    Mat lu = a;
    std::vector<std::size_t> perm;
    lu_factor(lu, perm);
    std::vector<double> x;
    lu_solve_inplace(lu, perm, rhs, x);
    // One refinement pass.
    std::vector<double> r = rhs;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) r[i] -= a(i, j) * x[j];
    std::vector<double> dx;
    lu_solve_inplace(lu, perm, r, dx);
    for (std::size_t i = 0; i < a.dim(); ++i) x[i] += dx[i];
    return x;
}

Mat resolvent(const Mat& b) {
    const std::size_t n = b.dim();
    Mat a = Mat::identity(n) - b;
    Mat lu = a;
    std::vector<std::size_t> perm;
    lu_factor(lu, perm);

    Mat x(n);
    std::vector<double> rhs(n), col;
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(rhs.begin(), rhs.end(), 0.0);
        rhs[j] = 1.0;
        lu_solve_inplace(lu, perm, rhs, col);
        for (std::size_t i = 0; i < n; ++i) x(i, j) = col[i];
    }
    // Two refinement rounds: X <- X + X0*(I - A X), residual in plain doubles.
    for (int pass = 0; pass < 2; ++pass) {
        Mat res = Mat::identity(n) - a * x;
        Mat corr(n);
        std::vector<double> rc(n), cc;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) rc[i] = res(i, j);
            lu_solve_inplace(lu, perm, rc, cc);
            for (std::size_t i = 0; i < n; ++i) corr(i, j) = cc[i];
        }
        x = x + corr;
    }
    return x;
}

}  // namespace copoly
