// Dense square matrices over the class group (dimension = period T, small).
#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace copoly {

class Mat {
  public:
    Mat() = default;
    explicit Mat(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

    std::size_t dim() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    static Mat identity(std::size_t n) {
        Mat m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    Mat operator*(const Mat& rhs) const;
    Mat operator+(const Mat& rhs) const;
    Mat operator-(const Mat& rhs) const;
    Mat scaled(double s) const;

    std::vector<double> apply(const std::vector<double>& x) const;

    double max_abs() const;

  private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

// Solves (I - B) X = I by Gaussian elimination with partial pivoting plus two
// rounds of iterative refinement. Throws std::runtime_error on a (near-)
// singular pivot.
Mat resolvent(const Mat& b);

// General linear solve A x = rhs (same elimination core).
std::vector<double> solve(const Mat& a, const std::vector<double>& rhs);

}  // namespace copoly
