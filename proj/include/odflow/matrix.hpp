#ifndef odflow_matrix_hpp
#define odflow_matrix_hpp

#include <cstddef>
#include <vector>

namespace odflow {

// Small dense column-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return a_[static_cast<std::size_t>(c) * rows_ + r]; }
    double operator()(int r, int c) const { return a_[static_cast<std::size_t>(c) * rows_ + r]; }

    double* col(int c) { return a_.data() + static_cast<std::size_t>(c) * rows_; }
    const double* col(int c) const { return a_.data() + static_cast<std::size_t>(c) * rows_; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    Matrix operator*(const Matrix& rhs) const;
    Matrix transpose() const;

    // Frobenius norm of (*this - rhs).
    double frobenius_distance(const Matrix& rhs) const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

Matrix matrix_power(const Matrix& m, int p);

}  // namespace odflow

#endif
