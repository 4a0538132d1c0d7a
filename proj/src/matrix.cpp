#include "odflow/matrix.hpp"

#include <cmath>

#include "odflow/error.hpp"

namespace odflow {

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_)
        throw DomainError("Matrix: dimension mismatch in product");
    Matrix out(rows_, rhs.cols_);
    for (int c = 0; c < rhs.cols_; ++c) {
        double* oc = out.col(c);
        for (int k = 0; k < cols_; ++k) {
            double v = rhs(k, c);
            if (v == 0.0) continue;
            const double* lc = col(k);
            for (int r = 0; r < rows_; ++r) oc[r] += lc[r] * v;
        }
    }
    return out;
}

Matrix Matrix::transpose() const {
    Matrix out(cols_, rows_);
    for (int c = 0; c < cols_; ++c)
        for (int r = 0; r < rows_; ++r) out(c, r) = (*this)(r, c);
    return out;
}

double Matrix::frobenius_distance(const Matrix& rhs) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
        double d = a_[i] - rhs.a_[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Matrix matrix_power(const Matrix& m, int p) {
    Matrix out = Matrix::identity(m.rows());
    for (int k = 0; k < p; ++k) out = m * out;
    return out;
}

}  // namespace odflow
