#include "plfem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "plfem/errors.hpp"

namespace plfem {

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            s += values_[k] * x[col_idx_[k]];
        }
        y[i] = s;
    }
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
    std::vector<double> y;
    multiply(x, y);
    return y;
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] == i) d[i] = values_[k];
        }
    }
    return d;
}

SparseMatrix SparseMatrix::axpy(double scale, const SparseMatrix& other) const {
    if (other.n_ != n_) throw InvalidParameter("SparseMatrix::axpy: dimension mismatch");
    Builder builder(n_);
    for (int i = 0; i < n_; ++i) {
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            builder.add(i, col_idx_[k], values_[k]);
        }
        for (int k = other.row_ptr_[i]; k < other.row_ptr_[i + 1]; ++k) {
            builder.add(i, other.col_idx_[k], scale * other.values_[k]);
        }
    }
    return builder.build(symmetric_ && other.symmetric_);
}

double SparseMatrix::at(int i, int j) const {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        if (col_idx_[k] == j) return values_[k];
    }
    return 0.0;
}

double SparseMatrix::asymmetry() const {
    double worst = 0.0;
    for (int i = 0; i < n_; ++i) {
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            worst = std::fmax(worst, std::fabs(values_[k] - at(col_idx_[k], i)));
        }
    }
    return worst;
}

void SparseMatrix::write_coordinate(std::ostream& out) const {
    char buf[64];
    for (int i = 0; i < n_; ++i) {
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i, col_idx_[k], values_[k]);
            out << buf;
        }
    }
}

SparseMatrix SparseMatrix::Builder::build(bool symmetric) const {
    std::vector<Triplet> sorted = triplets_;
    std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });

    SparseMatrix m(n_);
    m.symmetric_ = symmetric;
    m.col_idx_.reserve(sorted.size());
    m.values_.reserve(sorted.size());

    std::size_t k = 0;
    for (int row = 0; row < n_; ++row) {
        m.row_ptr_[row] = static_cast<int>(m.values_.size());
        while (k < sorted.size() && sorted[k].i == row) {
            const int j = sorted[k].j;
            double v = 0.0;
            while (k < sorted.size() && sorted[k].i == row && sorted[k].j == j) {
                v += sorted[k].v;
                ++k;
            }
            if (v != 0.0) {
                if (!std::isfinite(v)) {
                    throw EvaluationError("sparse assembly produced a non-finite entry",
                                          row, j);
                }
                m.col_idx_.push_back(j);
                m.values_.push_back(v);
            }
        }
    }
    m.row_ptr_[n_] = static_cast<int>(m.values_.size());
    return m;
}

} // namespace plfem
