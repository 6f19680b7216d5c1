// Compressed-row sparse matrix with triplet assembly.
#ifndef PLFEM_SPARSE_HPP
#define PLFEM_SPARSE_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace plfem {

class SparseMatrix {
public:
    SparseMatrix() = default;
    explicit SparseMatrix(int n) : n_(n), row_ptr_(n + 1, 0) {}

    int size() const { return n_; }
    int nnz() const { return static_cast<int>(values_.size()); }
    bool symmetric_flag() const { return symmetric_; }
    void set_symmetric_flag(bool s) { symmetric_ = s; }

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

    // y = A x
    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> multiply(const std::vector<double>& x) const;

    std::vector<double> diagonal() const;

    // this + scale * other (matching dimensions required).
    SparseMatrix axpy(double scale, const SparseMatrix& other) const;

    // Entry lookup; zero when the position is not stored.
    double at(int i, int j) const;

    // Maximum |a_ij - a_ji| over stored entries.
    double asymmetry() const;

    // Coordinate text format, one "i j value" line per stored entry.
    void write_coordinate(std::ostream& out) const;

    // Builds CSR from triplets, summing duplicates and dropping exact zeros.
    class Builder {
    public:
        explicit Builder(int n) : n_(n) {}
        void add(int i, int j, double v) {
            if (v != 0.0) triplets_.push_back({i, j, v});
        }
        SparseMatrix build(bool symmetric = false) const;

    private:
        struct Triplet {
            int i, j;
            double v;
        };
        int n_;
        std::vector<Triplet> triplets_;
    };

private:
    int n_ = 0;
    bool symmetric_ = false;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

} // namespace plfem

#endif
