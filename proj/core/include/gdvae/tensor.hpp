#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace gdvae {

// Row-major dense matrix of doubles. Vectors are 1xN or Nx1 as convenient.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
    double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }

    size_t size() const { return v.size(); }
    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
    void fill(double x) { std::fill(v.begin(), v.end(), x); }
    bool all_finite() const;
    std::string shape_str() const;

    static DenseMatrix zeros(int r, int c) { return DenseMatrix(r, c); }
    static DenseMatrix identity(int n);
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);
};

// C (+)= A B / A Bt / At B. Fixed loop order (axpy over contiguous rows),
// so accumulation order and therefore results are bit-stable.
void matmul_nn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate);
void matmul_nt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate);
void matmul_tn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate);

// Trainable tensor plus gradient and Adam state. Gradient is accumulated by
// Tape::backward and must be zeroed before each optimization step.
struct Parameter {
    std::string name;
    DenseMatrix value;
    DenseMatrix grad;
    DenseMatrix moment1;
    DenseMatrix moment2;
    int64_t step = 0;

    Parameter(std::string n, int r, int c)
        : name(std::move(n)), value(r, c), grad(r, c), moment1(r, c), moment2(r, c) {}

    void zero_grad() { grad.fill(0.0); }
};

// Owns parameters, preserves creation order (checkpoint and optimizer order).
class ParameterStore {
public:
    Parameter& create(const std::string& name, int rows, int cols);
    Parameter* find(const std::string& name) const;
    const std::vector<Parameter*>& list() const { return order_; }

private:
    std::vector<std::unique_ptr<Parameter>> owned_;
    std::vector<Parameter*> order_;
    std::unordered_map<std::string, Parameter*> by_name_;
};

}  // namespace gdvae
