#include "gdvae/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace gdvae {

bool DenseMatrix::all_finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string DenseMatrix::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return DenseMatrix();
    DenseMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.rows; ++r) {
        if (static_cast<int>(rows[r].size()) != m.cols)
            throw std::invalid_argument("from_rows: ragged input");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r));
    }
    return m;
}

static void check_mm(int ar, int ac, int br, int bc, int cr, int cc,
                     const char* which, const DenseMatrix& a, const DenseMatrix& b) {
    if (ac != br || cr != ar || cc != bc)
        throw std::invalid_argument(std::string("matmul_") + which + ": shape mismatch " +
                                    a.shape_str() + " vs " + b.shape_str());
}

void matmul_nn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate) {
    check_mm(a.rows, a.cols, b.rows, b.cols, c.rows, c.cols, "nn", a, b);
    if (!accumulate) c.fill(0.0);
    for (int i = 0; i < a.rows; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int k = 0; k < a.cols; ++k) {
            double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (int j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
}

// c[i,j] (+)= sum_k a[i,k] * b[j,k]
void matmul_nt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate) {
    check_mm(a.rows, a.cols, b.cols, b.rows, c.rows, c.cols, "nt", a, b);
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
            if (accumulate)
                ci[j] += s;
            else
                ci[j] = s;
        }
    }
}

// c[k,j] (+)= sum_i a[i,k] * b[i,j]
void matmul_tn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate) {
    check_mm(a.cols, a.rows, b.rows, b.cols, c.rows, c.cols, "tn", a, b);
    if (!accumulate) c.fill(0.0);
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (int k = 0; k < a.cols; ++k) {
            double aik = ai[k];
            if (aik == 0.0) continue;
            double* ck = c.row(k);
            for (int j = 0; j < b.cols; ++j) ck[j] += aik * bi[j];
        }
    }
}

Parameter& ParameterStore::create(const std::string& name, int rows, int cols) {
    if (by_name_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
    owned_.push_back(std::make_unique<Parameter>(name, rows, cols));
    Parameter* p = owned_.back().get();
    order_.push_back(p);
    by_name_[name] = p;
    return *p;
}

Parameter* ParameterStore::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
}

}  // namespace gdvae
