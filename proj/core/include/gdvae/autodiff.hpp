#pragma once

#include "gdvae/graph.hpp"
#include "gdvae/tensor.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace gdvae {

// One biterm: an unordered code pair with a multiplicity. Indices address
// columns of the topic-decoder matrix (global code indices).
struct BitermPair {
    int i;
    int j;
    double count;
};
using BitermBag = std::vector<BitermPair>;

// Reverse-mode tape over DenseMatrix values. Build a computation by calling
// op methods (each returns a node id), then call backward(root) on a 1x1
// node. Gradients accumulate into Parameter::grad for every parameter leaf;
// the caller is responsible for zeroing those between steps. Node values
// stay valid for the lifetime of the tape.
class Tape {
public:
    int input(DenseMatrix x);
    int param(Parameter& p);  // memoized: one node per parameter

    int matmul(int a, int b);
    int spmm(const SparseMatrix& s, int x);  // s must outlive the tape
    int add(int a, int b);
    int add_row(int m, int r);  // broadcast a 1xC row over an NxC matrix
    int relu(int a);
    int tanh_op(int a);
    int row_softmax(int a);
    int row_log_softmax(int a);
    // Column-wise max over the listed rows per group; empty group gives a
    // zero row (and routes no gradient).
    int max_pool_rows(int a, std::vector<std::vector<int>> groups);
    int gather_rows(int a, std::vector<int> rows);
    int concat_rows(int a, int b);
    int slice_cols(int a, int c0, int c1);
    // mu + exp(logsigma) * eps, elementwise; eps is a constant.
    int reparam(int mu, int logsigma, DenseMatrix eps);
    // sum(a * w) as a 1x1 node; w is a constant weight matrix.
    int weighted_sum(int a, DenseMatrix w);
    int scale(int a, double c);

    // sum_docs sum_pairs count * log(sum_l z[doc,l] beta[l,i] beta[l,j]),
    // with the mixture probability floored at 1e-12 inside the log.
    int biterm_ll(int z, int beta, std::vector<BitermBag> bags);
    // sum over entries of 0.5 (mu^2 + sigma^2 - 1 - 2 log sigma)
    int kl_standard_normal(int mu, int logsigma);
    // KL(N(mu, sigma^2) || N(prior_mu, prior_var)), diagonal, priors
    // broadcast over rows; summed over all entries.
    int kl_gaussian_prior(int mu, int logsigma, std::vector<double> prior_mu,
                          std::vector<double> prior_var);

    const DenseMatrix& value(int id) const { return nodes_[id].val; }
    double scalar_value(int id) const;
    size_t size() const { return nodes_.size(); }

    void backward(int root);

private:
    enum class OpKind : uint8_t {
        input, param, matmul, spmm, add, add_row, relu, tanh_op, row_softmax,
        row_log_softmax, max_pool_rows, gather_rows, concat_rows, slice_cols,
        reparam, weighted_sum, scale, biterm_ll, kl_std, kl_gauss
    };

    struct Node {
        OpKind op;
        int a = -1;
        int b = -1;
        DenseMatrix val;
        Parameter* parameter = nullptr;
        const SparseMatrix* sparse = nullptr;
        double factor = 0.0;
        int c0 = 0, c1 = 0;
        DenseMatrix aux;                       // reparam eps / weighted_sum weights
        std::vector<int> rows;                 // gather_rows
        std::vector<std::vector<int>> groups;  // max_pool_rows
        std::vector<int> argmax;               // max_pool_rows routing
        std::vector<BitermBag> bags;
        std::vector<double> prior_mu, prior_var;
    };

    int push(Node n);
    const DenseMatrix& val(int id) const { return nodes_[id].val; }
    [[noreturn]] void shape_error(const char* op, int a, int b) const;

    std::vector<Node> nodes_;
    std::unordered_map<const Parameter*, int> param_nodes_;
};

}  // namespace gdvae
