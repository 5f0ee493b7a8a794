#include "gdvae/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace gdvae {

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::shape_error(const char* op, int a, int b) const {
    std::string msg = std::string(op) + ": shape mismatch " + nodes_[a].val.shape_str();
    if (b >= 0) msg += " vs " + nodes_[b].val.shape_str();
    throw std::invalid_argument(msg);
}

double Tape::scalar_value(int id) const {
    const DenseMatrix& m = nodes_[id].val;
    if (m.rows != 1 || m.cols != 1) throw std::logic_error("scalar_value: node is " + m.shape_str());
    return m.v[0];
}

int Tape::input(DenseMatrix x) {
    Node n;
    n.op = OpKind::input;
    n.val = std::move(x);
    return push(std::move(n));
}

int Tape::param(Parameter& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return it->second;
    Node n;
    n.op = OpKind::param;
    n.parameter = &p;
    n.val = p.value;
    int id = push(std::move(n));
    param_nodes_[&p] = id;
    return id;
}

int Tape::matmul(int a, int b) {
    const DenseMatrix& A = val(a);
    const DenseMatrix& B = val(b);
    if (A.cols != B.rows) shape_error("matmul", a, b);
    Node n;
    n.op = OpKind::matmul;
    n.a = a;
    n.b = b;
    n.val = DenseMatrix(A.rows, B.cols);
    matmul_nn(A, B, n.val, false);
    return push(std::move(n));
}

int Tape::spmm(const SparseMatrix& s, int x) {
    const DenseMatrix& X = val(x);
    if (!s.finalized()) throw std::logic_error("spmm: sparse matrix not finalized");
    if (s.cols != X.rows)
        throw std::invalid_argument("spmm: shape mismatch " + std::to_string(s.rows) + "x" +
                                    std::to_string(s.cols) + " vs " + X.shape_str());
    Node n;
    n.op = OpKind::spmm;
    n.a = x;
    n.sparse = &s;
    n.val = DenseMatrix(s.rows, X.cols);
    for (const auto& e : s.entries) {
        double* out = n.val.row(e.row);
        const double* in = X.row(e.col);
        for (int j = 0; j < X.cols; ++j) out[j] += e.weight * in[j];
    }
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    const DenseMatrix& A = val(a);
    const DenseMatrix& B = val(b);
    if (!A.same_shape(B)) shape_error("add", a, b);
    Node n;
    n.op = OpKind::add;
    n.a = a;
    n.b = b;
    n.val = A;
    for (size_t i = 0; i < n.val.size(); ++i) n.val.v[i] += B.v[i];
    return push(std::move(n));
}

int Tape::add_row(int m, int r) {
    const DenseMatrix& M = val(m);
    const DenseMatrix& R = val(r);
    if (R.rows != 1 || R.cols != M.cols) shape_error("add_row", m, r);
    Node n;
    n.op = OpKind::add_row;
    n.a = m;
    n.b = r;
    n.val = M;
    for (int i = 0; i < M.rows; ++i) {
        double* out = n.val.row(i);
        for (int j = 0; j < M.cols; ++j) out[j] += R.v[j];
    }
    return push(std::move(n));
}

int Tape::relu(int a) {
    Node n;
    n.op = OpKind::relu;
    n.a = a;
    n.val = val(a);
    for (double& x : n.val.v) x = x > 0.0 ? x : 0.0;
    return push(std::move(n));
}

int Tape::tanh_op(int a) {
    Node n;
    n.op = OpKind::tanh_op;
    n.a = a;
    n.val = val(a);
    for (double& x : n.val.v) x = std::tanh(x);
    return push(std::move(n));
}

int Tape::row_softmax(int a) {
    Node n;
    n.op = OpKind::row_softmax;
    n.a = a;
    n.val = val(a);
    for (int i = 0; i < n.val.rows; ++i) {
        double* row = n.val.row(i);
        double m = row[0];
        for (int j = 1; j < n.val.cols; ++j) m = std::max(m, row[j]);
        double s = 0.0;
        for (int j = 0; j < n.val.cols; ++j) {
            row[j] = std::exp(row[j] - m);
            s += row[j];
        }
        for (int j = 0; j < n.val.cols; ++j) row[j] /= s;
    }
    return push(std::move(n));
}

int Tape::row_log_softmax(int a) {
    Node n;
    n.op = OpKind::row_log_softmax;
    n.a = a;
    n.val = val(a);
    for (int i = 0; i < n.val.rows; ++i) {
        double* row = n.val.row(i);
        double m = row[0];
        for (int j = 1; j < n.val.cols; ++j) m = std::max(m, row[j]);
        double s = 0.0;
        for (int j = 0; j < n.val.cols; ++j) s += std::exp(row[j] - m);
        double lse = m + std::log(s);
        for (int j = 0; j < n.val.cols; ++j) row[j] -= lse;
    }
    return push(std::move(n));
}

int Tape::max_pool_rows(int a, std::vector<std::vector<int>> groups) {
    const DenseMatrix& A = val(a);
    Node n;
    n.op = OpKind::max_pool_rows;
    n.a = a;
    n.groups = std::move(groups);
    n.val = DenseMatrix(static_cast<int>(n.groups.size()), A.cols);
    n.argmax.assign(n.groups.size() * static_cast<size_t>(A.cols), -1);
    for (size_t g = 0; g < n.groups.size(); ++g) {
        const auto& rows = n.groups[g];
        if (rows.empty()) continue;  // zero row, no gradient route
        double* out = n.val.row(static_cast<int>(g));
        int* arg = n.argmax.data() + g * static_cast<size_t>(A.cols);
        for (int r : rows)
            if (r < 0 || r >= A.rows) throw std::invalid_argument("max_pool_rows: row out of range");
        for (int j = 0; j < A.cols; ++j) {
            double best = A.at(rows[0], j);
            int best_r = rows[0];
            for (size_t t = 1; t < rows.size(); ++t) {
                double x = A.at(rows[t], j);
                if (x > best) {  // ties keep the earliest listed row
                    best = x;
                    best_r = rows[t];
                }
            }
            out[j] = best;
            arg[j] = best_r;
        }
    }
    return push(std::move(n));
}

int Tape::gather_rows(int a, std::vector<int> rows) {
    const DenseMatrix& A = val(a);
    Node n;
    n.op = OpKind::gather_rows;
    n.a = a;
    n.rows = std::move(rows);
    n.val = DenseMatrix(static_cast<int>(n.rows.size()), A.cols);
    for (size_t t = 0; t < n.rows.size(); ++t) {
        int r = n.rows[t];
        if (r < 0 || r >= A.rows) throw std::invalid_argument("gather_rows: row out of range");
        std::copy(A.row(r), A.row(r) + A.cols, n.val.row(static_cast<int>(t)));
    }
    return push(std::move(n));
}

int Tape::concat_rows(int a, int b) {
    const DenseMatrix& A = val(a);
    const DenseMatrix& B = val(b);
    if (A.cols != B.cols) shape_error("concat_rows", a, b);
    Node n;
    n.op = OpKind::concat_rows;
    n.a = a;
    n.b = b;
    n.val = DenseMatrix(A.rows + B.rows, A.cols);
    std::copy(A.v.begin(), A.v.end(), n.val.v.begin());
    std::copy(B.v.begin(), B.v.end(), n.val.v.begin() + A.v.size());
    return push(std::move(n));
}

int Tape::slice_cols(int a, int c0, int c1) {
    const DenseMatrix& A = val(a);
    if (c0 < 0 || c1 > A.cols || c0 >= c1)
        throw std::invalid_argument("slice_cols: bad range [" + std::to_string(c0) + ", " +
                                    std::to_string(c1) + ") of " + A.shape_str());
    Node n;
    n.op = OpKind::slice_cols;
    n.a = a;
    n.c0 = c0;
    n.c1 = c1;
    n.val = DenseMatrix(A.rows, c1 - c0);
    for (int i = 0; i < A.rows; ++i)
        std::copy(A.row(i) + c0, A.row(i) + c1, n.val.row(i));
    return push(std::move(n));
}

int Tape::reparam(int mu, int logsigma, DenseMatrix eps) {
    const DenseMatrix& M = val(mu);
    const DenseMatrix& S = val(logsigma);
    if (!M.same_shape(S)) shape_error("reparam", mu, logsigma);
    if (!M.same_shape(eps))
        throw std::invalid_argument("reparam: eps shape " + eps.shape_str() + " vs " + M.shape_str());
    Node n;
    n.op = OpKind::reparam;
    n.a = mu;
    n.b = logsigma;
    n.aux = std::move(eps);
    n.val = M;
    for (size_t i = 0; i < n.val.size(); ++i) n.val.v[i] += std::exp(S.v[i]) * n.aux.v[i];
    return push(std::move(n));
}

int Tape::weighted_sum(int a, DenseMatrix w) {
    const DenseMatrix& A = val(a);
    if (!A.same_shape(w))
        throw std::invalid_argument("weighted_sum: weight shape " + w.shape_str() + " vs " +
                                    A.shape_str());
    Node n;
    n.op = OpKind::weighted_sum;
    n.a = a;
    n.aux = std::move(w);
    n.val = DenseMatrix(1, 1);
    double s = 0.0;
    for (size_t i = 0; i < A.size(); ++i) s += A.v[i] * n.aux.v[i];
    n.val.v[0] = s;
    return push(std::move(n));
}

int Tape::scale(int a, double c) {
    Node n;
    n.op = OpKind::scale;
    n.a = a;
    n.factor = c;
    n.val = val(a);
    for (double& x : n.val.v) x *= c;
    return push(std::move(n));
}

static constexpr double kProbFloor = 1e-12;

int Tape::biterm_ll(int z, int beta, std::vector<BitermBag> bags) {
    const DenseMatrix& Z = val(z);
    const DenseMatrix& B = val(beta);
    if (Z.cols != B.rows) shape_error("biterm_ll", z, beta);
    if (Z.rows != static_cast<int>(bags.size()))
        throw std::invalid_argument("biterm_ll: " + std::to_string(bags.size()) + " bags for " +
                                    Z.shape_str() + " mixtures");
    for (const auto& bag : bags)
        for (const auto& p : bag)
            if (p.i < 0 || p.i >= B.cols || p.j < 0 || p.j >= B.cols)
                throw std::invalid_argument("biterm_ll: code index out of range");
    Node n;
    n.op = OpKind::biterm_ll;
    n.a = z;
    n.b = beta;
    n.bags = std::move(bags);
    n.val = DenseMatrix(1, 1);
    double ll = 0.0;
    int L = Z.cols;
    for (int d = 0; d < Z.rows; ++d) {
        const double* zd = Z.row(d);
        for (const auto& pr : n.bags[d]) {
            double s = 0.0;
            for (int l = 0; l < L; ++l) s += zd[l] * B.at(l, pr.i) * B.at(l, pr.j);
            ll += pr.count * std::log(std::max(s, kProbFloor));
        }
    }
    n.val.v[0] = ll;
    return push(std::move(n));
}

int Tape::kl_standard_normal(int mu, int logsigma) {
    const DenseMatrix& M = val(mu);
    const DenseMatrix& S = val(logsigma);
    if (!M.same_shape(S)) shape_error("kl_standard_normal", mu, logsigma);
    Node n;
    n.op = OpKind::kl_std;
    n.a = mu;
    n.b = logsigma;
    n.val = DenseMatrix(1, 1);
    double kl = 0.0;
    for (size_t i = 0; i < M.size(); ++i) {
        double m = M.v[i], s = S.v[i];
        kl += 0.5 * (m * m + std::exp(2.0 * s) - 1.0 - 2.0 * s);
    }
    n.val.v[0] = kl;
    return push(std::move(n));
}

int Tape::kl_gaussian_prior(int mu, int logsigma, std::vector<double> prior_mu,
                            std::vector<double> prior_var) {
    const DenseMatrix& M = val(mu);
    const DenseMatrix& S = val(logsigma);
    if (!M.same_shape(S)) shape_error("kl_gaussian_prior", mu, logsigma);
    if (static_cast<int>(prior_mu.size()) != M.cols || prior_mu.size() != prior_var.size())
        throw std::invalid_argument("kl_gaussian_prior: prior length " +
                                    std::to_string(prior_mu.size()) + " vs " + M.shape_str());
    for (double v : prior_var)
        if (!(v > 0.0)) throw std::invalid_argument("kl_gaussian_prior: prior variance must be positive");
    Node n;
    n.op = OpKind::kl_gauss;
    n.a = mu;
    n.b = logsigma;
    n.prior_mu = std::move(prior_mu);
    n.prior_var = std::move(prior_var);
    n.val = DenseMatrix(1, 1);
    double kl = 0.0;
    for (int r = 0; r < M.rows; ++r) {
        const double* mr = M.row(r);
        const double* sr = S.row(r);
        for (int i = 0; i < M.cols; ++i) {
            double dm = mr[i] - n.prior_mu[i];
            double var = std::exp(2.0 * sr[i]);
            kl += 0.5 * ((var + dm * dm) / n.prior_var[i] - 1.0 + std::log(n.prior_var[i]) -
                         2.0 * sr[i]);
        }
    }
    n.val.v[0] = kl;
    return push(std::move(n));
}

void Tape::backward(int root) {
    if (root < 0 || root >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("backward: bad root node");
    if (nodes_[root].val.rows != 1 || nodes_[root].val.cols != 1)
        throw std::invalid_argument("backward: root must be a scalar, got " +
                                    nodes_[root].val.shape_str());
    std::vector<DenseMatrix> grads(nodes_.size());
    auto ensure = [&](int id) -> DenseMatrix& {
        DenseMatrix& g = grads[id];
        if (g.rows == 0) g = DenseMatrix(nodes_[id].val.rows, nodes_[id].val.cols);
        return g;
    };
    ensure(root).v[0] = 1.0;

    for (int id = root; id >= 0; --id) {
        Node& n = nodes_[id];
        const DenseMatrix& g = grads[id];
        if (g.rows == 0) continue;  // not on a path to the root
        switch (n.op) {
            case OpKind::input:
                break;
            case OpKind::param:
                for (size_t i = 0; i < g.size(); ++i) n.parameter->grad.v[i] += g.v[i];
                break;
            case OpKind::matmul:
                matmul_nt(g, nodes_[n.b].val, ensure(n.a), true);
                matmul_tn(nodes_[n.a].val, g, ensure(n.b), true);
                break;
            case OpKind::spmm: {
                DenseMatrix& da = ensure(n.a);
                for (const auto& e : n.sparse->entries) {
                    const double* gr = g.row(e.row);
                    double* dr = da.row(e.col);
                    for (int j = 0; j < g.cols; ++j) dr[j] += e.weight * gr[j];
                }
                break;
            }
            case OpKind::add: {
                DenseMatrix& da = ensure(n.a);
                DenseMatrix& db = ensure(n.b);
                for (size_t i = 0; i < g.size(); ++i) {
                    da.v[i] += g.v[i];
                    db.v[i] += g.v[i];
                }
                break;
            }
            case OpKind::add_row: {
                DenseMatrix& da = ensure(n.a);
                DenseMatrix& db = ensure(n.b);
                for (int i = 0; i < g.rows; ++i) {
                    const double* gr = g.row(i);
                    double* dr = da.row(i);
                    for (int j = 0; j < g.cols; ++j) {
                        dr[j] += gr[j];
                        db.v[j] += gr[j];
                    }
                }
                break;
            }
            case OpKind::relu: {
                DenseMatrix& da = ensure(n.a);
                const DenseMatrix& x = nodes_[n.a].val;
                for (size_t i = 0; i < g.size(); ++i)
                    if (x.v[i] > 0.0) da.v[i] += g.v[i];
                break;
            }
            case OpKind::tanh_op: {
                DenseMatrix& da = ensure(n.a);
                for (size_t i = 0; i < g.size(); ++i)
                    da.v[i] += g.v[i] * (1.0 - n.val.v[i] * n.val.v[i]);
                break;
            }
            case OpKind::row_softmax: {
                DenseMatrix& da = ensure(n.a);
                for (int i = 0; i < g.rows; ++i) {
                    const double* y = n.val.row(i);
                    const double* gr = g.row(i);
                    double dot = 0.0;
                    for (int j = 0; j < g.cols; ++j) dot += gr[j] * y[j];
                    double* dr = da.row(i);
                    for (int j = 0; j < g.cols; ++j) dr[j] += y[j] * (gr[j] - dot);
                }
                break;
            }
            case OpKind::row_log_softmax: {
                DenseMatrix& da = ensure(n.a);
                for (int i = 0; i < g.rows; ++i) {
                    const double* y = n.val.row(i);
                    const double* gr = g.row(i);
                    double gsum = 0.0;
                    for (int j = 0; j < g.cols; ++j) gsum += gr[j];
                    double* dr = da.row(i);
                    for (int j = 0; j < g.cols; ++j) dr[j] += gr[j] - std::exp(y[j]) * gsum;
                }
                break;
            }
            case OpKind::max_pool_rows: {
                DenseMatrix& da = ensure(n.a);
                for (size_t grp = 0; grp < n.groups.size(); ++grp) {
                    if (n.groups[grp].empty()) continue;
                    const int* arg = n.argmax.data() + grp * static_cast<size_t>(g.cols);
                    const double* gr = g.row(static_cast<int>(grp));
                    for (int j = 0; j < g.cols; ++j) da.at(arg[j], j) += gr[j];
                }
                break;
            }
            case OpKind::gather_rows: {
                DenseMatrix& da = ensure(n.a);
                for (size_t t = 0; t < n.rows.size(); ++t) {
                    const double* gr = g.row(static_cast<int>(t));
                    double* dr = da.row(n.rows[t]);
                    for (int j = 0; j < g.cols; ++j) dr[j] += gr[j];
                }
                break;
            }
            case OpKind::concat_rows: {
                DenseMatrix& da = ensure(n.a);
                DenseMatrix& db = ensure(n.b);
                size_t na = da.size();
                for (size_t i = 0; i < na; ++i) da.v[i] += g.v[i];
                for (size_t i = 0; i < db.size(); ++i) db.v[i] += g.v[na + i];
                break;
            }
            case OpKind::slice_cols: {
                DenseMatrix& da = ensure(n.a);
                for (int i = 0; i < g.rows; ++i) {
                    const double* gr = g.row(i);
                    double* dr = da.row(i) + n.c0;
                    for (int j = 0; j < g.cols; ++j) dr[j] += gr[j];
                }
                break;
            }
            case OpKind::reparam: {
                DenseMatrix& dmu = ensure(n.a);
                DenseMatrix& dls = ensure(n.b);
                const DenseMatrix& s = nodes_[n.b].val;
                for (size_t i = 0; i < g.size(); ++i) {
                    dmu.v[i] += g.v[i];
                    dls.v[i] += g.v[i] * n.aux.v[i] * std::exp(s.v[i]);
                }
                break;
            }
            case OpKind::weighted_sum: {
                DenseMatrix& da = ensure(n.a);
                double g0 = g.v[0];
                for (size_t i = 0; i < da.size(); ++i) da.v[i] += g0 * n.aux.v[i];
                break;
            }
            case OpKind::scale: {
                DenseMatrix& da = ensure(n.a);
                for (size_t i = 0; i < g.size(); ++i) da.v[i] += n.factor * g.v[i];
                break;
            }
            case OpKind::biterm_ll: {
                DenseMatrix& dz = ensure(n.a);
                DenseMatrix& dbeta = ensure(n.b);
                const DenseMatrix& Z = nodes_[n.a].val;
                const DenseMatrix& B = nodes_[n.b].val;
                double g0 = g.v[0];
                int L = Z.cols;
                for (int d = 0; d < Z.rows; ++d) {
                    const double* zd = Z.row(d);
                    double* dzr = dz.row(d);
                    for (const auto& pr : n.bags[d]) {
                        double s = 0.0;
                        for (int l = 0; l < L; ++l) s += zd[l] * B.at(l, pr.i) * B.at(l, pr.j);
                        if (s < kProbFloor) continue;  // flat region of the floored log
                        double coef = g0 * pr.count / s;
                        for (int l = 0; l < L; ++l) {
                            double bi = B.at(l, pr.i), bj = B.at(l, pr.j);
                            dzr[l] += coef * bi * bj;
                            dbeta.at(l, pr.i) += coef * zd[l] * bj;
                            dbeta.at(l, pr.j) += coef * zd[l] * bi;
                        }
                    }
                }
                break;
            }
            case OpKind::kl_std: {
                DenseMatrix& dmu = ensure(n.a);
                DenseMatrix& dls = ensure(n.b);
                const DenseMatrix& M = nodes_[n.a].val;
                const DenseMatrix& S = nodes_[n.b].val;
                double g0 = g.v[0];
                for (size_t i = 0; i < M.size(); ++i) {
                    dmu.v[i] += g0 * M.v[i];
                    dls.v[i] += g0 * (std::exp(2.0 * S.v[i]) - 1.0);
                }
                break;
            }
            case OpKind::kl_gauss: {
                DenseMatrix& dmu = ensure(n.a);
                DenseMatrix& dls = ensure(n.b);
                const DenseMatrix& M = nodes_[n.a].val;
                const DenseMatrix& S = nodes_[n.b].val;
                double g0 = g.v[0];
                for (int r = 0; r < M.rows; ++r) {
                    for (int i = 0; i < M.cols; ++i) {
                        double v = n.prior_var[i];
                        dmu.at(r, i) += g0 * (M.at(r, i) - n.prior_mu[i]) / v;
                        dls.at(r, i) += g0 * (std::exp(2.0 * S.at(r, i)) / v - 1.0);
                    }
                }
                break;
            }
        }
    }
}

}  // namespace gdvae
