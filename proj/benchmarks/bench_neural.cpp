#include "gdvae/autodiff.hpp"
#include "gdvae/rng.hpp"
#include "gdvae/tensor.hpp"

#include <benchmark/benchmark.h>

using namespace gdvae;

namespace {

DenseMatrix random_dense(int r, int c, uint64_t seed) {
    DenseMatrix m(r, c);
    Rng rng(seed);
    for (double& x : m.v) x = rng.normal();
    return m;
}

SparseMatrix random_sparse(int n, double density, uint64_t seed) {
    SparseMatrix s(n, n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        s.add(i, i, 1.0);
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < density) {
                double w = rng.uniform();
                s.add(i, j, w);
                s.add(j, i, w);
            }
    }
    s.finalize();
    return s;
}

}  // namespace

static void BM_MatmulNN(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    DenseMatrix a = random_dense(n, n, 1);
    DenseMatrix b = random_dense(n, n, 2);
    DenseMatrix out(n, n);
    for (auto _ : state) {
        matmul_nn(a, b, out, false);
        benchmark::DoNotOptimize(out.v.data());
    }
    state.SetItemsProcessed(state.iterations() * int64_t(n) * n * n);
}
BENCHMARK(BM_MatmulNN)->Arg(128)->Arg(256)->Arg(512);

static void BM_SpmmForward(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    SparseMatrix adj = random_sparse(n, 8.0 / n, 3);
    DenseMatrix h = random_dense(n, 128, 4);
    for (auto _ : state) {
        Tape t;
        int hid = t.input(h);
        int out = t.spmm(adj, hid);
        benchmark::DoNotOptimize(t.value(out).v.data());
    }
}
BENCHMARK(BM_SpmmForward)->Arg(1000)->Arg(4000);

static void BM_GcnLayerBackward(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    SparseMatrix adj = random_sparse(n, 8.0 / n, 5);
    Parameter f("f", n, 128);
    Parameter w("w", 128, 128);
    f.value = random_dense(n, 128, 6);
    w.value = random_dense(128, 128, 7);
    DenseMatrix ones(n, 128);
    ones.fill(1.0);
    for (auto _ : state) {
        f.zero_grad();
        w.zero_grad();
        Tape t;
        int h = t.relu(t.spmm(adj, t.matmul(t.param(f), t.param(w))));
        int loss = t.weighted_sum(h, ones);
        t.backward(loss);
        benchmark::DoNotOptimize(w.grad.v.data());
    }
}
BENCHMARK(BM_GcnLayerBackward)->Arg(1000)->Arg(4000);
