// Serial reference against the OpenMP kernels on the hot loops of a synthesis.
#include "rapidstab/basis.hpp"
#include "rapidstab/spectral.hpp"
#include "rapidstab/stabilizer.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace rapidstab;

namespace {

const DipolarMoment kSquare = DipolarMoment::polynomial({0, 0, 1});

void BM_TensorsSerial(benchmark::State& st) {
    ModeTable t = make_mode_table(kSquare, static_cast<int>(st.range(0)), 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(kernel_tensors_serial(t));
}

void BM_TensorsOmp(benchmark::State& st) {
    ModeTable t = make_mode_table(kSquare, static_cast<int>(st.range(0)), 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(kernel_tensors_omp(t));
}

struct ProjectionInput {
    Quadrature q;
    std::vector<double> f;
    explicit ProjectionInput(int N) : q(gauss_legendre(default_panels(N))), f(q.x.size()) {
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(q.x[i]) * std::sin(5 * q.x[i]);
    }
};

void BM_ProjectSerial(benchmark::State& st) {
    int N = static_cast<int>(st.range(0));
    ProjectionInput in(N);
    for (auto _ : st) benchmark::DoNotOptimize(project_serial(in.f, in.q, N));
}

void BM_ProjectOmp(benchmark::State& st) {
    int N = static_cast<int>(st.range(0));
    ProjectionInput in(N);
    for (auto _ : st) benchmark::DoNotOptimize(project_omp(in.f, in.q, N));
}

Mat basis_matrix(int N) {
    ModeTable t = make_mode_table(kSquare, N, 1.0);
    return build_basis(t, kernel_tensors(t)).G2;
}

void BM_GramSerial(benchmark::State& st) {
    Mat G = basis_matrix(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(gram_serial(G));
}

void BM_GramOmp(benchmark::State& st) {
    Mat G = basis_matrix(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(gram_omp(G));
}

void BM_Synthesize(benchmark::State& st) {
    int N = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(synthesize(kSquare, N, 1.0));
}

}  // namespace

BENCHMARK(BM_TensorsSerial)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TensorsOmp)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_ProjectSerial)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ProjectOmp)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_GramSerial)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramOmp)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Synthesize)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
