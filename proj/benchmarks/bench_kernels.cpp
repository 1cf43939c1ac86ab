// Serial references vs OpenMP versions of the data-parallel kernels.
// Threads default to OMP_NUM_THREADS / the core count.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "clutterpush/kernels.hpp"
#include "clutterpush/rng.hpp"

using namespace cpush;

namespace {

std::vector<std::uint8_t> random_mask(int n, double density, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint8_t> m(static_cast<std::size_t>(n) * n);
    for (auto& v : m) v = rng.uniform() < density ? 1 : 0;
    return m;
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1, 1);
    return v;
}

template <auto Fn>
void bm_edt(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const auto mask = random_mask(n, 0.05, 1);
    for (auto _ : st) benchmark::DoNotOptimize(Fn(mask, n, n));
    st.SetItemsProcessed(st.iterations() * n * n);
}

template <auto Fn>
void bm_rasterize(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const GridGeometry geom{n, n, 1.0 / n, {}};
    std::vector<double> image(geom.size());
    const ShapeSpec shape = ShapeSpec::box(0.3, 0.2);
    for (auto _ : st) {
        Fn(image, geom, shape, Pose2D{0.5, 0.5, 0.4}, 0.05);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * n * n);
}

template <auto Fn>
void bm_window(benchmark::State& st) {
    const int size = static_cast<int>(st.range(0));
    const GridGeometry geom{256, 256, 1.0 / 256, {}};
    const auto image = random_values(geom.size(), 2);
    std::vector<double> out(static_cast<std::size_t>(size) * size);
    for (auto _ : st) {
        Fn(image, geom, Vec2{0.5, 0.5}, 0.7, 0.6 / size, size, out);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * size * size);
}

template <auto Fn>
void bm_cosine(benchmark::State& st) {
    const std::size_t rows = static_cast<std::size_t>(st.range(0)), dim = 49;
    const auto data = random_values(rows * dim, 3);
    const auto query = random_values(dim, 4);
    const std::vector<std::uint8_t> mask(dim, 1);
    std::vector<double> out(rows);
    for (auto _ : st) {
        Fn(data, dim, query, mask, out);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(rows));
}

template <auto Fn>
void bm_conv(benchmark::State& st) {
    const int hw = static_cast<int>(st.range(0)), in_c = 8, out_c = 16, k = 3;
    const auto in = random_values(static_cast<std::size_t>(in_c) * hw * hw, 5);
    const auto w = random_values(static_cast<std::size_t>(out_c) * in_c * k * k, 6);
    const auto b = random_values(out_c, 7);
    std::vector<double> out(static_cast<std::size_t>(out_c) * hw * hw);
    for (auto _ : st) {
        Fn(in, in_c, hw, hw, w, b, out_c, k, k, 1, 1, 1, 1, out, hw, hw);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * out_c * hw * hw);
}

} // namespace

BENCHMARK(bm_edt<kernels::serial::squared_edt>)->Name("edt/serial")->Arg(128)->Arg(512);
BENCHMARK(bm_edt<kernels::omp::squared_edt>)->Name("edt/omp")->Arg(128)->Arg(512);
BENCHMARK(bm_rasterize<kernels::serial::rasterize_max>)->Name("rasterize/serial")->Arg(256)->Arg(1024);
BENCHMARK(bm_rasterize<kernels::omp::rasterize_max>)->Name("rasterize/omp")->Arg(256)->Arg(1024);
BENCHMARK(bm_window<kernels::serial::sample_window>)->Name("window/serial")->Arg(64)->Arg(256);
BENCHMARK(bm_window<kernels::omp::sample_window>)->Name("window/omp")->Arg(64)->Arg(256);
BENCHMARK(bm_cosine<kernels::serial::cosine_rows>)->Name("cosine/serial")->Arg(2048)->Arg(1 << 16);
BENCHMARK(bm_cosine<kernels::omp::cosine_rows>)->Name("cosine/omp")->Arg(2048)->Arg(1 << 16);
BENCHMARK(bm_conv<kernels::serial::conv2d>)->Name("conv2d/serial")->Arg(32)->Arg(64);
BENCHMARK(bm_conv<kernels::omp::conv2d>)->Name("conv2d/omp")->Arg(32)->Arg(64);

BENCHMARK_MAIN();
