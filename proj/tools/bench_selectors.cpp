// Benchmark: serial reference kernels vs the OpenMP-parallel ones used by the
// MI filter and mRMR. Also cross-checks that both produce identical output.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "fsel/mi.hpp"
#include "fsel/rng.hpp"
#include "fsel/tabular.hpp"

using Clock = std::chrono::steady_clock;

namespace {

fsel::Dataset synth(std::size_t n, std::size_t l, std::uint64_t seed) {
    fsel::Rng rng(seed);
    fsel::Dataset d;
    d.name = "bench";
    d.task = fsel::TaskKind::classification;
    d.features.resize(l);
    std::vector<double> signal(n);
    for (auto& v : signal) v = rng.normal();
    for (std::size_t f = 0; f < l; ++f) {
        auto& col = d.features[f];
        col.name = "x" + std::to_string(f);
        col.kind = fsel::ColumnKind::numeric;
        col.values.resize(n);
        col.numeric.resize(n);
        double mix = (f % 4 == 0) ? 0.8 : 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            col.numeric[r] = mix * signal[r] + rng.normal();
            col.values[r] = fsel::render_number(col.numeric[r]);
        }
    }
    d.target.name = "y";
    d.target.kind = fsel::ColumnKind::categorical;
    d.target.values.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        d.target.values[r] = signal[r] > 0 ? "yes" : "no";
    }
    return d;
}

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000;
    std::size_t l = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 128;

    auto d = synth(n, l, 7);
    auto rows = fsel::all_rows(d);
    auto codes = fsel::discretize_dataset(d, rows);

    std::printf("dataset: %zu rows x %zu features\n\n", n, l);
    std::printf("%-28s %12s %12s %10s\n", "kernel", "serial (ms)", "parallel (ms)", "speedup");

    auto t0 = Clock::now();
    auto rel_s = fsel::relevance_serial(codes);
    double ts = ms_since(t0);
    t0 = Clock::now();
    auto rel_p = fsel::relevance_parallel(codes);
    double tp = ms_since(t0);
    for (std::size_t f = 0; f < l; ++f) {
        if (rel_s[f] != rel_p[f]) {
            std::fprintf(stderr, "relevance mismatch at feature %zu\n", f);
            return 1;
        }
    }
    std::printf("%-28s %12.2f %12.2f %9.2fx\n", "relevance (MI vs target)", ts, tp, ts / tp);

    t0 = Clock::now();
    auto red_s = fsel::redundancy_serial(codes);
    ts = ms_since(t0);
    t0 = Clock::now();
    auto red_p = fsel::redundancy_parallel(codes);
    tp = ms_since(t0);
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) {
            if (red_s[i][j] != red_p[i][j]) {
                std::fprintf(stderr, "redundancy mismatch at (%zu, %zu)\n", i, j);
                return 1;
            }
        }
    }
    std::printf("%-28s %12.2f %12.2f %9.2fx\n", "redundancy (pairwise MI)", ts, tp, ts / tp);
    return 0;
}
