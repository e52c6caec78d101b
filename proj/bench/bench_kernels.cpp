// Timing comparison between the serial reference kernels and the OpenMP
// variants: the cell-sum quadrature, the node sampling pass, and the
// z-slice sweep. Also asserts that both produce bit-identical results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "abp/levelset.hpp"
#include "abp/quadrature.hpp"
#include "abp/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace abp;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clock_type::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 1024;
    const int zc = argc > 2 ? std::atoi(argv[2]) : 128;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif

    const CatalogEntry entry = catalog()[1];  // modulated bump: busiest level sets
    const ScalarField& f = entry.field;
    const Domain& K = entry.domain;
    const Grid g = make_grid(K, n, n);

    std::printf("%-26s %12s %12s %9s\n", "kernel", "serial [s]", "parallel [s]", "speedup");

    double vs = 0, vp = 0;
    const double ts = time_best_of(3, [&] { vs = integrate_abs_det_hessian(f, K, g, Exec::serial).value; });
    const double tp = time_best_of(3, [&] { vp = integrate_abs_det_hessian(f, K, g, Exec::parallel).value; });
    if (vs != vp) {
        std::printf("quadrature results differ: %.17g vs %.17g\n", vs, vp);
        return 1;
    }
    std::printf("%-26s %12.4f %12.4f %8.2fx\n", "abs-det quadrature", ts, tp, ts / tp);

    const double tse = time_best_of(2, [&] { LevelSetExtractor ex(f, K, g, Exec::serial); });
    const double tpe = time_best_of(2, [&] { LevelSetExtractor ex(f, K, g, Exec::parallel); });
    std::printf("%-26s %12.4f %12.4f %8.2fx\n", "node sampling", tse, tpe, tse / tpe);

    const LevelSetExtractor ex(f, K, g, Exec::parallel);
    SuiteConfig cfg;
    cfg.nx = cfg.ny = n;
    cfg.z_count = zc;
    SweepResult sws, swp;
    cfg.exec = Exec::serial;
    const double tss = time_best_of(1, [&] { sws = run_sweep(ex, zc, cfg); });
    cfg.exec = Exec::parallel;
    const double tsp = time_best_of(1, [&] { swp = run_sweep(ex, zc, cfg); });
    if (sws.tv_integral != swp.tv_integral || sws.phi_integral != swp.phi_integral) {
        std::printf("sweep results differ\n");
        return 1;
    }
    std::printf("%-26s %12.4f %12.4f %8.2fx\n", "z-slice sweep", tss, tsp, tss / tsp);

    std::printf("tv integral %.12g, phi integral %.12g (identical serial/parallel)\n",
                swp.tv_integral, swp.phi_integral);
    return 0;
}
