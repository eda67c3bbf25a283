// Times the serial reference kernels against the OpenMP versions on
// synthetic envelope data and on an end-to-end batch fit.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "speckle/distributions.hpp"
#include "speckle/estimators.hpp"
#include "speckle/kernels.hpp"
#include "speckle/phantom.hpp"
#include "speckle/region.hpp"

namespace {

double now_seconds() {
#ifdef _OPENMP
    return omp_get_wtime();
#else
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
#endif
}

template <typename F>
double time_best_of(F&& f, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_seconds();
        f();
        best = std::min(best, now_seconds() - t0);
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2'000'000;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (compiled without OpenMP)\n");
#endif

    const speckle::DistributionParams gen = speckle::NakagamiParams{1.2, 4200.0};
    const std::vector<double> xs = speckle::sample(gen, n, 42);

    volatile double sink = 0.0;

    const double t_mom_serial =
        time_best_of([&] { sink = speckle::kernels::moments_serial(xs).sum_quad; }, 5);
    const double t_mom_par = time_best_of([&] { sink = speckle::kernels::moments(xs).sum_quad; }, 5);
    std::printf("moments        n=%zu  serial %.4fs  parallel %.4fs  speedup %.2fx\n", n,
                t_mom_serial, t_mom_par, t_mom_serial / t_mom_par);

    const double t_ll_serial =
        time_best_of([&] { sink = speckle::kernels::log_likelihood_serial(gen, xs); }, 5);
    const double t_ll_par =
        time_best_of([&] { sink = speckle::kernels::log_likelihood(gen, xs); }, 5);
    std::printf("log_likelihood n=%zu  serial %.4fs  parallel %.4fs  speedup %.2fx\n", n,
                t_ll_serial, t_ll_par, t_ll_serial / t_ll_par);

    const double t_hist_serial = time_best_of(
        [&] { sink = static_cast<double>(speckle::kernels::bin_counts_serial(xs, 1.0, 1.0, 255)[40]); },
        5);
    const double t_hist_par = time_best_of(
        [&] { sink = static_cast<double>(speckle::kernels::bin_counts(xs, 1.0, 1.0, 255)[40]); }, 5);
    std::printf("bin_counts     n=%zu  serial %.4fs  parallel %.4fs  speedup %.2fx\n", n,
                t_hist_serial, t_hist_par, t_hist_serial / t_hist_par);

    // batch fit over a small synthetic cohort: the image loop is the
    // parallel axis the CLI uses
    speckle::CohortSpec spec;
    spec.n_patients = 12;
    spec.base.width = 128;
    spec.base.height = 128;
    spec.seed = 7;
    const speckle::SyntheticCohort cohort = speckle::generate_cohort(spec);
    const double t_batch = time_best_of(
        [&] {
            double acc = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(+ : acc)
            for (long i = 0; i < static_cast<long>(cohort.images.size()); ++i) {
                const auto report = speckle::analyze_image(cohort.images[i]);
                acc += static_cast<double>(report.regions.size());
            }
            sink = acc;
        },
        3);
    std::printf("analyze_image  %zu phantoms (128x128, 7 families): %.3fs\n", cohort.images.size(),
                t_batch);

    (void)sink;
    return 0;
}
