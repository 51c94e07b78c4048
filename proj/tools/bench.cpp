// Times the serial reference path against OpenMP replication fan-out on one
// mid-size scenario and verifies both produce identical aggregates.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "poisonrank/config.hpp"
#include "poisonrank/errors.hpp"
#include "poisonrank/harness.hpp"

#ifdef POISONRANK_HAVE_OPENMP
#include <omp.h>
#endif

using namespace poisonrank;

namespace {

double run_timed(const ExperimentSpec& spec, int jobs, Aggregate& out) {
  const auto start = std::chrono::steady_clock::now();
  out = run_experiment(spec, jobs);
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

bool identical(const Aggregate& a, const Aggregate& b) {
  return a.rounds == b.rounds && a.chosen_mean == b.chosen_mean &&
         a.ratio_mean == b.ratio_mean && a.cost_mean == b.cost_mean &&
         a.chosen_std == b.chosen_std && a.cost_std == b.cost_std &&
         a.concentrated_count == b.concentrated_count &&
         a.pull_bound_violations == b.pull_bound_violations;
}

}  // namespace

int main(int argc, char** argv) {
  std::string preset_name = "fig1-synthetic-pbm";
  long horizon = 50000;
  if (argc > 1) preset_name = argv[1];
  if (argc > 2) horizon = std::stol(argv[2]);

  LoadedConfig cfg = preset(preset_name);
  if (cfg.mode != LoadedConfig::Mode::kRun) {
    std::fprintf(stderr, "bench needs a run preset\n");
    return 2;
  }
  ExperimentSpec spec = cfg.run;
  spec.horizon = horizon;

  std::printf("scenario %s: L=%d K=%d T=%ld R=%d\n", spec.name.c_str(),
              spec.num_items, spec.list_len, spec.horizon, spec.replications);

  Aggregate serial;
  const double t_serial = run_timed(spec, 1, serial);
  std::printf("%-12s %8.3fs\n", "serial", t_serial);

#ifdef POISONRANK_HAVE_OPENMP
  const int max_jobs = omp_get_max_threads();
  for (int jobs = 2; jobs <= max_jobs; jobs *= 2) {
    Aggregate parallel;
    const double t_par = run_timed(spec, jobs, parallel);
    const bool same = identical(serial, parallel);
    std::printf("%-2d threads   %8.3fs  speedup %.2fx  results %s\n", jobs,
                t_par, t_serial / t_par, same ? "identical" : "DIFFER");
    if (!same) return 4;
  }
#else
  std::printf("built without OpenMP; only the serial path is available\n");
#endif
  return 0;
}
