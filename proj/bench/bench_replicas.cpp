// Compares the serial reference replica driver against the OpenMP one on two
// representative workloads, and reports segment-shift throughput.

#include <chrono>
#include <cstdio>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "fadeldp/ldp.hpp"
#include "fadeldp/scenarios.hpp"

using namespace fadeldp;

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <class F>
double time_it(F&& f) {
  double t0 = now_s();
  f();
  return now_s() - t0;
}

void bench_event_mc(const Scenario& sc, int64_t n) {
  EventSpec ev;
  ev.kind = EventSpec::Kind::terminal_exceed;
  ev.threshold = 1.0;
  ev.T = 2.0;
  StartSpec start;
  start.xi = Segment::constant(0.0, sc.model.d, sc.mem, 0.0);

  MCEstimate se, pe;
  double ts = time_it([&] {
    se = rare_event_mc(sc.model, start, sc.default_eps, ev, n, 42, Exec::serial);
  });
  double tp = time_it([&] {
    pe = rare_event_mc(sc.model, start, sc.default_eps, ev, n, 42, Exec::parallel);
  });
  bool same = se.p_hat == pe.p_hat;
  std::printf("%-16s n=%-8lld serial %7.3fs  openmp %7.3fs  speedup %5.2fx  bit-equal %s\n",
              sc.name.c_str(), static_cast<long long>(n), ts, tp, ts / tp,
              same ? "yes" : "NO");
}

void bench_shift(const Scenario& sc, int64_t n_steps) {
  Segment seg = Segment::constant(0.0, sc.model.d, sc.mem, 0.5);
  std::vector<double> head(sc.model.d, 0.5);
  double t = time_it([&] {
    for (int64_t i = 0; i < n_steps; ++i) seg = shift_segment(seg, head);
  });
  std::printf("segment shift    %-8lld steps in %7.3fs  (%.1f Msteps/s, window %d)\n",
              static_cast<long long>(n_steps), t, n_steps / t / 1e6,
              sc.mem.lag_count());
}

}  // namespace

int main() {
#if defined(_OPENMP)
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; parallel path falls back to serial\n");
#endif
  const auto& reg = scenario_registry();
  for (const auto& sc : reg) bench_event_mc(sc, 2000);
  bench_shift(reg[1], 200'000);
  return 0;
}
