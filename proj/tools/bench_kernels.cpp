// Timing comparison of the serial and OpenMP variants of the hot kernels,
// with a max-abs-difference check that both produce identical output.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "sono/filters.hpp"
#include "sono/kernels.hpp"
#include "sono/types.hpp"

using sono::Complex;
using sono::kernels::Exec;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_s();
    fn();
    best = std::min(best, now_s() - t0);
  }
  return best;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void report(const char* name, double serial_s, double parallel_s, double diff) {
  std::printf("%-22s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   max|diff| %g\n",
              name, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s, diff);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 1u << 21;
  int reps = 3;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--samples" && i + 1 < argc)
      n = static_cast<std::size_t>(std::stoll(argv[++i]));
    else if (a == "--reps" && i + 1 < argc)
      reps = std::stoi(argv[++i]);
    else {
      std::fprintf(stderr, "usage: bench_kernels [--samples N] [--reps R]\n");
      return 2;
    }
  }

  if (!sono::kernels::parallel_available())
    std::printf("OpenMP not available; both variants run serially\n");
  else
    std::printf("OpenMP threads: %d\n", sono::kernels::max_threads());
  std::printf("samples: %zu, best of %d reps\n\n", n, reps);

  sono::GaussianSource g(42);
  std::vector<double> x(n);
  for (double& v : x) v = g.next();
  std::vector<Complex> xc(n);
  for (Complex& v : xc) v = Complex(g.next(), g.next());
  const std::vector<double> h = sono::kaiser_lowpass(8.0, 1.0, 1.5, 80.0);
  std::vector<Complex> tmpl(4096);
  for (Complex& v : tmpl) v = Complex(g.next(), g.next());

  {
    std::vector<double> ys, yp;
    const double ts = time_best_of(reps, [&] { ys = sono::kernels::fir_centered(x, h, Exec::Serial); });
    const double tp = time_best_of(reps, [&] { yp = sono::kernels::fir_centered(x, h, Exec::Parallel); });
    report("fir_centered/real", ts, tp, max_diff(ys, yp));
  }
  {
    std::vector<Complex> ys, yp;
    const double ts = time_best_of(reps, [&] { ys = sono::kernels::fir_centered(xc, h, Exec::Serial); });
    const double tp = time_best_of(reps, [&] { yp = sono::kernels::fir_centered(xc, h, Exec::Parallel); });
    report("fir_centered/complex", ts, tp, max_diff(ys, yp));
  }
  {
    std::vector<Complex> ys, yp;
    const double ts = time_best_of(reps, [&] { ys = sono::kernels::xcorr(xc, tmpl, Exec::Serial); });
    const double tp = time_best_of(reps, [&] { yp = sono::kernels::xcorr(xc, tmpl, Exec::Parallel); });
    report("xcorr", ts, tp, max_diff(ys, yp));
  }
  {
    std::vector<double> ys, yp;
    const double ts =
        time_best_of(reps, [&] { ys = sono::kernels::resample(x, 1.0001, Exec::Serial); });
    const double tp =
        time_best_of(reps, [&] { yp = sono::kernels::resample(x, 1.0001, Exec::Parallel); });
    report("resample", ts, tp, max_diff(ys, yp));
  }
  {
    std::vector<Complex> ys, yp;
    const double ts =
        time_best_of(reps, [&] { ys = sono::kernels::mix_down(x, 0.123, 0, Exec::Serial); });
    const double tp =
        time_best_of(reps, [&] { yp = sono::kernels::mix_down(x, 0.123, 0, Exec::Parallel); });
    report("mix_down", ts, tp, max_diff(ys, yp));
  }
  return 0;
}
