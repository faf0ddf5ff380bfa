// Times the OpenMP kernels against the serial reference implementations on
// paper-scale-ish tensors. Not part of the test suite; run manually:
//   ./build/bench/popcast_bench [repeats]
#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "popcast/ops.hpp"
#include "popcast/rng.hpp"
#include "popcast_ref/naive.hpp"

using namespace popcast;

namespace {

Tensor<double> random_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor<double> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = rng.uniform() * 2.0 - 1.0;
  return t;
}

template <typename F>
double time_ms(int repeats, F&& fn) {
  using clock = std::chrono::steady_clock;
  fn();  // warm up
  const auto start = clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto stop = clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() /
         repeats;
}

double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void report(const char* name, double serial_ms, double parallel_ms,
            double diff) {
  std::printf("%-22s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   "
              "max|diff| %.3g\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
#ifdef _OPENMP
  std::printf("openmp max threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without openmp; parallel column runs serial\n");
#endif

  Rng rng(7);

  {
    const auto x = random_tensor({3, 227, 227}, rng);
    const auto w = random_tensor({96, 3, 11, 11}, rng);
    const auto b = random_tensor({96}, rng);
    Tensor<double> serial_out, parallel_out;
    const double ts =
        time_ms(repeats, [&] { serial_out = ref::conv2d(x, w, b, 4, 0); });
    const double tp = time_ms(repeats, [&] {
      parallel_out = ops::conv2d_forward(x, w, b, 4, 0);
    });
    report("conv2d 96@11/s4", ts, tp, max_abs_diff(serial_out, parallel_out));

    const auto dy = random_tensor(parallel_out.shape(), rng);
    Tensor<double> dx(x.shape(), 0.0), dw(w.shape(), 0.0), db(b.shape(), 0.0);
    const double tb = time_ms(repeats, [&] {
      dx.fill(0);
      dw.fill(0);
      db.fill(0);
      ops::conv2d_backward(x, w, 4, 0, dy, dx, dw, db);
    });
    std::printf("%-22s forward-equivalent backward %9.2f ms\n",
                "conv2d backward", tb);
  }

  {
    const auto x = random_tensor({96, 55, 55}, rng);
    Tensor<double> serial_out;
    ops::MaxPoolOut<double> parallel_out;
    const double ts =
        time_ms(repeats, [&] { serial_out = ref::maxpool2d(x, 3, 2); });
    const double tp = time_ms(repeats, [&] {
      parallel_out = ops::maxpool2d_forward(x, 3, 2);
    });
    report("maxpool 3/s2", ts, tp, max_abs_diff(serial_out, parallel_out.y));
  }

  {
    const auto x = random_tensor({9216}, rng);
    const auto w = random_tensor({4096, 9216}, rng);
    const auto b = random_tensor({4096}, rng);
    Tensor<double> serial_out, parallel_out;
    const double ts =
        time_ms(repeats, [&] { serial_out = ref::dense(x, w, b); });
    const double tp =
        time_ms(repeats, [&] { parallel_out = ops::dense_forward(x, w, b); });
    report("dense 9216->4096", ts, tp, max_abs_diff(serial_out, parallel_out));
  }

  {
    const std::size_t d = 4096, h = 256;
    const auto wx = random_tensor({4 * h, d}, rng);
    const auto wh = random_tensor({4 * h, h}, rng);
    const auto b = random_tensor({4 * h}, rng);
    std::vector<Tensor<double>> xs;
    for (int t = 0; t < 18; ++t) xs.push_back(random_tensor({d}, rng));
    const Tensor<double> zero({h}, 0.0);

    ref::LstmResult serial_out;
    const double ts = time_ms(repeats, [&] {
      serial_out = ref::lstm_sequence(xs, wx, wh, b, zero, zero);
    });
    Tensor<double> hh, cc;
    const double tp = time_ms(repeats, [&] {
      hh = zero;
      cc = zero;
      Tensor<double> hn, cn;
      for (const auto& x : xs) {
        ops::lstm_step_forward(x, hh, cc, wx, wh, b, hn, cn);
        hh = hn;
        cc = cn;
      }
    });
    report("lstm 4096->256 x18", ts, tp, max_abs_diff(serial_out.h, hh));
  }

  return 0;
}
