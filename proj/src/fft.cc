/* Copyright 2026 The EVWF Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "fft.h"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace evwf::internal {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

template <typename T>
FftwBuffer<T> Allocate(size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

// The FFTW planner is not reentrant; plans are created once under a lock
// and then executed through the new-array interface.
const PlanPair& PlansFor(int n) {
  static std::mutex mu;
  static std::map<int, PlanPair> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  auto real = Allocate<double>(n);
  auto cplx = Allocate<fftw_complex>(n / 2 + 1);
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(n, real.get(), cplx.get(), FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(n, cplx.get(), real.get(), FFTW_ESTIMATE);
  if (p.forward == nullptr || p.inverse == nullptr) {
    throw std::runtime_error("FFTW planning failed");
  }
  return plans.emplace(n, p).first->second;
}

}  // namespace

void ForwardRealFft(std::span<const double> in,
                    std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  const PlanPair& plans = PlansFor(n);
  auto real = Allocate<double>(n);
  auto cplx = Allocate<fftw_complex>(n / 2 + 1);
  std::copy(in.begin(), in.end(), real.get());
  fftw_execute_dft_r2c(plans.forward, real.get(), cplx.get());
  for (int k = 0; k <= n / 2; ++k) out[k] = {cplx[k][0], cplx[k][1]};
}

void InverseRealFft(std::span<const std::complex<double>> in,
                    std::span<double> out) {
  const int n = static_cast<int>(out.size());
  const PlanPair& plans = PlansFor(n);
  auto real = Allocate<double>(n);
  auto cplx = Allocate<fftw_complex>(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    cplx[k][0] = in[k].real();
    cplx[k][1] = in[k].imag();
  }
  // c2r ignores the imaginary parts at DC and Nyquist.
  fftw_execute_dft_c2r(plans.inverse, cplx.get(), real.get());
  std::copy(real.get(), real.get() + n, out.begin());
}

}  // namespace evwf::internal
