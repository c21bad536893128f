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

#ifndef EVWF_SRC_FFT_H_
#define EVWF_SRC_FFT_H_

#include <complex>
#include <span>

namespace evwf::internal {

// Real <-> half-complex transforms of length n (power of two). Plans are
// cached per length; execution is thread-safe.
void ForwardRealFft(std::span<const double> in,
                    std::span<std::complex<double>> out);
// Unnormalized inverse: out = n * x for out = Inverse(Forward(x)).
void InverseRealFft(std::span<const std::complex<double>> in,
                    std::span<double> out);

}  // namespace evwf::internal

#endif  // EVWF_SRC_FFT_H_
