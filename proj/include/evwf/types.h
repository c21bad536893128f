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

#ifndef EVWF_TYPES_H_
#define EVWF_TYPES_H_

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace evwf {

// Frame-major matrices: row t is frame t.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic,
                                    Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Malformed input files, I/O failures, inconsistent corpora.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feature sequence and audio disagree on frame count.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A filterbank (or other derived structure) cannot be built from the
// requested parameters.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf detected in a computed result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evwf

#endif  // EVWF_TYPES_H_
