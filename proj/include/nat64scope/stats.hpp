// Copyright 2026 The nat64scope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>

#include "nat64scope/ip.hpp"

namespace nat64scope {

class InsufficientData : public Error {
public:
  using Error::Error;
};

/// Mean, sample standard deviation (n - 1) and median. Fields that need
/// more samples than available are NaN.
struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
};

Summary summarize(std::span<const double> xs);

/// Pearson product-moment correlation, clamped to [-1, 1].
/// Throws InsufficientData for fewer than two points or a constant series.
double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace nat64scope
