// Copyright 2026 The mmrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Standard-normal kernels used throughout the fitting engines. logΦ and the
// inverse Mills ratio switch to asymptotic series in the far lower tail so
// that extreme linear predictors never produce NaN/Inf.

#ifndef MMRANK_NORMAL_HPP
#define MMRANK_NORMAL_HPP

namespace mmrank {

inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kSqrt2 = 1.4142135623730950488;

double norm_pdf(double x);
double norm_cdf(double x);

// log Φ(x), finite for all finite x.
double log_norm_cdf(double x);

// Inverse Mills ratio φ(x)/Φ(x).
double mills_ratio(double x);

// λ(x) = φ(x)/Φ(x) together with its first three derivatives in x.
struct MillsChain {
  double lambda;
  double d1;
  double d2;
  double d3;
};
MillsChain mills_chain(double x);

// Φ⁻¹(p) for p in (0,1); Wichura's PPND16 rational approximation.
double norm_quantile(double p);

}  // namespace mmrank

#endif  // MMRANK_NORMAL_HPP
