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

#include "mmrank/normal.hpp"

#include <cmath>

#include "mmrank/errors.hpp"

namespace mmrank {

namespace {

// Below this point 0.5*erfc(-x/sqrt2) is subnormal or zero; switch to the
// tail series  Φ(x) ~ φ(x)/(-x) * (1 - 1/x² + 3/x⁴ - 15/x⁶ + 105/x⁸).
constexpr double kTailCut = -37.0;

double tail_series(double x) {
  const double r2 = 1.0 / (x * x);
  return 1.0 + r2 * (-1.0 + r2 * (3.0 + r2 * (-15.0 + r2 * 105.0)));
}

}  // namespace

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x - 0.5 * kLog2Pi);
}

double norm_cdf(double x) {
  if (x < kTailCut) return norm_pdf(x) / (-x) * tail_series(x);
  return 0.5 * std::erfc(-x / kSqrt2);
}

double log_norm_cdf(double x) {
  if (x >= -1.0) return std::log(norm_cdf(x));
  if (x >= kTailCut) return std::log(0.5 * std::erfc(-x / kSqrt2));
  return -0.5 * x * x - 0.5 * kLog2Pi - std::log(-x) + std::log(tail_series(x));
}

double mills_ratio(double x) {
  if (x >= -1.0) return norm_pdf(x) / norm_cdf(x);
  if (x >= kTailCut)
    return std::exp(-0.5 * x * x - 0.5 * kLog2Pi - log_norm_cdf(x));
  return -x / tail_series(x);
}

MillsChain mills_chain(double x) {
  MillsChain c;
  c.lambda = mills_ratio(x);
  const double u = x + c.lambda;
  c.d1 = -c.lambda * u;
  const double u1 = 1.0 + c.d1;
  c.d2 = -(c.d1 * u + c.lambda * u1);
  c.d3 = -(c.d2 * u + 2.0 * c.d1 * u1 + c.lambda * c.d2);
  return c;
}

double norm_quantile(double p) {
  // PPND16 (Wichura, algorithm AS 241), accurate to ~1e-16 relative.
  if (!(p > 0.0 && p < 1.0)) throw UsageError("norm_quantile: p outside (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) *
                    r +
                4.5921953931549871457e+4) *
                   r +
               1.3731693765509461125e+4) *
                  r +
              1.9715909503065514427e+3) *
                 r +
             1.3314166789178437745e+2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) *
                    r +
                2.1213794301586595867e+4) *
                   r +
               5.3941960214247511077e+3) *
                  r +
              6.8718700749205790830e+2) *
                 r +
             4.2313330701600911252e+1) *
                r +
            1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                    r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e0) *
                  r +
              3.64784832476320460504e0) *
                 r +
             5.76949722146069140550e0) *
                r +
            4.63033784615654529590e0) *
               r +
           1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                    r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e0) *
                r +
            2.05319162663775882187e0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                    r +
                1.24266094738807843860e-3) *
                   r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e0) *
                r +
            5.46378491116411436990e0) *
               r +
           6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                    r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  return (q < 0.0) ? -val : val;
}

}  // namespace mmrank
