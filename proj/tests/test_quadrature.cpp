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

#include <cmath>
#include <doctest.h>

#include "mmrank/errors.hpp"
#include "mmrank/normal.hpp"
#include "mmrank/quadrature.hpp"
#include "test_util.hpp"

using namespace mmrank;
using testutil::Instance;

TEST_CASE("gauss_hermite nodes integrate polynomial moments exactly") {
  const GaussHermite& gh = gauss_hermite(20);
  // moments of e^{-x^2}: integral = sqrt(pi), x^2 -> sqrt(pi)/2
  double m0 = 0, m2 = 0, m4 = 0;
  for (int k = 0; k < gh.nodes.size(); ++k) {
    m0 += gh.weights[k];
    m2 += gh.weights[k] * gh.nodes[k] * gh.nodes[k];
    m4 += gh.weights[k] * std::pow(gh.nodes[k], 4);
  }
  const double sqrt_pi = 1.7724538509055160273;
  CHECK(m0 == doctest::Approx(sqrt_pi).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(sqrt_pi / 2).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(3 * sqrt_pi / 4).epsilon(1e-13));
}

TEST_CASE("oracle on zero games returns the prior") {
  Instance inst = testutil::make_instance(3, {});
  ParameterVector params;
  params.variances = {0.9};
  const OracleResult r = oracle_integrate(inst.design, inst.outcomes,
                                          Link::kProbit, params, inst.index);
  CHECK(r.marginal_loglik == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.posterior_mean.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.posterior_cov - 0.9 * Eigen::MatrixXd::Identity(3, 3)).norm() <
        1e-10);
}

TEST_CASE("single-game marginal equals the normal-convolution closed form") {
  // P(home win) = Phi(X*beta / sqrt(1 + Z Sigma Z')); for two teams with
  // prior variance s2 each, Z Sigma Z' = 2 s2.
  for (double beta : {0.0, 1.0, 2.03}) {
    for (double s2 : {0.25, 1.0, 4.0}) {
      Instance inst =
          testutil::make_instance(2, {{0, 1, 1}}, true, {1}, 1);
      ParameterVector params;
      params.has_beta = true;
      params.beta = beta;
      params.variances = {s2};
      const OracleResult r = oracle_integrate(
          inst.design, inst.outcomes, Link::kProbit, params, inst.index, 40);
      const double closed = norm_cdf(beta / std::sqrt(1.0 + 2.0 * s2));
      CHECK(std::fabs(std::exp(r.marginal_loglik) - closed) < 1e-8);
    }
  }
}

TEST_CASE("quadrature self-consistency under node doubling") {
  Rng rng(6);
  Instance inst = testutil::random_instance(rng, 3, 4);
  ParameterVector params;
  params.variances = {1.7};
  const OracleResult a = oracle_integrate(inst.design, inst.outcomes,
                                          Link::kProbit, params, inst.index, 40);
  const OracleResult b = oracle_integrate(inst.design, inst.outcomes,
                                          Link::kProbit, params, inst.index, 80);
  CHECK(std::fabs(a.marginal_loglik - b.marginal_loglik) < 1e-8);
  CHECK(a.nodes_per_dim == 40);
}

TEST_CASE("oracle refuses more than five dimensions") {
  Instance inst = testutil::make_instance(6, {{0, 1, 1}});
  ParameterVector params;
  params.variances = {1.0};
  CHECK_THROWS_AS(oracle_integrate(inst.design, inst.outcomes, Link::kProbit,
                                   params, inst.index),
                  UsageError);
}

TEST_CASE("posterior covariance is symmetric positive definite") {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    Instance inst = testutil::random_instance(rng, 3, 3);
    ParameterVector params;
    params.variances = {0.5 + rng.uniform01() * 2};
    const OracleResult r = oracle_integrate(
        inst.design, inst.outcomes, Link::kProbit, params, inst.index, 50);
    CHECK((r.posterior_cov - r.posterior_cov.transpose()).norm() < 1e-12);
    Eigen::LLT<Eigen::MatrixXd> llt(r.posterior_cov);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("simulator determinism and degenerate variance") {
  const auto schedule = round_robin_fragment(6, 0, 3, 0, 1);
  std::vector<Division> div(6, Division::FBS);
  ParameterVector truth;
  truth.variances = {0.8};
  const SyntheticSeason a =
      simulate_season(schedule, truth, div, Link::kProbit, 42);
  const SyntheticSeason b =
      simulate_season(schedule, truth, div, Link::kProbit, 42);
  CHECK(a.outcomes == b.outcomes);
  CHECK((a.true_eta - b.true_eta).norm() == 0.0);
  const SyntheticSeason c =
      simulate_season(schedule, truth, div, Link::kProbit, 43);
  CHECK(a.outcomes != c.outcomes);  // astronomically unlikely to collide

  ParameterVector flat;
  flat.variances = {1e-300};  // effectively zero signal
  const SyntheticSeason d =
      simulate_season(schedule, flat, div, Link::kProbit, 42);
  CHECK(d.true_eta.cwiseAbs().maxCoeff() < 1e-100);
}

TEST_CASE("simulated FCS-visit win rate approaches the link probability") {
  // beta = 2.03 with zero team variance: hosts win with Phi(2.03) ~ 0.979.
  const int n_games = 20000;
  std::vector<ScheduledGame> schedule;
  for (int i = 0; i < n_games; ++i) schedule.push_back({0, 2, true});
  std::vector<Division> div = {Division::FBS, Division::FBS, Division::FCS};
  ParameterVector truth;
  truth.variances = {1e-300};
  truth.has_beta = true;
  truth.beta = 2.03;
  const SyntheticSeason season =
      simulate_season(schedule, truth, div, Link::kProbit, 7);
  double wins = 0;
  for (int r : season.outcomes) wins += r;
  CHECK(wins / n_games == doctest::Approx(0.978821730357).epsilon(0.005));
}

TEST_CASE("bias study is reproducible and reports the PQL shrinkage") {
  const auto schedule = round_robin_fragment(16, 0, 8, 0, 5);
  std::vector<Division> div(16, Division::FBS);
  ParameterVector truth;
  truth.variances = {0.8};
  ModelConfig pql;
  pql.method = Method::kPqlMl;
  ModelConfig la;
  la.method = Method::kLaplace;
  const BiasStudyResult run1 =
      bias_study(schedule, div, truth, Link::kProbit, {pql, la}, 3, 11);
  const BiasStudyResult run2 =
      bias_study(schedule, div, truth, Link::kProbit, {pql, la}, 3, 11);
  CHECK(run1.table() == run2.table());
  REQUIRE(run1.rows.size() == 2);
  CHECK(run1.rows[0].failures == 0);
  CHECK(run1.rows[0].mean_sigma2 <= run1.rows[1].mean_sigma2 + 1e-9);
  // parallel execution returns identical bytes
  const BiasStudyResult run3 = bias_study(schedule, div, truth, Link::kProbit,
                                          {pql, la}, 3, 11, /*jobs=*/3);
  CHECK(run3.table() == run1.table());
}

TEST_CASE("zero-signal bias study keeps estimates near zero") {
  const auto schedule = round_robin_fragment(10, 0, 6, 0, 2);
  std::vector<Division> div(10, Division::FBS);
  ParameterVector truth;
  truth.variances = {1e-300};
  ModelConfig pql;
  pql.method = Method::kPqlMl;
  const BiasStudyResult run =
      bias_study(schedule, div, truth, Link::kProbit, {pql}, 3, 5);
  REQUIRE(run.rows.size() == 1);
  CHECK(run.rows[0].mean_sigma2 < 0.15);
}

TEST_CASE("rng substreams decorrelate replications") {
  CHECK(Rng::substream(1, 0) != Rng::substream(1, 1));
  CHECK(Rng::substream(1, 0) != Rng::substream(2, 0));
  Rng r(Rng::substream(1, 0));
  const double u = r.uniform01();
  CHECK(u > 0.0);
  CHECK(u < 1.0);
}
