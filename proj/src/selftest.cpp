// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "refverify/verification.hpp"

namespace refverify {

Distribution random_distribution(std::size_t vocab_size, Rng& rng) {
  std::vector<double> w(vocab_size);
  double sum = 0.0;
  for (double& x : w) {
    x = rng.uniform() < 0.25 ? 0.0 : rng.uniform() + 1e-3;
    sum += x;
  }
  if (sum == 0.0) {
    w[rng.next_u64() % vocab_size] = 1.0;
    sum = 1.0;
  }
  for (double& x : w) x /= sum;
  return Distribution(std::move(w));
}

namespace {

double max_abs_diff(const Distribution& a, const Distribution& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

SelftestCheck check_unbiasedness() {
  Rng rng(20260101);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t v = 2 + rng.next_u64() % 7;
    const Distribution p = random_distribution(v, rng);
    const Distribution q = random_distribution(v, rng);
    worst = std::max(worst, max_abs_diff(exact_step_distribution(p, q), p));
  }
  std::ostringstream detail;
  detail << "1000 pairs, max |law - p| = " << worst;
  return {"unbiasedness", worst <= 1e-12, detail.str()};
}

SelftestCheck check_residuals() {
  struct Case {
    std::vector<double> p, q, expected;
  };
  const Case cases[] = {
      {{0.5, 0.5}, {1.0, 0.0}, {0.0, 1.0}},
      {{0.6, 0.4}, {0.2, 0.8}, {1.0, 0.0}},
      {{0.5, 0.3, 0.2}, {0.1, 0.5, 0.4}, {1.0, 0.0, 0.0}},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const Distribution got =
        residual_distribution(Distribution(c.p), Distribution(c.q));
    worst = std::max(worst, max_abs_diff(got, Distribution(c.expected)));
  }
  bool degenerate_raised = false;
  try {
    residual_distribution(Distribution({0.5, 0.5}), Distribution({0.5, 0.5}));
  } catch (const Error& e) {
    degenerate_raised = e.kind() == ErrorKind::kDegenerateResidual;
  }
  std::ostringstream detail;
  detail << "3 fixed cases, max error " << worst
         << (degenerate_raised ? "; p == q rejected" : "; p == q NOT rejected");
  return {"residual", worst <= 1e-12 && degenerate_raised, detail.str()};
}

SelftestCheck check_thresholds() {
  Rng rng(7);
  double worst = 0.0;
  bool bounded = true;
  for (int trial = 0; trial < 200; ++trial) {
    const Distribution d = random_distribution(2 + rng.next_u64() % 15, rng);
    double h = 0.0;
    for (double p : d.probs()) {
      if (p > 0.0) h -= p * std::log(p);
    }
    for (double eps : {0.3, 0.6}) {
      for (double delta : {0.05, 0.2}) {
        const double got = typical_threshold(d, TypicalConfig{eps, delta});
        worst = std::max(worst,
                         std::abs(got - std::min(eps, delta * std::exp(-h))));
        bounded = bounded && got > 0.0 && got <= eps && got <= delta;
      }
    }
  }
  std::ostringstream detail;
  detail << "200 distributions x 4 (eps, delta), max error " << worst;
  return {"typical-threshold", worst <= 1e-12 && bounded, detail.str()};
}

SelftestCheck check_sampler_law() {
  const Distribution p({0.1, 0.4, 0.3, 0.2});
  const Distribution q({0.4, 0.1, 0.25, 0.25});
  Rng rng(99);
  std::vector<double> counts(4, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const Distribution q_dists[] = {q};
    const Token x = sample(q, rng);
    const Token drafted[] = {x};
    const Distribution p_dists[] = {p, p};
    const auto r = verify_speculative_sampling(p_dists, q_dists, drafted, rng);
    ++counts[static_cast<std::size_t>(r.accepted_n == 1 ? x : r.bonus)];
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < 4; ++i) tv += std::abs(counts[i] / draws - p[i]);
  tv *= 0.5;
  std::ostringstream detail;
  detail << "1e5 seeded draws, total variation " << tv;
  return {"sampler-law", tv <= 0.01, detail.str()};
}

}  // namespace

std::vector<SelftestCheck> run_selftest(std::ostream& out) {
  std::vector<SelftestCheck> checks;
  checks.push_back(check_unbiasedness());
  checks.push_back(check_residuals());
  checks.push_back(check_thresholds());
  checks.push_back(check_sampler_law());
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail
        << '\n';
  }
  return checks;
}

}  // namespace refverify
