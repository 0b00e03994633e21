// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "scorelm/error.hpp"

namespace scorelm {

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "probability vector needs at least 2 entries, got " +
                    std::to_string(values_.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::kInvalidInput,
                  "probability entry " + std::to_string(i) +
                      " is negative or non-finite");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexSumTolerance) {
    throw Error(ErrorCode::kInvalidInput,
                "probability vector sums to " + std::to_string(sum));
  }
}

ProbVector ProbVector::uniform(std::size_t m) {
  return ProbVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

ProbVector ProbVector::one_hot(std::size_t m, std::size_t index) {
  if (index >= m) {
    throw Error(ErrorCode::kInvalidInput, "one-hot index out of range");
  }
  std::vector<double> v(m, 0.0);
  v[index] = 1.0;
  return ProbVector(std::move(v));
}

Logits::Logits(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw Error(ErrorCode::kInvalidInput, "logits must be non-empty");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::kInvalidInput,
                  "logit " + std::to_string(i) + " is not finite");
    }
  }
}

void softmax_into(std::span<const double> z, std::span<double> out) noexcept {
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    out[j] = std::exp(z[j] - zmax);
    total += out[j];
  }
  const double inv = 1.0 / total;
  for (double& v : out) v *= inv;
}

ProbVector softmax(const Logits& z) {
  std::vector<double> p(z.size());
  softmax_into(z.values(), p);
  return ProbVector(std::move(p));
}

ProbVector sparsemax(const Logits& z) {
  std::vector<double> sorted(z.values().begin(), z.values().end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  // Support size k is the largest k with 1 + k z_(k) > sum_{j<=k} z_(j).
  double cumsum = 0.0;
  double support_sum = sorted[0];
  std::size_t k = 1;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumsum += sorted[j];
    if (1.0 + static_cast<double>(j + 1) * sorted[j] > cumsum) {
      k = j + 1;
      support_sum = cumsum;
    }
  }
  const double tau = (support_sum - 1.0) / static_cast<double>(k);

  std::vector<double> p(z.size());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::max(z[j] - tau, 0.0);
  return ProbVector(std::move(p));
}

namespace {

// p_j(tau) = [(alpha - 1) z_j - tau]_+^{1/(alpha - 1)}.
double entmax_mass(std::span<const double> scaled, double tau, double exponent,
                   std::vector<double>& p) {
  double total = 0.0;
  for (std::size_t j = 0; j < scaled.size(); ++j) {
    const double base = scaled[j] - tau;
    p[j] = base > 0.0 ? std::pow(base, exponent) : 0.0;
    total += p[j];
  }
  return total;
}

ProbVector entmax_bisect(const Logits& z, double alpha) {
  const std::size_t m = z.size();
  std::vector<double> scaled(m);
  for (std::size_t j = 0; j < m; ++j) scaled[j] = (alpha - 1.0) * z[j];
  const auto [min_it, max_it] = std::minmax_element(scaled.begin(), scaled.end());
  const double exponent = 1.0 / (alpha - 1.0);

  // mass(lo) >= 1 because the largest entry contributes at least 1;
  // mass(hi) == 0.
  double lo = *min_it - 1.0;
  double hi = *max_it;
  std::vector<double> p(m);
  double mass = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    mass = entmax_mass(scaled, mid, exponent, p);
    if (mass >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  mass = entmax_mass(scaled, lo, exponent, p);
  if (!(std::abs(mass - 1.0) <= kEntmaxSumTolerance)) {
    throw Error(ErrorCode::kInternal,
                "entmax bisection failed to meet the simplex-sum tolerance");
  }
  for (double& v : p) v /= mass;
  return ProbVector(std::move(p));
}

}  // namespace

ProbVector entmax(const Logits& z, double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kParameterDomain,
                "entmax requires alpha > 1, got " + std::to_string(alpha));
  }
  if (z.size() < 2) {
    throw Error(ErrorCode::kInvalidInput, "entmax needs at least 2 logits");
  }
  if (alpha == 2.0) return sparsemax(z);
  return entmax_bisect(z, alpha);
}

double tsallis_entropy(const ProbVector& p, double alpha) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kParameterDomain,
                "Tsallis entropy requires alpha >= 1, got " +
                    std::to_string(alpha));
  }
  double acc = 0.0;
  if (alpha == 1.0) {
    for (double v : p) {
      if (v > 0.0) acc -= v * std::log(v);
    }
    return acc;
  }
  for (double v : p) acc += v - std::pow(v, alpha);
  return acc / (alpha * (alpha - 1.0));
}

ProbVector smooth_distribution(const ProbVector& q, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw Error(ErrorCode::kParameterDomain,
                "smoothing eps must lie in [0, 1], got " + std::to_string(eps));
  }
  const double floor = eps / static_cast<double>(q.size());
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = (1.0 - eps) * q[i] + floor;
  return ProbVector(std::move(out));
}

double l2_norm(std::span<const double> x) noexcept {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (double v : x) {
    const double r = v / scale;
    acc += r * r;
  }
  return scale * std::sqrt(acc);
}

}  // namespace scorelm
