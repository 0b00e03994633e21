// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scorelm {

inline constexpr double kSimplexSumTolerance = 1e-9;
inline constexpr double kEntmaxSumTolerance = 1e-10;

// A point on the probability simplex: non-negative entries summing to one
// (within kSimplexSumTolerance), at least two outcomes.
class ProbVector {
 public:
  // Validates; throws Error(kInvalidInput) on negative/non-finite entries,
  // a bad sum, or fewer than two entries.
  explicit ProbVector(std::vector<double> values);

  static ProbVector uniform(std::size_t m);
  static ProbVector one_hot(std::size_t m, std::size_t index);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> values_;
};

// Unnormalized log-preferences; every entry finite.
class Logits {
 public:
  explicit Logits(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

ProbVector softmax(const Logits& z);

// Max-subtracted softmax over raw storage; `out` must match `z` in size.
// No validation beyond what the arithmetic implies.
void softmax_into(std::span<const double> z, std::span<double> out) noexcept;

// argmax_{p in simplex} <p, z> + H_alpha(p). alpha == 2 uses the exact
// sort-based sparsemax threshold; other alpha > 1 bisect on the threshold.
ProbVector entmax(const Logits& z, double alpha);

// Exact sparsemax via sorting; exposed for tests and benchmarks.
ProbVector sparsemax(const Logits& z);

// Tsallis alpha-entropy; alpha == 1 is Shannon entropy with 0 log 0 = 0.
double tsallis_entropy(const ProbVector& p, double alpha);

// q^eps_i = (1 - eps) q_i + eps / m.
ProbVector smooth_distribution(const ProbVector& q, double eps);

// Euclidean norm with scaling against overflow/underflow.
double l2_norm(std::span<const double> x) noexcept;

}  // namespace scorelm
