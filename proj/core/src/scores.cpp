// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/scores.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "scorelm/error.hpp"

namespace scorelm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_alpha(double alpha, std::string_view family) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kParameterDomain,
                std::string(family) + " score requires alpha > 1, got " +
                    std::to_string(alpha));
  }
}

void check_index(std::size_t i, std::size_t m) {
  if (i >= m) {
    throw Error(ErrorCode::kInvalidInput,
                "outcome index " + std::to_string(i) + " out of range for m=" +
                    std::to_string(m));
  }
}

// w * s with the measure-theoretic convention 0 * (-inf) = 0.
double weighted(double w, double s) { return w == 0.0 ? 0.0 : w * s; }

// Holds the i-independent part of S(p, .) so a full row of scores costs O(m).
class RowScorer {
 public:
  RowScorer(const ScoreRule& rule, std::span<const double> p)
      : rule_(rule), p_(p) {
    const double a = rule.alpha();
    switch (rule.kind()) {
      case RuleKind::kBrier:
        for (double v : p) global_ += v * v;
        break;
      case RuleKind::kAlphaPower:
        for (double v : p) global_ += std::pow(v, a);
        break;
      case RuleKind::kSpherical:
        global_ = l2_norm(p);
        break;
      case RuleKind::kPseudoSpherical: {
        double total = 0.0;
        for (double v : p) total += std::pow(v, a);
        global_ = std::pow(total, (a - 1.0) / a);
        break;
      }
      case RuleKind::kLogarithmic:
      case RuleKind::kLinear:
        break;
    }
  }

  double operator()(std::size_t i) const {
    const double pi = p_[i];
    const double a = rule_.alpha();
    switch (rule_.kind()) {
      case RuleKind::kLogarithmic:
        return pi > 0.0 ? std::log(pi) : kNegInf;
      case RuleKind::kBrier:
        return 2.0 * pi - global_;
      case RuleKind::kAlphaPower:
        return a * std::pow(pi, a - 1.0) - (a - 1.0) * global_;
      case RuleKind::kSpherical:
        return pi / global_;
      case RuleKind::kPseudoSpherical:
        return std::pow(pi, a - 1.0) / global_;
      case RuleKind::kLinear:
        return pi;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  double row_sum() const {
    double total = 0.0;
    for (std::size_t j = 0; j < p_.size(); ++j) total += (*this)(j);
    return total;
  }

 private:
  const ScoreRule& rule_;
  std::span<const double> p_;
  double global_ = 0.0;
};

double smoothed_impl(const RowScorer& row, double eps, std::size_t m,
                     std::size_t i) {
  if (eps == 0.0) return row(i);
  const double own = weighted(1.0 - eps, row(i));
  return own + (eps / static_cast<double>(m)) * row.row_sum();
}

double mask_term(std::span<const double> p, double eps) {
  const double threshold = eps / static_cast<double>(p.size());
  double total = 0.0;
  bool any = false;
  for (double v : p) {
    if (v < threshold) {
      any = true;
      total += v > 0.0 ? std::log(v) : kNegInf;
    }
  }
  return any ? threshold * total : 0.0;
}

}  // namespace

ScoreRule ScoreRule::alpha_power(double alpha) {
  check_alpha(alpha, "alpha-power");
  return ScoreRule(RuleKind::kAlphaPower, alpha);
}

ScoreRule ScoreRule::pseudo_spherical(double alpha) {
  check_alpha(alpha, "pseudo-spherical");
  return ScoreRule(RuleKind::kPseudoSpherical, alpha);
}

ScoreRule ScoreRule::parse(std::string_view name, double alpha) {
  if (name == "logarithmic" || name == "log") return logarithmic();
  if (name == "brier") return brier();
  if (name == "spherical") return spherical();
  if (name == "linear") return linear();
  if (name == "alpha_power" || name == "power") return alpha_power(alpha);
  if (name == "pseudo_spherical") return pseudo_spherical(alpha);
  throw Error(ErrorCode::kConfiguration,
              "unknown scoring rule '" + std::string(name) +
                  "' (expected logarithmic, brier, spherical, alpha_power, "
                  "pseudo_spherical or linear)");
}

std::string_view ScoreRule::name() const noexcept {
  switch (kind_) {
    case RuleKind::kLogarithmic: return "logarithmic";
    case RuleKind::kBrier: return "brier";
    case RuleKind::kSpherical: return "spherical";
    case RuleKind::kAlphaPower: return "alpha_power";
    case RuleKind::kPseudoSpherical: return "pseudo_spherical";
    case RuleKind::kLinear: return "linear";
  }
  return "unknown";
}

std::string ScoreRule::label() const {
  std::string out(name());
  if (has_alpha()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "(%g)", alpha_);
    out += buf;
  }
  return out;
}

void SmoothingConfig::validate() const {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw Error(ErrorCode::kParameterDomain,
                "smoothing eps must lie in [0, 1], got " + std::to_string(eps));
  }
  if (mask_enhanced && eps == 0.0) {
    throw Error(ErrorCode::kConfiguration,
                "mask-enhanced smoothing requires eps > 0 (threshold eps/m "
                "would be zero)");
  }
}

double score(const ScoreRule& rule, const ProbVector& p, std::size_t i) {
  check_index(i, p.size());
  return RowScorer(rule, p.values())(i);
}

double expected_score(const ScoreRule& rule, const ProbVector& p,
                      const ProbVector& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "dimension mismatch: p has " + std::to_string(p.size()) +
                    " entries, q has " + std::to_string(q.size()));
  }
  const RowScorer row(rule, p.values());
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) total += weighted(q[i], row(i));
  return total;
}

double smoothed_score(const ScoreRule& rule, const SmoothingConfig& cfg,
                      const ProbVector& p, std::size_t i) {
  cfg.validate();
  check_index(i, p.size());
  return smoothed_impl(RowScorer(rule, p.values()), cfg.eps, p.size(), i);
}

double masked_log_smoothed_score(const ScoreRule& rule,
                                 const SmoothingConfig& cfg,
                                 const ProbVector& p, std::size_t i) {
  cfg.validate();
  if (cfg.eps == 0.0) {
    throw Error(ErrorCode::kConfiguration,
                "masked logarithmic smoothing requires eps > 0");
  }
  check_index(i, p.size());
  const double base =
      smoothed_impl(RowScorer(rule, p.values()), cfg.eps, p.size(), i);
  return base + mask_term(p.values(), cfg.eps);
}

double variant_score(const ScoreRule& rule, const SmoothingConfig& cfg,
                     const ProbVector& p, std::size_t i) {
  if (cfg.mask_enhanced) return masked_log_smoothed_score(rule, cfg, p, i);
  return smoothed_score(rule, cfg, p, i);
}

double expected_variant_score(const ScoreRule& rule, const SmoothingConfig& cfg,
                              const ProbVector& p, const ProbVector& q) {
  cfg.validate();
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kInvalidInput, "dimension mismatch between p and q");
  }
  const RowScorer row(rule, p.values());
  const double extra = cfg.mask_enhanced ? mask_term(p.values(), cfg.eps) : 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    total += q[i] * (smoothed_impl(row, cfg.eps, q.size(), i) + extra);
  }
  return total;
}

double token_loss_and_gradient(const ScoreRule& rule,
                               const SmoothingConfig& cfg,
                               std::span<const double> p, std::size_t i,
                               std::span<double> grad_logits) {
  const std::size_t m = p.size();
  check_index(i, m);
  const double eps = cfg.eps;
  const double spread = eps / static_cast<double>(m);
  const double a = rule.alpha();
  auto weight = [&](std::size_t j) {
    return (j == i ? 1.0 - eps : 0.0) + spread;
  };

  // Accumulate the utility and its gradient with respect to the logits; the
  // loss is the negation of both.
  std::span<double> g = grad_logits;
  std::fill(g.begin(), g.end(), 0.0);
  double utility = 0.0;

  // Terms of the form w log p_j have logit gradient w (e_j - p); collect the
  // e_j parts directly and subtract the total weight times p at the end.
  double log_weight = 0.0;
  auto add_log_term = [&](std::size_t j, double w) {
    utility += w * std::log(std::max(p[j], kTrainingLogFloor));
    if (p[j] >= kTrainingLogFloor) {
      g[j] += w;
      log_weight += w;
    }
  };

  if (rule.kind() == RuleKind::kLogarithmic) {
    for (std::size_t j = 0; j < m; ++j) {
      const double w = weight(j);
      if (w != 0.0) add_log_term(j, w);
    }
  } else {
    // h_k = p_k dU/dp_k; the softmax chain rule gives dU/dz = h - p sum(h).
    std::vector<double> h(m);
    switch (rule.kind()) {
      case RuleKind::kBrier: {
        double sq = 0.0, lin = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          sq += p[k] * p[k];
          lin += weight(k) * p[k];
          h[k] = 2.0 * p[k] * (weight(k) - p[k]);
        }
        utility += 2.0 * lin - sq;
        break;
      }
      case RuleKind::kAlphaPower: {
        double power_sum = 0.0, lin = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const double pk_am1 = std::pow(p[k], a - 1.0);
          const double pk_a = pk_am1 * p[k];
          power_sum += pk_a;
          lin += weight(k) * pk_am1;
          h[k] = a * (a - 1.0) * (weight(k) * pk_am1 - pk_a);
        }
        utility += a * lin - (a - 1.0) * power_sum;
        break;
      }
      case RuleKind::kSpherical: {
        const double norm = l2_norm(p);
        double lin = 0.0;
        for (std::size_t k = 0; k < m; ++k) lin += weight(k) * p[k];
        const double inv = 1.0 / norm;
        const double inv3 = inv * inv * inv;
        for (std::size_t k = 0; k < m; ++k) {
          h[k] = p[k] * weight(k) * inv - lin * p[k] * p[k] * inv3;
        }
        utility += lin * inv;
        break;
      }
      case RuleKind::kPseudoSpherical: {
        const double c = (a - 1.0) / a;
        double power_sum = 0.0, lin = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const double pk_am1 = std::pow(p[k], a - 1.0);
          power_sum += pk_am1 * p[k];
          lin += weight(k) * pk_am1;
        }
        const double denom = std::pow(power_sum, -c);
        const double denom1 = denom / power_sum;
        for (std::size_t k = 0; k < m; ++k) {
          const double pk_am1 = std::pow(p[k], a - 1.0);
          h[k] = (a - 1.0) *
                 (weight(k) * pk_am1 * denom - lin * pk_am1 * p[k] * denom1);
        }
        utility += lin * denom;
        break;
      }
      case RuleKind::kLinear: {
        for (std::size_t k = 0; k < m; ++k) {
          h[k] = weight(k) * p[k];
          utility += h[k];
        }
        break;
      }
      case RuleKind::kLogarithmic:
        break;
    }
    double h_total = 0.0;
    for (double v : h) h_total += v;
    for (std::size_t k = 0; k < m; ++k) g[k] += h[k] - p[k] * h_total;
  }

  if (cfg.mask_enhanced && spread > 0.0) {
    // Mask membership is a constant of this forward evaluation.
    for (std::size_t j = 0; j < m; ++j) {
      if (p[j] < spread) add_log_term(j, spread);
    }
  }

  if (log_weight != 0.0) {
    for (std::size_t k = 0; k < m; ++k) g[k] -= log_weight * p[k];
  }
  for (double& v : g) v = -v;
  return -utility;
}

double token_loss(const ScoreRule& rule, const SmoothingConfig& cfg,
                  std::span<const double> p, std::size_t i) {
  std::vector<double> scratch(p.size());
  return token_loss_and_gradient(rule, cfg, p, i, scratch);
}

std::vector<double> loss_gradient_logits(const ScoreRule& rule,
                                         const SmoothingConfig& cfg,
                                         const Logits& z, std::size_t i) {
  cfg.validate();
  check_index(i, z.size());
  std::vector<double> p(z.size());
  softmax_into(z.values(), p);
  std::vector<double> grad(z.size());
  token_loss_and_gradient(rule, cfg, p, i, grad);
  return grad;
}

EquivalenceGap entmax_power_equivalence_gap(const Logits& z, std::size_t x,
                                            double alpha) {
  const ProbVector p = entmax(z, alpha);
  check_index(x, p.size());

  double linear = -z[x];
  double power_sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    linear += p[j] * z[j];
    power_sum += std::pow(p[j], alpha);
  }
  EquivalenceGap out;
  out.entmax_loss = linear + tsallis_entropy(p, alpha);
  out.power_loss =
      (alpha - 1.0) * power_sum - alpha * std::pow(p[x], alpha - 1.0);
  out.gap = std::abs(out.entmax_loss -
                     (out.power_loss + 1.0) / (alpha * (alpha - 1.0)));
  out.gold_in_support = p[x] > 0.0;
  return out;
}

}  // namespace scorelm
