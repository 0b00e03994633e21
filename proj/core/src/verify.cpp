// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "scorelm/error.hpp"
#include "scorelm/rng.hpp"

namespace scorelm::verify {
namespace {

using nlohmann::json;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t grid_resolution(std::size_t m, double grid_step) {
  if (m != 2 && m != 3) {
    throw Error(ErrorCode::kInvalidInput, "grid scans support m = 2 or 3 only");
  }
  if (!(grid_step > 0.0) || grid_step > 0.05) {
    throw Error(ErrorCode::kInvalidInput, "grid_step must lie in (0, 0.05]");
  }
  const double inv = 1.0 / grid_step;
  const double n = std::round(inv);
  if (std::abs(n - inv) > 1e-6) {
    throw Error(ErrorCode::kInvalidInput, "1 / grid_step must be an integer");
  }
  // C(n + m - 1, m - 1) points.
  const double count = m == 2 ? n + 1.0 : (n + 1.0) * (n + 2.0) / 2.0;
  if (count > static_cast<double>(kMaxGridPoints)) {
    throw Error(ErrorCode::kSearchTooLarge,
                "grid of " + std::to_string(count) +
                    " points exceeds the limit of 1e6");
  }
  return static_cast<std::size_t>(n);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json rule_json(const ScoreRule& rule) {
  json out = {{"kind", rule.name()}};
  if (rule.has_alpha()) out["alpha"] = rule.alpha();
  return out;
}

using Objective = std::function<double(const ProbVector&)>;

// Fills the plain (unmasked) part of a scan entry.
void scan_target(const std::vector<std::vector<double>>& grid,
                 const std::vector<double>& values, std::span<const double> target,
                 double target_value, ScanEntry& entry,
                 std::vector<bool>& in_cell) {
  const std::size_t n = grid.size();
  std::vector<double> dist(n);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < n; ++g) {
    dist[g] = squared_distance(grid[g], target);
    dmin = std::min(dmin, dist[g]);
  }
  in_cell.assign(n, false);
  for (std::size_t g = 0; g < n; ++g) {
    if (dist[g] <= dmin + 1e-12) {
      in_cell[g] = true;
      entry.cell.push_back(grid[g]);
    }
  }

  std::size_t best = 0;
  double cell_best = kNegInf;
  double outside_best = kNegInf;
  for (std::size_t g = 0; g < n; ++g) {
    if (values[g] > values[best]) best = g;
    if (in_cell[g]) {
      cell_best = std::max(cell_best, values[g]);
    } else {
      outside_best = std::max(outside_best, values[g]);
    }
  }
  entry.target.assign(target.begin(), target.end());
  entry.argmax = grid[best];
  entry.argmax_value = values[best];
  entry.argmax_in_cell = in_cell[best];
  entry.target_value = target_value;
  entry.outside_best = outside_best;
  entry.margin = target_value - outside_best;
  entry.runner_up_gap = cell_best - outside_best;
  // NaN (both -inf) fails the comparison.
  entry.pass = entry.runner_up_gap > 0.0 && entry.argmax_in_cell;
}

std::vector<ProbVector> as_probs(const std::vector<std::vector<double>>& grid) {
  std::vector<ProbVector> out;
  out.reserve(grid.size());
  for (const auto& g : grid) out.emplace_back(g);
  return out;
}

// Extended-precision token loss straight from the rule definitions; the
// finite-difference oracle differences it, so roundoff must stay well below h^2.
long double reference_loss(const ScoreRule& rule, const SmoothingConfig& cfg,
                           const std::vector<double>& z, std::size_t i) {
  using L = long double;
  const std::size_t m = z.size();
  const L top = *std::max_element(z.begin(), z.end());
  std::vector<L> p(m);
  L total = 0;
  for (std::size_t k = 0; k < m; ++k) total += p[k] = std::exp(L(z[k]) - top);
  for (L& v : p) v /= total;

  const L a = rule.alpha();
  L sq = 0, power_sum = 0;
  for (L v : p) {
    sq += v * v;
    power_sum += std::pow(v, a);
  }
  auto s = [&](std::size_t j) -> L {
    switch (rule.kind()) {
      case RuleKind::kLogarithmic:
        return std::log(std::max(p[j], L(kTrainingLogFloor)));
      case RuleKind::kBrier:
        return 2 * p[j] - sq;
      case RuleKind::kAlphaPower:
        return a * std::pow(p[j], a - 1) - (a - 1) * power_sum;
      case RuleKind::kSpherical:
        return p[j] / std::sqrt(sq);
      case RuleKind::kPseudoSpherical:
        return std::pow(p[j], a - 1) / std::pow(power_sum, (a - 1) / a);
      case RuleKind::kLinear:
        return p[j];
    }
    return 0;
  };
  const L eps = cfg.eps;
  const L spread = eps / L(m);
  L utility = (1 - eps) * s(i);
  if (eps > 0) {
    for (std::size_t j = 0; j < m; ++j) utility += spread * s(j);
    if (cfg.mask_enhanced) {
      for (std::size_t j = 0; j < m; ++j) {
        if (p[j] < spread) utility += spread * std::log(std::max(p[j], L(kTrainingLogFloor)));
      }
    }
  }
  return -utility;
}

}  // namespace

std::vector<std::vector<double>> simplex_grid(std::size_t m, double grid_step) {
  const std::size_t n = grid_resolution(m, grid_step);
  const double dn = static_cast<double>(n);
  std::vector<std::vector<double>> grid;
  if (m == 2) {
    for (std::size_t a = 0; a <= n; ++a) {
      grid.push_back({static_cast<double>(a) / dn, static_cast<double>(n - a) / dn});
    }
    return grid;
  }
  for (std::size_t a = 0; a <= n; ++a) {
    for (std::size_t b = 0; a + b <= n; ++b) {
      grid.push_back({static_cast<double>(a) / dn, static_cast<double>(b) / dn,
                      static_cast<double>(n - a - b) / dn});
    }
  }
  return grid;
}

ScanReport propriety_scan(const ScoreRule& rule, std::size_t m, double grid_step,
                          const std::vector<ProbVector>& q_set) {
  const auto grid = simplex_grid(m, grid_step);
  const auto points = as_probs(grid);

  ScanReport report;
  report.kind = "propriety";
  report.rule = rule;
  report.m = m;
  report.grid_step = grid_step;
  report.grid_points = grid.size();
  report.pass = true;

  std::vector<double> values(grid.size());
  std::vector<bool> in_cell;
  for (const ProbVector& q : q_set) {
    if (q.size() != m) {
      throw Error(ErrorCode::kInvalidInput, "q has the wrong dimension for the grid");
    }
    for (std::size_t g = 0; g < points.size(); ++g) {
      values[g] = expected_score(rule, points[g], q);
    }
    ScanEntry entry;
    entry.q.assign(q.begin(), q.end());
    scan_target(grid, values, q.values(), expected_score(rule, q, q), entry, in_cell);
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

ScanReport smoothing_propriety_scan(const ScoreRule& rule,
                                    const SmoothingConfig& smoothing,
                                    std::size_t m, double grid_step,
                                    const std::vector<ProbVector>& q_set) {
  smoothing.validate();
  if (!(smoothing.eps > 0.0 && smoothing.eps < 1.0)) {
    throw Error(ErrorCode::kParameterDomain, "smoothing scan requires eps in (0, 1)");
  }
  const auto grid = simplex_grid(m, grid_step);
  const auto points = as_probs(grid);
  const SmoothingConfig plain{smoothing.eps, false};
  const SmoothingConfig masked{smoothing.eps, true};

  ScanReport report;
  report.kind = "smoothing";
  report.rule = rule;
  report.smoothing = smoothing;
  report.m = m;
  report.grid_step = grid_step;
  report.grid_points = grid.size();
  report.pass = true;

  std::vector<double> values(grid.size());
  std::vector<double> masked_values(grid.size());
  std::vector<bool> in_cell;
  for (const ProbVector& q : q_set) {
    if (q.size() != m) {
      throw Error(ErrorCode::kInvalidInput, "q has the wrong dimension for the grid");
    }
    const ProbVector target = smooth_distribution(q, smoothing.eps);
    for (std::size_t g = 0; g < points.size(); ++g) {
      values[g] = expected_variant_score(rule, plain, points[g], q);
    }
    ScanEntry entry;
    entry.q.assign(q.begin(), q.end());
    const double target_value = expected_variant_score(rule, plain, target, q);
    scan_target(grid, values, target.values(), target_value, entry, in_cell);

    if (smoothing.mask_enhanced) {
      entry.has_mask_checks = true;
      entry.dominance_holds = true;
      entry.max_dominance_excess = kNegInf;
      std::size_t best = 0;
      for (std::size_t g = 0; g < points.size(); ++g) {
        masked_values[g] = expected_variant_score(rule, masked, points[g], q);
        if (!(masked_values[g] <= values[g])) entry.dominance_holds = false;
        if (std::isfinite(values[g])) {
          entry.max_dominance_excess =
              std::max(entry.max_dominance_excess, masked_values[g] - values[g]);
        }
        if (masked_values[g] > masked_values[best]) best = g;
      }
      entry.masked_argmax = grid[best];
      entry.masked_argmax_in_cell = in_cell[best];
      entry.equality_at_target =
          expected_variant_score(rule, masked, target, q) == target_value;
      entry.pass = entry.pass && entry.dominance_holds &&
                   entry.equality_at_target && entry.masked_argmax_in_cell;
    }
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

Table1Report table1_check() {
  constexpr std::size_t m = 100;
  constexpr double eps = 0.1;
  const ProbVector q = ProbVector::one_hot(m, 0);
  const ProbVector q_eps = smooth_distribution(q, eps);

  struct Row {
    ScoreRule rule;
    double at_q;
    double at_q_eps;
  };
  const Row rows[] = {
      {ScoreRule::logarithmic(), kNegInf, -0.7778},
      {ScoreRule::brier(), 0.8020, 0.8119},
      {ScoreRule::spherical(), 0.9010, 0.9011},
  };

  auto matches = [](double value, double expected) {
    if (std::isinf(expected)) return value == expected;
    return std::isfinite(value) &&
           std::llround(value * 1e4) == std::llround(expected * 1e4);
  };

  Table1Report report;
  report.pass = true;
  for (const Row& row : rows) {
    for (const bool smoothed : {false, true}) {
      Table1Value v;
      v.rule = std::string(row.rule.name());
      v.prediction = smoothed ? "q_eps" : "q";
      v.value = expected_score(row.rule, smoothed ? q_eps : q, q_eps);
      v.expected = smoothed ? row.at_q_eps : row.at_q;
      v.match = matches(v.value, v.expected);
      report.pass = report.pass && v.match;
      report.values.push_back(std::move(v));
    }
  }
  return report;
}

GradCheckReport grad_check_at(const ScoreRule& rule, const SmoothingConfig& cfg,
                              const Logits& z, std::size_t i, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) {
    throw Error(ErrorCode::kParameterDomain, "finite-difference step must lie in [1e-7, 1e-3]");
  }
  GradCheckReport report;
  report.rule = rule;
  report.smoothing = cfg;
  report.m = z.size();
  report.trials = 1;
  report.h = h;

  const std::vector<double> analytic = loss_gradient_logits(rule, cfg, z, i);
  std::vector<double> shifted(z.values().begin(), z.values().end());
  auto loss_at = [&](const std::vector<double>& logits) {
    return reference_loss(rule, cfg, logits, i);
  };
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double orig = shifted[k];
    shifted[k] = orig + h;
    const double up = loss_at(shifted);
    shifted[k] = orig - h;
    const double down = loss_at(shifted);
    shifted[k] = orig;
    const auto numeric = static_cast<double>((up - down) / (2.0L * h));
    if (!std::isfinite(numeric) || !std::isfinite(analytic[k])) {
      report.finite = false;
      continue;
    }
    if (std::abs(analytic[k]) <= 1e-8) {
      ++report.skipped;
      continue;
    }
    ++report.checked;
    report.max_relative_error =
        std::max(report.max_relative_error,
                 std::abs(analytic[k] - numeric) / std::abs(analytic[k]));
  }
  return report;
}

GradCheckReport grad_check(const ScoreRule& rule, const SmoothingConfig& cfg,
                           std::size_t m, std::size_t trials, double h,
                           std::uint64_t seed, double logit_scale) {
  GradCheckReport report;
  report.rule = rule;
  report.smoothing = cfg;
  report.m = m;
  report.trials = trials;
  report.h = h;
  SplitMix64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<double> z(m);
    for (double& v : z) v = logit_scale * rng.normal();
    const auto i = static_cast<std::size_t>(rng.below(m));
    const GradCheckReport one = grad_check_at(rule, cfg, Logits(std::move(z)), i, h);
    report.max_relative_error = std::max(report.max_relative_error, one.max_relative_error);
    report.checked += one.checked;
    report.skipped += one.skipped;
    report.finite = report.finite && one.finite;
  }
  return report;
}

EntmaxReport entmax_sweep(const std::vector<double>& alphas,
                          std::size_t in_support_target, std::size_t m,
                          std::uint64_t seed, double logit_scale) {
  EntmaxReport report;
  report.m = m;
  report.pass = true;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const double alpha = alphas[a];
    if (!(alpha > 1.0)) {
      throw Error(ErrorCode::kParameterDomain, "entmax sweep requires alpha > 1");
    }
    EntmaxAlphaReport r;
    r.alpha = alpha;
    SplitMix64 rng(derive_seed(seed, a));
    const std::size_t max_draws = 50 * std::max<std::size_t>(in_support_target, 1);
    for (std::size_t draw = 0; draw < max_draws && r.in_support < in_support_target; ++draw) {
      std::vector<double> z(m);
      for (double& v : z) v = logit_scale * rng.normal();
      const auto x = static_cast<std::size_t>(rng.below(m));
      const EquivalenceGap gap = entmax_power_equivalence_gap(Logits(std::move(z)), x, alpha);
      if (gap.gold_in_support) {
        ++r.in_support;
        r.max_gap_in_support = std::max(r.max_gap_in_support, gap.gap);
      } else {
        ++r.out_of_support;
        r.max_gap_out_of_support = std::max(r.max_gap_out_of_support, gap.gap);
      }
    }
    r.pass = r.in_support >= in_support_target &&
             r.max_gap_in_support < kEquivalenceTolerance;
    report.pass = report.pass && r.pass;
    report.alphas.push_back(r);
  }
  return report;
}

json to_json(const ScanReport& report) {
  json entries = json::array();
  for (const ScanEntry& e : report.entries) {
    json cell = json::array();
    for (const auto& c : e.cell) cell.push_back(c);
    json item = {{"q", e.q},
                 {"target", e.target},
                 {"argmax", e.argmax},
                 {"argmax_value", num(e.argmax_value)},
                 {"cell", cell},
                 {"target_value", num(e.target_value)},
                 {"outside_best", num(e.outside_best)},
                 {"margin", num(e.margin)},
                 {"runner_up_gap", num(e.runner_up_gap)},
                 {"argmax_in_cell", e.argmax_in_cell},
                 {"pass", e.pass}};
    if (e.has_mask_checks) {
      item["dominance_holds"] = e.dominance_holds;
      item["max_dominance_excess"] = num(e.max_dominance_excess);
      item["equality_at_target"] = e.equality_at_target;
      item["masked_argmax"] = e.masked_argmax;
      item["masked_argmax_in_cell"] = e.masked_argmax_in_cell;
    }
    entries.push_back(std::move(item));
  }
  json out = {{"check", report.kind},
              {"rule", rule_json(report.rule)},
              {"m", report.m},
              {"grid_step", report.grid_step},
              {"grid_points", report.grid_points},
              {"entries", entries},
              {"pass", report.pass}};
  if (report.kind == "smoothing") {
    out["eps"] = report.smoothing.eps;
    out["mask_enhanced"] = report.smoothing.mask_enhanced;
  }
  return out;
}

json to_json(const Table1Report& report) {
  json values = json::array();
  for (const Table1Value& v : report.values) {
    values.push_back({{"rule", v.rule},
                      {"p", v.prediction},
                      {"value", num(v.value)},
                      {"expected", num(v.expected)},
                      {"match", v.match}});
  }
  return {{"check", "table1"}, {"values", values}, {"pass", report.pass}};
}

json to_json(const GradCheckReport& report) {
  return {{"check", "gradcheck"},
          {"rule", rule_json(report.rule)},
          {"eps", report.smoothing.eps},
          {"mask_enhanced", report.smoothing.mask_enhanced},
          {"m", report.m},
          {"trials", report.trials},
          {"h", report.h},
          {"max_relative_error", num(report.max_relative_error)},
          {"checked", report.checked},
          {"skipped", report.skipped},
          {"finite", report.finite}};
}

json to_json(const EntmaxReport& report) {
  json alphas = json::array();
  for (const EntmaxAlphaReport& r : report.alphas) {
    alphas.push_back({{"alpha", r.alpha},
                      {"in_support", r.in_support},
                      {"out_of_support", r.out_of_support},
                      {"max_gap_in_support", num(r.max_gap_in_support)},
                      {"max_gap_out_of_support", num(r.max_gap_out_of_support)},
                      {"pass", r.pass}});
  }
  return {{"check", "entmax"}, {"m", report.m}, {"alphas", alphas}, {"pass", report.pass}};
}

}  // namespace scorelm::verify
