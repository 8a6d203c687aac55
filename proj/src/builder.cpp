#include "folia/builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace folia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSafety = 0.9;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double min_distance_to_class(const FoliationManifest& m, const Point& w, int l) {
  double best = kInf;
  for (std::size_t k = 0; k < m.centers.size(); ++k) {
    if (residue_class(k + 1, m.n()) == l) best = std::min(best, distance(w, m.centers[k]));
  }
  return best;
}

// Distance from p to the full line through `anchor` along Re z1.
double line_distance(const Point& anchor, const Point& p) {
  double s = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) s += (p[i] - anchor[i]) * (p[i] - anchor[i]);
  return std::sqrt(s);
}

void append_grid(std::vector<double>& ts, double lo, double hi, int count, double t_min, double t_max) {
  lo = std::max(lo, t_min);
  hi = std::min(hi, t_max);
  if (!(lo < hi) || count < 2) return;
  for (int i = 0; i < count; ++i) ts.push_back(lo + (hi - lo) * i / (count - 1));
}

}  // namespace

std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> primes;
  for (unsigned c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (unsigned p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(unsigned base, std::uint64_t index) {
  const double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

int residue_class(std::size_t k, int n) { return static_cast<int>((k - 1) % static_cast<std::size_t>(n)) + 1; }

FoliationManifest empty_manifest(const Domain& domain, const BuildParams& params) {
  FoliationManifest m{domain, params, params.k_bend.value_or(select_K()), {}, {}, {0.5}, {1.0}, {1.0}};
  return m;
}

CenterSampler::CenterSampler(const Domain& domain, std::uint64_t seed) : domain_(domain) {
  std::uint64_t state = seed;
  for (int i = 0; i < domain_.real_dim(); ++i) {
    shift_.push_back(static_cast<double>(splitmix64(state) >> 11) * 0x1p-53);
  }
}

Point CenterSampler::next() {
  static const std::vector<unsigned> primes = first_primes(64);
  if (shift_.size() > primes.size()) throw DomainError("sampler supports at most 32 complex dimensions");
  ++index_;
  const auto [lo, hi] = domain_.bounding_box();
  Point p = lo;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double u = radical_inverse(primes[i], index_) + shift_[i];
    if (u >= 1.0) u -= 1.0;
    p[i] = lo[i] + (hi[i] - lo[i]) * u;
  }
  return p;
}

bool admissible_center(const FoliationManifest& m, const Point& w) {
  if (!m.domain.contains_interior(w)) return false;
  for (std::size_t j = 0; j < m.stages.size(); ++j) {
    const Stage& s = m.stages[j];
    if (!(distance(w, s.center()) > s.epsilon())) return false;
    if (!(line_distance(m.centers[j], w) > 0.0)) return false;
  }
  return true;
}

Point dense_sequence_next(const FoliationManifest& m, CenterSampler& sampler, int l) {
  if (l < 1 || l > m.n()) throw DomainError("coordinate class out of range");
  std::optional<Point> best;
  double best_score = -1.0;
  int found = 0;
  for (int draw = 0; draw < m.params.max_draws && found < m.params.candidates; ++draw) {
    Point w = sampler.next();
    if (!admissible_center(m, w)) continue;
    ++found;
    const double score = min_distance_to_class(m, w, l);
    if (score > best_score) {
      best_score = score;
      best = std::move(w);
    }
  }
  if (!best) throw InvariantViolation("exhausted", "no admissible centre found in the dense sequence");
  return *best;
}

EpsilonChoice choose_epsilon(const FoliationManifest& m, const Point& w) {
  EpsilonChoice c;
  const std::size_t s = m.stages.size();
  c.bound_a = s >= 1 ? m.stages.back().epsilon() / 2.0 : kInf;
  c.bound_c = m.separation_bounds.at(s) / 16.0;
  c.bound_d = m.domain.boundary_distance(w);
  c.bound_resolution = m.params.resolution;
  c.bound_b_leaves = kInf;
  c.bound_b_supports = kInf;
  for (std::size_t j = 0; j < s; ++j) {
    c.bound_b_leaves = std::min(c.bound_b_leaves, distance_to_leaf(marked_leaf(m, j), w));
    c.bound_b_supports = std::min(c.bound_b_supports, distance(w, m.stages[j].center()) - m.stages[j].epsilon());
  }
  const std::pair<double, const char*> bounds[] = {
      {c.bound_a, "(a)"},          {c.bound_b_leaves, "(b)"}, {c.bound_b_supports, "(b)"},
      {c.bound_c, "(c)"},          {c.bound_d, "(d)"},        {c.bound_resolution, "resolution"},
  };
  double tightest = kInf;
  for (const auto& [value, name] : bounds) {
    if (value < tightest) {
      tightest = value;
      c.binding = name;
    }
  }
  c.epsilon = kSafety * tightest;
  c.ok = std::isfinite(c.epsilon) && c.epsilon > 0.0 && m.k_bend * c.epsilon / 6.0 >= 1e-280;
  return c;
}

const Stage& push_stage(FoliationManifest& m, const Point& w, double eps) {
  const std::size_t s = m.stages.size();
  if (w.size() != static_cast<std::size_t>(m.domain.real_dim())) throw DomainError("centre has the wrong dimension");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvariantViolation("(d)", "radius must be positive");
  if (s >= 1 && !(eps < m.stages.back().epsilon() / 2.0)) {
    throw InvariantViolation("(a)", "radius " + std::to_string(eps) + " is not below half the previous radius");
  }
  for (std::size_t j = 0; j < s; ++j) {
    if (!(distance_to_leaf(marked_leaf(m, j), w) > eps)) {
      throw InvariantViolation("(b)", "support ball meets marked leaf L_" + std::to_string(j + 1));
    }
    if (!(distance(w, m.stages[j].center()) > eps + m.stages[j].epsilon())) {
      throw InvariantViolation("(b)", "support ball meets the support of stage " + std::to_string(j + 1));
    }
  }
  if (!(eps < m.separation_bounds.at(s) / 16.0)) {
    throw InvariantViolation("(c)", "radius is not below l_s / 16");
  }
  if (!(eps < m.domain.boundary_distance(w))) {
    throw InvariantViolation("(d)", "closed support ball leaves the domain");
  }
  const int l = residue_class(s + 1, m.n());
  try {
    m.stages.push_back(Stage::standard(w, eps, l, m.k_bend, m.params.flow_steps));
  } catch (const InvariantViolation& e) {
    throw InvariantViolation("(d)", e.what());
  }
  m.centers.push_back(w);
  const double floor = std::min(m.lipschitz_floor.back(), m.stages.back().lower_lipschitz());
  const double k = static_cast<double>(m.stages.size());
  m.lipschitz_floor.push_back(floor);
  m.separation_bounds.push_back(floor / (k + 2.0));
  m.separation_bounds_alt.push_back(floor / (k + 1.0));
  return m.stages.back();
}

FoliationManifest build_foliation(const Domain& domain, const BuildParams& params) {
  if (params.stages < 1) throw DomainError("stage count must be >= 1");
  if (!(params.resolution > 0.0)) throw DomainError("resolution must be positive");
  FoliationManifest m = empty_manifest(domain, params);
  CenterSampler sampler(domain, params.seed);
  for (int k = 1; k <= params.stages; ++k) {
    const int l = residue_class(static_cast<std::size_t>(k), m.n());
    EpsilonChoice choice;
    bool pushed = false;
    for (int attempt = 0; attempt < 64 && !pushed; ++attempt) {
      const Point w = dense_sequence_next(m, sampler, l);
      choice = choose_epsilon(m, w);
      if (choice.ok) {
        push_stage(m, w, choice.epsilon);
        pushed = true;
      }
    }
    if (!pushed) {
      throw InvariantViolation(choice.binding.empty() ? "(d)" : choice.binding,
                               "no admissible radius for stage " + std::to_string(k));
    }
  }
  return m;
}

Point forward(const FoliationManifest& m, const Point& x, std::optional<std::size_t> count) {
  const std::size_t k = std::min(count.value_or(m.stages.size()), m.stages.size());
  Point y = x;
  for (std::size_t j = 0; j < k; ++j) y = stage_forward(m.stages[j], y);
  return y;
}

Point inverse(const FoliationManifest& m, const Point& y, std::optional<std::size_t> count) {
  const std::size_t k = std::min(count.value_or(m.stages.size()), m.stages.size());
  Point x = y;
  for (std::size_t j = k; j-- > 0;) x = stage_inverse(m.stages[j], x);
  return x;
}

BaseLeaf marked_leaf(const FoliationManifest& m, std::size_t stage_index) {
  return base_leaf_through(m.domain, m.centers.at(stage_index));
}

namespace {

LeafCurve sample_leaf(const FoliationManifest& m, const BaseLeaf& base, std::optional<std::size_t> marked,
                      const LeafOptions& opts) {
  const std::size_t count = std::min(opts.stage_count.value_or(m.stages.size()), m.stages.size());
  std::vector<double> ts;
  append_grid(ts, base.t_min, base.t_max, opts.uniform_samples, base.t_min, base.t_max);
  for (std::size_t j = 0; j < count; ++j) {
    const Stage& s = m.stages[j];
    const double d = line_distance(base.anchor, s.center());
    if (!(d < s.epsilon())) continue;
    const double half = std::sqrt(s.epsilon() * s.epsilon() - d * d);
    const double tc = s.center()[0] - base.anchor[0];
    append_grid(ts, tc - half, tc + half, opts.refine_samples, base.t_min, base.t_max);
    if (marked && *marked == j) {
      append_grid(ts, tc - s.eta(), tc + s.eta(), opts.refine_samples, base.t_min, base.t_max);
      ts.push_back(tc);
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  LeafCurve curve{base, ts, {}, marked};
  curve.samples.reserve(ts.size());
  for (double t : ts) curve.samples.push_back(forward(m, base.at(t), count));
  return curve;
}

}  // namespace

LeafCurve marked_leaf_curve(const FoliationManifest& m, std::size_t stage_index, const LeafOptions& opts) {
  BaseLeaf base = marked_leaf(m, stage_index);
  return sample_leaf(m, base, stage_index, opts);
}

LeafCurve leaf_through(const FoliationManifest& m, const Point& x, const LeafOptions& opts) {
  if (!m.domain.contains(x)) throw DomainError("point lies outside the domain");
  const std::size_t count = std::min(opts.stage_count.value_or(m.stages.size()), m.stages.size());
  Point y = inverse(m, x, count);
  std::optional<std::size_t> marked;
  double best = kInf;
  for (std::size_t j = 0; j < count; ++j) {
    const double d = line_distance(y, m.centers[j]);
    if (d <= 1e-6 * m.stages[j].epsilon() && d < best) {
      best = d;
      marked = j;
    }
  }
  if (marked) {
    const Point& w = m.centers[*marked];
    Point anchor = w;
    BaseLeaf base = base_leaf_through(m.domain, anchor);
    return sample_leaf(m, base, marked, opts);
  }
  return sample_leaf(m, base_leaf_through(m.domain, y), std::nullopt, opts);
}

LeafCurve leaf_of_base(const FoliationManifest& m, const Point& anchor, const LeafOptions& opts) {
  const BaseLeaf base = base_leaf_through(m.domain, anchor);
  const std::size_t count = std::min(opts.stage_count.value_or(m.stages.size()), m.stages.size());
  for (std::size_t j = 0; j < count; ++j) {
    if (line_distance(anchor, m.centers[j]) <= 1e-6 * m.stages[j].epsilon()) {
      return sample_leaf(m, base_leaf_through(m.domain, m.centers[j]), j, opts);
    }
  }
  return sample_leaf(m, base, std::nullopt, opts);
}

double convergence_bound(const FoliationManifest& m) {
  if (m.stages.empty()) throw DomainError("convergence bound needs at least one stage");
  return 2.0 * m.stages.back().epsilon();
}

ConvergenceReport convergence_report(const FoliationManifest& m) {
  ConvergenceReport r;
  r.bound = convergence_bound(m);
  r.consistent = true;
  for (std::size_t s = 1; s < m.stages.size(); ++s) {
    if (!(4.0 * m.stages[s].epsilon() < m.separation_bounds.at(s) / 4.0)) r.consistent = false;
  }
  r.tail_consistent = r.bound < m.separation_bounds.back() / 4.0;
  return r;
}

SeparationResult separation_check(const FoliationManifest& m, std::size_t pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t k = m.stages.size();
  const int n = m.n();
  SeparationResult result;
  result.min_ratio = kInf;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double scale = 1.0 / (static_cast<double>(i % (k + 1)) + 2.0);
    Point z = random_point_in(m.domain, rng);
    if (k > 0 && i % 2 == 1) {
      const Stage& s = m.stages[rng() % k];
      Point near = s.center() + (s.epsilon() * unit_uniform(rng)) * random_direction(n, rng);
      if (m.domain.contains_interior(near)) z = near;
    }
    std::optional<Point> w;
    for (int tries = 0; tries < 64 && !w; ++tries) {
      Point cand = z + scale * random_direction(n, rng);
      if (m.domain.contains_interior(cand)) w = cand;
    }
    if (!w) continue;
    const double d = distance(z, *w);
    // Smallest bucket s with d >= 1/(s+2).
    std::size_t bucket = static_cast<std::size_t>(std::max(0.0, std::ceil(1.0 / d - 2.0)));
    while (1.0 / (static_cast<double>(bucket) + 2.0) > d) ++bucket;
    while (bucket > 0 && 1.0 / (static_cast<double>(bucket) + 1.0) <= d) --bucket;
    const double predicted =
        bucket <= k ? 0.5 * m.separation_bounds[bucket] : 0.5 * m.lipschitz_floor.back() * d;
    const double ratio = distance(forward(m, z), forward(m, *w)) / predicted;
    ++result.pairs;
    if (ratio < result.min_ratio) {
      result.min_ratio = ratio;
      result.worst_z = z;
      result.worst_w = *w;
    }
  }
  return result;
}

}  // namespace folia
