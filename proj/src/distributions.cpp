#include "abstain/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace abstain {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}
}  // namespace

KnownDistribution validate_distribution(KnownDistribution dist) {
  if (const auto* pu = std::get_if<ProductUniform>(&dist)) {
    if (pu->p < 1) throw ConfigError("ProductUniform requires p >= 1");
  } else if (const auto* dt = std::get_if<DiscreteTree>(&dist)) {
    if (!dt->tree) throw ConfigError("DiscreteTree requires a tree");
    if (static_cast<int>(dt->weights.size()) != dt->tree->size()) {
      throw ConfigError("DiscreteTree weight count mismatch");
    }
    double sum = 0.0;
    for (double w : dt->weights) {
      if (w < 0.0) throw ConfigError("DiscreteTree weights must be >= 0");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ConfigError("DiscreteTree weights must sum to 1");
    }
  }
  return dist;
}

Point sample(const KnownDistribution& dist, Rng& rng) {
  if (std::holds_alternative<Uniform01>(dist)) {
    return uniform01(rng);
  }
  if (const auto* pu = std::get_if<ProductUniform>(&dist)) {
    Vec v(pu->p);
    for (double& c : v) c = uniform01(rng);
    return v;
  }
  const auto& dt = std::get<DiscreteTree>(dist);
  const double u = uniform01(rng);
  double acc = 0.0;
  for (size_t i = 0; i < dt.weights.size(); ++i) {
    acc += dt.weights[i];
    if (u < acc) return TreeNode{dt.tree->ids[i]};
  }
  return TreeNode{dt.tree->ids.back()};
}

double region_mass(const KnownDistribution& dist,
                   const RegionDescriptor& region) {
  if (std::holds_alternative<RectDisRegion>(region)) throw UseMonteCarlo();
  if (const auto* iv = std::get_if<ScalarInterval>(&region)) {
    if (!std::holds_alternative<Uniform01>(dist)) {
      throw ConfigError("scalar region requires Uniform01");
    }
    const double a = std::clamp(iv->lo, 0.0, 1.0);
    const double b = std::clamp(iv->hi, 0.0, 1.0);
    return std::max(0.0, b - a);
  }
  const auto& ns = std::get<NodeSet>(region);
  const auto* dt = std::get_if<DiscreteTree>(&dist);
  if (!dt) throw ConfigError("node-set region requires DiscreteTree");
  double mass = 0.0;
  for (int id : ns.ids) mass += dt->weights[dt->tree->index(id)];
  return mass;
}

namespace {

double largest_neg_below(const std::vector<double>& negs, double x) {
  auto it = std::lower_bound(negs.begin(), negs.end(), x);
  return it == negs.begin() ? -kInf : *std::prev(it);
}

double smallest_neg_above(const std::vector<double>& negs, double x) {
  auto it = std::upper_bound(negs.begin(), negs.end(), x);
  return it == negs.end() ? kInf : *it;
}

double interval_rho(const IntervalVS& vs, int k) {
  if (vs.is_empty()) return 0.0;
  if (!vs.has_pos) {
    return k == 1 ? 1.0 : vs.neg_gap_sumsq;
  }
  const double gl = vs.gap_left();
  const double gr = vs.gap_right();
  return k == 1 ? gl + gr : 2.0 * gl * gr;
}

double boxed_rho(const std::vector<double>& negs, double nmin, double nmax,
                 int k) {
  const double gl =
      std::max(0.0, std::min(nmin, 1.0) - std::max(0.0, largest_neg_below(negs, nmin)));
  const double gr =
      std::max(0.0, std::min(1.0, smallest_neg_above(negs, nmax)) - std::max(nmax, 0.0));
  return k == 1 ? gl + gr : 2.0 * gl * gr;
}

}  // namespace

ShatterEstimate rho_k_exact(const AnyVS& vs, const KnownDistribution& dist,
                            int k) {
  if (k < 1) throw ConfigError("rho_k requires k >= 1");
  ShatterEstimate out;
  if (const auto* t = std::get_if<ThresholdVS>(&vs)) {
    if (k != 1 || !std::holds_alternative<Uniform01>(dist)) {
      throw UseMonteCarlo();
    }
    out.value = t->dis_length();
    return out;
  }
  if (const auto* iv = std::get_if<IntervalVS>(&vs)) {
    if (k > 2 || !std::holds_alternative<Uniform01>(dist)) {
      throw UseMonteCarlo();
    }
    out.value = interval_rho(*iv, k);
    return out;
  }
  if (const auto* tr = std::get_if<TreeClassVS>(&vs)) {
    const auto* dt = std::get_if<DiscreteTree>(&dist);
    if (k != 1 || !dt) throw UseMonteCarlo();
    if (tr->is_empty()) return out;
    double mass = 0.0;
    for (int i = 0; i < tr->tree->size(); ++i) {
      if (tr->dis_contains(TreeNode{tr->tree->ids[i]})) {
        mass += dt->weights[dt->tree->index(tr->tree->ids[i])];
      }
    }
    out.value = mass;
    return out;
  }
  throw UseMonteCarlo();
}

ShatterEstimate rho_k_exact_restricted(const AnyVS& vs, const Point& x,
                                       Label y, const KnownDistribution& dist,
                                       int k) {
  const auto* iv = std::get_if<IntervalVS>(&vs);
  if (!iv || k > 2 || !std::holds_alternative<Uniform01>(dist)) {
    return rho_k_exact(restrict_vs(vs, x, y), dist, k);
  }
  ShatterEstimate out;
  if (iv->is_empty()) return out;
  const double xv = std::get<double>(x);
  if (y == Label::One) {
    const double nmin = iv->has_pos ? std::min(iv->pos_min, xv) : xv;
    const double nmax = iv->has_pos ? std::max(iv->pos_max, xv) : xv;
    auto it = std::lower_bound(iv->negatives.begin(), iv->negatives.end(), nmin);
    if (it != iv->negatives.end() && *it <= nmax) return out;  // empty
    out.value = boxed_rho(iv->negatives, nmin, nmax, k);
    return out;
  }
  if (iv->has_pos) {
    if (xv >= iv->pos_min && xv <= iv->pos_max) return out;  // empty
    double gl = iv->gap_left();
    double gr = iv->gap_right();
    if (xv > iv->neg_below() && xv < iv->pos_min) {
      gl = std::max(0.0, std::min(iv->pos_min, 1.0) - std::max(0.0, xv));
    } else if (xv > iv->pos_max && xv < iv->neg_above()) {
      gr = std::max(0.0, std::min(1.0, xv) - std::max(iv->pos_max, 0.0));
    }
    out.value = k == 1 ? gl + gr : 2.0 * gl * gr;
    return out;
  }
  if (k == 1) {
    out.value = 1.0;
    return out;
  }
  double sumsq = iv->neg_gap_sumsq;
  if (xv >= 0.0 && xv <= 1.0 &&
      !std::binary_search(iv->negatives.begin(), iv->negatives.end(), xv)) {
    const double a = std::max(0.0, largest_neg_below(iv->negatives, xv));
    const double b = std::min(1.0, smallest_neg_above(iv->negatives, xv));
    sumsq += (xv - a) * (xv - a) + (b - xv) * (b - xv) - (b - a) * (b - a);
  }
  out.value = sumsq;
  return out;
}

ShatterEstimate rho_k_mc(const AnyVS& vs, const KnownDistribution& dist, int k,
                         long m, Rng& rng) {
  if (m < 1) throw ConfigError("rho_k_mc requires m >= 1");
  ShatterEstimate out;
  out.method = RhoMethod::MonteCarlo;
  out.m = m;
  if (vs_empty(vs)) return out;
  const bool discrete = std::holds_alternative<DiscreteTree>(dist);
  long hits = 0;
  std::vector<Point> pts;
  for (long i = 0; i < m; ++i) {
    pts.clear();
    bool ok = true;
    int restarts = 0;
    while (static_cast<int>(pts.size()) < k) {
      Point p = sample(dist, rng);
      bool dup = false;
      for (const Point& q : pts) {
        if (same_point(p, q)) {
          dup = true;
          break;
        }
      }
      if (!dup) {
        pts.push_back(std::move(p));
      } else if (discrete) {
        pts.clear();
        if (++restarts > 100) {
          ok = false;
          break;
        }
      } else if (++restarts > 100) {
        ok = false;
        break;
      }
    }
    if (ok && shatters(vs, pts)) ++hits;
  }
  out.value = static_cast<double>(hits) / static_cast<double>(m);
  out.stderr_ = std::sqrt(out.value * (1.0 - out.value) / static_cast<double>(m));
  return out;
}

}  // namespace abstain
