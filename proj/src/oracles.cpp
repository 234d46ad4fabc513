#include "abstain/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace abstain {

namespace {

constexpr double kEps = 1e-9;

// Candidate parameter values on [0,1]: uniform grid plus instance-derived
// values (coordinates, small offsets, midpoints) so hypotheses separating
// nearby sampled points are always represented.
std::vector<double> scalar_candidates(const std::vector<double>& coords,
                                      const GridSpec& grid) {
  if (grid.resolution < 64) throw ConfigError("grid resolution must be >= 64");
  std::vector<double> cand;
  cand.reserve(coords.size() * 4 + grid.resolution + 8);
  for (int i = 0; i <= grid.resolution; ++i) {
    cand.push_back(static_cast<double>(i) / grid.resolution);
  }
  std::vector<double> sorted = coords;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    cand.push_back(sorted[i]);
    cand.push_back(sorted[i] - kEps);
    cand.push_back(sorted[i] + kEps);
    if (i + 1 < sorted.size()) {
      cand.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    }
  }
  cand.push_back(0.0);
  cand.push_back(1.0);
  for (double& c : cand) c = std::clamp(c, 0.0, 1.0);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  return cand;
}

// Per-dimension candidate box faces for rectangles: coordinates with small
// offsets, midpoints, and outer sentinels (no uniform grid; faces can always
// be normalized to lie next to an instance coordinate).
std::vector<double> face_candidates(std::vector<double> coords) {
  if (coords.empty()) return {0.0, 1.0};
  std::sort(coords.begin(), coords.end());
  std::vector<double> cand;
  cand.push_back(coords.front() - 1.0);
  for (size_t i = 0; i < coords.size(); ++i) {
    cand.push_back(coords[i] - kEps);
    cand.push_back(coords[i]);
    cand.push_back(coords[i] + kEps);
    if (i + 1 < coords.size()) cand.push_back(0.5 * (coords[i] + coords[i + 1]));
  }
  cand.push_back(coords.back() + 1.0);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  return cand;
}

std::vector<std::uint64_t> tree_hypotheses(const TreeTopology& tree) {
  std::vector<std::uint64_t> hyps{0};
  for (int i = 0; i < tree.size(); ++i) {
    std::uint64_t m = 0;
    for (int v = i; v != -1; v = tree.parent[v]) m |= std::uint64_t{1} << v;
    if (std::find(hyps.begin(), hyps.end(), m) == hyps.end()) hyps.push_back(m);
  }
  return hyps;
}

template <typename Hyp, typename Eval>
bool enumerate_shatters(const std::vector<Hyp>& hyps, const Eval& eval,
                        const LabeledSet& data,
                        const std::vector<Point>& points) {
  std::vector<Hyp> live;
  for (const Hyp& h : hyps) {
    bool ok = true;
    for (const LabeledItem& d : data) {
      if (eval(h, d.point) != (d.label == Label::One)) {
        ok = false;
        break;
      }
    }
    if (ok) live.push_back(h);
  }
  const int k = static_cast<int>(points.size());
  for (std::uint64_t want = 0; want < (std::uint64_t{1} << k); ++want) {
    bool found = false;
    for (const Hyp& h : live) {
      bool ok = true;
      for (int i = 0; i < k && ok; ++i) {
        ok = eval(h, points[i]) == (((want >> i) & 1) != 0);
      }
      if (ok) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

template <typename Hyp, typename Eval>
GammaResult enumerate_gamma(const std::vector<Hyp>& hyps, const Eval& eval,
                            const LabeledSet& S, const RefFn& ref) {
  GammaResult out;
  std::vector<size_t> sf;
  for (size_t i = 0; i < S.size(); ++i) {
    if (ref(S[i].point) != S[i].label) sf.push_back(i);
  }
  for (size_t i = 0; i < S.size(); ++i) {
    bool is_member = false;
    for (const Point& m : out.members) {
      if (same_point(m, S[i].point)) {
        is_member = true;
        break;
      }
    }
    if (is_member) continue;
    // Restrict to S_ref minus one occurrence of (x_i, y_i).
    bool removed = false;
    std::vector<size_t> kept;
    for (size_t j : sf) {
      if (!removed && same_point(S[j].point, S[i].point) &&
          S[j].label == S[i].label) {
        removed = true;
        continue;
      }
      kept.push_back(j);
    }
    bool saw_zero = false, saw_one = false;
    for (const Hyp& h : hyps) {
      bool ok = true;
      for (size_t j : kept) {
        if (eval(h, S[j].point) != (S[j].label == Label::One)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      (eval(h, S[i].point) ? saw_one : saw_zero) = true;
      if (saw_zero && saw_one) break;
    }
    if (saw_zero && saw_one) out.members.push_back(S[i].point);
  }
  out.count = static_cast<long>(out.members.size());
  return out;
}

std::vector<double> collect_scalars(const LabeledSet& data,
                                    const std::vector<Point>& points) {
  std::vector<double> coords;
  for (const LabeledItem& d : data) coords.push_back(std::get<double>(d.point));
  for (const Point& p : points) coords.push_back(std::get<double>(p));
  return coords;
}

}  // namespace

bool shatters_bruteforce(const ClassDescriptor& cls, const LabeledSet& data,
                         const std::vector<Point>& points,
                         const GridSpec& grid) {
  if (std::holds_alternative<ThresholdsClass>(cls)) {
    const auto cand = scalar_candidates(collect_scalars(data, points), grid);
    const auto eval = [](double a, const Point& p) {
      return std::get<double>(p) <= a;
    };
    return enumerate_shatters(cand, eval, data, points);
  }
  if (std::holds_alternative<IntervalsClass>(cls)) {
    const auto cand = scalar_candidates(collect_scalars(data, points), grid);
    std::vector<std::pair<double, double>> hyps;
    hyps.reserve(cand.size() * (cand.size() + 1) / 2);
    for (size_t i = 0; i < cand.size(); ++i) {
      for (size_t j = i; j < cand.size(); ++j) {
        hyps.emplace_back(cand[i], cand[j]);
      }
    }
    const auto eval = [](const std::pair<double, double>& h, const Point& p) {
      const double x = std::get<double>(p);
      return x >= h.first && x <= h.second;
    };
    return enumerate_shatters(hyps, eval, data, points);
  }
  if (const auto* rc = std::get_if<RectanglesClass>(&cls)) {
    const int p = rc->p;
    std::vector<std::vector<double>> dim_coords(p);
    for (const LabeledItem& d : data) {
      const Vec& v = std::get<Vec>(d.point);
      for (int i = 0; i < p; ++i) dim_coords[i].push_back(v[i]);
    }
    for (const Point& pt : points) {
      const Vec& v = std::get<Vec>(pt);
      for (int i = 0; i < p; ++i) dim_coords[i].push_back(v[i]);
    }
    std::vector<std::vector<std::pair<double, double>>> dim_faces(p);
    for (int i = 0; i < p; ++i) {
      const auto cand = face_candidates(dim_coords[i]);
      for (size_t a = 0; a < cand.size(); ++a) {
        for (size_t b = a; b < cand.size(); ++b) {
          dim_faces[i].emplace_back(cand[a], cand[b]);
        }
      }
    }
    // Enumerate boxes as a mixed-radix counter over per-dimension faces.
    std::vector<size_t> idx(p, 0);
    std::vector<std::vector<std::pair<double, double>>> boxes;
    while (true) {
      std::vector<std::pair<double, double>> box(p);
      for (int i = 0; i < p; ++i) box[i] = dim_faces[i][idx[i]];
      boxes.push_back(std::move(box));
      int d = 0;
      while (d < p && ++idx[d] == dim_faces[d].size()) {
        idx[d] = 0;
        ++d;
      }
      if (d == p) break;
    }
    const auto eval = [p](const std::vector<std::pair<double, double>>& h,
                          const Point& pt) {
      const Vec& v = std::get<Vec>(pt);
      for (int i = 0; i < p; ++i) {
        if (v[i] < h[i].first || v[i] > h[i].second) return false;
      }
      return true;
    };
    return enumerate_shatters(boxes, eval, data, points);
  }
  const auto& tc = std::get<TreesClass>(cls);
  const auto hyps = tree_hypotheses(*tc.tree);
  const auto eval = [&tc](std::uint64_t h, const Point& p) {
    const int i = tc.tree->index(std::get<TreeNode>(p).id);
    return (h & (std::uint64_t{1} << i)) != 0;
  };
  return enumerate_shatters(hyps, eval, data, points);
}

GammaResult gamma_bruteforce(const ClassDescriptor& cls, const LabeledSet& S,
                             const RefFn& ref, const GridSpec& grid) {
  if (std::holds_alternative<ThresholdsClass>(cls)) {
    const auto cand = scalar_candidates(collect_scalars(S, {}), grid);
    const auto eval = [](double a, const Point& p) {
      return std::get<double>(p) <= a;
    };
    return enumerate_gamma(cand, eval, S, ref);
  }
  if (const auto* tc = std::get_if<TreesClass>(&cls)) {
    const auto hyps = tree_hypotheses(*tc->tree);
    const auto eval = [tc](std::uint64_t h, const Point& p) {
      const int i = tc->tree->index(std::get<TreeNode>(p).id);
      return (h & (std::uint64_t{1} << i)) != 0;
    };
    return enumerate_gamma(hyps, eval, S, ref);
  }
  throw ConfigError("gamma_bruteforce supports thresholds and trees");
}

double cal_abstention_expectation(long n) {
  if (n < 1) throw ConfigError("cal_abstention_expectation requires n >= 1");
  double sum = 0.0;
  for (long i = 1; i <= n; ++i) sum += 2.0 / static_cast<double>(i);
  return sum;
}

}  // namespace abstain
