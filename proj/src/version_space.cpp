#include "abstain/version_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace abstain {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// ThresholdVS
// ---------------------------------------------------------------------------

bool ThresholdVS::dis_contains(double x) const {
  return lo < x && (x < hi || (x == hi && !open_right));
}

ThresholdVS ThresholdVS::restricted(double x, Label y) const {
  ThresholdVS out = *this;
  if (empty_flag) return out;
  if (y == Label::One) {
    // a >= x
    if (x > out.lo) out.lo = x;
    if (out.lo > out.hi || (out.lo == out.hi && out.open_right)) {
      out.empty_flag = true;
    }
  } else {
    // a < x
    if (x > hi || (x == hi && open_right)) return out;  // already implied
    if (x <= lo) {
      out.empty_flag = true;
      return out;
    }
    out.hi = x;
    out.open_right = true;
  }
  return out;
}

std::optional<Label> ThresholdVS::consistent(double x) const {
  if (x <= lo) return Label::One;
  if (x > hi || (x == hi && open_right)) return Label::Zero;
  return std::nullopt;
}

double ThresholdVS::dis_length() const {
  if (empty_flag) return 0.0;
  const double a = std::clamp(lo, 0.0, 1.0);
  const double b = std::clamp(hi, 0.0, 1.0);
  return std::max(0.0, b - a);
}

// ---------------------------------------------------------------------------
// IntervalVS
// ---------------------------------------------------------------------------

double IntervalVS::neg_below() const {
  auto it = std::lower_bound(negatives.begin(), negatives.end(), pos_min);
  return it == negatives.begin() ? -kInf : *std::prev(it);
}

double IntervalVS::neg_above() const {
  auto it = std::upper_bound(negatives.begin(), negatives.end(), pos_max);
  return it == negatives.end() ? kInf : *it;
}

double IntervalVS::gap_left() const {
  const double edge = std::max(neg_below(), 0.0);
  return std::max(0.0, std::min(pos_min, 1.0) - edge);
}

double IntervalVS::gap_right() const {
  const double edge = std::min(neg_above(), 1.0);
  return std::max(0.0, edge - std::max(pos_max, 0.0));
}

bool IntervalVS::dis_contains(double x) const {
  if (!has_pos) {
    return !std::binary_search(negatives.begin(), negatives.end(), x);
  }
  if (x >= pos_min && x <= pos_max) return false;
  if (x < pos_min) return x > neg_below();
  return x < neg_above();
}

IntervalVS IntervalVS::restricted(double x, Label y) const {
  IntervalVS out = *this;
  if (empty_flag) return out;
  if (y == Label::One) {
    const double nmin = has_pos ? std::min(pos_min, x) : x;
    const double nmax = has_pos ? std::max(pos_max, x) : x;
    auto it = std::lower_bound(out.negatives.begin(), out.negatives.end(), nmin);
    if (it != out.negatives.end() && *it <= nmax) {
      out.empty_flag = true;
      return out;
    }
    out.has_pos = true;
    out.pos_min = nmin;
    out.pos_max = nmax;
  } else {
    if (has_pos && x >= pos_min && x <= pos_max) {
      out.empty_flag = true;
      return out;
    }
    auto it = std::lower_bound(out.negatives.begin(), out.negatives.end(), x);
    if (it != out.negatives.end() && *it == x) return out;  // duplicate
    if (!out.has_pos && x >= 0.0 && x <= 1.0) {
      const double a = it == out.negatives.begin()
                           ? 0.0
                           : std::max(0.0, *std::prev(it));
      const double b = it == out.negatives.end()
                           ? 1.0
                           : std::min(1.0, *it);
      out.neg_gap_sumsq += (x - a) * (x - a) + (b - x) * (b - x) -
                           (b - a) * (b - a);
    }
    out.negatives.insert(it, x);
  }
  return out;
}

std::optional<Label> IntervalVS::consistent(double x) const {
  if (has_pos && x >= pos_min && x <= pos_max) return Label::One;
  if (dis_contains(x)) return std::nullopt;
  return Label::Zero;
}

bool IntervalVS::shatters2(double u, double v) const {
  if (u > v) std::swap(u, v);
  if (!dis_contains(u) || !dis_contains(v)) return false;
  if (has_pos) return u < pos_min && v > pos_max;
  auto it = std::upper_bound(negatives.begin(), negatives.end(), u);
  return it == negatives.end() || *it >= v;
}

// ---------------------------------------------------------------------------
// TreeTopology / TreeClassVS
// ---------------------------------------------------------------------------

TreeTopology TreeTopology::build(
    const std::vector<int>& nodes,
    const std::vector<std::pair<int, int>>& edges) {
  if (nodes.empty()) throw ConfigError("tree has no nodes");
  if (nodes.size() > 64) throw ConfigError("tree exceeds the 64-node cap");
  TreeTopology t;
  t.ids = nodes;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (!t.index_of.emplace(nodes[i], i).second) {
      throw ConfigError("duplicate tree node id");
    }
  }
  t.parent.assign(nodes.size(), -1);
  for (const auto& [p, c] : edges) {
    const int ci = t.index(c);
    if (t.parent[ci] != -1) throw ConfigError("tree node has two parents");
    t.parent[ci] = t.index(p);
  }
  int roots = 0;
  for (int i = 0; i < t.size(); ++i) {
    if (t.parent[i] == -1) ++roots;
  }
  if (roots != 1) throw ConfigError("tree must have exactly one root");
  t.depth.assign(t.size(), -1);
  for (int i = 0; i < t.size(); ++i) {
    int d = 0;
    for (int v = i; t.parent[v] != -1; v = t.parent[v]) {
      if (++d > t.size()) throw ConfigError("tree contains a cycle");
    }
    t.depth[i] = d;
  }
  return t;
}

int TreeTopology::index(int id) const {
  auto it = index_of.find(id);
  if (it == index_of.end()) throw ConfigError("unknown tree node id");
  return it->second;
}

std::uint64_t TreeTopology::path_mask(int id) const {
  std::uint64_t m = 0;
  for (int v = index(id); v != -1; v = parent[v]) {
    m |= std::uint64_t{1} << v;
  }
  return m;
}

TreeClassVS make_tree_class(std::shared_ptr<const TreeTopology> tree,
                            std::uint64_t ref_mask) {
  TreeClassVS vs;
  vs.tree = std::move(tree);
  vs.hyps.push_back(0 ^ ref_mask);
  for (int id : vs.tree->ids) {
    const std::uint64_t h = vs.tree->path_mask(id) ^ ref_mask;
    if (std::find(vs.hyps.begin(), vs.hyps.end(), h) == vs.hyps.end()) {
      vs.hyps.push_back(h);
    }
  }
  return vs;
}

int TreeClassVS::bit(const Point& x) const {
  const auto* node = std::get_if<TreeNode>(&x);
  if (!node) throw ConfigError("tree class expects tree-node points");
  return tree->index(node->id);
}

bool TreeClassVS::dis_contains(const Point& x) const {
  const std::uint64_t b = std::uint64_t{1} << bit(x);
  std::uint64_t any = 0, all = ~std::uint64_t{0};
  for (std::uint64_t h : hyps) {
    any |= h;
    all &= h;
  }
  return (any & b) != 0 && (all & b) == 0;
}

TreeClassVS TreeClassVS::restricted(const Point& x, Label y) const {
  const std::uint64_t b = std::uint64_t{1} << bit(x);
  TreeClassVS out;
  out.tree = tree;
  for (std::uint64_t h : hyps) {
    const bool one = (h & b) != 0;
    if (one == (y == Label::One)) out.hyps.push_back(h);
  }
  return out;
}

std::optional<Label> TreeClassVS::consistent(const Point& x) const {
  const std::uint64_t b = std::uint64_t{1} << bit(x);
  std::uint64_t any = 0, all = ~std::uint64_t{0};
  for (std::uint64_t h : hyps) {
    any |= h;
    all &= h;
  }
  if ((all & b) != 0) return Label::One;
  if ((any & b) == 0) return Label::Zero;
  return std::nullopt;
}

bool TreeClassVS::shatters(const std::vector<Point>& pts) const {
  const int k = static_cast<int>(pts.size());
  std::vector<std::uint64_t> bits(k);
  for (int i = 0; i < k; ++i) bits[i] = std::uint64_t{1} << bit(pts[i]);
  for (std::uint64_t want = 0; want < (std::uint64_t{1} << k); ++want) {
    bool found = false;
    for (std::uint64_t h : hyps) {
      bool ok = true;
      for (int i = 0; i < k && ok; ++i) {
        ok = ((h & bits[i]) != 0) == ((want >> i) & 1);
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

bool tree_order_leq(const TreeClassVS& cls, const Point& x, const Point& y) {
  const std::uint64_t bx = std::uint64_t{1} << cls.bit(x);
  const std::uint64_t by = std::uint64_t{1} << cls.bit(y);
  for (std::uint64_t h : cls.hyps) {
    if ((h & by) != 0 && (h & bx) == 0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// RectangleVS
// ---------------------------------------------------------------------------

namespace {

bool inside_box(const Vec& lo, const Vec& hi, const Vec& x) {
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  }
  return true;
}

void check_dim(const RectangleVS& vs, const Vec& x) {
  if (static_cast<int>(x.size()) != vs.dim) {
    throw ConfigError("rectangle point dimension mismatch");
  }
}

}  // namespace

bool RectangleVS::dis_contains(const Vec& x) const {
  check_dim(*this, x);
  if (!has_pos) {
    for (const Vec& n : negatives) {
      if (n == x) return false;
    }
    return true;
  }
  if (inside_box(lo, hi, x)) return false;
  Vec elo = lo, ehi = hi;
  for (int i = 0; i < dim; ++i) {
    elo[i] = std::min(elo[i], x[i]);
    ehi[i] = std::max(ehi[i], x[i]);
  }
  for (const Vec& n : negatives) {
    if (inside_box(elo, ehi, n)) return false;
  }
  return true;
}

RectangleVS RectangleVS::restricted(const Vec& x, Label y) const {
  check_dim(*this, x);
  RectangleVS out = *this;
  if (empty_flag) return out;
  if (y == Label::One) {
    if (!out.has_pos) {
      out.lo = x;
      out.hi = x;
      out.has_pos = true;
    } else {
      for (int i = 0; i < dim; ++i) {
        out.lo[i] = std::min(out.lo[i], x[i]);
        out.hi[i] = std::max(out.hi[i], x[i]);
      }
    }
    for (const Vec& n : out.negatives) {
      if (inside_box(out.lo, out.hi, n)) {
        out.empty_flag = true;
        break;
      }
    }
  } else {
    if (has_pos && inside_box(lo, hi, x)) {
      out.empty_flag = true;
      return out;
    }
    out.negatives.push_back(x);
  }
  return out;
}

std::optional<Label> RectangleVS::consistent(const Vec& x) const {
  check_dim(*this, x);
  if (has_pos && inside_box(lo, hi, x)) return Label::One;
  if (dis_contains(x)) return std::nullopt;
  return Label::Zero;
}

bool RectangleVS::shatters(const std::vector<Point>& pts) const {
  const int k = static_cast<int>(pts.size());
  std::vector<const Vec*> vecs(k);
  for (int i = 0; i < k; ++i) {
    vecs[i] = &std::get<Vec>(pts[i]);
    check_dim(*this, *vecs[i]);
  }
  for (std::uint64_t want = 0; want < (std::uint64_t{1} << k); ++want) {
    bool any_one = has_pos;
    Vec blo = has_pos ? lo : Vec(dim, 0.0);
    Vec bhi = has_pos ? hi : Vec(dim, 0.0);
    for (int i = 0; i < k; ++i) {
      if (((want >> i) & 1) == 0) continue;
      if (!any_one) {
        blo = *vecs[i];
        bhi = *vecs[i];
        any_one = true;
      } else {
        for (int d = 0; d < dim; ++d) {
          blo[d] = std::min(blo[d], (*vecs[i])[d]);
          bhi[d] = std::max(bhi[d], (*vecs[i])[d]);
        }
      }
    }
    if (!any_one) continue;  // the everywhere-smaller box labels all 0
    bool feasible = true;
    for (const Vec& n : negatives) {
      if (inside_box(blo, bhi, n)) {
        feasible = false;
        break;
      }
    }
    for (int i = 0; i < k && feasible; ++i) {
      if (((want >> i) & 1) == 0 && inside_box(blo, bhi, *vecs[i])) {
        feasible = false;
      }
    }
    if (!feasible) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generic dispatch
// ---------------------------------------------------------------------------

bool vs_empty(const AnyVS& vs) {
  return std::visit([](const auto& v) { return v.is_empty(); }, vs);
}

bool dis_contains(const AnyVS& vs, const Point& x) {
  if (vs_empty(vs)) throw EmptyVersionSpace();
  if (const auto* t = std::get_if<ThresholdVS>(&vs)) {
    return t->dis_contains(std::get<double>(x));
  }
  if (const auto* iv = std::get_if<IntervalVS>(&vs)) {
    return iv->dis_contains(std::get<double>(x));
  }
  if (const auto* tr = std::get_if<TreeClassVS>(&vs)) {
    return tr->dis_contains(x);
  }
  return std::get<RectangleVS>(vs).dis_contains(std::get<Vec>(x));
}

AnyVS restrict_vs(const AnyVS& vs, const Point& x, Label y) {
  if (const auto* t = std::get_if<ThresholdVS>(&vs)) {
    return t->restricted(std::get<double>(x), y);
  }
  if (const auto* iv = std::get_if<IntervalVS>(&vs)) {
    return iv->restricted(std::get<double>(x), y);
  }
  if (const auto* tr = std::get_if<TreeClassVS>(&vs)) {
    return tr->restricted(x, y);
  }
  return std::get<RectangleVS>(vs).restricted(std::get<Vec>(x), y);
}

std::optional<Label> consistent_label(const AnyVS& vs, const Point& x) {
  if (vs_empty(vs)) throw EmptyVersionSpace();
  if (const auto* t = std::get_if<ThresholdVS>(&vs)) {
    return t->consistent(std::get<double>(x));
  }
  if (const auto* iv = std::get_if<IntervalVS>(&vs)) {
    return iv->consistent(std::get<double>(x));
  }
  if (const auto* tr = std::get_if<TreeClassVS>(&vs)) {
    return tr->consistent(x);
  }
  return std::get<RectangleVS>(vs).consistent(std::get<Vec>(x));
}

bool shatters(const AnyVS& vs, const std::vector<Point>& pts) {
  if (pts.empty()) throw ConfigError("shatters requires k >= 1");
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = i + 1; j < pts.size(); ++j) {
      if (same_point(pts[i], pts[j])) throw DuplicatePoints();
    }
  }
  if (vs_empty(vs)) return false;
  if (const auto* t = std::get_if<ThresholdVS>(&vs)) {
    if (pts.size() > 1) return false;
    return t->dis_contains(std::get<double>(pts[0]));
  }
  if (const auto* iv = std::get_if<IntervalVS>(&vs)) {
    if (pts.size() > 2) return false;
    if (pts.size() == 1) return iv->dis_contains(std::get<double>(pts[0]));
    return iv->shatters2(std::get<double>(pts[0]), std::get<double>(pts[1]));
  }
  if (const auto* tr = std::get_if<TreeClassVS>(&vs)) {
    return tr->shatters(pts);
  }
  return std::get<RectangleVS>(vs).shatters(pts);
}

RefFn zero_ref() {
  return [](const Point&) { return Label::Zero; };
}

GammaResult gamma(const AnyVS& full_class, const LabeledSet& S,
                  const RefFn& ref) {
  struct Entry {
    Point point;
    Label label;
    long count;
    bool in_sf;
  };
  std::vector<Entry> entries;
  for (const LabeledItem& it : S) {
    bool found = false;
    for (Entry& e : entries) {
      if (same_point(e.point, it.point) && e.label == it.label) {
        ++e.count;
        found = true;
        break;
      }
    }
    if (!found) {
      entries.push_back({it.point, it.label, 1, ref(it.point) != it.label});
    }
  }

  // Realizability of S (distinct pairs suffice; restrict is idempotent).
  AnyVS all = full_class;
  for (const Entry& e : entries) {
    all = restrict_vs(all, e.point, e.label);
    if (vs_empty(all)) throw InconsistentSample();
  }

  AnyVS base = full_class;
  for (const Entry& e : entries) {
    if (e.in_sf) base = restrict_vs(base, e.point, e.label);
  }

  GammaResult out;
  for (const Entry& e : entries) {
    AnyVS vs = base;
    if (e.in_sf && e.count == 1) {
      vs = full_class;
      for (const Entry& o : entries) {
        if (&o != &e && o.in_sf) vs = restrict_vs(vs, o.point, o.label);
      }
    }
    if (!vs_empty(vs) && dis_contains(vs, e.point)) {
      bool already = false;
      for (const Point& m : out.members) {
        if (same_point(m, e.point)) {
          already = true;
          break;
        }
      }
      if (!already) out.members.push_back(e.point);
    }
  }
  out.count = static_cast<long>(out.members.size());
  return out;
}

}  // namespace abstain
