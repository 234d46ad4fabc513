#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "abstain/core.hpp"

namespace abstain {

// ---------------------------------------------------------------------------
// Labeled history.
// ---------------------------------------------------------------------------

struct LabeledItem {
  Point point;
  Label label = Label::Zero;
  Origin origin = Origin::Iid;
};
using LabeledSet = std::vector<LabeledItem>;

// ---------------------------------------------------------------------------
// Thresholds 1{x <= a}, a in [lo, hi]. DIS convention: (lo, hi], negatives
// flip the right end open.
// ---------------------------------------------------------------------------

struct ThresholdVS {
  double lo = 0.0;
  double hi = 1.0;
  bool open_right = false;
  bool empty_flag = false;

  bool is_empty() const { return empty_flag; }
  bool dis_contains(double x) const;
  ThresholdVS restricted(double x, Label y) const;
  std::optional<Label> consistent(double x) const;
  // DIS mass under Uniform01, clamped to [0,1].
  double dis_length() const;
};

// ---------------------------------------------------------------------------
// Intervals 1{a <= x <= b} on [0,1], represented by the positive bounding
// box and the sorted list of negatives.
// ---------------------------------------------------------------------------

struct IntervalVS {
  bool has_pos = false;
  double pos_min = 0.0;
  double pos_max = 0.0;
  std::vector<double> negatives;  // sorted ascending
  // Sum of squared lengths of the gaps [0,1] \ negatives; maintained only
  // while has_pos is false (used for the exact two-point shattering mass).
  double neg_gap_sumsq = 1.0;
  bool empty_flag = false;

  bool is_empty() const { return empty_flag; }
  bool dis_contains(double x) const;
  IntervalVS restricted(double x, Label y) const;
  std::optional<Label> consistent(double x) const;
  bool shatters2(double u, double v) const;  // u != v
  // Nearest negative strictly below pos_min / above pos_max (requires
  // has_pos); -inf/+inf when none.
  double neg_below() const;
  double neg_above() const;
  // Gap lengths clamped to [0,1] (requires has_pos and nonempty).
  double gap_left() const;
  double gap_right() const;
};

// ---------------------------------------------------------------------------
// Finite rooted tree and the VC-dimension-1 class of root-path indicators
// (plus the empty path), stored explicitly as node bitmasks after XOR-ing
// with the reference hypothesis.
// ---------------------------------------------------------------------------

struct TreeTopology {
  std::vector<int> ids;     // index -> node id
  std::vector<int> parent;  // index -> parent index, -1 for root
  std::vector<int> depth;
  std::map<int, int> index_of;

  static TreeTopology build(const std::vector<int>& nodes,
                            const std::vector<std::pair<int, int>>& edges);
  int index(int id) const;  // throws ConfigError on unknown id
  std::uint64_t path_mask(int id) const;
  int size() const { return static_cast<int>(ids.size()); }
};

struct TreeClassVS {
  std::shared_ptr<const TreeTopology> tree;
  std::vector<std::uint64_t> hyps;

  bool is_empty() const { return hyps.empty(); }
  int bit(const Point& x) const;
  bool dis_contains(const Point& x) const;
  TreeClassVS restricted(const Point& x, Label y) const;
  std::optional<Label> consistent(const Point& x) const;
  bool shatters(const std::vector<Point>& pts) const;
};

// Full class for a tree, XOR-transformed so the reference is all-zeros.
TreeClassVS make_tree_class(std::shared_ptr<const TreeTopology> tree,
                            std::uint64_t ref_mask = 0);

// x ancestor-or-equal of y under the order induced by the (full) class:
// every hypothesis labeling y as 1 also labels x as 1.
bool tree_order_leq(const TreeClassVS& cls, const Point& x, const Point& y);

// ---------------------------------------------------------------------------
// Axis-aligned rectangles in R^p: box of observed positives plus the raw
// negative list.
// ---------------------------------------------------------------------------

struct RectangleVS {
  int dim = 1;
  bool has_pos = false;
  Vec lo, hi;  // positive bounding box, valid when has_pos
  std::vector<Vec> negatives;
  bool empty_flag = false;

  bool is_empty() const { return empty_flag; }
  bool dis_contains(const Vec& x) const;
  RectangleVS restricted(const Vec& x, Label y) const;
  std::optional<Label> consistent(const Vec& x) const;
  bool shatters(const std::vector<Point>& pts) const;
};

// ---------------------------------------------------------------------------
// Class-generic operations.
// ---------------------------------------------------------------------------

using AnyVS = std::variant<ThresholdVS, IntervalVS, TreeClassVS, RectangleVS>;

bool vs_empty(const AnyVS& vs);
bool dis_contains(const AnyVS& vs, const Point& x);  // EmptyVersionSpace
AnyVS restrict_vs(const AnyVS& vs, const Point& x, Label y);
std::optional<Label> consistent_label(const AnyVS& vs, const Point& x);
// DuplicatePoints on duplicates; k >= 1.
bool shatters(const AnyVS& vs, const std::vector<Point>& pts);

// Leave-one-out disagreement estimate of S with respect to full_class and
// the reference hypothesis ref. Throws InconsistentSample when S is not
// realizable by full_class.
using RefFn = std::function<Label(const Point&)>;
RefFn zero_ref();

struct GammaResult {
  long count = 0;
  std::vector<Point> members;
};
GammaResult gamma(const AnyVS& full_class, const LabeledSet& S,
                  const RefFn& ref);

}  // namespace abstain
