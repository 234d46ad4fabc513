#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "abstain/version_space.hpp"

namespace abstain {

// Class-level descriptors (no observed data baked in).
struct ThresholdsClass {};
struct IntervalsClass {};
struct RectanglesClass {
  int p = 1;
};
struct TreesClass {
  std::shared_ptr<const TreeTopology> tree;
};
using ClassDescriptor =
    std::variant<ThresholdsClass, IntervalsClass, RectanglesClass, TreesClass>;

struct GridSpec {
  int resolution = 1024;  // must be >= 64
};

// Brute-force shattering check: enumerate all 2^k labelings and search an
// explicit finite hypothesis list (parameter grid augmented with
// instance-derived candidate values; exact path enumeration for trees) for a
// member consistent with both the labeling and the observed data.
bool shatters_bruteforce(const ClassDescriptor& cls, const LabeledSet& data,
                         const std::vector<Point>& points,
                         const GridSpec& grid);

// Direct evaluation of the leave-one-out disagreement estimate from its
// defining set comprehension, independently of hypothesis_spaces.gamma.
GammaResult gamma_bruteforce(const ClassDescriptor& cls, const LabeledSet& S,
                             const RefFn& ref, const GridSpec& grid = {});

// Exchangeability bound on the expected abstention count of the threshold
// baseline over n i.i.d. rounds: sum_{i=1..n} 2/i.
double cal_abstention_expectation(long n);

}  // namespace abstain
