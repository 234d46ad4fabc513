#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "abstain/version_space.hpp"

namespace abstain {

using Rng = std::mt19937_64;

struct Uniform01 {};
struct ProductUniform {
  int p = 1;
};
struct DiscreteTree {
  std::shared_ptr<const TreeTopology> tree;
  std::vector<double> weights;  // by node index, sum to 1
};
using KnownDistribution = std::variant<Uniform01, ProductUniform, DiscreteTree>;

KnownDistribution validate_distribution(KnownDistribution dist);
Point sample(const KnownDistribution& dist, Rng& rng);

struct ScalarInterval {
  double lo = 0.0;
  double hi = 0.0;
};
struct NodeSet {
  std::vector<int> ids;
};
struct RectDisRegion {};
using RegionDescriptor = std::variant<ScalarInterval, NodeSet, RectDisRegion>;

// Exact mass of a region; RectDisRegion throws UseMonteCarlo.
double region_mass(const KnownDistribution& dist, const RegionDescriptor& region);

enum class RhoMethod : std::uint8_t { Exact = 0, MonteCarlo = 1 };

struct ShatterEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  RhoMethod method = RhoMethod::Exact;
  long m = 0;  // sample count when MonteCarlo
};

// Exact rho_k for the supported combinations (thresholds k=1, tree k=1,
// intervals k in {1,2}, all under their natural distribution); otherwise
// throws UseMonteCarlo.
ShatterEstimate rho_k_exact(const AnyVS& vs, const KnownDistribution& dist,
                            int k);

// Exact rho_k of restrict_vs(vs, x, y) without materializing the
// restriction; same support and values as rho_k_exact on the restriction.
ShatterEstimate rho_k_exact_restricted(const AnyVS& vs, const Point& x,
                                       Label y, const KnownDistribution& dist,
                                       int k);

ShatterEstimate rho_k_mc(const AnyVS& vs, const KnownDistribution& dist, int k,
                         long m, Rng& rng);

}  // namespace abstain
