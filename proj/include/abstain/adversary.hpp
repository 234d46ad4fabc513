#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abstain/distributions.hpp"
#include "abstain/learners.hpp"

namespace abstain {

struct NoOp {};
struct DisagreementFlood {
  double rate = 0.5;
};
struct BoundaryProbe {
  double rate = 0.5;
  double offset = 0.01;
};
struct TreeAttack {
  double rate = 0.5;
};
struct ScriptRound {
  Point point;
  Origin origin = Origin::Iid;
  std::optional<Label> forced_label;
};
struct Scripted {
  std::vector<ScriptRound> rounds;
};
using AdversaryStrategy =
    std::variant<NoOp, DisagreementFlood, BoundaryProbe, TreeAttack, Scripted>;

struct NoiseNone {};
struct RCN {
  double eta = 0.0;
};
// One built-in Massart profile: eta(x) = eta * s(x) with s the scalar value,
// the first vector coordinate, or 1/2 for tree nodes; bounded by eta.
struct Massart {
  double eta = 0.0;
};
using NoiseChannel = std::variant<NoiseNone, RCN, Massart>;

double flip_prob(const NoiseChannel& noise, const Point& x);

using TargetFn = std::function<Label(const Point&)>;

// One round of Protocol 1: the adversary commits to inject-or-not (and the
// injected point) before the i.i.d. draw is made; labels are always clean
// (f* at the point) before the noise channel.
StreamEvent next_event(const AdversaryStrategy& adv,
                       const KnownDistribution& dist, const TargetFn& target,
                       const AnyVS& visible, const NoiseChannel& noise,
                       Rng& rng, long round_index);

struct RoundLog {
  long round = 0;
  Point point;
  Origin origin = Origin::Iid;
  Label clean = Label::Zero;
  Label observed = Label::Zero;
  StepDiag diag;
};

struct RunResult {
  ErrorTally tally;
  std::vector<RoundLog> logs;
  long rounds_injected = 0;
  bool aborted = false;
  long abort_round = -1;
  std::string abort_reason;
};

RunResult run_protocol(Learner& learner, const AdversaryStrategy& adv,
                       const KnownDistribution& dist, const TargetFn& target,
                       const NoiseChannel& noise, long T, RunMode mode,
                       Rng& rng);

}  // namespace abstain
