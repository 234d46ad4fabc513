#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace abstain {

// ---------------------------------------------------------------------------
// Instance space. A point is a scalar in [0,1], a vector in R^p, or a node of
// a finite rooted tree.
// ---------------------------------------------------------------------------

struct TreeNode {
  int id = 0;
  bool operator==(const TreeNode&) const = default;
};

using Vec = std::vector<double>;
using Point = std::variant<double, Vec, TreeNode>;

inline bool same_point(const Point& a, const Point& b) { return a == b; }

enum class Label : std::uint8_t { Zero = 0, One = 1 };

inline Label make_label(int v) { return v ? Label::One : Label::Zero; }
inline int label_value(Label y) { return y == Label::One ? 1 : 0; }
inline Label flip(Label y) { return y == Label::One ? Label::Zero : Label::One; }

enum class Prediction : std::uint8_t { Zero = 0, One = 1, Abstain = 2 };

inline Prediction to_prediction(Label y) {
  return y == Label::One ? Prediction::One : Prediction::Zero;
}
inline bool is_committed(Prediction p) { return p != Prediction::Abstain; }
inline bool agrees(Prediction p, Label y) {
  return is_committed(p) && (p == Prediction::One) == (y == Label::One);
}

enum class Origin : std::uint8_t { Iid = 0, Injected = 1 };

// One round of the stream. The origin tag and the clean label are ground
// truth known only to the harness; learners only ever see the point and the
// observed label.
struct StreamEvent {
  Point point;
  Origin origin = Origin::Iid;
  Label clean_label = Label::Zero;
  Label observed_label = Label::Zero;
  long round_index = 0;
};

enum class RunMode : std::uint8_t { Realizable = 0, Agnostic = 1 };

struct ErrorTally {
  long mis_realizable = 0;
  long mis_agnostic = 0;  // signed; per-round delta can be -1
  long abstain_on_iid = 0;

  bool operator==(const ErrorTally&) const = default;
};

// Pure per-round accounting. Abstention is only charged on i.i.d. rounds; in
// agnostic mode a committed prediction is scored against the observed label
// relative to the true target's mistake on the same label.
ErrorTally tally_update(const ErrorTally& tally, const StreamEvent& event,
                        Prediction prediction, RunMode mode);

// ---------------------------------------------------------------------------
// Error vocabulary shared across modules.
// ---------------------------------------------------------------------------

struct EmptyVersionSpace : std::runtime_error {
  EmptyVersionSpace() : std::runtime_error("EmptyVersionSpace") {}
};
struct DuplicatePoints : std::runtime_error {
  DuplicatePoints() : std::runtime_error("DuplicatePoints") {}
};
struct InconsistentSample : std::runtime_error {
  InconsistentSample() : std::runtime_error("InconsistentSample") {}
};
struct UseMonteCarlo : std::runtime_error {
  UseMonteCarlo() : std::runtime_error("UseMonteCarlo") {}
};
struct InjectionOffSupport : std::runtime_error {
  InjectionOffSupport() : std::runtime_error("InjectionOffSupport") {}
};
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace abstain
