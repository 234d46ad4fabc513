#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "abstain/distributions.hpp"
#include "abstain/version_space.hpp"

namespace abstain {

// Per-round diagnostics, populated by step/observe and sufficient to replay
// invariant checks offline. Fields unused by a learner stay at defaults.
struct StepDiag {
  Prediction prediction = Prediction::Abstain;
  bool in_dis = false;
  double rho_vs = -1.0;     // rho_k of the version space at step time
  double rho0 = -1.0;       // rho_k of the x->0 restriction
  double rho1 = -1.0;       // rho_k of the x->1 restriction
  double rho_after = -1.0;  // rho_k after the observe restriction
  int level = -1;
  bool level_dropped = false;
  long a0 = -1;             // leave-one-out estimate used by the vc1 rule
  long gamma_after = -1;    // gamma of the history after observe
  int rect_rule = 0;        // 1=no-positive, 2=consistent, 3=witnesses, 4=abstain
  long witnesses = -1;
  bool update_fired = false;
  bool abstained_while_rho_big = false;
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual Prediction step(const Point& x) = 0;
  virtual void observe(const Point& x, Label y) = 0;
  // Public state snapshot shown to adversaries.
  virtual AnyVS visible_vs() const = 0;
  const StepDiag& last_diag() const { return diag_; }

 protected:
  StepDiag diag_;
};

// Disagreement-based baseline for thresholds: abstain inside DIS, predict
// the agreed label otherwise.
class BaselineThresholdLearner : public Learner {
 public:
  BaselineThresholdLearner() = default;
  Prediction step(const Point& x) override;
  void observe(const Point& x, Label y) override;
  AnyVS visible_vs() const override { return vs_; }

 private:
  ThresholdVS vs_;
};

// Shattering-level learner for a known distribution: track level k from the
// VC dimension down, compare rho_k of the two label restrictions, abstain
// only when both sides keep at least 0.6 of the mass.
class ShatteringLearner : public Learner {
 public:
  ShatteringLearner(AnyVS full_class, KnownDistribution dist, int vc_dim,
                    long T, long mc_samples, std::uint64_t mc_seed);
  Prediction step(const Point& x) override;
  void observe(const Point& x, Label y) override;
  AnyVS visible_vs() const override { return vs_; }
  int level() const { return level_; }

 private:
  double rho(const AnyVS& vs, int k);
  double rho_restricted(const Point& x, Label y, int k);

  AnyVS vs_;
  KnownDistribution dist_;
  int level_;
  long T_;
  long mc_samples_;
  std::uint64_t mc_seed_;
  long round_ = 0;
  long mc_counter_ = 0;
};

// Structure-based learner for VC-dimension-1 classes (reference transformed
// to all-zeros): inside DIS, predict 0 iff the leave-one-out disagreement
// estimate of the 0-restricted class is at least alpha = sqrt(T/ln T).
class Vc1Learner : public Learner {
 public:
  Vc1Learner(AnyVS full_class, long T);
  Prediction step(const Point& x) override;
  void observe(const Point& x, Label y) override;
  AnyVS visible_vs() const override { return vs_; }
  double alpha() const { return alpha_; }
  long gamma_now() const;

 private:
  AnyVS full_;
  AnyVS vs_;
  LabeledSet history_;
  RefFn ref_ = zero_ref();
  double alpha_;
};

// Axis-aligned rectangle learner: predict 0 before any positive, predict the
// agreed label outside DIS, predict 0 when alpha prior points witness a
// strip between the query and the positive box, abstain otherwise.
class RectangleLearner : public Learner {
 public:
  RectangleLearner(int p, long T);
  Prediction step(const Point& x) override;
  void observe(const Point& x, Label y) override;
  AnyVS visible_vs() const override { return vs_; }
  double alpha() const { return alpha_; }

 private:
  long count_witnesses(const Vec& x) const;

  RectangleVS vs_;
  std::vector<Vec> history_;
  double alpha_;
};

struct UpdateRecord {
  ThresholdVS hull_after;
  long round = 0;
};

// Agnostic disagreement-based learner for thresholds under bounded label
// noise: abstain inside DIS; once M samples land in the middle third of the
// current hull, replace the hull by the interval hull of the Delta-sublevel
// set of the empirical error.
class AgnosticThresholdLearner : public Learner {
 public:
  AgnosticThresholdLearner(double eta, long T);
  Prediction step(const Point& x) override;
  void observe(const Point& x, Label y) override;
  AnyVS visible_vs() const override { return vs_; }
  long batch_size() const { return M_; }
  double delta() const { return delta_; }
  const std::vector<UpdateRecord>& updates() const { return updates_; }
  long leftover_buffer() const { return static_cast<long>(buffer_.size()); }

 private:
  void recompute_thirds();

  ThresholdVS vs_;
  std::vector<std::pair<double, Label>> buffer_;
  long in_third_ = 0;
  double c_minus_ = 0.0, c_plus_ = 0.0;
  long M_;
  double delta_;
  long round_ = 0;
  std::vector<UpdateRecord> updates_;
};

// Experimental beyond-disagreement agnostic learner for thresholds with
// alpha = 1/T: predicts on the heavier side while the hull mass is >= alpha
// (the abstain condition cannot fire for thresholds); updates the hull on
// every full batch of M observed labels.
class AgnosticBeyondLearner : public Learner {
 public:
  AgnosticBeyondLearner(double eta, long T);
  Prediction step(const Point& x) override;
  void observe(const Point& x, Label y) override;
  AnyVS visible_vs() const override { return vs_; }
  long batch_size() const { return M_; }
  double alpha() const { return alpha_; }
  const std::vector<UpdateRecord>& updates() const { return updates_; }

 private:
  ThresholdVS vs_;
  std::vector<std::pair<double, Label>> buffer_;
  long M_;
  double delta_;
  double alpha_;
  long round_ = 0;
  std::vector<UpdateRecord> updates_;
};

// Batch parameters shared by the agnostic learners.
long noisy_batch_size(double eta, long T);   // ceil(16 ln T / (1-2 eta)^2)
double noisy_delta(double eta);              // (1-2 eta)/2

// Interval hull of {a in hull : er(a) <= min er + delta} for the empirical
// error over samples (threshold semantics 1{x <= a}). Exposed for tests.
ThresholdVS sublevel_hull(std::vector<std::pair<double, Label>> samples,
                          const ThresholdVS& hull, double delta);

}  // namespace abstain
