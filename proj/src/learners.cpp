#include "abstain/learners.hpp"

#include <algorithm>
#include <cmath>

namespace abstain {

// ---------------------------------------------------------------------------
// Baseline
// ---------------------------------------------------------------------------

Prediction BaselineThresholdLearner::step(const Point& x) {
  diag_ = StepDiag{};
  if (vs_.is_empty()) throw EmptyVersionSpace();
  const double xv = std::get<double>(x);
  diag_.in_dis = vs_.dis_contains(xv);
  diag_.prediction = diag_.in_dis ? Prediction::Abstain
                                  : to_prediction(*vs_.consistent(xv));
  return diag_.prediction;
}

void BaselineThresholdLearner::observe(const Point& x, Label y) {
  vs_ = vs_.restricted(std::get<double>(x), y);
}

// ---------------------------------------------------------------------------
// Shattering-level learner
// ---------------------------------------------------------------------------

ShatteringLearner::ShatteringLearner(AnyVS full_class, KnownDistribution dist,
                                     int vc_dim, long T, long mc_samples,
                                     std::uint64_t mc_seed)
    : vs_(std::move(full_class)),
      dist_(std::move(dist)),
      level_(vc_dim),
      T_(T),
      mc_samples_(mc_samples),
      mc_seed_(mc_seed) {
  if (vc_dim < 1) throw ConfigError("shattering learner requires d >= 1");
  if (T < 1) throw ConfigError("shattering learner requires T >= 1");
  if (mc_samples < 1) throw ConfigError("mc_samples must be >= 1");
}

double ShatteringLearner::rho(const AnyVS& vs, int k) {
  try {
    return rho_k_exact(vs, dist_, k).value;
  } catch (const UseMonteCarlo&) {
    Rng sub(mc_seed_ ^ (static_cast<std::uint64_t>(round_) * 0x9E3779B97F4A7C15ULL) ^
            (static_cast<std::uint64_t>(++mc_counter_) * 0xBF58476D1CE4E5B9ULL));
    return rho_k_mc(vs, dist_, k, mc_samples_, sub).value;
  }
}

double ShatteringLearner::rho_restricted(const Point& x, Label y, int k) {
  try {
    return rho_k_exact_restricted(vs_, x, y, dist_, k).value;
  } catch (const UseMonteCarlo&) {
    Rng sub(mc_seed_ ^ (static_cast<std::uint64_t>(round_) * 0x9E3779B97F4A7C15ULL) ^
            (static_cast<std::uint64_t>(++mc_counter_) * 0xBF58476D1CE4E5B9ULL));
    return rho_k_mc(restrict_vs(vs_, x, y), dist_, k, mc_samples_, sub).value;
  }
}

Prediction ShatteringLearner::step(const Point& x) {
  ++round_;
  diag_ = StepDiag{};
  diag_.level = level_;
  if (vs_empty(vs_)) throw EmptyVersionSpace();
  if (level_ > 0) {
    diag_.rho_vs = rho(vs_, level_);
    diag_.rho0 = rho_restricted(x, Label::Zero, level_);
    diag_.rho1 = rho_restricted(x, Label::One, level_);
    if (std::min(diag_.rho0, diag_.rho1) >= 0.6 * diag_.rho_vs) {
      diag_.prediction = Prediction::Abstain;
    } else {
      diag_.prediction =
          diag_.rho1 >= diag_.rho0 ? Prediction::One : Prediction::Zero;
    }
  } else {
    diag_.in_dis = dis_contains(vs_, x);
    diag_.prediction = diag_.in_dis ? Prediction::Abstain
                                    : to_prediction(*consistent_label(vs_, x));
  }
  return diag_.prediction;
}

void ShatteringLearner::observe(const Point& x, Label y) {
  vs_ = restrict_vs(vs_, x, y);
  if (level_ > 0) {
    const double ra = rho(vs_, level_);
    diag_.rho_after = ra;
    if (ra <= std::pow(static_cast<double>(T_), -level_)) {
      --level_;
      diag_.level_dropped = true;
    }
  }
}

// ---------------------------------------------------------------------------
// VC-dimension-1 structure learner
// ---------------------------------------------------------------------------

Vc1Learner::Vc1Learner(AnyVS full_class, long T)
    : full_(full_class), vs_(std::move(full_class)) {
  if (T < 2) throw ConfigError("vc1 learner requires T >= 2");
  alpha_ = std::sqrt(static_cast<double>(T) / std::log(static_cast<double>(T)));
}

Prediction Vc1Learner::step(const Point& x) {
  diag_ = StepDiag{};
  if (vs_empty(vs_)) throw EmptyVersionSpace();
  diag_.in_dis = dis_contains(vs_, x);
  if (!diag_.in_dis) {
    diag_.prediction = to_prediction(*consistent_label(vs_, x));
    return diag_.prediction;
  }
  const Label fx = ref_(x);
  diag_.a0 = gamma(restrict_vs(full_, x, fx), history_, ref_).count;
  diag_.prediction = static_cast<double>(diag_.a0) >= alpha_
                         ? to_prediction(fx)
                         : Prediction::Abstain;
  return diag_.prediction;
}

void Vc1Learner::observe(const Point& x, Label y) {
  history_.push_back({x, y, Origin::Iid});
  vs_ = restrict_vs(vs_, x, y);
  diag_.gamma_after = gamma_now();
}

long Vc1Learner::gamma_now() const { return gamma(full_, history_, ref_).count; }

// ---------------------------------------------------------------------------
// Rectangle learner
// ---------------------------------------------------------------------------

RectangleLearner::RectangleLearner(int p, long T) {
  if (p < 1) throw ConfigError("rectangle learner requires p >= 1");
  if (T < 2) throw ConfigError("rectangle learner requires T >= 2");
  vs_.dim = p;
  alpha_ = std::sqrt(static_cast<double>(T) / std::log(static_cast<double>(T)));
}

long RectangleLearner::count_witnesses(const Vec& x) const {
  long count = 0;
  for (const Vec& s : history_) {
    bool witness = false;
    for (int i = 0; i < vs_.dim && !witness; ++i) {
      if (x[i] < vs_.lo[i]) {
        witness = s[i] >= x[i] && s[i] < vs_.lo[i];
      } else if (x[i] > vs_.hi[i]) {
        witness = s[i] > vs_.hi[i] && s[i] <= x[i];
      }
    }
    if (witness && static_cast<double>(++count) >= alpha_) break;
  }
  return count;
}

Prediction RectangleLearner::step(const Point& x) {
  diag_ = StepDiag{};
  const Vec& xv = std::get<Vec>(x);
  if (!vs_.has_pos) {
    diag_.rect_rule = 1;
    diag_.prediction = Prediction::Zero;
  } else if (!vs_.dis_contains(xv)) {
    diag_.rect_rule = 2;
    diag_.in_dis = false;
    diag_.prediction = to_prediction(*vs_.consistent(xv));
  } else {
    diag_.in_dis = true;
    diag_.witnesses = count_witnesses(xv);
    if (static_cast<double>(diag_.witnesses) >= alpha_) {
      diag_.rect_rule = 3;
      diag_.prediction = Prediction::Zero;
    } else {
      diag_.rect_rule = 4;
      diag_.prediction = Prediction::Abstain;
    }
  }
  return diag_.prediction;
}

void RectangleLearner::observe(const Point& x, Label y) {
  const Vec& xv = std::get<Vec>(x);
  history_.push_back(xv);
  vs_ = vs_.restricted(xv, y);
}

// ---------------------------------------------------------------------------
// Agnostic learners
// ---------------------------------------------------------------------------

long noisy_batch_size(double eta, long T) {
  if (eta < 0.0 || eta >= 0.5) throw ConfigError("noise bound must satisfy 0 <= eta < 1/2");
  if (T < 2) throw ConfigError("agnostic learners require T >= 2");
  const double g = 1.0 - 2.0 * eta;
  return static_cast<long>(
      std::ceil(16.0 * std::log(static_cast<double>(T)) / (g * g)));
}

double noisy_delta(double eta) { return (1.0 - 2.0 * eta) / 2.0; }

ThresholdVS sublevel_hull(std::vector<std::pair<double, Label>> samples,
                          const ThresholdVS& hull, double delta) {
  const long n = static_cast<long>(samples.size());
  if (n == 0 || hull.is_empty()) throw EmptyVersionSpace();
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Samples at or below lo always see prediction 1; samples beyond the right
  // end always see prediction 0; the rest flip at their own coordinate.
  long base = 0;
  struct Break {
    double x;
    long n0 = 0, n1 = 0;
  };
  std::vector<Break> breaks;
  for (const auto& [x, y] : samples) {
    if (x <= hull.lo) {
      base += (y == Label::Zero) ? 1 : 0;
    } else if (x > hull.hi || (x == hull.hi && hull.open_right)) {
      base += (y == Label::One) ? 1 : 0;
    } else {
      if (breaks.empty() || breaks.back().x != x) breaks.push_back({x});
      if (y == Label::Zero) {
        ++breaks.back().n0;
      } else {
        ++breaks.back().n1;
      }
    }
  }

  struct Segment {
    double left, right;
    bool right_open;
    long err;
  };
  std::vector<Segment> segs;
  long err = base;
  for (const Break& b : breaks) err += b.n1;
  double left = hull.lo;
  for (const Break& b : breaks) {
    segs.push_back({left, b.x, true, err});
    err += b.n0 - b.n1;
    left = b.x;
  }
  if (left < hull.hi || (left == hull.hi && !hull.open_right)) {
    segs.push_back({left, hull.hi, hull.open_right, err});
  }

  long min_err = segs.front().err;
  for (const Segment& s : segs) min_err = std::min(min_err, s.err);
  const double cutoff =
      static_cast<double>(min_err) + delta * static_cast<double>(n) + 1e-9;

  ThresholdVS out;
  out.empty_flag = true;
  for (const Segment& s : segs) {
    if (static_cast<double>(s.err) > cutoff) continue;
    if (out.empty_flag) {
      out = ThresholdVS{s.left, s.right, s.right_open, false};
    } else {
      out.hi = s.right;
      out.open_right = s.right_open;
    }
  }
  if (out.empty_flag) throw EmptyVersionSpace();
  return out;
}

AgnosticThresholdLearner::AgnosticThresholdLearner(double eta, long T)
    : M_(noisy_batch_size(eta, T)), delta_(noisy_delta(eta)) {
  recompute_thirds();
}

void AgnosticThresholdLearner::recompute_thirds() {
  const double len = vs_.hi - vs_.lo;
  c_minus_ = vs_.lo + len / 3.0;
  c_plus_ = vs_.hi - len / 3.0;
}

Prediction AgnosticThresholdLearner::step(const Point& x) {
  diag_ = StepDiag{};
  if (vs_.is_empty()) throw EmptyVersionSpace();
  const double xv = std::get<double>(x);
  diag_.in_dis = vs_.dis_contains(xv);
  diag_.prediction = diag_.in_dis ? Prediction::Abstain
                                  : to_prediction(*vs_.consistent(xv));
  return diag_.prediction;
}

void AgnosticThresholdLearner::observe(const Point& x, Label y) {
  ++round_;
  const double xv = std::get<double>(x);
  buffer_.emplace_back(xv, y);
  if (xv >= c_minus_ && xv <= c_plus_) ++in_third_;
  if (in_third_ == M_) {
    std::vector<std::pair<double, Label>> middle;
    for (const auto& s : buffer_) {
      if (s.first >= c_minus_ && s.first <= c_plus_) middle.push_back(s);
    }
    vs_ = sublevel_hull(std::move(middle), vs_, delta_);
    updates_.push_back({vs_, round_});
    buffer_.clear();
    in_third_ = 0;
    recompute_thirds();
    diag_.update_fired = true;
  }
}

AgnosticBeyondLearner::AgnosticBeyondLearner(double eta, long T)
    : M_(noisy_batch_size(eta, T)),
      delta_(noisy_delta(eta)),
      alpha_(1.0 / static_cast<double>(T)) {}

Prediction AgnosticBeyondLearner::step(const Point& x) {
  diag_ = StepDiag{};
  if (vs_.is_empty()) throw EmptyVersionSpace();
  const double xv = std::get<double>(x);
  const double len = vs_.dis_length();
  diag_.rho_vs = len;
  if (len >= alpha_) {
    const double a = std::clamp(vs_.lo, 0.0, 1.0);
    const double b = std::clamp(vs_.hi, 0.0, 1.0);
    const double m1 = std::max(0.0, b - std::clamp(xv, a, b));
    const double m0 = len - m1;
    diag_.rho0 = m0;
    diag_.rho1 = m1;
    if (std::min(m0, m1) >= 0.6 * len) {
      diag_.prediction = Prediction::Abstain;
      diag_.abstained_while_rho_big = true;
    } else {
      diag_.prediction = m1 >= m0 ? Prediction::One : Prediction::Zero;
    }
  } else {
    diag_.in_dis = vs_.dis_contains(xv);
    diag_.prediction = diag_.in_dis ? Prediction::Abstain
                                    : to_prediction(*vs_.consistent(xv));
  }
  return diag_.prediction;
}

void AgnosticBeyondLearner::observe(const Point& x, Label y) {
  ++round_;
  buffer_.emplace_back(std::get<double>(x), y);
  if (static_cast<long>(buffer_.size()) == M_) {
    vs_ = sublevel_hull(std::move(buffer_), vs_, delta_);
    updates_.push_back({vs_, round_});
    buffer_.clear();
    diag_.update_fired = true;
  }
}

}  // namespace abstain
