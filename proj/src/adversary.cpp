#include "abstain/adversary.hpp"

#include <algorithm>
#include <cmath>

namespace abstain {

namespace {

double unif(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

bool support_contains(const KnownDistribution& dist, const Point& p) {
  if (std::holds_alternative<Uniform01>(dist)) {
    const auto* x = std::get_if<double>(&p);
    return x && *x >= 0.0 && *x <= 1.0;
  }
  if (const auto* pu = std::get_if<ProductUniform>(&dist)) {
    const auto* v = std::get_if<Vec>(&p);
    if (!v || static_cast<int>(v->size()) != pu->p) return false;
    for (double c : *v) {
      if (c < 0.0 || c > 1.0) return false;
    }
    return true;
  }
  const auto& dt = std::get<DiscreteTree>(dist);
  const auto* n = std::get_if<TreeNode>(&p);
  return n && dt.weights[dt.tree->index(n->id)] > 0.0;
}

std::optional<Point> place_in_dis(const KnownDistribution& dist,
                                  const AnyVS& visible, Rng& rng) {
  if (vs_empty(visible)) return std::nullopt;
  if (const auto* t = std::get_if<ThresholdVS>(&visible)) {
    const double len = t->hi - t->lo;
    if (len <= 0.0) return std::nullopt;
    return t->hi - unif(rng) * len;  // lands in (lo, hi]
  }
  if (const auto* iv = std::get_if<IntervalVS>(&visible)) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      double x;
      if (iv->has_pos) {
        const double gl = iv->gap_left();
        const double gr = iv->gap_right();
        if (gl + gr <= 0.0) return std::nullopt;
        if (unif(rng) * (gl + gr) < gl) {
          x = iv->pos_min - unif(rng) * gl;
        } else {
          x = iv->pos_max + unif(rng) * gr;
        }
      } else {
        x = unif(rng);
      }
      if (x >= 0.0 && x <= 1.0 && iv->dis_contains(x)) return x;
    }
    return std::nullopt;
  }
  if (const auto* tr = std::get_if<TreeClassVS>(&visible)) {
    const auto* dt = std::get_if<DiscreteTree>(&dist);
    if (!dt) return std::nullopt;
    std::vector<int> ids;
    std::vector<double> w;
    double tot = 0.0;
    for (int id : tr->tree->ids) {
      const double wi = dt->weights[dt->tree->index(id)];
      if (wi > 0.0 && tr->dis_contains(TreeNode{id})) {
        ids.push_back(id);
        w.push_back(wi);
        tot += wi;
      }
    }
    if (ids.empty()) return std::nullopt;
    const double u = unif(rng) * tot;
    double acc = 0.0;
    for (size_t i = 0; i < ids.size(); ++i) {
      acc += w[i];
      if (u < acc) return TreeNode{ids[i]};
    }
    return TreeNode{ids.back()};
  }
  const auto& rv = std::get<RectangleVS>(visible);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Point p = sample(dist, rng);
    if (rv.dis_contains(std::get<Vec>(p))) return p;
  }
  return std::nullopt;
}

std::optional<Point> place_boundary(const KnownDistribution& dist,
                                    const AnyVS& visible, double offset,
                                    Rng& rng) {
  if (vs_empty(visible)) return std::nullopt;
  if (const auto* t = std::get_if<ThresholdVS>(&visible)) {
    const double len = t->hi - t->lo;
    if (len <= 0.0) return std::nullopt;
    const double off = std::clamp(offset, 1e-9, 1.0);
    return unif(rng) < 0.5 ? t->lo + off * len : t->hi;
  }
  if (const auto* iv = std::get_if<IntervalVS>(&visible)) {
    if (iv->has_pos) {
      const double gl = iv->gap_left();
      const double gr = iv->gap_right();
      if (gl + gr <= 0.0) return std::nullopt;
      const double off = std::clamp(offset, 1e-9, 1.0);
      double x;
      if ((unif(rng) < 0.5 && gl > 0.0) || gr <= 0.0) {
        x = iv->pos_min - off * gl;
      } else {
        x = iv->pos_max + off * gr;
      }
      if (x >= 0.0 && x <= 1.0 && iv->dis_contains(x)) return x;
      return std::nullopt;
    }
  }
  return place_in_dis(dist, visible, rng);
}

std::optional<Point> place_tree_attack(const KnownDistribution& dist,
                                       const AnyVS& visible, Rng& rng) {
  const auto* tr = std::get_if<TreeClassVS>(&visible);
  const auto* dt = std::get_if<DiscreteTree>(&dist);
  if (!tr || !dt || tr->is_empty()) return std::nullopt;
  std::vector<int> ids;
  int best_depth = -1;
  for (int id : tr->tree->ids) {
    if (dt->weights[dt->tree->index(id)] <= 0.0) continue;
    if (!tr->dis_contains(TreeNode{id})) continue;
    const int d = tr->tree->depth[tr->tree->index(id)];
    if (d > best_depth) {
      best_depth = d;
      ids.clear();
    }
    if (d == best_depth) ids.push_back(id);
  }
  if (ids.empty()) return std::nullopt;
  const size_t i = static_cast<size_t>(unif(rng) * static_cast<double>(ids.size()));
  return TreeNode{ids[std::min(i, ids.size() - 1)]};
}

}  // namespace

double flip_prob(const NoiseChannel& noise, const Point& x) {
  if (std::holds_alternative<NoiseNone>(noise)) return 0.0;
  if (const auto* rcn = std::get_if<RCN>(&noise)) return rcn->eta;
  const auto& m = std::get<Massart>(noise);
  double s = 0.5;
  if (const auto* d = std::get_if<double>(&x)) {
    s = std::clamp(*d, 0.0, 1.0);
  } else if (const auto* v = std::get_if<Vec>(&x)) {
    s = v->empty() ? 0.5 : std::clamp((*v)[0], 0.0, 1.0);
  }
  return m.eta * s;
}

StreamEvent next_event(const AdversaryStrategy& adv,
                       const KnownDistribution& dist, const TargetFn& target,
                       const AnyVS& visible, const NoiseChannel& noise,
                       Rng& rng, long round_index) {
  StreamEvent ev;
  ev.round_index = round_index;

  if (const auto* sc = std::get_if<Scripted>(&adv)) {
    const size_t idx = static_cast<size_t>(round_index - 1);
    if (idx < sc->rounds.size()) {
      const ScriptRound& r = sc->rounds[idx];
      ev.point = r.point;
      ev.origin = r.origin;
      ev.clean_label = r.forced_label ? *r.forced_label : target(ev.point);
    } else {
      ev.point = sample(dist, rng);
      ev.origin = Origin::Iid;
      ev.clean_label = target(ev.point);
    }
  } else {
    double rate = 0.0;
    if (const auto* f = std::get_if<DisagreementFlood>(&adv)) rate = f->rate;
    if (const auto* b = std::get_if<BoundaryProbe>(&adv)) rate = b->rate;
    if (const auto* t = std::get_if<TreeAttack>(&adv)) rate = t->rate;

    // Injection decision and placement happen before the i.i.d. draw.
    std::optional<Point> injected;
    if (unif(rng) < rate) {
      if (const auto* b = std::get_if<BoundaryProbe>(&adv)) {
        injected = place_boundary(dist, visible, b->offset, rng);
      } else if (std::holds_alternative<TreeAttack>(adv)) {
        injected = place_tree_attack(dist, visible, rng);
      } else {
        injected = place_in_dis(dist, visible, rng);
      }
    }
    if (injected) {
      if (!support_contains(dist, *injected)) throw InjectionOffSupport();
      ev.point = *injected;
      ev.origin = Origin::Injected;
    } else {
      ev.point = sample(dist, rng);
      ev.origin = Origin::Iid;
    }
    ev.clean_label = target(ev.point);
  }

  ev.observed_label = ev.clean_label;
  const double fp = flip_prob(noise, ev.point);
  if (fp > 0.0 && unif(rng) < fp) ev.observed_label = flip(ev.observed_label);
  return ev;
}

RunResult run_protocol(Learner& learner, const AdversaryStrategy& adv,
                       const KnownDistribution& dist, const TargetFn& target,
                       const NoiseChannel& noise, long T, RunMode mode,
                       Rng& rng) {
  RunResult out;
  for (long t = 1; t <= T; ++t) {
    try {
      const StreamEvent ev =
          next_event(adv, dist, target, learner.visible_vs(), noise, rng, t);
      const Prediction pred = learner.step(ev.point);
      out.tally = tally_update(out.tally, ev, pred, mode);
      learner.observe(ev.point, ev.observed_label);
      if (ev.origin == Origin::Injected) ++out.rounds_injected;
      out.logs.push_back(
          {t, ev.point, ev.origin, ev.clean_label, ev.observed_label,
           learner.last_diag()});
    } catch (const std::exception& e) {
      out.aborted = true;
      out.abort_round = t;
      out.abort_reason = e.what();
      break;
    }
  }
  return out;
}

}  // namespace abstain
