#include "abstain/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace abstain {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

namespace {

Point point_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array()) return j.get<Vec>();
  if (j.is_object() && j.contains("node")) return TreeNode{j.at("node").get<int>()};
  throw ConfigError("bad point encoding");
}

json point_to_json(const Point& p) {
  if (const auto* d = std::get_if<double>(&p)) return *d;
  if (const auto* v = std::get_if<Vec>(&p)) return *v;
  return json{{"node", std::get<TreeNode>(p).id}};
}

std::pair<std::shared_ptr<const TreeTopology>, std::uint64_t> tree_from_json(
    const json& j) {
  std::vector<int> nodes = j.at("nodes").get<std::vector<int>>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) {
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  }
  auto topo = std::make_shared<TreeTopology>(TreeTopology::build(nodes, edges));
  std::uint64_t mask = 0;
  if (j.contains("target_path")) {
    int deepest = -1;
    for (const auto& id : j.at("target_path")) {
      const int idx = topo->index(id.get<int>());
      mask |= std::uint64_t{1} << idx;
      if (deepest < 0 || topo->depth[idx] > topo->depth[deepest]) deepest = idx;
    }
    if (deepest >= 0 && mask != topo->path_mask(topo->ids[deepest])) {
      throw ConfigError("target_path is not a root path");
    }
  }
  return {topo, mask};
}

std::vector<ScriptRound> rounds_from_json(const json& arr) {
  std::vector<ScriptRound> rounds;
  for (const auto& r : arr) {
    ScriptRound sr;
    sr.point = point_from_json(r.at("point"));
    if (r.contains("origin")) {
      const std::string o = r.at("origin").get<std::string>();
      if (o == "iid") {
        sr.origin = Origin::Iid;
      } else if (o == "injected") {
        sr.origin = Origin::Injected;
      } else {
        throw ConfigError("bad origin tag");
      }
    }
    if (r.contains("label")) sr.forced_label = make_label(r.at("label").get<int>());
    rounds.push_back(std::move(sr));
  }
  return rounds;
}

std::string learner_name(LearnerId id) {
  switch (id) {
    case LearnerId::Baseline: return "baseline";
    case LearnerId::Shattering: return "shattering";
    case LearnerId::Vc1: return "vc1";
    case LearnerId::Rect: return "rect";
    case LearnerId::AgnosticThresh: return "agnostic_thresh";
    case LearnerId::AgnosticBeyond: return "agnostic_beyond";
  }
  return "?";
}

std::string class_name(ClassKind k) {
  switch (k) {
    case ClassKind::Thresholds: return "thresholds";
    case ClassKind::Intervals: return "intervals";
    case ClassKind::Tree: return "tree";
    case ClassKind::Rectangles: return "rectangles";
  }
  return "?";
}

double noise_eta(const NoiseChannel& n) {
  if (const auto* r = std::get_if<RCN>(&n)) return r->eta;
  if (const auto* m = std::get_if<Massart>(&n)) return m->eta;
  return 0.0;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::string& config_dir) {
  ExperimentConfig cfg;

  const json cls = doc.value("class", json{{"kind", "thresholds"}});
  const std::string kind = cls.value("kind", "thresholds");
  if (kind == "thresholds") {
    cfg.class_kind = ClassKind::Thresholds;
    cfg.threshold_a = cls.value("a", 0.5);
  } else if (kind == "intervals") {
    cfg.class_kind = ClassKind::Intervals;
    cfg.interval_a = cls.value("a", 0.35);
    cfg.interval_b = cls.value("b", 0.65);
    if (cfg.interval_a > cfg.interval_b) throw ConfigError("interval target with a > b");
  } else if (kind == "tree") {
    cfg.class_kind = ClassKind::Tree;
    if (cls.contains("random_nodes")) {
      cfg.tree.random_nodes = cls.at("random_nodes").get<int>();
      if (cfg.tree.random_nodes < 1 || cfg.tree.random_nodes > 64) {
        throw ConfigError("random_nodes must be in [1, 64]");
      }
    } else if (cls.contains("file")) {
      std::string path = cls.at("file").get<std::string>();
      if (!path.empty() && path[0] != '/') path = config_dir + "/" + path;
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot read tree file: " + path);
      json tj;
      in >> tj;
      std::tie(cfg.tree.topology, cfg.tree.target_mask) = tree_from_json(tj);
    } else {
      std::tie(cfg.tree.topology, cfg.tree.target_mask) = tree_from_json(cls);
    }
  } else if (kind == "rectangles") {
    cfg.class_kind = ClassKind::Rectangles;
    cfg.p = cls.value("p", 2);
    if (cfg.p < 1) throw ConfigError("rectangles require p >= 1");
    cfg.rect_lo = cls.value("lo", Vec(cfg.p, 0.25));
    cfg.rect_hi = cls.value("hi", Vec(cfg.p, 0.75));
    if (static_cast<int>(cfg.rect_lo.size()) != cfg.p ||
        static_cast<int>(cfg.rect_hi.size()) != cfg.p) {
      throw ConfigError("rectangle target dimension mismatch");
    }
  } else {
    throw ConfigError("unknown class kind: " + kind);
  }

  const std::string lid = doc.value("learner", "baseline");
  if (lid == "baseline") {
    cfg.learner = LearnerId::Baseline;
  } else if (lid == "shattering") {
    cfg.learner = LearnerId::Shattering;
  } else if (lid == "vc1") {
    cfg.learner = LearnerId::Vc1;
  } else if (lid == "rect") {
    cfg.learner = LearnerId::Rect;
  } else if (lid == "agnostic_thresh") {
    cfg.learner = LearnerId::AgnosticThresh;
  } else if (lid == "agnostic_beyond") {
    cfg.learner = LearnerId::AgnosticBeyond;
  } else {
    throw ConfigError("unknown learner: " + lid);
  }

  // Distribution: default inferred from the class.
  if (doc.contains("distribution")) {
    const json dj = doc.at("distribution");
    const std::string dk = dj.value("kind", "uniform01");
    if (dk == "uniform01") {
      cfg.dist = Uniform01{};
    } else if (dk == "product_uniform") {
      cfg.dist = ProductUniform{dj.value("p", cfg.p)};
    } else if (dk == "discrete_tree") {
      if (cfg.class_kind != ClassKind::Tree) {
        throw ConfigError("discrete_tree distribution requires a tree class");
      }
      if (cfg.tree.random_nodes > 0) {
        // weights are regenerated per replication; keep the default marker
      } else {
        DiscreteTree dt;
        dt.tree = cfg.tree.topology;
        if (dj.contains("weights")) {
          dt.weights = dj.at("weights").get<std::vector<double>>();
        } else {
          dt.weights.assign(dt.tree->size(), 1.0 / dt.tree->size());
        }
        cfg.dist = validate_distribution(dt);
      }
    } else {
      throw ConfigError("unknown distribution kind: " + dk);
    }
  } else {
    switch (cfg.class_kind) {
      case ClassKind::Thresholds:
      case ClassKind::Intervals:
        cfg.dist = Uniform01{};
        break;
      case ClassKind::Rectangles:
        cfg.dist = ProductUniform{cfg.p};
        break;
      case ClassKind::Tree:
        if (cfg.tree.topology) {
          DiscreteTree dt;
          dt.tree = cfg.tree.topology;
          dt.weights.assign(dt.tree->size(), 1.0 / dt.tree->size());
          cfg.dist = dt;
        }
        break;
    }
  }

  if (doc.contains("adversary")) {
    const json aj = doc.at("adversary");
    const std::string ak = aj.value("kind", "noop");
    const double rate = aj.value("rate", 0.5);
    if (rate < 0.0 || rate > 1.0) throw ConfigError("adversary rate must be in [0,1]");
    if (ak == "noop") {
      cfg.adversary = NoOp{};
    } else if (ak == "flood") {
      cfg.adversary = DisagreementFlood{rate};
    } else if (ak == "boundary") {
      cfg.adversary = BoundaryProbe{rate, aj.value("offset", 0.01)};
    } else if (ak == "tree_attack") {
      if (cfg.class_kind != ClassKind::Tree) {
        throw ConfigError("tree_attack requires a tree class");
      }
      cfg.adversary = TreeAttack{rate};
    } else if (ak == "scripted") {
      Scripted sc;
      if (aj.contains("rounds")) {
        sc.rounds = rounds_from_json(aj.at("rounds"));
      } else if (aj.contains("file")) {
        std::string path = aj.at("file").get<std::string>();
        if (!path.empty() && path[0] != '/') path = config_dir + "/" + path;
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read stream file: " + path);
        json sj;
        in >> sj;
        sc.rounds = rounds_from_json(sj.at("rounds"));
      } else {
        throw ConfigError("scripted adversary needs rounds or file");
      }
      cfg.adversary = std::move(sc);
    } else {
      throw ConfigError("unknown adversary kind: " + ak);
    }
  }

  if (doc.contains("noise")) {
    const json nj = doc.at("noise");
    const std::string nk = nj.value("kind", "none");
    const double eta = nj.value("eta", 0.0);
    if (nk == "none") {
      cfg.noise = NoiseNone{};
    } else if (nk == "rcn") {
      cfg.noise = RCN{eta};
    } else if (nk == "massart") {
      cfg.noise = Massart{eta};
    } else {
      throw ConfigError("unknown noise kind: " + nk);
    }
    if (nk != "none" && (eta < 0.0 || eta >= 0.5)) {
      throw ConfigError("noise bound must satisfy 0 <= eta < 1/2");
    }
  }

  cfg.T = doc.value("T", 1000L);
  cfg.replications = doc.value("replications", 1);
  cfg.base_seed = doc.value("base_seed", std::uint64_t{1});
  cfg.mc_samples = doc.value("mc_samples", 4096L);
  cfg.jobs = doc.value("jobs", 0);
  if (doc.contains("out")) {
    cfg.results_csv = doc.at("out").value("results_csv", cfg.results_csv);
    cfg.summary_json = doc.at("out").value("summary_json", cfg.summary_json);
  }
  if (cfg.T < 0) throw ConfigError("T must be >= 0");
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  if (cfg.mc_samples < 1) throw ConfigError("mc_samples must be >= 1");

  // Learner/class/distribution compatibility.
  switch (cfg.learner) {
    case LearnerId::Baseline:
      if (cfg.class_kind != ClassKind::Thresholds) {
        throw ConfigError("baseline learner requires thresholds");
      }
      break;
    case LearnerId::Shattering:
      if (cfg.class_kind == ClassKind::Rectangles) {
        throw ConfigError("shattering learner supports thresholds, intervals, tree");
      }
      break;
    case LearnerId::Vc1:
      if (cfg.class_kind != ClassKind::Thresholds && cfg.class_kind != ClassKind::Tree) {
        throw ConfigError("vc1 learner requires a VC-dimension-1 class");
      }
      break;
    case LearnerId::Rect:
      if (cfg.class_kind != ClassKind::Rectangles) {
        throw ConfigError("rect learner requires rectangles");
      }
      break;
    case LearnerId::AgnosticThresh:
    case LearnerId::AgnosticBeyond:
      if (cfg.class_kind != ClassKind::Thresholds) {
        throw ConfigError("agnostic learners require thresholds");
      }
      if (!std::holds_alternative<Uniform01>(cfg.dist)) {
        throw ConfigError("agnostic learners require Uniform01");
      }
      break;
  }

  // Canonical echo for the digest (nlohmann objects serialize with sorted keys).
  cfg.canonical = json{
      {"class", doc.value("class", json{{"kind", "thresholds"}})},
      {"learner", lid},
      {"distribution", doc.value("distribution", json{})},
      {"adversary", doc.value("adversary", json{{"kind", "noop"}})},
      {"noise", doc.value("noise", json{{"kind", "none"}})},
      {"T", cfg.T},
      {"replications", cfg.replications},
      {"base_seed", cfg.base_seed},
      {"mc_samples", cfg.mc_samples},
  };
  return cfg;
}

std::string config_digest(const ExperimentConfig& cfg) {
  const std::string s = cfg.canonical.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Replication runner
// ---------------------------------------------------------------------------

namespace {

std::pair<std::shared_ptr<const TreeTopology>, std::uint64_t> random_tree(
    int n, Rng& rng) {
  std::vector<int> nodes(n);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) nodes[i] = i + 1;
  for (int i = 2; i <= n; ++i) {
    const int parent = std::uniform_int_distribution<int>(1, i - 1)(rng);
    edges.emplace_back(parent, i);
  }
  auto topo = std::make_shared<TreeTopology>(TreeTopology::build(nodes, edges));
  const int pick = std::uniform_int_distribution<int>(0, n)(rng);
  const std::uint64_t mask = pick == 0 ? 0 : topo->path_mask(pick);
  return {topo, mask};
}

bool hull_contains(const ThresholdVS& hull, double a) {
  return !hull.is_empty() && a >= hull.lo &&
         (a < hull.hi || (a == hull.hi && !hull.open_right));
}

}  // namespace

RepRun run_one_rep_full(const ExperimentConfig& cfg, int rep) {
  RepResult out;
  out.rep = rep;
  out.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
  out.T = cfg.T;
  Rng rng(out.seed);

  auto topo = cfg.tree.topology;
  std::uint64_t target_mask = cfg.tree.target_mask;
  KnownDistribution dist = cfg.dist;
  if (cfg.class_kind == ClassKind::Tree && cfg.tree.random_nodes > 0) {
    std::tie(topo, target_mask) = random_tree(cfg.tree.random_nodes, rng);
    DiscreteTree dt;
    dt.tree = topo;
    dt.weights.assign(topo->size(), 1.0 / topo->size());
    dist = dt;
  }

  TargetFn target;
  switch (cfg.class_kind) {
    case ClassKind::Thresholds: {
      const double a = cfg.threshold_a;
      target = [a](const Point& p) {
        return std::get<double>(p) <= a ? Label::One : Label::Zero;
      };
      break;
    }
    case ClassKind::Intervals: {
      const double a = cfg.interval_a, b = cfg.interval_b;
      target = [a, b](const Point& p) {
        const double x = std::get<double>(p);
        return x >= a && x <= b ? Label::One : Label::Zero;
      };
      break;
    }
    case ClassKind::Tree: {
      auto t = topo;
      const std::uint64_t m = target_mask;
      target = [t, m](const Point& p) {
        const int i = t->index(std::get<TreeNode>(p).id);
        return ((m >> i) & 1) != 0 ? Label::One : Label::Zero;
      };
      break;
    }
    case ClassKind::Rectangles: {
      const Vec lo = cfg.rect_lo, hi = cfg.rect_hi;
      target = [lo, hi](const Point& p) {
        const Vec& v = std::get<Vec>(p);
        for (size_t i = 0; i < v.size(); ++i) {
          if (v[i] < lo[i] || v[i] > hi[i]) return Label::Zero;
        }
        return Label::One;
      };
      break;
    }
  }

  std::unique_ptr<Learner> learner;
  Vc1Learner* vc1 = nullptr;
  ShatteringLearner* shat = nullptr;
  RectangleLearner* rect = nullptr;
  AgnosticThresholdLearner* ag4 = nullptr;
  AgnosticBeyondLearner* ag5 = nullptr;
  int d = 1;
  switch (cfg.learner) {
    case LearnerId::Baseline:
      learner = std::make_unique<BaselineThresholdLearner>();
      break;
    case LearnerId::Shattering: {
      AnyVS full;
      if (cfg.class_kind == ClassKind::Thresholds) {
        full = ThresholdVS{};
        d = 1;
      } else if (cfg.class_kind == ClassKind::Intervals) {
        full = IntervalVS{};
        d = 2;
      } else {
        full = make_tree_class(topo);
        d = 1;
      }
      auto l = std::make_unique<ShatteringLearner>(
          std::move(full), dist, d, cfg.T, cfg.mc_samples,
          out.seed ^ 0x517cc1b727220a95ULL);
      shat = l.get();
      learner = std::move(l);
      break;
    }
    case LearnerId::Vc1: {
      AnyVS full;
      if (cfg.class_kind == ClassKind::Thresholds) {
        full = ThresholdVS{};
      } else {
        full = make_tree_class(topo);
      }
      auto l = std::make_unique<Vc1Learner>(std::move(full), cfg.T);
      vc1 = l.get();
      learner = std::move(l);
      break;
    }
    case LearnerId::Rect: {
      auto l = std::make_unique<RectangleLearner>(cfg.p, cfg.T);
      rect = l.get();
      learner = std::move(l);
      break;
    }
    case LearnerId::AgnosticThresh: {
      auto l = std::make_unique<AgnosticThresholdLearner>(noise_eta(cfg.noise), cfg.T);
      ag4 = l.get();
      learner = std::move(l);
      break;
    }
    case LearnerId::AgnosticBeyond: {
      auto l = std::make_unique<AgnosticBeyondLearner>(noise_eta(cfg.noise), cfg.T);
      ag5 = l.get();
      learner = std::move(l);
      break;
    }
  }

  const RunMode mode = std::holds_alternative<NoiseNone>(cfg.noise)
                           ? RunMode::Realizable
                           : RunMode::Agnostic;
  RunResult run = run_protocol(*learner, cfg.adversary, dist, target,
                               cfg.noise, cfg.T, mode, rng);

  out.mis = mode == RunMode::Realizable ? run.tally.mis_realizable
                                        : run.tally.mis_agnostic;
  out.abstain_iid = run.tally.abstain_on_iid;
  out.rounds_injected = run.rounds_injected;
  out.aborted = run.aborted;

  json diag;
  diag["aborted"] = run.aborted;
  if (run.aborted) {
    diag["abort_round"] = run.abort_round;
    diag["abort_reason"] = run.abort_reason;
  }

  bool ok = true;
  if (vc1) {
    const double alpha = vc1->alpha();
    long gamma_prev = 0;
    long mis_count = 0;
    for (const RoundLog& lg : run.logs) {
      const bool mis = is_committed(lg.diag.prediction) &&
                       !agrees(lg.diag.prediction, lg.observed);
      if (mis) ++mis_count;
      const double allowed = static_cast<double>(gamma_prev) + 1.0 -
                             (mis ? alpha : 0.0);
      if (static_cast<double>(lg.diag.gamma_after) > allowed + 1e-9) ok = false;
      gamma_prev = lg.diag.gamma_after;
    }
    if (static_cast<double>(mis_count) > static_cast<double>(cfg.T) / alpha + 1e-9) {
      ok = false;
    }
    diag["alpha"] = alpha;
    diag["final_gamma"] = gamma_prev;
  }
  if (shat) {
    for (const RoundLog& lg : run.logs) {
      const bool mis = is_committed(lg.diag.prediction) &&
                       !agrees(lg.diag.prediction, lg.observed);
      if (mis && lg.diag.level > 0 && lg.diag.rho_after >= 0.0 &&
          lg.diag.rho_vs > 0.0) {
        if (lg.diag.rho_after >= 0.6 * lg.diag.rho_vs - 1e-12) ok = false;
      }
    }
    diag["final_level"] = shat->level();
  }
  if (rect) {
    long cond3_mis = 0;
    for (const RoundLog& lg : run.logs) {
      if (lg.diag.rect_rule == 3 && is_committed(lg.diag.prediction) &&
          !agrees(lg.diag.prediction, lg.observed)) {
        ++cond3_mis;
      }
    }
    const double bound =
        static_cast<double>(cfg.T) * cfg.p / rect->alpha() + 1.0;
    if (static_cast<double>(cond3_mis) > bound + 1e-9) ok = false;
    diag["cond3_mis"] = cond3_mis;
    diag["alpha"] = rect->alpha();
  }
  if (ag4) {
    bool retained = true;
    for (const UpdateRecord& u : ag4->updates()) {
      if (!hull_contains(u.hull_after, cfg.threshold_a)) retained = false;
    }
    out.fstar_retained = retained;
    diag["updates"] = ag4->updates().size();
    diag["fstar_retained"] = retained;
    diag["leftover_buffer"] = ag4->leftover_buffer();
    diag["stalled"] = ag4->updates().empty();
  }
  if (ag5) {
    long bad = 0;
    for (const RoundLog& lg : run.logs) {
      if (lg.diag.abstained_while_rho_big) ++bad;
    }
    if (bad > 0) ok = false;
    bool retained = true;
    for (const UpdateRecord& u : ag5->updates()) {
      if (!hull_contains(u.hull_after, cfg.threshold_a)) retained = false;
    }
    out.fstar_retained = retained;
    diag["updates"] = ag5->updates().size();
    diag["fstar_retained"] = retained;
    diag["abstained_while_rho_big_rounds"] = bad;
  }
  out.invariants_ok = ok && !run.aborted;
  diag["invariants_ok"] = out.invariants_ok;
  out.diagnostics = diag.dump();
  return {std::move(out), std::move(run)};
}

RepResult run_one_rep(const ExperimentConfig& cfg, int rep) {
  return run_one_rep_full(cfg, rep).result;
}

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ABSTAIN_LAB_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::pair<Summary, std::vector<RepResult>> run_experiment(
    const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = cfg.replications;
  std::vector<RepResult> reps(n);
  const int jobs = std::min(resolve_jobs(cfg.jobs), n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) reps[i] = run_one_rep(cfg, i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          reps[i] = run_one_rep(cfg, i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  Summary s;
  s.digest = config_digest(cfg);
  s.learner = learner_name(cfg.learner);
  s.class_kind = class_name(cfg.class_kind);
  s.T = cfg.T;
  s.replications = n;
  double sum_m = 0, sum_a = 0, sq_m = 0, sq_a = 0;
  for (const RepResult& r : reps) {
    sum_m += static_cast<double>(r.mis);
    sum_a += static_cast<double>(r.abstain_iid);
    if (r.aborted) ++s.aborted_reps;
    if (!r.invariants_ok) ++s.invariant_violations;
  }
  s.mean_mis = sum_m / n;
  s.mean_abstain = sum_a / n;
  for (const RepResult& r : reps) {
    sq_m += (r.mis - s.mean_mis) * (r.mis - s.mean_mis);
    sq_a += (r.abstain_iid - s.mean_abstain) * (r.abstain_iid - s.mean_abstain);
  }
  const double sd_m = n > 1 ? std::sqrt(sq_m / (n - 1)) : 0.0;
  const double sd_a = n > 1 ? std::sqrt(sq_a / (n - 1)) : 0.0;
  const double half_m = 1.959963985 * sd_m / std::sqrt(static_cast<double>(n));
  const double half_a = 1.959963985 * sd_a / std::sqrt(static_cast<double>(n));
  s.ci_mis_lo = s.mean_mis - half_m;
  s.ci_mis_hi = s.mean_mis + half_m;
  s.ci_abs_lo = s.mean_abstain - half_a;
  s.ci_abs_hi = s.mean_abstain + half_a;

  s.experimental = cfg.learner == LearnerId::AgnosticBeyond;
  if (!s.experimental && cfg.T >= 2) {
    BoundParams bp;
    bp.d = cfg.class_kind == ClassKind::Intervals ? 2 : 1;
    bp.p = cfg.p;
    bp.eta = noise_eta(cfg.noise);
    const BoundCurve bc = bounds(s.learner, bp, {cfg.T});
    for (const BoundFormula& f : bc.formulas) {
      if (f.id == "misclassification") s.mis_bound = f.points[0].value;
      if (f.id == "abstention") s.abstain_bound = f.points[0].value;
    }
    s.mis_bound_satisfied = s.mean_mis <= s.mis_bound + 1e-9;
    s.abstain_bound_satisfied = s.mean_abstain <= s.abstain_bound + 1e-9;
  }
  s.wall_time_s = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return {std::move(s), std::move(reps)};
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace {
std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}
}  // namespace

std::string results_csv_text(const ExperimentConfig& cfg,
                             const std::vector<RepResult>& reps) {
  const std::string digest = config_digest(cfg);
  std::ostringstream os;
  os << "config_digest,rep,seed,T,mis,abstain_iid,rounds_injected,diagnostics\n";
  for (const RepResult& r : reps) {
    os << digest << ',' << r.rep << ',' << r.seed << ',' << r.T << ',' << r.mis
       << ',' << r.abstain_iid << ',' << r.rounds_injected << ','
       << csv_quote(r.diagnostics) << '\n';
  }
  return os.str();
}

json summary_to_json(const Summary& s) {
  json j;
  j["config_digest"] = s.digest;
  j["learner"] = s.learner;
  j["class"] = s.class_kind;
  j["T"] = s.T;
  j["replications"] = s.replications;
  j["mean_mis"] = s.mean_mis;
  j["ci95_mis"] = {s.ci_mis_lo, s.ci_mis_hi};
  j["mean_abstain_iid"] = s.mean_abstain;
  j["ci95_abstain_iid"] = {s.ci_abs_lo, s.ci_abs_hi};
  j["experimental"] = s.experimental;
  if (!s.experimental) {
    j["bounds"] = {{"misclassification", s.mis_bound},
                   {"abstention", s.abstain_bound}};
    j["bound_satisfied"] = {{"misclassification", s.mis_bound_satisfied},
                            {"abstention", s.abstain_bound_satisfied}};
  }
  j["aborted_reps"] = s.aborted_reps;
  j["invariant_violations"] = s.invariant_violations;
  j["wall_time_s"] = s.wall_time_s;
  j["metadata"] = {{"log_convention", "natural"},
                   {"ci", "normal-95"},
                   {"seeding", "base_seed + replication index"}};
  return j;
}

// ---------------------------------------------------------------------------
// Bound curves
// ---------------------------------------------------------------------------

BoundCurve bounds(const std::string& learner, const BoundParams& params,
                  const std::vector<long>& Ts) {
  BoundCurve bc;
  bc.learner = learner;
  BoundFormula mis{"misclassification", {}};
  BoundFormula abst{"abstention", {}};
  for (long T : Ts) {
    if (T < 2) throw ConfigError("bound curves require T >= 2");
    const double lt = std::log(static_cast<double>(T));
    const double td = static_cast<double>(T);
    if (learner == "baseline") {
      mis.points.push_back({T, 0.0});
      abst.points.push_back({T, 2.0 * lt});
    } else if (learner == "shattering" || learner == "alg1") {
      const double d = params.d;
      mis.points.push_back({T, d * d * lt});
      abst.points.push_back({T, 6.0 * d});
    } else if (learner == "vc1" || learner == "alg2") {
      const double v = std::sqrt(td * lt);
      mis.points.push_back({T, v});
      abst.points.push_back({T, v});
    } else if (learner == "rect" || learner == "alg3") {
      const double p = params.p;
      mis.points.push_back({T, p * std::sqrt(td * lt)});
      abst.points.push_back({T, 2.0 * p * std::sqrt(td * lt) + 2.0 * p * lt});
    } else if (learner == "agnostic_thresh" || learner == "alg4") {
      const double M = static_cast<double>(noisy_batch_size(params.eta, T));
      mis.points.push_back({T, 1.0});
      abst.points.push_back(
          {T, 6.0 * M * std::log(td / (12.0 * M) + 1.5) / std::log(1.5) + 1.0});
    } else if (learner == "agnostic_beyond" || learner == "alg5") {
      abst.points.push_back({T, 1.0});
    } else {
      throw ConfigError("unknown learner for bounds: " + learner);
    }
  }
  if (!mis.points.empty()) bc.formulas.push_back(std::move(mis));
  bc.formulas.push_back(std::move(abst));
  return bc;
}

}  // namespace abstain
