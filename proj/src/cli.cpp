#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "abstain/harness.hpp"
#include "abstain/oracles.hpp"

namespace abstain {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad JSON in ") + path + ": " + e.what());
  }
  return j;
}

std::string dir_of(const std::string& path) {
  const auto pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << text;
}

struct Overrides {
  std::uint64_t seed = 0;
  bool has_seed = false;
  long mc_samples = 0;
  int jobs = 0;
  std::string out_prefix;
};

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
  json doc = load_json(path);
  ExperimentConfig cfg = parse_config(doc, dir_of(path));
  if (ov.has_seed) cfg.base_seed = ov.seed;
  if (ov.mc_samples > 0) cfg.mc_samples = ov.mc_samples;
  if (ov.jobs > 0) cfg.jobs = ov.jobs;
  if (!ov.out_prefix.empty()) {
    cfg.results_csv = ov.out_prefix + ".results.csv";
    cfg.summary_json = ov.out_prefix + ".summary.json";
  }
  // Overrides participate in the digest so altered runs are distinguishable.
  cfg.canonical["base_seed"] = cfg.base_seed;
  cfg.canonical["mc_samples"] = cfg.mc_samples;
  return cfg;
}

int do_run(const ExperimentConfig& cfg) {
  const auto [summary, reps] = run_experiment(cfg);
  write_file(cfg.results_csv, results_csv_text(cfg, reps));
  write_file(cfg.summary_json, summary_to_json(summary).dump(2) + "\n");
  std::cout << "wrote " << cfg.results_csv << " and " << cfg.summary_json
            << "\n"
            << summary_to_json(summary).dump(2) << "\n";
  return 0;
}

int do_sweep(const std::string& path, const Overrides& ov) {
  json doc = load_json(path);
  const json sweep = doc.value("sweep", json::object());
  std::vector<long> Ts;
  std::vector<double> rates, etas;
  if (sweep.contains("T")) Ts = sweep.at("T").get<std::vector<long>>();
  if (sweep.contains("rate")) rates = sweep.at("rate").get<std::vector<double>>();
  if (sweep.contains("eta")) etas = sweep.at("eta").get<std::vector<double>>();
  if (Ts.empty()) Ts.push_back(doc.value("T", 1000L));
  if (rates.empty()) rates.push_back(-1.0);
  if (etas.empty()) etas.push_back(-1.0);

  std::ostringstream all_csv;
  json all_summaries = json::array();
  bool first = true;
  for (long T : Ts) {
    for (double rate : rates) {
      for (double eta : etas) {
        json combo = doc;
        combo.erase("sweep");
        combo["T"] = T;
        if (rate >= 0.0) combo["adversary"]["rate"] = rate;
        if (eta >= 0.0) combo["noise"]["eta"] = eta;
        ExperimentConfig cfg = parse_config(combo, dir_of(path));
        if (ov.has_seed) cfg.base_seed = ov.seed;
        if (ov.mc_samples > 0) cfg.mc_samples = ov.mc_samples;
        if (ov.jobs > 0) cfg.jobs = ov.jobs;
        cfg.canonical["base_seed"] = cfg.base_seed;
        cfg.canonical["mc_samples"] = cfg.mc_samples;
        const auto [summary, reps] = run_experiment(cfg);
        std::string csv = results_csv_text(cfg, reps);
        if (!first) csv = csv.substr(csv.find('\n') + 1);  // drop header
        all_csv << csv;
        all_summaries.push_back(summary_to_json(summary));
        first = false;
      }
    }
  }
  std::string prefix = ov.out_prefix.empty() ? std::string("sweep") : ov.out_prefix;
  write_file(prefix + ".results.csv", all_csv.str());
  write_file(prefix + ".summary.json", all_summaries.dump(2) + "\n");
  std::cout << "wrote " << prefix << ".results.csv and " << prefix
            << ".summary.json (" << all_summaries.size() << " combos)\n";
  return 0;
}

int do_bounds(const std::string& learner, const BoundParams& params,
              std::vector<long> Ts, const std::string& out) {
  if (Ts.empty()) Ts = {100, 1000, 10000};
  const BoundCurve bc = bounds(learner, params, Ts);
  std::ostringstream os;
  os << "learner,formula,T,value\n";
  for (const BoundFormula& f : bc.formulas) {
    for (const BoundPoint& pt : f.points) {
      os << bc.learner << ',' << f.id << ',' << pt.T << ',' << pt.value << '\n';
    }
  }
  if (learner == "agnostic_thresh" || learner == "alg4") {
    std::cout << "M=" << noisy_batch_size(params.eta, Ts.front())
              << " delta=" << noisy_delta(params.eta) << " (T=" << Ts.front()
              << ")\n";
  }
  if (out.empty()) {
    std::cout << os.str();
  } else {
    write_file(out, os.str());
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

std::string point_str(const Point& p) {
  if (const auto* d = std::get_if<double>(&p)) {
    std::ostringstream os;
    os << *d;
    return os.str();
  }
  if (const auto* v = std::get_if<Vec>(&p)) {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < v->size(); ++i) os << (i ? "," : "") << (*v)[i];
    os << ')';
    return os.str();
  }
  return "node " + std::to_string(std::get<TreeNode>(p).id);
}

const char* pred_str(Prediction p) {
  switch (p) {
    case Prediction::Zero: return "0";
    case Prediction::One: return "1";
    case Prediction::Abstain: return "abstain";
  }
  return "?";
}

int do_replay(const std::string& path) {
  json doc = load_json(path);
  doc["replications"] = 1;
  const ExperimentConfig cfg = parse_config(doc, dir_of(path));
  const RepRun rr = run_one_rep_full(cfg, 0);
  for (const RoundLog& lg : rr.run.logs) {
    std::cout << "t=" << lg.round << " x=" << point_str(lg.point)
              << (lg.origin == Origin::Injected ? " [inj]" : "")
              << " pred=" << pred_str(lg.diag.prediction)
              << " y=" << label_value(lg.observed);
    if (lg.diag.a0 >= 0) std::cout << " a0=" << lg.diag.a0;
    if (lg.diag.gamma_after >= 0) std::cout << " gamma=" << lg.diag.gamma_after;
    if (lg.diag.rect_rule > 0) std::cout << " rule=" << lg.diag.rect_rule;
    if (lg.diag.level >= 0) std::cout << " level=" << lg.diag.level;
    std::cout << "\n";
  }
  std::cout << "mis=" << rr.result.mis
            << " abstain_iid=" << rr.result.abstain_iid << "\n";
  if (rr.run.aborted) {
    std::cout << "aborted at round " << rr.run.abort_round << ": "
              << rr.run.abort_reason << "\n";
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// oracle subcommand: randomized cross-checks of primary ops vs oracles.
// ---------------------------------------------------------------------------

std::pair<std::shared_ptr<const TreeTopology>, std::uint64_t> random_tree_cli(
    int n, Rng& rng) {
  std::vector<int> nodes(n);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) nodes[i] = i + 1;
  for (int i = 2; i <= n; ++i) {
    edges.emplace_back(std::uniform_int_distribution<int>(1, i - 1)(rng), i);
  }
  auto topo = std::make_shared<TreeTopology>(TreeTopology::build(nodes, edges));
  const int pick = std::uniform_int_distribution<int>(0, n)(rng);
  return {topo, pick == 0 ? 0 : topo->path_mask(pick)};
}

int check_shatters(int instances, Rng& rng) {
  int mismatches = 0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < instances; ++i) {
    const int which = i % 4;
    if (which == 0 || which == 1) {
      // thresholds / intervals with realizable data
      const double a = u(rng), b = std::min(1.0, a + u(rng) * 0.5);
      AnyVS vs = which == 0 ? AnyVS{ThresholdVS{}} : AnyVS{IntervalVS{}};
      ClassDescriptor cd = which == 0 ? ClassDescriptor{ThresholdsClass{}}
                                      : ClassDescriptor{IntervalsClass{}};
      LabeledSet data;
      for (int j = 0; j < 6; ++j) {
        const double x = u(rng);
        const bool pos = which == 0 ? x <= a : (x >= a && x <= b);
        data.push_back({x, pos ? Label::One : Label::Zero, Origin::Iid});
        vs = restrict_vs(vs, x, pos ? Label::One : Label::Zero);
      }
      std::vector<Point> pts;
      const int k = 1 + static_cast<int>(u(rng) * 2);
      for (int j = 0; j < k; ++j) pts.push_back(u(rng));
      const GridSpec grid{which == 0 ? 1024 : 128};
      if (shatters(vs, pts) != shatters_bruteforce(cd, data, pts, grid)) {
        ++mismatches;
      }
    } else if (which == 2) {
      const int p = 2;
      Vec lo(p), hi(p);
      for (int d = 0; d < p; ++d) {
        lo[d] = u(rng) * 0.5;
        hi[d] = lo[d] + u(rng) * 0.5;
      }
      RectangleVS vs;
      vs.dim = p;
      LabeledSet data;
      for (int j = 0; j < 4; ++j) {
        Vec x(p);
        for (int d = 0; d < p; ++d) x[d] = u(rng);
        bool pos = true;
        for (int d = 0; d < p; ++d) pos = pos && x[d] >= lo[d] && x[d] <= hi[d];
        data.push_back({x, pos ? Label::One : Label::Zero, Origin::Iid});
        vs = vs.restricted(x, pos ? Label::One : Label::Zero);
      }
      std::vector<Point> pts;
      const int k = 1 + static_cast<int>(u(rng) * 3);
      for (int j = 0; j < k; ++j) {
        Vec x(p);
        for (int d = 0; d < p; ++d) x[d] = u(rng);
        pts.push_back(x);
      }
      if (shatters(AnyVS{vs}, pts) !=
          shatters_bruteforce(RectanglesClass{p}, data, pts, GridSpec{64})) {
        ++mismatches;
      }
    } else {
      const int n = 5 + static_cast<int>(u(rng) * 9);
      auto [topo, mask] = random_tree_cli(n, rng);
      TreeClassVS vs = make_tree_class(topo);
      LabeledSet data;
      for (int j = 0; j < 4; ++j) {
        const int id = 1 + static_cast<int>(u(rng) * n);
        const int idx = topo->index(id);
        const Label y = ((mask >> idx) & 1) ? Label::One : Label::Zero;
        data.push_back({TreeNode{id}, y, Origin::Iid});
        vs = vs.restricted(TreeNode{id}, y);
      }
      std::vector<Point> pts;
      std::vector<int> used;
      const int k = 1 + static_cast<int>(u(rng) * 3);
      while (static_cast<int>(pts.size()) < k) {
        const int id = 1 + static_cast<int>(u(rng) * n);
        if (std::find(used.begin(), used.end(), id) == used.end()) {
          used.push_back(id);
          pts.push_back(TreeNode{id});
        }
      }
      if (shatters(AnyVS{vs}, pts) !=
          shatters_bruteforce(TreesClass{topo}, data, pts, GridSpec{64})) {
        ++mismatches;
      }
    }
  }
  return mismatches;
}

int check_gamma(int instances, Rng& rng) {
  int mismatches = 0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < instances; ++i) {
    if (i % 2 == 0) {
      const int n = 4 + static_cast<int>(u(rng) * 6);
      auto [topo, mask] = random_tree_cli(n, rng);
      LabeledSet S;
      const int m = static_cast<int>(u(rng) * 8);
      for (int j = 0; j < m; ++j) {
        const int id = 1 + static_cast<int>(u(rng) * n);
        const int idx = topo->index(id);
        S.push_back({TreeNode{id}, ((mask >> idx) & 1) ? Label::One : Label::Zero,
                     Origin::Iid});
      }
      const auto a = gamma(AnyVS{make_tree_class(topo)}, S, zero_ref());
      const auto b = gamma_bruteforce(TreesClass{topo}, S, zero_ref());
      if (a.count != b.count) ++mismatches;
    } else {
      const double a_star = u(rng);
      LabeledSet S;
      const int m = static_cast<int>(u(rng) * 8);
      for (int j = 0; j < m; ++j) {
        const double x = u(rng);
        S.push_back({x, x <= a_star ? Label::One : Label::Zero, Origin::Iid});
      }
      const auto a = gamma(AnyVS{ThresholdVS{}}, S, zero_ref());
      const auto b = gamma_bruteforce(ThresholdsClass{}, S, zero_ref());
      if (a.count != b.count) ++mismatches;
    }
  }
  return mismatches;
}

int check_rho(int instances, long m, Rng& rng) {
  int failures = 0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < instances; ++i) {
    IntervalVS vs;
    const int nneg = static_cast<int>(u(rng) * 4);
    for (int j = 0; j < nneg; ++j) vs = vs.restricted(u(rng), Label::Zero);
    if (u(rng) < 0.7) {
      IntervalVS t = vs.restricted(u(rng), Label::One);
      if (!t.is_empty()) vs = t;
    }
    const int k = 1 + (i % 2);
    const auto exact = rho_k_exact(AnyVS{vs}, Uniform01{}, k);
    const auto mc = rho_k_mc(AnyVS{vs}, Uniform01{}, k, m, rng);
    const double tol = 4.0 * std::max(mc.stderr_, 1e-4);
    if (std::abs(mc.value - exact.value) > tol) ++failures;
  }
  return failures;
}

int do_oracle(const std::string& name) {
  Rng rng(20240817);
  bool all_ok = true;
  const auto report = [&all_ok](const std::string& what, bool ok,
                                const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << what
              << (detail.empty() ? "" : " (" + detail + ")") << "\n";
    all_ok = all_ok && ok;
  };
  if (name == "shatters" || name == "all") {
    const int mm = check_shatters(400, rng);
    report("shatters vs brute force, 400 instances", mm == 0,
           std::to_string(mm) + " mismatches");
  }
  if (name == "gamma" || name == "all") {
    const int mm = check_gamma(400, rng);
    report("gamma vs brute force, 400 instances", mm == 0,
           std::to_string(mm) + " mismatches");
  }
  if (name == "rho" || name == "all") {
    const int f = check_rho(20, 20000, rng);
    report("rho MC vs exact within 4 stderr, 20 spaces", f == 0,
           std::to_string(f) + " outliers");
  }
  if (name == "cal" || name == "all") {
    const bool ok = std::abs(cal_abstention_expectation(1) - 2.0) < 1e-12 &&
                    std::abs(cal_abstention_expectation(2) - 3.0) < 1e-12;
    report("harmonic abstention bound values", ok, "");
  }
  return all_ok ? 0 : 2;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"sequential prediction with abstention under clean-label injection"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path, out_path, oracle_name, stream_path;
  std::string bounds_learner;
  BoundParams bp;
  std::vector<long> Ts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", ov.seed, "override base seed")
        ->each([&](const std::string&) { ov.has_seed = true; });
    sub->add_option("--jobs", ov.jobs, "worker pool size (env ABSTAIN_LAB_JOBS)");
    sub->add_option("--mc-samples", ov.mc_samples, "Monte Carlo samples per rho query");
    sub->add_option("--out", ov.out_prefix, "output path prefix");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config_file", config_path, "config JSON file");
  run->add_option("--config", config_path, "config JSON file");
  add_common(run);

  CLI::App* sweep = app.add_subcommand("sweep", "grid over T/rate/eta");
  sweep->add_option("config_file", config_path, "config JSON file with a sweep block");
  sweep->add_option("--config", config_path, "config JSON file with a sweep block");
  add_common(sweep);

  CLI::App* bnd = app.add_subcommand("bounds", "evaluate theoretical bound curves");
  bnd->add_option("--learner", bounds_learner, "learner id")->required();
  bnd->add_option("--d", bp.d, "VC dimension");
  bnd->add_option("--p", bp.p, "rectangle dimension");
  bnd->add_option("--eta", bp.eta, "noise bound");
  bnd->add_option("--T", Ts, "horizon grid");
  bnd->add_option("--out", out_path, "bounds CSV path");

  CLI::App* orc = app.add_subcommand("oracle", "randomized oracle cross-checks");
  orc->add_option("check", oracle_name, "shatters|gamma|rho|cal|all")
      ->default_val("all");

  CLI::App* rep = app.add_subcommand("replay", "replay a scripted stream");
  rep->add_option("stream", stream_path, "replay JSON file")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed()) {
      if (config_path.empty()) throw ConfigError("run needs a config file");
      return do_run(load_config(config_path, ov));
    }
    if (sweep->parsed()) {
      if (config_path.empty()) throw ConfigError("sweep needs a config file");
      return do_sweep(config_path, ov);
    }
    if (bnd->parsed()) return do_bounds(bounds_learner, bp, Ts, out_path);
    if (orc->parsed()) return do_oracle(oracle_name);
    if (rep->parsed()) return do_replay(stream_path);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace abstain
