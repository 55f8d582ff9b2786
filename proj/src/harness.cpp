#include "mvreg/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mvreg/baselines.hpp"
#include "mvreg/scene_io.hpp"
#include "mvreg/surrogate.hpp"

namespace mvreg {

namespace fs = std::filesystem;

namespace {

std::string surrogate_name(SurrogateKind k) { return k == SurrogateKind::Oracle ? "oracle" : "kabsch"; }
std::string prior_name(PriorKind k) {
  switch (k) {
    case PriorKind::Perturbed: return "perturbed";
    case PriorKind::Attention: return "attention";
    default: return "baseline";
  }
}

SurrogateKind surrogate_from_name(const std::string& s) {
  if (s == "oracle") return SurrogateKind::Oracle;
  if (s == "kabsch") return SurrogateKind::Kabsch;
  throw std::runtime_error("unknown surrogate kind '" + s + "' (expected oracle|kabsch)");
}

PriorKind prior_from_name(const std::string& s) {
  if (s == "perturbed") return PriorKind::Perturbed;
  if (s == "attention") return PriorKind::Attention;
  if (s == "baseline") return PriorKind::Baseline;
  throw std::runtime_error("unknown prior kind '" + s + "' (expected perturbed|attention|baseline)");
}

std::vector<double> parse_double_list(const std::string& s) {
  std::istringstream in(s);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

std::string format_double_list(const std::vector<double>& v) {
  std::ostringstream out;
  for (std::size_t k = 0; k < v.size(); ++k) out << (k ? " " : "") << format_double(v[k]);
  return out.str();
}

// Short threshold label for CSV headers: 3 -> "3", 0.05 -> "0.05".
std::string threshold_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

ExperimentConfig experiment_config_from_node(const StNode& root) {
  ExperimentConfig cfg;
  if (const StNode* s = root.child("scene")) {
    if (s->has("n_scans")) {
      cfg.scene.n_scans = static_cast<int>(s->get_int("n_scans"));
      cfg.n_scans_min = cfg.n_scans_max = cfg.scene.n_scans;
    }
    if (s->has("n_scans_min")) cfg.n_scans_min = static_cast<int>(s->get_int("n_scans_min"));
    if (s->has("n_scans_max")) cfg.n_scans_max = static_cast<int>(s->get_int("n_scans_max"));
    if (s->has("world_points")) cfg.scene.world_points = static_cast<int>(s->get_int("world_points"));
    if (s->has("room_extent")) cfg.scene.room_extent = s->get_double("room_extent");
    if (s->has("view_radius")) cfg.scene.view_radius = s->get_double("view_radius");
    if (s->has("point_noise")) cfg.scene.point_noise = s->get_double("point_noise");
    if (s->has("overlap_threshold")) cfg.scene.overlap_threshold = s->get_double("overlap_threshold");
  }
  if (const StNode* d = root.child("diffusion")) {
    if (d->has("gamma")) cfg.diffusion.gamma = d->get_double("gamma");
    if (d->has("train_steps")) cfg.diffusion.train_steps = static_cast<int>(d->get_int("train_steps"));
    if (d->has("inference_steps"))
      cfg.diffusion.inference_steps = static_cast<int>(d->get_int("inference_steps"));
    if (d->has("noise_on")) cfg.diffusion.noise_on = d->get_int("noise_on") != 0;
    if (d->has("sample_start")) cfg.diffusion.sample_start = d->get_int("sample_start") != 0;
    if (d->has("eps_rot_scale")) cfg.diffusion.eps_rot_scale = d->get_double("eps_rot_scale");
    if (d->has("eps_trans_scale")) cfg.diffusion.eps_trans_scale = d->get_double("eps_trans_scale");
  }
  if (const StNode* s = root.child("surrogate")) {
    if (s->has("kind")) cfg.surrogate = surrogate_from_name(s->get("kind"));
    if (s->has("noise")) cfg.surrogate_noise = s->get_double("noise");
  }
  if (const StNode* p = root.child("prior")) {
    if (p->has("kind")) cfg.prior = prior_from_name(p->get("kind"));
    if (p->has("rot_deg")) cfg.prior_rot_deg = p->get_double("rot_deg");
    if (p->has("trans_m")) cfg.prior_trans_m = p->get_double("trans_m");
  }
  if (const StNode* l = root.child("loss")) {
    if (l->has("gamma_t")) cfg.loss.gamma_t = l->get_double("gamma_t");
    if (l->has("gamma_p")) cfg.loss.gamma_p = l->get_double("gamma_p");
    if (l->has("huber_beta")) cfg.loss.huber_beta = l->get_double("huber_beta");
  }
  if (const StNode* t = root.child("thresholds")) {
    if (t->has("rotation_deg")) cfg.thresholds.rotation_deg = parse_double_list(t->get("rotation_deg"));
    if (t->has("translation_m"))
      cfg.thresholds.translation_m = parse_double_list(t->get("translation_m"));
    if (t->has("rr_rot_deg")) cfg.thresholds.rr_rot_deg = t->get_double("rr_rot_deg");
    if (t->has("rr_trans_m")) cfg.thresholds.rr_trans_m = t->get_double("rr_trans_m");
  }
  if (const StNode* a = root.child("attention")) {
    if (a->has("layers")) cfg.attention.layers = static_cast<int>(a->get_int("layers"));
    if (a->has("heads")) cfg.attention.heads = static_cast<int>(a->get_int("heads"));
    if (a->has("dim")) cfg.attention.dim = static_cast<int>(a->get_int("dim"));
    if (a->has("seed")) cfg.attention.seed = static_cast<std::uint64_t>(a->get_int("seed"));
    if (a->has("cov_features")) cfg.attention_cov_features = a->get_int("cov_features") != 0;
  }
  if (const StNode* b = root.child("baselines")) {
    if (b->has("enabled")) cfg.run_baselines = b->get_int("enabled") != 0;
    if (b->has("noise")) cfg.baseline_noise = b->get_double("noise");
    if (b->has("outliers")) cfg.baseline_outliers = b->get_double("outliers");
  }
  if (root.has("trials")) cfg.trials = static_cast<int>(root.get_int("trials"));
  if (root.has("seed")) cfg.master_seed = static_cast<std::uint64_t>(root.get_int("seed"));
  if (root.has("jobs")) cfg.jobs = static_cast<int>(root.get_int("jobs"));
  if (root.has("out_dir")) cfg.out_dir = root.get("out_dir");
  return cfg;
}

StNode experiment_config_to_node(const ExperimentConfig& cfg) {
  StNode root;
  root.set_int("trials", cfg.trials);
  root.set_int("seed", static_cast<long long>(cfg.master_seed));
  root.set_int("jobs", cfg.jobs);
  root.set("out_dir", cfg.out_dir);
  StNode& s = root.add_child("scene");
  if (cfg.n_scans_min == cfg.n_scans_max) {
    s.set_int("n_scans", cfg.n_scans_min);
  } else {
    s.set_int("n_scans_min", cfg.n_scans_min);
    s.set_int("n_scans_max", cfg.n_scans_max);
  }
  s.set_int("world_points", cfg.scene.world_points);
  s.set_double("room_extent", cfg.scene.room_extent);
  s.set_double("view_radius", cfg.scene.view_radius);
  s.set_double("point_noise", cfg.scene.point_noise);
  s.set_double("overlap_threshold", cfg.scene.overlap_threshold);
  StNode& d = root.add_child("diffusion");
  d.set_double("gamma", cfg.diffusion.gamma);
  d.set_int("train_steps", cfg.diffusion.train_steps);
  d.set_int("inference_steps", cfg.diffusion.inference_steps);
  d.set_int("noise_on", cfg.diffusion.noise_on ? 1 : 0);
  d.set_int("sample_start", cfg.diffusion.sample_start ? 1 : 0);
  d.set_double("eps_rot_scale", cfg.diffusion.eps_rot_scale);
  d.set_double("eps_trans_scale", cfg.diffusion.eps_trans_scale);
  StNode& su = root.add_child("surrogate");
  su.set("kind", surrogate_name(cfg.surrogate));
  su.set_double("noise", cfg.surrogate_noise);
  StNode& p = root.add_child("prior");
  p.set("kind", prior_name(cfg.prior));
  p.set_double("rot_deg", cfg.prior_rot_deg);
  p.set_double("trans_m", cfg.prior_trans_m);
  StNode& l = root.add_child("loss");
  l.set_double("gamma_t", cfg.loss.gamma_t);
  l.set_double("gamma_p", cfg.loss.gamma_p);
  l.set_double("huber_beta", cfg.loss.huber_beta);
  StNode& t = root.add_child("thresholds");
  t.set("rotation_deg", format_double_list(cfg.thresholds.rotation_deg));
  t.set("translation_m", format_double_list(cfg.thresholds.translation_m));
  t.set_double("rr_rot_deg", cfg.thresholds.rr_rot_deg);
  t.set_double("rr_trans_m", cfg.thresholds.rr_trans_m);
  StNode& a = root.add_child("attention");
  a.set_int("layers", cfg.attention.layers);
  a.set_int("heads", cfg.attention.heads);
  a.set_int("dim", cfg.attention.dim);
  a.set_int("seed", static_cast<long long>(cfg.attention.seed));
  a.set_int("cov_features", cfg.attention_cov_features ? 1 : 0);
  StNode& b = root.add_child("baselines");
  b.set_int("enabled", cfg.run_baselines ? 1 : 0);
  b.set_double("noise", cfg.baseline_noise);
  b.set_double("outliers", cfg.baseline_outliers);
  return root;
}

TrialStreams trial_streams(std::uint64_t master_seed, int trial) {
  RngStream root = RngStream(master_seed).fork(static_cast<std::uint64_t>(trial));
  return TrialStreams{root.fork(0), root.fork(1), root.fork(2),
                      root.fork(3), root.fork(4), root.fork(5)};
}

PoseSet build_prior(const ExperimentConfig& cfg, const Scene& scene, RngStream& rng) {
  switch (cfg.prior) {
    case PriorKind::Perturbed: {
      PoseSet prior(scene.n_scans());
      const double rot = cfg.prior_rot_deg * M_PI / 180.0;
      for (int i = 0; i < scene.n_scans(); ++i)
        prior[i] = compose(sample_random_pose(rng, rot, cfg.prior_trans_m), scene.gt[i]);
      return prior;
    }
    case PriorKind::Attention: {
      const AttentionWeights w = AttentionWeights::seeded(cfg.attention);
      TokenSet tokens;
      tokens.tokens.reserve(scene.n_scans());
      for (int i = 0; i < scene.n_scans(); ++i) {
        const SuperpointSet sp = voxel_downsample_hierarchy(scene.scans[i], 0.2, 5);
        // Coarsest non-trivial level with a few tokens per scan.
        int level = static_cast<int>(sp.levels.size()) - 1;
        while (level > 0 && sp.levels[level].centroids.size() < 4) --level;
        Eigen::MatrixXd feat = sinusoidal_encode(sp.levels[level].centroids, cfg.attention.dim);
        if (cfg.attention_cov_features) {
          const auto eigs = superpoint_covariance_eigenvalues(scene.scans[i], sp, level);
          for (Eigen::Index r = 0; r < feat.rows(); ++r)
            feat.block<1, 3>(r, 0) += eigs[r].transpose();
        }
        tokens.tokens.push_back(std::move(feat));
      }
      return regress_poses(alternating_attention(tokens, w, cfg.attention), w, cfg.attention);
    }
    case PriorKind::Baseline: {
      const PoseGraph g = build_pairwise_graph(scene, GraphMode::OverlapPruned, cfg.baseline_noise,
                                               cfg.baseline_outliers, rng);
      return synchronize(g);
    }
  }
  throw std::logic_error("build_prior: unreachable");
}

namespace {

TrialResult run_trial(const ExperimentConfig& cfg, int trial) {
  TrialResult result;
  result.trial = trial;
  try {
    TrialStreams streams = trial_streams(cfg.master_seed, trial);

    SceneConfig scene_cfg = cfg.scene;
    scene_cfg.n_scans = cfg.n_scans_min == cfg.n_scans_max
                            ? cfg.n_scans_min
                            : static_cast<int>(streams.scan_count.uniform_int(cfg.n_scans_min,
                                                                              cfg.n_scans_max));
    scene_cfg.seed = cfg.master_seed;
    const Scene scene = generate_scene(scene_cfg, streams.scene);

    const PoseSet prior = build_prior(cfg, scene, streams.prior);

    const NoiseSchedule schedule = cosine_schedule(cfg.diffusion.train_steps);
    const OracleSurrogate oracle(cfg.surrogate_noise);
    const KabschSurrogate kabsch;
    const Surrogate& surrogate =
        cfg.surrogate == SurrogateKind::Oracle ? static_cast<const Surrogate&>(oracle)
                                               : static_cast<const Surrogate&>(kabsch);
    const std::vector<PoseSet> trajectory =
        run_denoising(scene, prior, surrogate, schedule, cfg.diffusion, streams.denoise);

    result.methods.push_back({"prior", evaluate(prior, scene.gt, cfg.thresholds)});
    result.methods.push_back({"refined", evaluate(trajectory.back(), scene.gt, cfg.thresholds)});

    if (cfg.run_baselines) {
      const PoseGraph g = build_pairwise_graph(scene, GraphMode::Full, cfg.baseline_noise,
                                               cfg.baseline_outliers, streams.baseline);
      result.methods.push_back({"baseline_sync", evaluate(synchronize(g), scene.gt, cfg.thresholds)});
      result.methods.push_back({"baseline_chain", evaluate(chain_init(g), scene.gt, cfg.thresholds)});
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
    result.methods.clear();
  }
  return result;
}

}  // namespace

void emit_report(const ExperimentReport& results, const ExperimentConfig& cfg) {
  if (results.methods.empty())
    throw std::invalid_argument("emit_report: empty method set, nothing to write");
  fs::create_directories(cfg.out_dir);

  // summary.csv: one row per method per trial.
  {
    std::ofstream out(fs::path(cfg.out_dir) / "summary.csv");
    if (!out) throw std::runtime_error("emit_report: cannot open summary.csv in " + cfg.out_dir);
    out << "method,trial,RE_mean,RE_med,TE_mean,TE_med,RR";
    for (double th : cfg.thresholds.rotation_deg) out << ",ecdf_rot_" << threshold_label(th);
    for (double th : cfg.thresholds.translation_m) out << ",ecdf_trans_" << threshold_label(th);
    out << "\n";
    for (const TrialResult& trial : results.trials) {
      if (trial.failed) continue;
      for (const MethodResult& m : trial.methods) {
        out << m.method << ',' << trial.trial << ',' << format_double(m.report.re_mean) << ','
            << format_double(m.report.re_median) << ',' << format_double(m.report.te_mean) << ','
            << format_double(m.report.te_median) << ',' << format_double(m.report.rr);
        for (double v : m.report.ecdf_rot) out << ',' << format_double(v);
        for (double v : m.report.ecdf_trans) out << ',' << format_double(v);
        out << "\n";
      }
    }
  }

  // ecdf.csv: thresholds/fractions pooled over all trials, per method.
  {
    std::ofstream out(fs::path(cfg.out_dir) / "ecdf.csv");
    if (!out) throw std::runtime_error("emit_report: cannot open ecdf.csv in " + cfg.out_dir);
    out << "method,kind,threshold,fraction\n";
    for (const std::string& method : results.methods) {
      std::vector<double> re, te;
      for (const TrialResult& trial : results.trials) {
        if (trial.failed) continue;
        for (const MethodResult& m : trial.methods) {
          if (m.method != method) continue;
          for (const PairError& p : m.report.pairs) {
            re.push_back(p.re_deg);
            te.push_back(p.te_m);
          }
        }
      }
      const double count = static_cast<double>(re.size());
      auto emit = [&](const char* kind, const std::vector<double>& errs,
                      const std::vector<double>& thresholds) {
        for (double th : thresholds) {
          int hits = 0;
          for (double e : errs)
            if (e <= th) ++hits;
          out << method << ',' << kind << ',' << threshold_label(th) << ','
              << format_double(count > 0 ? hits / count : 0.0) << "\n";
        }
      };
      emit("rotation_deg", re, cfg.thresholds.rotation_deg);
      emit("translation_m", te, cfg.thresholds.translation_m);
    }
  }

  // run_manifest: resolved config + tool version + failure records.
  {
    StNode root;
    root.set("tool", kToolVersion);
    StNode& c = root.add_child("config");
    c = experiment_config_to_node(cfg);
    StNode& status = root.add_child("status");
    int failed = 0;
    for (const TrialResult& trial : results.trials)
      if (trial.failed) ++failed;
    status.set_int("trials_total", static_cast<long long>(results.trials.size()));
    status.set_int("trials_failed", failed);
    for (const TrialResult& trial : results.trials)
      if (trial.failed)
        status.set("failure", "trial " + std::to_string(trial.trial) + ": " + trial.error);
    save_structured_file((fs::path(cfg.out_dir) / "run_manifest").string(), root);
  }
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
  if (cfg.n_scans_min < 2 || cfg.n_scans_max > 50 || cfg.n_scans_min > cfg.n_scans_max)
    throw std::invalid_argument("run_experiment: scan count bounds must satisfy 2 <= min <= max <= 50");
  fs::create_directories(cfg.out_dir);

  ExperimentReport report;
  report.trials.resize(cfg.trials);

  const int jobs = std::max(1, std::min(cfg.jobs, cfg.trials));
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int trial = next.fetch_add(1);
      if (trial >= cfg.trials) break;
      report.trials[trial] = run_trial(cfg, trial);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int failed = 0;
  for (const TrialResult& trial : report.trials) {
    if (trial.failed) {
      ++failed;
      continue;
    }
    for (const MethodResult& m : trial.methods) {
      bool known = false;
      for (const std::string& name : report.methods) known = known || name == m.method;
      if (!known) report.methods.push_back(m.method);
    }
  }
  if (failed == cfg.trials)
    throw std::runtime_error("run_experiment: all " + std::to_string(cfg.trials) +
                             " trials failed; first error: " + report.trials[0].error);

  // Per-trial per-method pair CSVs (deterministic merge by trial index).
  for (const TrialResult& trial : report.trials) {
    if (trial.failed) continue;
    const fs::path dir = fs::path(cfg.out_dir) / ("trial_" + std::to_string(trial.trial));
    fs::create_directories(dir);
    for (const MethodResult& m : trial.methods)
      save_pair_csv((dir / (m.method + "_pairs.csv")).string(), m.report.pairs);
  }

  emit_report(report, cfg);
  return report;
}

}  // namespace mvreg
