// Command-line harness for the multiview registration toolkit.
//
// Subcommands: gen, denoise, baseline, eval, vlb, run. All randomness flows
// from explicit seeds; identical invocations produce identical outputs.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "mvreg/baselines.hpp"
#include "mvreg/diffusion.hpp"
#include "mvreg/harness.hpp"
#include "mvreg/scene_io.hpp"
#include "mvreg/structured_text.hpp"
#include "mvreg/surrogate.hpp"

namespace fs = std::filesystem;
using namespace mvreg;

namespace {

void print_eval(const std::string& label, const EvalReport& rep) {
  std::printf("%-16s RE mean/med %10.6f / %10.6f deg   TE mean/med %10.6f / %10.6f m   RR %.3f\n",
              label.c_str(), rep.re_mean, rep.re_median, rep.te_mean, rep.te_median, rep.rr);
}

void write_eval_outputs(const std::string& out_dir, const std::string& method,
                        const EvalReport& rep, const MetricThresholds& th) {
  fs::create_directories(out_dir);
  save_pair_csv((fs::path(out_dir) / (method + "_pairs.csv")).string(), rep.pairs);
  std::ofstream out(fs::path(out_dir) / (method + "_summary.csv"));
  out << "RE_mean,RE_med,TE_mean,TE_med,RR";
  for (double t : th.rotation_deg) out << ",ecdf_rot_" << t;
  for (double t : th.translation_m) out << ",ecdf_trans_" << t;
  out << "\n";
  out << format_double(rep.re_mean) << ',' << format_double(rep.re_median) << ','
      << format_double(rep.te_mean) << ',' << format_double(rep.te_median) << ','
      << format_double(rep.rr);
  for (double v : rep.ecdf_rot) out << ',' << format_double(v);
  for (double v : rep.ecdf_trans) out << ',' << format_double(v);
  out << "\n";
}

std::unique_ptr<Surrogate> make_surrogate(const std::string& kind, double noise) {
  if (kind == "oracle") return std::make_unique<OracleSurrogate>(noise);
  if (kind == "kabsch") return std::make_unique<KabschSurrogate>();
  throw CLI::ValidationError("--surrogate", "expected oracle|kabsch");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiview rigid registration with prior-aware SE(3)^N diffusion refinement"};
  app.require_subcommand(1);

  // ---- gen ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a synthetic scene directory");
  std::string gen_out = "scene";
  SceneConfig gen_cfg;
  std::uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "Output scene directory");
  gen->add_option("--seed", gen_seed, "Generation seed");
  gen->add_option("--n", gen_cfg.n_scans, "Number of scans (2..50)");
  gen->add_option("--world-points", gen_cfg.world_points, "World point count");
  gen->add_option("--extent", gen_cfg.room_extent, "Room extent, meters");
  gen->add_option("--radius", gen_cfg.view_radius, "View radius, meters");
  gen->add_option("--noise", gen_cfg.point_noise, "Point noise sigma, meters");
  gen->add_option("--overlap-threshold", gen_cfg.overlap_threshold, "Overlap edge threshold");

  // ---- denoise ------------------------------------------------------------
  auto* denoise = app.add_subcommand("denoise", "Diffusion-refine a prior on a scene directory");
  std::string dn_scene, dn_out = "out";
  std::uint64_t dn_seed = 0;
  std::string dn_surrogate = "kabsch", dn_prior = "perturbed";
  double dn_surrogate_noise = 0.0, dn_prior_rot = 20.0, dn_prior_trans = 0.5;
  DiffusionConfig dn_cfg;
  bool dn_noise_off = false;
  denoise->add_option("--scene", dn_scene, "Scene directory")->required();
  denoise->add_option("--out", dn_out, "Output directory");
  denoise->add_option("--seed", dn_seed, "Seed for prior + chain noise");
  denoise->add_option("--surrogate", dn_surrogate, "Surrogate model: oracle|kabsch");
  denoise->add_option("--surrogate-noise", dn_surrogate_noise, "Oracle residual noise scale");
  denoise->add_option("--prior", dn_prior, "Prior kind: perturbed|attention|baseline");
  denoise->add_option("--prior-rot-deg", dn_prior_rot, "Perturbed prior rotation scale, degrees");
  denoise->add_option("--prior-trans", dn_prior_trans, "Perturbed prior translation scale, m");
  denoise->add_option("--train-steps", dn_cfg.train_steps, "Schedule length T");
  denoise->add_option("--steps", dn_cfg.inference_steps, "Inference steps K");
  denoise->add_option("--gamma", dn_cfg.gamma, "Forward noise weight gamma");
  denoise->add_flag("--noise-off", dn_noise_off, "Disable stochastic reverse-step noise");
  denoise->add_flag("--sample-start", dn_cfg.sample_start, "Sample the t=T chain state");

  // ---- baseline -----------------------------------------------------------
  auto* baseline = app.add_subcommand("baseline", "Pairwise-then-synchronize baselines");
  std::string bl_scene, bl_out = "out", bl_mode = "full", bl_method = "both";
  std::uint64_t bl_seed = 0;
  double bl_noise = 0.0, bl_outliers = 0.0;
  baseline->add_option("--scene", bl_scene, "Scene directory")->required();
  baseline->add_option("--out", bl_out, "Output directory");
  baseline->add_option("--seed", bl_seed, "Edge perturbation seed");
  baseline->add_option("--mode", bl_mode, "Pair selection: full|pruned");
  baseline->add_option("--method", bl_method, "sync|chain|both");
  baseline->add_option("--edge-noise", bl_noise, "Edge noise twist scale");
  baseline->add_option("--outliers", bl_outliers, "Outlier edge probability");

  // ---- eval ---------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a predicted pose file against ground truth");
  std::string ev_pred, ev_gt, ev_out;
  eval_cmd->add_option("--pred", ev_pred, "Predicted pose file")->required();
  eval_cmd->add_option("--gt", ev_gt, "Ground-truth pose file")->required();
  eval_cmd->add_option("--out", ev_out, "Optional output directory for CSV reports");

  // ---- vlb ----------------------------------------------------------------
  auto* vlb = app.add_subcommand("vlb", "Variational-lower-bound diagnostics for a scene");
  std::string vl_scene, vl_out = "out";
  std::uint64_t vl_seed = 0;
  std::string vl_surrogate = "oracle";
  double vl_surrogate_noise = 0.0, vl_prior_rot = 20.0, vl_prior_trans = 0.5;
  int vl_train_steps = 200;
  double vl_gamma = 0.1;
  std::string vl_schedule_csv;
  vlb->add_option("--scene", vl_scene, "Scene directory")->required();
  vlb->add_option("--out", vl_out, "Output directory");
  vlb->add_option("--seed", vl_seed, "Sampling seed");
  vlb->add_option("--surrogate", vl_surrogate, "Surrogate model: oracle|kabsch");
  vlb->add_option("--surrogate-noise", vl_surrogate_noise, "Oracle residual noise scale");
  vlb->add_option("--prior-rot-deg", vl_prior_rot, "Prior rotation scale, degrees");
  vlb->add_option("--prior-trans", vl_prior_trans, "Prior translation scale, m");
  vlb->add_option("--train-steps", vl_train_steps, "Schedule length T");
  vlb->add_option("--gamma", vl_gamma, "Forward noise weight gamma");
  vlb->add_option("--schedule-csv", vl_schedule_csv, "Also dump the noise schedule to this path");

  // ---- run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Full experiment from a config file");
  std::string run_config;
  std::uint64_t run_seed = 0;
  int run_trials = 0, run_jobs = 0;
  std::string run_out, run_surrogate, run_prior;
  bool run_noise_off = false;
  run->add_option("--config", run_config, "Structured-text config file");
  run->add_option("--seed", run_seed, "Master seed (overrides config)");
  run->add_option("--trials", run_trials, "Trial count (overrides config)");
  run->add_option("--jobs", run_jobs, "Parallel trial workers (overrides config)");
  run->add_option("--out", run_out, "Output directory (overrides config)");
  run->add_option("--surrogate", run_surrogate, "oracle|kabsch (overrides config)");
  run->add_option("--prior", run_prior, "perturbed|attention|baseline (overrides config)");
  run->add_flag("--noise-off", run_noise_off, "Disable stochastic reverse-step noise");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      gen_cfg.seed = gen_seed;
      RngStream rng(gen_seed);
      const Scene scene = generate_scene(gen_cfg, rng);
      save_scene(gen_out, scene);
      double mean_overlap = 0;
      int pairs = 0;
      for (int i = 0; i < scene.n_scans(); ++i)
        for (int j = 0; j < scene.n_scans(); ++j)
          if (i != j) {
            mean_overlap += scene.overlap(i, j);
            ++pairs;
          }
      std::printf("wrote %s: %d scans, %d world points, mean pairwise overlap %.3f\n",
                  gen_out.c_str(), scene.n_scans(), static_cast<int>(scene.world.size()),
                  pairs ? mean_overlap / pairs : 1.0);
    } else if (*denoise) {
      const Scene scene = load_scene(dn_scene);
      dn_cfg.noise_on = !dn_noise_off;
      dn_cfg.seed = dn_seed;

      ExperimentConfig pcfg;
      pcfg.prior = dn_prior == "attention" ? PriorKind::Attention
                   : dn_prior == "baseline" ? PriorKind::Baseline
                                            : PriorKind::Perturbed;
      pcfg.prior_rot_deg = dn_prior_rot;
      pcfg.prior_trans_m = dn_prior_trans;
      RngStream root(dn_seed);
      RngStream prior_rng = root.fork(1);
      RngStream chain_rng = root.fork(2);
      const PoseSet prior = build_prior(pcfg, scene, prior_rng);

      const auto surrogate = make_surrogate(dn_surrogate, dn_surrogate_noise);
      const NoiseSchedule schedule = cosine_schedule(dn_cfg.train_steps);
      const auto trajectory = run_denoising(scene, prior, *surrogate, schedule, dn_cfg, chain_rng);

      fs::create_directories(dn_out);
      save_pose_file((fs::path(dn_out) / "prior_poses.txt").string(), prior);
      save_pose_file((fs::path(dn_out) / "refined_poses.txt").string(), trajectory.back());
      const MetricThresholds th;
      const EvalReport prior_rep = evaluate(prior, scene.gt, th);
      const EvalReport refined_rep = evaluate(trajectory.back(), scene.gt, th);
      write_eval_outputs(dn_out, "prior", prior_rep, th);
      write_eval_outputs(dn_out, "refined", refined_rep, th);
      print_eval("prior", prior_rep);
      print_eval("refined", refined_rep);
    } else if (*baseline) {
      const Scene scene = load_scene(bl_scene);
      RngStream rng(bl_seed);
      const GraphMode mode = bl_mode == "pruned" ? GraphMode::OverlapPruned : GraphMode::Full;
      const PoseGraph g = build_pairwise_graph(scene, mode, bl_noise, bl_outliers, rng);
      fs::create_directories(bl_out);

      // Graph dump: CSV (i, j, weight, 12 pose numbers).
      {
        std::ofstream out(fs::path(bl_out) / "graph.csv");
        out << "i,j,weight,pose\n";
        for (const auto& e : g.edges) {
          std::string pose = pose_to_line(e.rel);
          std::replace(pose.begin(), pose.end(), ' ', ';');
          out << e.i << ',' << e.j << ',' << format_double(e.weight) << ',' << pose << "\n";
        }
      }

      const MetricThresholds th;
      if (bl_method == "sync" || bl_method == "both") {
        const PoseSet synced = synchronize(g);
        save_pose_file((fs::path(bl_out) / "sync_poses.txt").string(), synced);
        const EvalReport rep = evaluate(synced, scene.gt, th);
        write_eval_outputs(bl_out, "baseline_sync", rep, th);
        print_eval("baseline_sync", rep);
      }
      if (bl_method == "chain" || bl_method == "both") {
        const PoseSet chained = chain_init(g);
        save_pose_file((fs::path(bl_out) / "chain_poses.txt").string(), chained);
        const EvalReport rep = evaluate(chained, scene.gt, th);
        write_eval_outputs(bl_out, "baseline_chain", rep, th);
        print_eval("baseline_chain", rep);
      }
    } else if (*eval_cmd) {
      const PoseSet pred = load_pose_file(ev_pred);
      const PoseSet gt = load_pose_file(ev_gt);
      const MetricThresholds th;
      const EvalReport rep = evaluate(pred, gt, th);
      print_eval("eval", rep);
      std::printf("ecdf rotation:");
      for (std::size_t k = 0; k < th.rotation_deg.size(); ++k)
        std::printf("  %g deg: %.3f", th.rotation_deg[k], rep.ecdf_rot[k]);
      std::printf("\necdf translation:");
      for (std::size_t k = 0; k < th.translation_m.size(); ++k)
        std::printf("  %g m: %.3f", th.translation_m[k], rep.ecdf_trans[k]);
      std::printf("\n");
      if (!ev_out.empty()) write_eval_outputs(ev_out, "eval", rep, th);
    } else if (*vlb) {
      const Scene scene = load_scene(vl_scene);
      RngStream root(vl_seed);
      RngStream prior_rng = root.fork(1);
      RngStream sample_rng = root.fork(2);

      ExperimentConfig pcfg;
      pcfg.prior_rot_deg = vl_prior_rot;
      pcfg.prior_trans_m = vl_prior_trans;
      const PoseSet prior = build_prior(pcfg, scene, prior_rng);

      const auto surrogate = make_surrogate(vl_surrogate, vl_surrogate_noise);
      const NoiseSchedule schedule = cosine_schedule(vl_train_steps);
      DiffusionConfig dcfg;
      dcfg.train_steps = vl_train_steps;
      dcfg.gamma = vl_gamma;
      const VlbTerms terms =
          vlb_terms(scene, scene.gt, prior, *surrogate, schedule, dcfg, sample_rng);

      fs::create_directories(vl_out);
      std::ofstream out(fs::path(vl_out) / "vlb.csv");
      out << "term,t,value\n";
      out << "residual,1," << format_double(terms.residual_term) << "\n";
      out << "prior_matching," << vl_train_steps << ','
          << format_double(terms.prior_matching_term) << "\n";
      for (std::size_t k = 0; k < terms.denoising_terms.size(); ++k)
        out << "denoising," << (k + 2) << ',' << format_double(terms.denoising_terms[k]) << "\n";
      if (!vl_schedule_csv.empty()) write_schedule_csv(schedule, vl_schedule_csv);

      double mean_kl = 0;
      for (double v : terms.denoising_terms) mean_kl += v;
      if (!terms.denoising_terms.empty()) mean_kl /= terms.denoising_terms.size();
      std::printf("residual %.6g  prior_matching %.6g  mean denoising KL %.6g\n",
                  terms.residual_term, terms.prior_matching_term, mean_kl);
    } else if (*run) {
      ExperimentConfig cfg;
      if (!run_config.empty()) cfg = experiment_config_from_node(load_structured_file(run_config));
      if (run->count("--seed")) cfg.master_seed = run_seed;
      if (run->count("--trials")) cfg.trials = run_trials;
      if (run->count("--jobs")) cfg.jobs = run_jobs;
      if (run->count("--out")) cfg.out_dir = run_out;
      if (run->count("--surrogate"))
        cfg.surrogate = run_surrogate == "oracle" ? SurrogateKind::Oracle : SurrogateKind::Kabsch;
      if (run->count("--prior"))
        cfg.prior = run_prior == "attention" ? PriorKind::Attention
                    : run_prior == "baseline" ? PriorKind::Baseline
                                              : PriorKind::Perturbed;
      if (run_noise_off) cfg.diffusion.noise_on = false;

      const ExperimentReport report = run_experiment(cfg);
      int ok = 0;
      for (const auto& trial : report.trials)
        if (!trial.failed) ++ok;
      std::printf("completed %d/%d trials; reports in %s\n", ok, cfg.trials, cfg.out_dir.c_str());
      for (const auto& trial : report.trials)
        if (trial.failed)
          std::fprintf(stderr, "trial %d failed: %s\n", trial.trial, trial.error.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
