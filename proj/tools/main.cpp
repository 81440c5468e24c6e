// Command-line workbench: train a policy, evaluate checkpoints over the
// direction sweep, dump open-loop gait trajectories, generate terrains, and
// re-render reward breakdowns from recorded traces.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration/usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadloco/config.hpp"
#include "quadloco/io.hpp"
#include "quadloco/terrain.hpp"
#include "quadloco/trainer.hpp"

using namespace quadloco;

namespace {

// The evaluation protocol sweeps these six command directions, three seeds
// each, distances capped by the episode's distance cap.
const std::vector<double> kEvalDirections = {0.0,  kPi / 4.0,      -kPi / 4.0,
                                             -kPi, -5.0 * kPi / 4.0, -3.0 * kPi / 4.0};

/// defaults -> config file -> command-line flags, then validated.
RunConfig resolve_config(const std::string& config_path, const nlohmann::json& flags) {
  RunConfig cfg;
  if (!config_path.empty()) {
    try {
      cfg = load_run_config(config_path);
    } catch (const ConfigError&) {
      throw;
    } catch (const IoError& e) {
      // a bad --config path is a usage error, not a runtime failure
      throw ConfigError(e.what());
    }
  }
  if (!flags.empty()) apply_json(flags, cfg, "flags");
  cfg.validate();
  return cfg;
}

int cmd_train(const RunConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  save_run_config(cfg, out_dir + "/config.json");
  std::printf("training: %d iterations, %d envs x %d steps, terrain %s, seed %llu\n",
              cfg.train.iterations, cfg.train.num_envs, cfg.train.segment_length,
              family_name(cfg.env.terrain.family),
              static_cast<unsigned long long>(cfg.seed));
  std::printf("out: %s (config hash %s)\n", out_dir.c_str(),
              config_hash_hex(cfg).c_str());

  const EnvConfig env_cfg = cfg.env;
  Trainer trainer(cfg, [env_cfg](int) { return Environment(env_cfg); });
  trainer.run(out_dir, [&](const IterationMetrics& m) {
    if ((m.iteration + 1) % 10 == 0 || m.iteration == 0)
      std::printf("iter %4d  r_v %.3f  return %8.2f  ep_len %6.1f  kl %.4f  dh %+.3f\n",
                  m.iteration + 1, m.r_v, m.mean_return, m.mean_episode_length,
                  m.kl, m.delta_h_mean);
  });

  const IterationMetrics& last = trainer.history().back();
  std::printf("done: final r_v %.3f, metrics and checkpoints in %s\n", last.r_v,
              out_dir.c_str());
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
             bool zero_policy, std::vector<std::string> terrains,
             const std::string& out_csv, int n_seeds,
             const std::string& trace_out) {
  PolicyNet net(cfg.policy);
  ObsNormalizer norm(cfg.policy.proprio_dim + cfg.policy.extero_dim);
  if (!zero_policy) {
    Checkpoint ck = load_checkpoint(checkpoint_path);
    net = std::move(ck.net);
    norm = std::move(ck.normalizer);
  }
  if (net.config().proprio_dim + net.config().extero_dim != kObservationDim)
    throw ConfigError("checkpoint policy dims do not match the observation layout");

  if (terrains.empty()) terrains.push_back(family_name(cfg.env.terrain.family));

  std::unique_ptr<CsvWriter> csv;
  if (!out_csv.empty())
    csv = std::make_unique<CsvWriter>(
        out_csv, config_hash_hex(cfg),
        std::vector<std::string>{"terrain", "direction", "mean_distance",
                                 "std_distance"});

  std::printf("%-16s %10s %14s %13s\n", "terrain", "direction", "mean_distance",
              "std_distance");
  for (const std::string& terrain : terrains) {
    EnvConfig env_cfg = cfg.env;
    env_cfg.terrain.family = family_from_name(terrain);
    for (std::size_t d = 0; d < kEvalDirections.size(); ++d) {
      env_cfg.episode.theta = kEvalDirections[d];
      double sum = 0.0, sq = 0.0;
      for (int s = 0; s < n_seeds; ++s) {
        Environment env(env_cfg);
        const EvalResult r = evaluate_policy(
            env, net, norm, hash_mix(cfg.seed, d, 101 + static_cast<std::uint64_t>(s)));
        sum += r.distance;
        sq += r.distance * r.distance;
      }
      const double mean = sum / n_seeds;
      const double stdd = std::sqrt(std::max(0.0, sq / n_seeds - mean * mean));
      std::printf("%-16s %10.4f %14.3f %13.3f\n", terrain.c_str(),
                  kEvalDirections[d], mean, stdd);
      if (csv)
        csv->row({terrain, csv_num(kEvalDirections[d]), csv_num(mean), csv_num(stdd)});
    }
  }
  if (csv) std::printf("report written to %s\n", out_csv.c_str());

  // optional episode log of the first sweep cell (first terrain, first
  // direction, first seed); row 0 is the post-reset state, then one row per
  // step, which is exactly the shape the replay subcommand expects
  if (!trace_out.empty()) {
    EnvConfig env_cfg = cfg.env;
    env_cfg.terrain.family = family_from_name(terrains.front());
    env_cfg.episode.theta = kEvalDirections.front();
    Environment env(env_cfg);
    VecX obs = env.reset(hash_mix(cfg.seed, 0, 101));
    VecX hidden = net.initial_hidden();
    std::vector<StepRecord> records = {env.last_record()};
    while (true) {
      const PolicyNet::Output pf = net.forward(norm.normalize(obs), hidden);
      hidden = pf.hidden;
      const Environment::StepResult res = env.step(Vec14(pf.mean));
      records.push_back(env.last_record());
      if (res.done) break;
      obs = res.obs;
    }
    write_trace(trace_out, config_hash_hex(cfg), records);
    std::printf("trace written to %s (%zu steps)\n", trace_out.c_str(),
                records.size() - 1);
  }
  return 0;
}

int cmd_dump_tg(const RunConfig& cfg, const std::string& out_csv, double duration,
                double theta, double delta_f, double dh_start, double dh_end) {
  const TgConfig& tg = cfg.env.tg;
  std::array<LegGeometry, kNumLegs> geom;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    geom[leg] = cfg.env.leg;
    geom[leg].mirror = (leg == 0 || leg == 2) ? 1.0 : -1.0;  // LF, LR are left
  }
  const int steps = std::max(1, static_cast<int>(std::llround(duration / tg.dt)));

  std::vector<std::string> cols = {"time", "phase_lf", "phase_accum", "delta_h", "apex"};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const std::string n = kLegNames[leg];
    for (const char* c : {"phase_", "dl_", "dz_", "target_x_", "target_y_",
                          "target_z_", "q_abduction_", "q_hip_", "q_knee_"})
      cols.push_back(c + n);
  }
  CsvWriter csv(out_csv, config_hash_hex(cfg), cols);

  TgState st{-kPi};  // start of stance
  double accum = 0.0;
  for (int k = 0; k < steps; ++k) {
    TgCommand cmd;
    cmd.theta = theta;
    cmd.delta_f = delta_f;
    cmd.delta_h =
        steps > 1 ? dh_start + (dh_end - dh_start) * k / (steps - 1) : dh_start;

    st = advance_phase(st, tg, cmd);
    accum += (tg.f_base + clamp_delta_f(tg, cmd.delta_f)) * tg.dt;
    const JointReference ref = joint_reference(st, tg, cmd, geom);
    const auto phases = st.leg_phases();

    std::vector<std::string> row = {
        csv_num((k + 1) * tg.dt), csv_num(st.phase_lf), csv_num(accum),
        csv_num(clamp_delta_h(tg, cmd.delta_h)),
        csv_num(tg.lift_height + clamp_delta_h(tg, cmd.delta_h))};
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double q = std::abs(phases[leg] / kPi);
      const FootPosition target = foot_target(phases[leg], tg, cmd);
      const double apex = tg.lift_height + clamp_delta_h(tg, cmd.delta_h);
      row.push_back(csv_num(phases[leg]));
      row.push_back(csv_num(tg_dl(q)));
      row.push_back(csv_num(tg_dz(phases[leg], apex)));
      row.push_back(csv_num(target.x()));
      row.push_back(csv_num(target.y()));
      row.push_back(csv_num(target.z()));
      row.push_back(csv_num(ref.angles[leg].abduction));
      row.push_back(csv_num(ref.angles[leg].hip_pitch));
      row.push_back(csv_num(ref.angles[leg].knee));
    }
    csv.row(row);
  }
  std::printf("wrote %d steps (%.3f s) to %s\n", steps, steps * tg.dt, out_csv.c_str());
  return 0;
}

int cmd_gen_terrain(const RunConfig& cfg, const std::string& out_path,
                    const std::string& csv_path) {
  const TerrainSpec& spec = cfg.env.terrain;
  spec.validate();
  const HeightField field = generate(spec);
  save_terrain(field, out_path);

  nlohmann::json meta;
  meta["tool_version"] = kVersion;
  meta["config_hash"] = config_hash_hex(cfg);
  meta["family"] = family_name(spec.family);
  meta["seed"] = spec.seed;
  meta["extent"] = spec.extent;
  meta["resolution"] = spec.resolution;
  meta["block_size"] = spec.block_size;
  meta["block_height_var"] = spec.block_height_var;
  meta["stair_rise"] = spec.stair_rise;
  meta["stair_run"] = spec.stair_run;
  meta["stone_size"] = spec.stone_size;
  meta["stone_gap"] = spec.stone_gap;
  meta["stone_height_jitter"] = spec.stone_height_jitter;
  meta["pole_diameter"] = spec.pole_diameter;
  meta["pole_spacing"] = spec.pole_spacing;
  meta["pole_height"] = spec.pole_height;
  meta["grid_cells"] = field.nx();
  std::ofstream mf(out_path + ".meta.json");
  if (!mf) throw IoError("cannot write terrain metadata: " + out_path + ".meta.json");
  mf << meta.dump(2) << "\n";

  if (!csv_path.empty()) export_terrain_csv(field, csv_path);
  std::printf("wrote %s (%dx%d cells, %s) + metadata\n", out_path.c_str(), field.nx(),
              field.nx(), family_name(spec.family));
  return 0;
}

int cmd_replay(const RunConfig& cfg, const std::string& trace_path,
               const std::string& terrain_file, const std::string& out_csv) {
  const HeightField field =
      terrain_file.empty() ? generate(cfg.env.terrain) : load_terrain(terrain_file);
  const CsvFile trace = read_csv(trace_path);
  if (trace.rows.size() < 2)
    throw IoError("replay: trace needs at least two rows: " + trace_path);

  auto col = [&](const std::string& name) { return trace.column(name); };
  auto num = [&](std::size_t row, int c) { return std::stod(trace.rows[row][c]); };

  const int c_time = col("time");
  const int c_vel[3] = {col("vel_x"), col("vel_y"), col("vel_z")};
  const int c_quat[4] = {col("quat_w"), col("quat_x"), col("quat_y"), col("quat_z")};
  int c_q[kNumJoints], c_qv[kNumJoints], c_tau[kNumJoints];
  for (int i = 0; i < kNumJoints; ++i) {
    c_q[i] = col("q" + std::to_string(i));
    c_qv[i] = col("qv" + std::to_string(i));
    c_tau[i] = col("tau" + std::to_string(i));
  }
  int c_foot[kNumLegs][3], c_contact[kNumLegs];
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const std::string n = kLegNames[leg];
    c_foot[leg][0] = col("foot_" + n + "_x");
    c_foot[leg][1] = col("foot_" + n + "_y");
    c_foot[leg][2] = col("foot_" + n + "_z");
    c_contact[leg] = col("contact_" + n);
  }
  const int c_dh = col("delta_h");

  const Vec3 command(std::cos(cfg.env.episode.theta), std::sin(cfg.env.episode.theta),
                     0.0);
  // per-leg terrain height at the last stance contact, seeded from the first
  // row; from the second row on the recomputation is exact
  std::array<double, kNumLegs> stance_height{};
  for (int leg = 0; leg < kNumLegs; ++leg)
    stance_height[leg] = field.height_at(num(0, c_foot[leg][0]), num(0, c_foot[leg][1]));
  Vec12 q_prev;
  for (int i = 0; i < kNumJoints; ++i) q_prev[i] = num(0, c_q[i]);

  CsvWriter csv(out_csv, config_hash_hex(cfg),
                {"time", "r_v", "r_vo", "r_tau", "r_terrain", "r_height", "r_smooth",
                 "r_total"});
  RewardConfig rcfg = cfg.env.reward;
  rcfg.tg_lift_height = cfg.env.tg.lift_height;
  RewardBreakdown mean{};
  for (std::size_t row = 1; row < trace.rows.size(); ++row) {
    RewardStepData rd;
    rd.base_velocity = Vec3(num(row, c_vel[0]), num(row, c_vel[1]), num(row, c_vel[2]));
    rd.command = command;
    for (int i = 0; i < kNumJoints; ++i) {
      rd.torque[i] = num(row, c_tau[i]);
      rd.joint_velocity[i] = num(row, c_qv[i]);
      rd.joint_position[i] = num(row, c_q[i]);
    }
    rd.joint_position_prev = q_prev;
    q_prev = rd.joint_position;

    const double qw = num(row, c_quat[0]), qx = num(row, c_quat[1]);
    const double qy = num(row, c_quat[2]), qz = num(row, c_quat[3]);
    const double yaw =
        std::atan2(2.0 * (qw * qz + qx * qy), 1.0 - 2.0 * (qy * qy + qz * qz));

    std::array<Vec3, kNumLegs> feet;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      feet[leg] = Vec3(num(row, c_foot[leg][0]), num(row, c_foot[leg][1]),
                       num(row, c_foot[leg][2]));
      rd.contact[leg] = trace.rows[row][c_contact[leg]] == "1";
      if (rd.contact[leg])
        stance_height[leg] = field.height_at(feet[leg].x(), feet[leg].y());
    }
    rd.extero = sample_rings(field, feet, yaw);
    rd.delta_h = num(row, c_dh);
    // samples store foot height minus terrain height; reconstruct absolute
    // terrain, skip gap cells, and measure the rise over the stance point
    for (int leg = 0; leg < kNumLegs; ++leg) {
      double h_max = -1e9;
      for (double s : rd.extero.samples[leg]) {
        const double h = feet[leg].z() - s;
        if (std::abs(h - field.gap_value()) < 1e-9) continue;
        h_max = std::max(h_max, h);
      }
      rd.local_rise[leg] =
          h_max < -1e8 ? 0.0 : std::max(h_max - stance_height[leg], 0.0);
    }

    const RewardBreakdown b = total_reward(rd, rcfg);
    csv.row({trace.rows[row][c_time], csv_num(b.r_v), csv_num(b.r_vo), csv_num(b.r_tau),
             csv_num(b.r_terrain), csv_num(b.r_height), csv_num(b.r_smooth),
             csv_num(b.total)});
    mean.r_v += b.r_v;
    mean.r_vo += b.r_vo;
    mean.r_tau += b.r_tau;
    mean.r_terrain += b.r_terrain;
    mean.r_height += b.r_height;
    mean.r_smooth += b.r_smooth;
    mean.total += b.total;
  }
  const double n = static_cast<double>(trace.rows.size() - 1);
  std::printf("replayed %zu steps: mean r_v %.3f r_vo %.3f r_tau %.4f r_terrain %.3f "
              "r_height %.4f r_smooth %.3f total %.3f\n",
              trace.rows.size() - 1, mean.r_v / n, mean.r_vo / n, mean.r_tau / n,
              mean.r_terrain / n, mean.r_height / n, mean.r_smooth / n, mean.total / n);
  std::printf("breakdown written to %s\n", out_csv.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadruped locomotion workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // shared config plumbing: every subcommand takes a config file plus leaf
  // flags; flags present on the command line override the file
  std::string config_path;
  std::uint64_t seed = 1;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", seed, "root RNG seed");
  };

  // train
  auto* train = app.add_subcommand("train", "train a policy, write metrics + checkpoints");
  std::string train_out = "runs/train";
  int iters = 0, num_envs = 0, segment = 0, epochs = 0, ckpt_every = 0, max_steps = 0;
  double lr = 0.0, theta = 0.0, entropy_coef = 0.0;
  std::string terrain_family;
  std::uint64_t terrain_seed = 0;
  double stair_rise = 0.0, stone_gap = 0.0;
  add_common(train);
  train->add_option("--out", train_out, "output directory");
  train->add_option("--iters", iters, "training iterations");
  train->add_option("--num-envs", num_envs, "parallel environments");
  train->add_option("--segment-length", segment, "steps per env per iteration");
  train->add_option("--epochs", epochs, "update epochs per batch");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--entropy-coef", entropy_coef, "entropy bonus weight");
  train->add_option("--checkpoint-every", ckpt_every, "checkpoint cadence");
  train->add_option("--terrain", terrain_family, "terrain family");
  train->add_option("--terrain-seed", terrain_seed, "terrain base seed");
  train->add_option("--theta", theta, "command direction, rad");
  train->add_option("--max-steps", max_steps, "episode step cap");
  train->add_option("--stair-rise", stair_rise, "stairs: riser height, m");
  train->add_option("--stone-gap", stone_gap, "stepping stones: gap, m");

  // eval
  auto* eval = app.add_subcommand("eval", "direction-sweep evaluation of a checkpoint");
  std::string ckpt_path, eval_out, eval_trace;
  std::vector<std::string> eval_terrains;
  bool zero_policy = false;
  int eval_seeds = 3;
  add_common(eval);
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file");
  eval->add_flag("--zero-policy", zero_policy, "evaluate the all-zero policy (raw gait)");
  eval->add_option("--terrain", eval_terrains, "terrain families (repeatable)");
  eval->add_option("--out", eval_out, "report CSV path");
  eval->add_option("--trace", eval_trace, "write the first episode's step log here");
  eval->add_option("--eval-seeds", eval_seeds, "seeds per direction")
      ->check(CLI::PositiveNumber);
  eval->add_option("--stair-rise", stair_rise, "stairs: riser height, m");
  eval->add_option("--stone-gap", stone_gap, "stepping stones: gap, m");

  // dump-tg
  auto* dump = app.add_subcommand("dump-tg", "open-loop gait trajectory to CSV");
  std::string dump_out = "tg_trace.csv";
  double duration = 0.0, dump_theta = 0.0, dump_df = 0.0;
  double dh_start = 0.0, dh_end = 0.0;
  add_common(dump);
  dump->add_option("--out", dump_out, "output CSV path");
  dump->add_option("--duration", duration, "seconds (default: one gait cycle)");
  dump->add_option("--theta", dump_theta, "command direction, rad");
  dump->add_option("--delta-f", dump_df, "frequency residual, rad/s");
  dump->add_option("--delta-h", dh_start, "foot-height residual, m");
  dump->add_option("--delta-h-end", dh_end, "sweep delta-h linearly to this value");

  // gen-terrain
  auto* gen = app.add_subcommand("gen-terrain", "generate a heightfield + metadata");
  std::string gen_out = "terrain.qlhf", gen_csv, gen_family;
  double extent = 0.0, resolution = 0.0;
  double block_size = 0.0, block_var = 0.0, stair_run = 0.0, stone_size = 0.0;
  double stone_jitter = 0.0, pole_dia = 0.0, pole_spacing = 0.0, pole_height = 0.0;
  add_common(gen);
  gen->add_option("--out", gen_out, "output heightfield path");
  gen->add_option("--csv", gen_csv, "also export a CSV preview");
  gen->add_option("--family", gen_family, "terrain family");
  gen->add_option("--extent", extent, "side length, m");
  gen->add_option("--resolution", resolution, "cell size, m");
  gen->add_option("--terrain-seed", terrain_seed, "terrain seed");
  gen->add_option("--block-size", block_size, "blocks: tile size, m");
  gen->add_option("--block-height-var", block_var, "blocks: height range, m");
  gen->add_option("--stair-rise", stair_rise, "stairs: riser, m");
  gen->add_option("--stair-run", stair_run, "stairs: tread, m");
  gen->add_option("--stone-size", stone_size, "stones: top size, m");
  gen->add_option("--stone-gap", stone_gap, "stones: gap, m");
  gen->add_option("--stone-height-jitter", stone_jitter, "stones: height jitter, m");
  gen->add_option("--pole-diameter", pole_dia, "poles: diameter, m");
  gen->add_option("--pole-spacing", pole_spacing, "poles: spacing, m");
  gen->add_option("--pole-height", pole_height, "poles: top height, m");

  // replay
  auto* replay = app.add_subcommand("replay", "recompute reward breakdown from a trace");
  std::string trace_path, replay_terrain, replay_out = "replay.csv";
  double replay_theta = 0.0;
  add_common(replay);
  replay->add_option("--trace", trace_path, "episode trace CSV")->required();
  replay->add_option("--terrain-file", replay_terrain,
                     "heightfield file (default: generate from config)");
  replay->add_option("--out", replay_out, "breakdown CSV path");
  replay->add_option("--theta", replay_theta, "command direction, rad");

  try {
    app.parse(argc, argv);
    CLI::App* active = app.get_subcommands().front();

    // flags the user actually passed become the highest-precedence patch
    nlohmann::json patch;
    auto flag = [&](const char* name) {
      const CLI::Option* o = active->get_option_no_throw(name);
      return o != nullptr && o->count() > 0;
    };
    if (flag("--seed")) patch["seed"] = seed;
    if (*train) {
      if (flag("--iters")) patch["train"]["iterations"] = iters;
      if (flag("--num-envs")) patch["train"]["num_envs"] = num_envs;
      if (flag("--segment-length")) patch["train"]["segment_length"] = segment;
      if (flag("--epochs")) patch["train"]["epochs"] = epochs;
      if (flag("--lr")) patch["train"]["learning_rate"] = lr;
      if (flag("--entropy-coef")) patch["train"]["entropy_coef"] = entropy_coef;
      if (flag("--checkpoint-every")) patch["train"]["checkpoint_every"] = ckpt_every;
      if (flag("--terrain")) patch["env"]["terrain"]["family"] = terrain_family;
      if (flag("--theta")) patch["env"]["episode"]["theta"] = theta;
      if (flag("--max-steps")) patch["env"]["episode"]["max_steps"] = max_steps;
    }
    if (*gen) {
      if (flag("--family")) patch["env"]["terrain"]["family"] = gen_family;
      if (flag("--extent")) patch["env"]["terrain"]["extent"] = extent;
      if (flag("--resolution")) patch["env"]["terrain"]["resolution"] = resolution;
      if (flag("--block-size")) patch["env"]["terrain"]["block_size"] = block_size;
      if (flag("--block-height-var"))
        patch["env"]["terrain"]["block_height_var"] = block_var;
      if (flag("--stair-run")) patch["env"]["terrain"]["stair_run"] = stair_run;
      if (flag("--stone-size")) patch["env"]["terrain"]["stone_size"] = stone_size;
      if (flag("--stone-height-jitter"))
        patch["env"]["terrain"]["stone_height_jitter"] = stone_jitter;
      if (flag("--pole-diameter")) patch["env"]["terrain"]["pole_diameter"] = pole_dia;
      if (flag("--pole-spacing")) patch["env"]["terrain"]["pole_spacing"] = pole_spacing;
      if (flag("--pole-height")) patch["env"]["terrain"]["pole_height"] = pole_height;
    }
    if (*replay && flag("--theta")) patch["env"]["episode"]["theta"] = replay_theta;
    if (flag("--terrain-seed")) patch["env"]["terrain"]["seed"] = terrain_seed;
    if (flag("--stair-rise")) patch["env"]["terrain"]["stair_rise"] = stair_rise;
    if (flag("--stone-gap")) patch["env"]["terrain"]["stone_gap"] = stone_gap;

    const RunConfig cfg = resolve_config(config_path, patch);
    if (*train) return cmd_train(cfg, train_out);
    if (*eval) {
      if (!zero_policy && ckpt_path.empty())
        throw ConfigError("eval: pass --checkpoint or --zero-policy");
      return cmd_eval(cfg, ckpt_path, zero_policy, eval_terrains, eval_out, eval_seeds,
                      eval_trace);
    }
    if (*dump) {
      if (duration <= 0.0) duration = 2.0 * kPi / cfg.env.tg.f_base;
      if (!active->count("--delta-h-end")) dh_end = dh_start;
      return cmd_dump_tg(cfg, dump_out, duration, dump_theta, dump_df, dh_start, dh_end);
    }
    if (*gen) return cmd_gen_terrain(cfg, gen_out, gen_csv);
    if (*replay) return cmd_replay(cfg, trace_path, replay_terrain, replay_out);
    return 2;  // unreachable: require_subcommand
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
