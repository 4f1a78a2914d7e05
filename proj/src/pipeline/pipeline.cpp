#include "physgen/pipeline/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

#include "physgen/ball/render.hpp"
#include "physgen/core/parallel.hpp"
#include "physgen/core/rng.hpp"
#include "physgen/scene/raster.hpp"
#include "physgen/sound/render.hpp"

namespace physgen::pipeline {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::kSound: return "sound";
    case TaskKind::kLens: return "lens";
    case TaskKind::kBall: return "ball";
  }
  return "unknown";
}

TaskKind parse_task_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "sound") return TaskKind::kSound;
  if (s == "lens") return TaskKind::kLens;
  if (s == "ball") return TaskKind::kBall;
  throw ValidationError("unknown task '" + std::string(name) + "' (expected sound, lens or ball)");
}

std::vector<scene::LocationVerdict> sample_locations(const std::vector<scene::UrbanScene>& candidates,
                                                     const scene::SamplingCriteria& criteria) {
  criteria.validate();
  std::vector<scene::LocationVerdict> out;
  out.reserve(candidates.size());
  for (const scene::UrbanScene& s : candidates) out.push_back(scene::check_location(s, criteria));
  return out;
}

namespace {

ojson vec_json(Vec2 v) { return ojson::array({v.x, v.y}); }
Vec2 json_vec(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

ojson state_json(const ball::BallState& s) {
  return {{"t", s.t},         {"pos", vec_json(s.pos)},   {"vel", vec_json(s.vel)},
          {"phi", s.phi},     {"omega", s.omega},         {"phase", std::string(ball::to_string(s.phase))}};
}

ball::BallState json_state(const nlohmann::json& j) {
  ball::BallState s;
  s.t = j.at("t").get<double>();
  s.pos = json_vec(j.at("pos"));
  s.vel = json_vec(j.at("vel"));
  s.phi = j.at("phi").get<double>();
  s.omega = j.at("omega").get<double>();
  s.phase = ball::parse_phase(j.at("phase").get<std::string>());
  return s;
}

ojson ball_cfg_json(const ball::BallSimConfig& c) {
  return {{"mode", std::string(ball::to_string(c.mode))},
          {"slope_beta", c.slope_beta},
          {"start_height", c.start_height},
          {"start_x", c.start_x},
          {"dt_frame", c.dt_frame},
          {"radius_px", c.radius_px},
          {"g", c.g},
          {"mass", c.mass},
          {"spring_c", c.spring_c},
          {"damper_d", c.damper_d},
          {"friction_mu", c.friction_mu},
          {"scale", c.scale},
          {"background_seed", c.background_seed},
          {"frame_size", c.frame_size},
          {"ground_anchor_px", vec_json(c.ground_anchor_px)}};
}

ball::BallSimConfig json_ball_cfg(const nlohmann::json& j) {
  ball::BallSimConfig c;
  c.mode = ball::parse_mode(j.at("mode").get<std::string>());
  c.slope_beta = j.at("slope_beta").get<double>();
  c.start_height = j.at("start_height").get<double>();
  c.start_x = j.at("start_x").get<double>();
  c.dt_frame = j.at("dt_frame").get<double>();
  c.radius_px = j.at("radius_px").get<double>();
  c.g = j.at("g").get<double>();
  c.mass = j.at("mass").get<double>();
  c.spring_c = j.at("spring_c").get<double>();
  c.damper_d = j.at("damper_d").get<double>();
  c.friction_mu = j.at("friction_mu").get<double>();
  c.scale = j.at("scale").get<double>();
  c.background_seed = j.at("background_seed").get<std::uint64_t>();
  c.frame_size = j.at("frame_size").get<int>();
  c.ground_anchor_px = json_vec(j.at("ground_anchor_px"));
  return c;
}

ojson sound_task_json(const sound::SoundTask& t) {
  return {{"variant", std::string(sound::to_string(t.variant))},
          {"source_level_db", t.source_level_db},
          {"frequency_hz", t.frequency_hz},
          {"speed_of_sound_m_s", t.speed_of_sound_m_s},
          {"c_dprime", t.c_dprime},
          {"alpha_vert", t.alpha_vert},
          {"reflection_order", t.reflection_order},
          {"alpha_air_db_per_km", t.alpha_air_db_per_km}};
}

std::string sample_id(TaskKind kind, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06zu", index);
  return std::string(to_string(kind)) + buf;
}

struct SampleFiles {
  fs::path dir;  // relative to the dataset root
  std::string id;
  fs::path input() const { return dir / (id + "_in.png"); }
  fs::path target() const { return dir / (id + "_out.png"); }
  fs::path params() const { return dir / (id + ".json"); }
  fs::path landmarks_in() const { return dir / (id + "_in.csv"); }
  fs::path landmarks_out() const { return dir / (id + "_out.csv"); }
};

void generate_sound(const SoundOptions& opt, std::uint64_t seed, std::size_t index, const fs::path& root,
                    const SampleFiles& f) {
  const scene::UrbanScene raw =
      opt.scenes.empty() ? scene::procedural_scene(seed, opt.criteria) : opt.scenes[index % opt.scenes.size()];
  const scene::UrbanScene sc = scene::normalized(raw);
  if (!opt.scenes.empty()) {
    const scene::LocationVerdict v = scene::check_location(sc, opt.criteria);
    if (!v.accepted) throw ValidationError("location rejected: " + v.reason);
  }
  const scene::OccupancyMask mask = scene::rasterize_scene(sc, opt.resolution);
  const sound::PropagationMap map = sound::simulate_map(opt.task, sc, opt.resolution, 1);
  write_png(root / f.input(), scene::mask_to_image(mask));
  write_png(root / f.target(), map.raster);
  ojson j = {{"sample_id", f.id},
             {"task", "sound"},
             {"seed", seed},
             {"resolution", opt.resolution},
             {"extent_m", sc.extent_m},
             {"source", vec_json(sc.source)},
             {"buildings", sc.buildings.size()},
             {"full_scale_db", map.full_scale_db},
             {"sound_task", sound_task_json(opt.task)}};
  write_text_file(root / f.params(), j.dump(2) + "\n");
}

void generate_lens(const LensOptions& opt, std::uint64_t seed, const fs::path& root, const SampleFiles& f) {
  Rng rng(derive_seed(seed, 0x1e25));
  lens::LensParams p = lens::LensParams::for_image(opt.size, opt.size);
  p.p1 = rng.uniform(-opt.tangential_bound, opt.tangential_bound);
  p.p2 = rng.uniform(-opt.tangential_bound, opt.tangential_bound);
  if (opt.radial_bound > 0.0) p.k1 = rng.uniform(-opt.radial_bound, opt.radial_bound);
  const FaceSample face = synthetic_face(seed, opt.size);
  const lens::LandmarkSet moved = lens::transform_landmarks(face.landmarks, p);
  write_png(root / f.input(), face.image);
  write_png(root / f.target(), lens::distort_image(face.image, p, 1));
  write_text_file(root / f.landmarks_in(), lens::landmarks_to_csv(face.landmarks));
  write_text_file(root / f.landmarks_out(), lens::landmarks_to_csv(moved));
  ojson j = {{"sample_id", f.id},
             {"task", "lens"},
             {"seed", seed},
             {"size", opt.size},
             {"lens", ojson::parse(lens::params_to_json(p))},
             {"landmarks_in", f.landmarks_in().filename().string()},
             {"landmarks_out", f.landmarks_out().filename().string()}};
  write_text_file(root / f.params(), j.dump(2) + "\n");
}

void generate_ball(const BallOptions& opt, std::uint64_t seed, std::size_t index, const fs::path& root,
                   const SampleFiles& f) {
  const BallSampleParams bp = sample_ball_params(seed, index, opt);
  write_png(root / f.input(), ball::render_frame(bp.input, bp.cfg).image);
  write_png(root / f.target(), ball::render_frame(bp.target, bp.cfg).image);
  ojson j = {{"sample_id", f.id},           {"task", "ball"},
             {"seed", seed},                {"config", ball_cfg_json(bp.cfg)},
             {"t0", bp.t0},                 {"input_state", state_json(bp.input)},
             {"target_state", state_json(bp.target)}};
  write_text_file(root / f.params(), j.dump(2) + "\n");
}

}  // namespace

BallSampleParams sample_ball_params(std::uint64_t seed, std::size_t index, const BallOptions& opt) {
  Rng rng(derive_seed(seed, 0xba11));
  constexpr double deg = std::numbers::pi / 180.0;
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    BallSampleParams bp;
    bp.cfg = opt.base;
    bp.cfg.mode = opt.mode.value_or(index % 2 == 0 ? ball::Mode::kBouncing : ball::Mode::kRolling);
    bp.cfg.slope_beta = rng.uniform(opt.beta_min_deg, opt.beta_max_deg) * deg;
    bp.cfg.start_height =
        bp.cfg.mode == ball::Mode::kBouncing ? rng.uniform(opt.height_min_m, opt.height_max_m) : 0.0;
    bp.cfg.dt_frame = rng.uniform(opt.dt_min_s, opt.dt_max_s);
    bp.cfg.start_x = rng.uniform(-1.1, 0.3);
    bp.cfg.background_seed = seed;
    bp.t0 = rng.uniform(0.0, opt.t0_max_s);
    const ball::Trajectory traj(bp.cfg, bp.t0 + bp.cfg.dt_frame);
    bp.input = traj.state_at(bp.t0);
    bp.target = traj.state_at(bp.t0 + bp.cfg.dt_frame);
    if (ball::ball_in_frame(bp.input, bp.cfg) && ball::ball_in_frame(bp.target, bp.cfg)) return bp;
  }
  throw ValidationError("no ball configuration with both frames in view after " + std::to_string(opt.max_attempts) +
                        " attempts");
}

Manifest generate_dataset(const GenerationSpec& spec, std::size_t n, const fs::path& out_dir, std::uint64_t seed,
                          unsigned workers) {
  if (n < 1) throw ValidationError("generate_dataset needs n >= 1");
  if (spec.kind == TaskKind::kSound) sound::validate(spec.sound.task);
  const std::string task(to_string(spec.kind));

  Manifest manifest;
  for (std::size_t i = 0; i < n; ++i) {
    ManifestRow r;
    r.sample_id = sample_id(spec.kind, i);
    r.task = task;
    r.seed = derive_seed(seed, i);
    manifest.rows.push_back(r);
  }
  manifest = split_manifest(std::move(manifest));
  for (const char* split : kSplitNames) fs::create_directories(out_dir / task / split);

  parallel_for(n, workers, [&](std::size_t i) {
    ManifestRow& r = manifest.rows[i];
    const SampleFiles f{fs::path(task) / r.split, r.sample_id};
    try {
      switch (spec.kind) {
        case TaskKind::kSound: generate_sound(spec.sound, r.seed, i, out_dir, f); break;
        case TaskKind::kLens: generate_lens(spec.lens, r.seed, out_dir, f); break;
        case TaskKind::kBall: generate_ball(spec.ball, r.seed, i, out_dir, f); break;
      }
      r.input_path = f.input().generic_string();
      r.target_path = f.target().generic_string();
      r.params_json_path = f.params().generic_string();
    } catch (const std::exception& e) {
      r.status = std::string("error: ") + e.what();
      std::error_code ec;
      for (const fs::path& p : {f.input(), f.target(), f.params(), f.landmarks_in(), f.landmarks_out()})
        fs::remove(out_dir / p, ec);
    }
  });
  manifest.write(out_dir / "manifest.csv");
  return manifest;
}

namespace {

std::optional<fs::path> find_prediction(const fs::path& pred_dir,
                                        std::initializer_list<std::string> names) {
  for (const std::string& name : names) {
    if (name.empty()) continue;
    const fs::path p = pred_dir / name;
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

metrics::SampleMetrics eval_sound(const Image& pred, const ManifestRow& r, const fs::path& root,
                                  const nlohmann::json& params) {
  const Image truth = read_png(root / r.target_path);
  const scene::OccupancyMask mask = scene::mask_from_image(read_png(root / r.input_path), params.at("extent_m"));
  const metrics::SightMask sight = metrics::los_mask(mask, mask.to_pixel(json_vec(params.at("source"))));
  return metrics::to_sample(r.sample_id, metrics::sound_report(pred, truth, sight));
}

}  // namespace

metrics::EvalReport evaluate_predictions(const fs::path& pred_dir, const Manifest& manifest, const fs::path& root,
                                         TaskKind task) {
  if (!fs::is_directory(pred_dir)) throw ValidationError("prediction directory not found: " + pred_dir.string());
  metrics::EvalReport report;
  report.task = std::string(to_string(task));
  for (const ManifestRow& r : manifest.rows) {
    if (r.task != report.task || !r.ok()) continue;
    ++report.expected;
    const nlohmann::json params = nlohmann::json::parse(read_text_file(root / r.params_json_path));
    const std::string target_name = fs::path(r.target_path).filename().string();

    if (task == TaskKind::kLens) {
      const lens::LandmarkSet truth = lens::landmarks_from_csv(
          read_text_file(root / fs::path(r.params_json_path).parent_path() / params.at("landmarks_out").get<std::string>()));
      std::optional<lens::LandmarkSet> pred;
      if (auto csv = find_prediction(pred_dir, {r.sample_id + "_out.csv", r.sample_id + ".csv"})) {
        pred = lens::landmarks_from_csv(read_text_file(*csv));
      } else if (auto png = find_prediction(pred_dir, {r.target_path, target_name, r.sample_id + ".png"})) {
        pred = locate_landmarks(read_png(*png), truth);
        if (!pred) {
          report.samples.push_back({r.sample_id, {{"x_err", std::nullopt}, {"y_err", std::nullopt},
                                                  {"combined_err", std::nullopt}, {"xy_shift", std::nullopt}}});
          continue;
        }
      } else {
        report.missing.push_back(r.sample_id);
        continue;
      }
      report.samples.push_back(metrics::to_sample(r.sample_id, metrics::landmark_report(*pred, truth)));
      continue;
    }

    const auto png = find_prediction(pred_dir, {r.target_path, target_name, r.sample_id + ".png"});
    if (!png) {
      report.missing.push_back(r.sample_id);
      continue;
    }
    const Image pred = read_png(*png);
    if (task == TaskKind::kSound) {
      report.samples.push_back(eval_sound(pred, r, root, params));
    } else {
      const ball::BallSimConfig cfg = json_ball_cfg(params.at("config"));
      report.samples.push_back(metrics::to_sample(
          r.sample_id, metrics::ball_report(pred, json_state(params.at("target_state")), cfg,
                                            json_state(params.at("input_state")))));
    }
  }
  report.aggregate();
  return report;
}

}  // namespace physgen::pipeline
