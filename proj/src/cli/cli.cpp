#include "physgen/cli/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "physgen/ball/render.hpp"
#include "physgen/core/rng.hpp"
#include "physgen/metrics/metrics.hpp"
#include "physgen/pipeline/overpass.hpp"
#include "physgen/pipeline/pipeline.hpp"
#include "physgen/sound/render.hpp"

#ifndef PHYSGEN_VERSION
#define PHYSGEN_VERSION "0.0.0"
#endif

namespace physgen::cli {

namespace fs = std::filesystem;

std::string version() { return PHYSGEN_VERSION; }

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Globals {
  unsigned workers = 1;
  std::string config_file;
  bool json = false;
  bool quiet = false;
};

struct SoundFlags {
  std::string task = "baseline";
  int resolution = 256;
  double source_level = 95.0, frequency = 500.0, speed_of_sound = 343.0, c_dprime = 1.0, alpha_vert = 0.1;
  int reflection_order = -1;  // -1: preset of the task
  double alpha_air = 2.0;
  int min_buildings = 10;
  double inner_radius = 200.0, clear_radius = 50.0;
  std::vector<std::string> geojson;
  double extent = 500.0;

  sound::SoundTask to_task() const {
    sound::SoundTask t = sound::SoundTask::preset(sound::parse_variant(task));
    t.source_level_db = source_level;
    t.frequency_hz = frequency;
    t.speed_of_sound_m_s = speed_of_sound;
    t.c_dprime = c_dprime;
    t.alpha_vert = alpha_vert;
    if (reflection_order >= 0) t.reflection_order = reflection_order;
    t.alpha_air_db_per_km = alpha_air;
    return t;
  }
};

struct BallFlags {
  std::string mode = "mixed";
  double beta_min = 2, beta_max = 25, height_min = 0.5, height_max = 2.0, dt_min = 0.1, dt_max = 1.0, t0_max = 2.0;
  int max_attempts = 200;
  double mass = 0.1, spring_c = 4000, damper_d = 3, friction_mu = 0.5, g = 9.81, scale = 0.01;

  pipeline::BallOptions to_options() const {
    pipeline::BallOptions o;
    if (mode != "mixed") o.mode = ball::parse_mode(mode);
    o.beta_min_deg = beta_min;
    o.beta_max_deg = beta_max;
    o.height_min_m = height_min;
    o.height_max_m = height_max;
    o.dt_min_s = dt_min;
    o.dt_max_s = dt_max;
    o.t0_max_s = t0_max;
    o.max_attempts = max_attempts;
    o.base.mass = mass;
    o.base.spring_c = spring_c;
    o.base.damper_d = damper_d;
    o.base.friction_mu = friction_mu;
    o.base.g = g;
    o.base.scale = scale;
    if (!(beta_min >= 0 && beta_min <= beta_max && beta_max <= 30)) throw ValidationError("need 0 <= beta-min <= beta-max <= 30");
    if (!(height_min > 0 && height_min <= height_max)) throw ValidationError("need 0 < height-min <= height-max");
    if (!(dt_min > 0 && dt_min <= dt_max)) throw ValidationError("need 0 < dt-min <= dt-max");
    return o;
  }
};

struct LensFlags {
  int size = 256;
  double tangential_bound = 0.05, radial_bound = 0.0;
};

void add_sound_flags(CLI::App* app, SoundFlags& f) {
  app->add_option("--source-level", f.source_level, "Source sound power level L_W in dB");
  app->add_option("--frequency", f.frequency, "Frequency in Hz");
  app->add_option("--speed-of-sound", f.speed_of_sound, "Speed of sound in m/s");
  app->add_option("--c-dprime", f.c_dprime, "Diffraction factor C''");
  app->add_option("--alpha-vert", f.alpha_vert, "Facade absorption coefficient");
  app->add_option("--reflection-order", f.reflection_order, "Reflection order (-1: 1 for reflection/combined, else 0)");
  app->add_option("--alpha-air", f.alpha_air, "Atmospheric absorption in dB/km");
}

void add_scene_flags(CLI::App* app, SoundFlags& f) {
  app->add_option("--min-buildings", f.min_buildings, "Buildings required within the inner radius");
  app->add_option("--inner-radius", f.inner_radius, "Inner sampling radius in m");
  app->add_option("--clear-radius", f.clear_radius, "Building-free radius around the source in m");
  app->add_option("--geojson", f.geojson, "GeoJSON building files to use instead of procedural scenes");
  app->add_option("--extent", f.extent, "Scene extent in m for imported GeoJSON");
}

void add_ball_flags(CLI::App* app, BallFlags& f) {
  app->add_option("--mode", f.mode, "rolling, bouncing or mixed (alternating)")
      ->check(CLI::IsMember({"rolling", "bouncing", "mixed"}));
  app->add_option("--beta-min", f.beta_min, "Smallest slope in degrees");
  app->add_option("--beta-max", f.beta_max, "Largest slope in degrees");
  app->add_option("--height-min", f.height_min, "Smallest drop height in m");
  app->add_option("--height-max", f.height_max, "Largest drop height in m");
  app->add_option("--dt-min", f.dt_min, "Shortest input-to-target interval in s");
  app->add_option("--dt-max", f.dt_max, "Longest input-to-target interval in s");
  app->add_option("--t0-max", f.t0_max, "Latest input frame time in s");
  app->add_option("--max-attempts", f.max_attempts, "Parameter draws per sample before it is marked failed")
      ->check(CLI::PositiveNumber);
  app->add_option("--mass", f.mass, "Ball mass in kg");
  app->add_option("--spring-c", f.spring_c, "Contact spring constant in N/m");
  app->add_option("--damper-d", f.damper_d, "Contact damping in N s/m");
  app->add_option("--friction-mu", f.friction_mu, "Friction coefficient");
  app->add_option("--g", f.g, "Gravity in m/s^2");
  app->add_option("--scale", f.scale, "Meters per pixel");
}

void add_lens_flags(CLI::App* app, LensFlags& f) {
  app->add_option("--size", f.size, "Image size in pixels");
  app->add_option("--tangential-bound", f.tangential_bound, "Bound on |p1| and |p2|");
  app->add_option("--radial-bound", f.radial_bound, "Bound on |k1| (0 disables radial distortion)");
}

// Flat key/value pairs from a TOML or JSON file. Keys may sit at the top
// level or in a section named after the subcommand path ("generate.sound").
std::vector<CLI::ConfigItem> read_config(const std::string& path) {
  if (!fs::exists(path)) throw ValidationError("config file not found: " + path);
  if (fs::path(path).extension() != ".json") return CLI::ConfigTOML().from_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  std::vector<CLI::ConfigItem> items;
  auto scalar = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  std::function<void(const nlohmann::json&, std::vector<std::string>)> walk = [&](const nlohmann::json& obj,
                                                                                  std::vector<std::string> parents) {
    for (const auto& [k, v] : obj.items()) {
      if (v.is_object()) {
        auto p = parents;
        p.push_back(k);
        walk(v, p);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = k;
      if (v.is_array())
        for (const auto& e : v) item.inputs.push_back(scalar(e));
      else
        item.inputs.push_back(scalar(v));
      items.push_back(item);
    }
  };
  if (!doc.is_object()) throw ValidationError("config " + path + ": top level must be an object");
  walk(doc, {});
  return items;
}

// Applies config values to options of `leaf` (and the root app) that were
// not given on the command line.
void apply_config(CLI::App& root, CLI::App* leaf, const std::vector<CLI::ConfigItem>& items) {
  std::vector<std::string> path;
  for (CLI::App* a = leaf; a && a->get_parent(); a = a->get_parent()) path.insert(path.begin(), a->get_name());
  for (const CLI::ConfigItem& item : items) {
    bool section_ok = item.parents.empty();
    for (std::size_t k = 1; k <= path.size() && !section_ok; ++k)
      section_ok = item.parents == std::vector<std::string>(path.begin(), path.begin() + k);
    if (!section_ok) continue;
    if (item.name == "config" || item.name == "++" || item.name == "--") continue;  // section markers
    CLI::Option* opt = nullptr;
    for (CLI::App* a = leaf; a && !opt; a = a->get_parent()) opt = a->get_option_no_throw("--" + item.name);
    if (!opt) opt = root.get_option_no_throw("--" + item.name);
    if (!opt) throw ValidationError("unknown config key '" + item.fullname() + "'");
    if (opt->count() > 0) continue;  // command line wins
    for (const std::string& v : item.inputs) opt->add_result(v);
    opt->run_callback();
  }
}

std::string toml_value(const CLI::Option* opt) {
  if (opt->get_expected_max() == 0) return opt->count() > 0 ? "true" : "false";
  std::vector<std::string> vals;
  if (opt->count() > 0) {
    vals = opt->results();
  } else {
    std::string d = opt->get_default_str();
    if (d == "{}" || d.empty()) {
      if (opt->get_expected_max() > 1) return "[]";
      if (d.empty()) return "\"\"";
    }
    vals = {d};
  }
  auto quote = [](const std::string& v) {
    if (v == "true" || v == "false") return v;
    char* end = nullptr;
    std::strtod(v.c_str(), &end);
    if (!v.empty() && end == v.c_str() + v.size()) return v;
    return nlohmann::json(v).dump();
  };
  if (opt->get_expected_max() <= 1 && vals.size() == 1) return quote(vals[0]);
  std::string out = "[";
  for (std::size_t i = 0; i < vals.size(); ++i) out += (i ? ", " : "") + quote(vals[i]);
  return out + "]";
}

void dump_options(const CLI::App* app, std::string& out) {
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "version" || name == "config") continue;
    out += name + " = " + toml_value(opt) + "\n";
  }
}

// Values in effect for the selected subcommand, in TOML.
std::string resolved_config(const CLI::App& root, const CLI::App* leaf) {
  std::string out = "# physgen " + version() + " resolved configuration\n";
  dump_options(&root, out);
  std::string section;
  for (const CLI::App* a = leaf; a && a->get_parent(); a = a->get_parent())
    section = a->get_name() + (section.empty() ? "" : "." + section);
  if (!section.empty()) {
    out += "\n[" + section + "]\n";
    dump_options(leaf, out);
  }
  return out;
}

int do_generate(const std::string& kind, const Globals& g, std::size_t n, std::uint64_t seed, const std::string& out_dir,
                const SoundFlags& sf, const LensFlags& lf, const BallFlags& bf, const std::string& config_text, std::ostream& out,
                std::ostream& err) {
  pipeline::GenerationSpec spec;
  spec.kind = pipeline::parse_task_kind(kind);
  if (spec.kind == pipeline::TaskKind::kSound) {
    spec.sound.task = sf.to_task();
    spec.sound.resolution = sf.resolution;
    spec.sound.criteria = {sf.min_buildings, sf.inner_radius, sf.clear_radius};
    spec.sound.criteria.validate();
    for (const std::string& file : sf.geojson)
      spec.sound.scenes.push_back(scene::parse_geojson_buildings(read_text_file(file), sf.extent).scene);
  } else if (spec.kind == pipeline::TaskKind::kLens) {
    spec.lens = {lf.size, lf.tangential_bound, lf.radial_bound};
  } else {
    spec.ball = bf.to_options();
  }
  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "run_config.toml", config_text);
  const pipeline::Manifest m = pipeline::generate_dataset(spec, n, out_dir, seed, g.workers);
  std::size_t failed = 0;
  for (const auto& r : m.rows) {
    if (r.ok()) continue;
    ++failed;
    err << r.sample_id << ": " << r.status << '\n';
  }
  if (g.json) {
    out << nlohmann::json{{"samples", m.rows.size()}, {"failed", failed},
                          {"manifest", (fs::path(out_dir) / "manifest.csv").string()}}
               .dump()
        << '\n';
  } else {
    out << "generated " << m.rows.size() - failed << "/" << m.rows.size() << " " << kind << " samples in " << out_dir
        << '\n';
  }
  return failed ? kExitPartial : kExitOk;
}

pipeline::TaskKind eval_kind(const std::string& task) {
  for (const char* v : {"baseline", "diffraction", "reflection", "combined"})
    if (task == v) return pipeline::TaskKind::kSound;
  return pipeline::parse_task_kind(task);
}

int do_eval(const Globals& g, const std::string& task, const std::string& pred, const std::string& manifest_path,
            std::string data_dir, const std::string& csv_path, std::ostream& out) {
  const pipeline::Manifest m = pipeline::Manifest::read(manifest_path);
  if (data_dir.empty()) data_dir = fs::path(manifest_path).parent_path().string();
  if (data_dir.empty()) data_dir = ".";
  const metrics::EvalReport rep = pipeline::evaluate_predictions(pred, m, data_dir, eval_kind(task));
  if (!csv_path.empty()) write_text_file(csv_path, rep.to_csv());
  out << (g.json ? rep.to_json() + "\n" : rep.format_table());
  return kExitOk;
}

int do_bench(const Globals& g, const std::string& task, int resolution, std::size_t n, std::uint64_t seed,
             const SoundFlags& sf, std::ostream& out) {
  std::function<void(std::size_t)> fn;
  std::vector<scene::UrbanScene> scenes;
  std::optional<double> target_ms;
  sound::SoundTask st;
  pipeline::FaceSample face;
  lens::LensParams lp = lens::LensParams::for_image(256, 256);
  const pipeline::TaskKind kind = eval_kind(task);
  if (kind == pipeline::TaskKind::kSound) {
    SoundFlags f = sf;
    f.task = task == "sound" ? "baseline" : task;
    st = f.to_task();
    sound::validate(st);
    for (std::size_t i = 0; i < n + 3; ++i) scenes.push_back(scene::procedural_scene(derive_seed(seed, i)));
    fn = [&](std::size_t i) { sound::simulate_map(st, scenes[i % scenes.size()], resolution, 1); };
    if (st.variant == sound::Variant::kBaseline) target_ms = 500.0;
    if (st.variant == sound::Variant::kReflection && st.reflection_order == 1) target_ms = 5000.0;
  } else if (kind == pipeline::TaskKind::kLens) {
    face = pipeline::synthetic_face(seed, 256);
    lp.p1 = 0.03;
    lp.p2 = -0.02;
    fn = [&](std::size_t) {
      lens::distort_image(face.image, lp, 1);
      lens::transform_landmarks(face.landmarks, lp);
    };
  } else {
    fn = [&](std::size_t i) {
      const pipeline::BallSampleParams bp = pipeline::sample_ball_params(derive_seed(seed, i), i, {});
      ball::render_frame(bp.input, bp.cfg);
      ball::render_frame(bp.target, bp.cfg);
    };
  }
  std::vector<metrics::BenchResult> results{metrics::runtime_bench(fn, n, 1)};
  if (g.workers > 1) results.push_back(metrics::runtime_bench(fn, n, g.workers));
  if (g.json) {
    nlohmann::ordered_json j;
    j["task"] = task;
    j["resolution"] = resolution;
    j["n"] = n;
    for (const auto& r : results)
      j["runs"].push_back({{"workers", r.workers}, {"mean_ms", r.mean_ms}, {"std_ms", r.std_ms}});
    if (target_ms) {
      j["target_ms"] = *target_ms;
      j["meets_target"] = results[0].mean_ms <= *target_ms;
    }
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %10s %8s %14s %12s\n", "task", "resolution", "workers", "ms/sample", "std ms");
  out << buf;
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-12s %10d %8u %14.3f %12.3f\n", task.c_str(), resolution, r.workers, r.mean_ms,
                  r.std_ms);
    out << buf;
  }
  if (target_ms) {
    std::snprintf(buf, sizeof buf, "single-threaded target <= %.0f ms: %s\n", *target_ms,
                  results[0].mean_ms <= *target_ms ? "met" : "missed");
    out << buf;
  }
  return kExitOk;
}

int do_fetch(const Globals& g, double lat, double lon, double half, const std::vector<double>& bbox,
             pipeline::OverpassOptions opt, const std::string& out_file, std::ostream& out) {
  const pipeline::BBox box =
      bbox.empty() ? pipeline::bbox_around({lat, lon}, half) : pipeline::BBox{bbox[0], bbox[1], bbox[2], bbox[3]};
  const pipeline::FetchResult r = pipeline::fetch_overpass(box, opt);
  if (!out_file.empty()) write_text_file(out_file, r.geojson);
  const auto features = nlohmann::json::parse(r.geojson)["features"].size();
  if (g.json) {
    out << nlohmann::json{{"features", features}, {"from_cache", r.from_cache}, {"network_calls", r.network_calls},
                          {"cache_file", r.cache_file.string()}}
               .dump()
        << '\n';
  } else {
    out << features << " building features" << (r.from_cache ? " (cached)" : "") << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Physics simulation dataset generator and evaluator", "physgen"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_version_flag("--version", version());
  Globals g;
  app.add_option("--workers", g.workers, "Worker threads for generation and multi-threaded benchmarks")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--config", g.config_file, "TOML or JSON file with option values; flags take precedence");
  app.add_flag("--json", g.json, "Machine-readable output");
  app.add_flag("--quiet", g.quiet, "Do not print the resolved configuration to stderr");

  SoundFlags sf;
  LensFlags lf;
  BallFlags bf;
  std::size_t n = 10;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  CLI::App* gen = app.add_subcommand("generate", "Generate a dataset");
  gen->require_subcommand(1);
  std::string gen_kind;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-n,--samples", n, "Number of samples")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("-o,--out", out_dir, "Output directory");
  };
  CLI::App* gen_sound = gen->add_subcommand("sound", "Urban sound propagation maps");
  add_common(gen_sound);
  gen_sound->add_option("--task", sf.task, "Variant: baseline, diffraction, reflection, combined")
      ->check(CLI::IsMember({"baseline", "diffraction", "reflection", "combined"}));
  gen_sound->add_option("--resolution", sf.resolution, "Raster size (256 or 512)")->check(CLI::IsMember({256, 512}));
  add_sound_flags(gen_sound, sf);
  add_scene_flags(gen_sound, sf);
  CLI::App* gen_lens = gen->add_subcommand("lens", "Lens distortion of synthetic faces");
  add_common(gen_lens);
  add_lens_flags(gen_lens, lf);
  CLI::App* gen_ball = gen->add_subcommand("ball", "Rolling and bouncing ball frame pairs");
  add_common(gen_ball);
  add_ball_flags(gen_ball, bf);

  CLI::App* ev = app.add_subcommand("eval", "Evaluate predictions against a generated dataset");
  std::string ev_task, pred_dir, manifest_path, data_dir, csv_path;
  ev->add_option("--task", ev_task, "sound, lens, ball, or a sound variant")->required();
  ev->add_option("--pred", pred_dir, "Directory with predictions")->required();
  ev->add_option("--manifest", manifest_path, "Manifest CSV of the dataset")->required();
  ev->add_option("--data", data_dir, "Dataset root (default: directory of the manifest)");
  ev->add_option("--csv", csv_path, "Write per-sample metrics to this CSV file");

  CLI::App* bench = app.add_subcommand("bench", "Time the generators");
  std::string bench_task = "baseline";
  int bench_res = 256;
  std::size_t bench_n = 20;
  bench->add_option("--task", bench_task, "baseline, diffraction, reflection, combined, lens or ball")
      ->check(CLI::IsMember({"baseline", "diffraction", "reflection", "combined", "sound", "lens", "ball"}));
  bench->add_option("--resolution", bench_res, "Sound raster size")->check(CLI::IsMember({256, 512}));
  bench->add_option("-n,--samples", bench_n, "Timed samples (at least 10)")->check(CLI::Range(10, 100000));
  bench->add_option("--seed", seed, "Master seed");
  add_sound_flags(bench, sf);

  CLI::App* fetch = app.add_subcommand("fetch-osm", "Download building footprints through the Overpass API");
  double lat = 0, lon = 0, half = 250;
  std::vector<double> bbox;
  pipeline::OverpassOptions oo;
  std::string cache_dir, fetch_out;
  fetch->add_option("--lat", lat, "Center latitude");
  fetch->add_option("--lon", lon, "Center longitude");
  fetch->add_option("--half-extent", half, "Half side of the square box in m");
  fetch->add_option("--bbox", bbox, "south,west,north,east (overrides --lat/--lon)")->delimiter(',')->expected(4);
  fetch->add_option("--endpoint", oo.endpoint, "Overpass interpreter URL");
  fetch->add_option("--cache-dir", cache_dir, "Cache directory (default: $PHYSGEN_CACHE_DIR or ~/.cache/physgen)");
  fetch->add_flag("--offline", oo.offline, "Serve from the cache only");
  fetch->add_option("--attempts", oo.attempts, "Request attempts")->check(CLI::Range(1, 10));
  fetch->add_option("--timeout", oo.timeout_s, "Request timeout in s");
  fetch->add_option("-o,--out", fetch_out, "Write the GeoJSON here");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version report exit code 0
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInvalid;
  }

  CLI::App* leaf = &app;
  while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();

  try {
    if (!g.config_file.empty()) apply_config(app, leaf, read_config(g.config_file));
    const std::string config_text = resolved_config(app, leaf);
    if (!g.quiet) err << config_text;
    if (leaf == gen_sound || leaf == gen_lens || leaf == gen_ball)
      return do_generate(leaf->get_name(), g, n, seed, out_dir, sf, lf, bf, config_text, out, err);
    if (leaf == ev) return do_eval(g, ev_task, pred_dir, manifest_path, data_dir, csv_path, out);
    if (leaf == bench) return do_bench(g, bench_task, bench_res, bench_n, seed, sf, out);
    if (leaf == fetch) {
      if (!cache_dir.empty()) oo.cache_dir = cache_dir;
      return do_fetch(g, lat, lon, half, bbox, oo, fetch_out, out);
    }
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace physgen::cli
