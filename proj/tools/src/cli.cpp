#include "kite_cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "kite/bev.hpp"
#include "kite/codec.hpp"
#include "kite/error.hpp"
#include "kite/evidence_json.hpp"
#include "kite/synthetic.hpp"

namespace kite::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void bad(const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, kModule, msg);
}

std::string read_text(const fs::path& p) {
  const auto bytes = read_file_bytes(p);
  return {bytes.begin(), bytes.end()};
}

void write_text(const fs::path& p, std::string_view text) {
  write_file_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

KeyframeMode parse_mode(std::string_view s) {
  if (s == "motion") return KeyframeMode::kMotion;
  if (s == "uniform") return KeyframeMode::kUniform;
  bad(fmt::format("keyframe mode must be 'motion' or 'uniform', got '{}'", s));
}

std::string_view mode_name(KeyframeMode m) {
  return m == KeyframeMode::kUniform ? "uniform" : "motion";
}

double parse_double(std::string_view name, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  bad(fmt::format("{} must be a number, got '{}'", name, text));
}

// Values given on the command line; `set` records which ones were present.
struct Flags {
  std::string frames, robot_profile, plan, out, config, spec, evidence;
  double fps = 0;
  int budget = 0, nms_window = 0, parallelism = 0;
  std::string keyframe_mode, ovd, depth, vlm, question, question_type;
  std::vector<std::string> vocabulary;
  bool no_bev = false, no_perception = false;
  std::uint64_t seed = 0;
  std::map<std::string, CLI::Option*> opts;

  bool set(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

void add_config_flags(CLI::App* app, Flags& f) {
  f.opts["config"] = app->add_option("--config", f.config, "JSON run configuration");
  f.opts["fps"] = app->add_option("--fps", f.fps, "Frame rate for frames without timestamps");
  f.opts["budget"] = app->add_option("--budget", f.budget, "Keyframe budget M");
  f.opts["nms_window"] = app->add_option("--nms-window", f.nms_window, "Temporal NMS half-width");
  f.opts["keyframe_mode"] =
      app->add_option("--keyframe-mode", f.keyframe_mode, "motion or uniform")
          ->check(CLI::IsMember({"motion", "uniform"}));
  f.opts["seed"] = app->add_option("--seed", f.seed, "Scenario seed override");
}

void add_backend_flags(CLI::App* app, Flags& f) {
  f.opts["ovd"] = app->add_option("--ovd", f.ovd, "Detection backend: mock[:script], dir:<path>, URL");
  f.opts["depth"] = app->add_option("--depth", f.depth, "Depth backend: mock, dir:<path>, URL");
  f.opts["vocabulary"] = app->add_option("--vocabulary", f.vocabulary, "Detection classes");
  f.opts["parallelism"] = app->add_option("--parallelism", f.parallelism, "Keyframes in flight");
}

void add_vlm_flags(CLI::App* app, Flags& f) {
  f.opts["vlm"] = app->add_option("--vlm", f.vlm, "VLM backend: mock[:script] or URL");
  f.opts["question"] = app->add_option("--question", f.question, "Question for the VLM");
  f.opts["question_type"] =
      app->add_option("--question-type", f.question_type, "detect|identify|localize|explain|correct")
          ->check(CLI::IsMember({"detect", "identify", "localize", "explain", "correct"}));
}

void apply_config_file(RunConfig& c, const fs::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error&) {
    bad(fmt::format("cannot read config file {}", path.string()));
  }
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    bad(fmt::format("config file {} is not a JSON object", path.string()));
  }
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "fps") c.fps = v.get<double>();
      else if (key == "budget") c.keyframes.budget = v.get<int>();
      else if (key == "nms_window") c.keyframes.nms_window = v.get<int>();
      else if (key == "keyframe_mode") c.keyframes.mode = parse_mode(v.get<std::string>());
      else if (key == "no_bev") c.no_bev = v.get<bool>();
      else if (key == "tau_iou") c.contact.tau_iou = v.get<double>();
      else if (key == "tau_d") c.contact.tau_d = v.get<double>();
      else if (key == "min_confidence") c.contact.min_confidence = v.get<double>();
      else if (key == "relation_tolerance") c.relation_tolerance = v.get<double>();
      else if (key == "iou_floor") c.tracking.iou_floor = v.get<double>();
      else if (key == "clamp_quantile") c.clamp_quantile = v.get<double>();
      else if (key == "vocabulary") c.vocabulary = v.get<std::vector<std::string>>();
      else if (key == "ovd") c.ovd = v.get<std::string>();
      else if (key == "depth") c.depth = v.get<std::string>();
      else if (key == "vlm") c.vlm = v.get<std::string>();
      else if (key == "vlm_model") c.vlm_model = v.get<std::string>();
      else if (key == "vlm_timeout") c.vlm_timeout_s = v.get<double>();
      else if (key == "backend_timeout") c.backend_timeout_s = v.get<double>();
      else if (key == "parallelism") c.parallelism = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "question") c.question = v.get<std::string>();
      else if (key == "question_type") {
        const auto t = parse_question_type(v.get<std::string>());
        if (!t) bad(fmt::format("unknown question_type '{}'", v.get<std::string>()));
        c.question_type = *t;
      } else {
        bad(fmt::format("unknown config key '{}'", key));
      }
    }
  } catch (const json::exception& e) {
    bad(fmt::format("config file {}: {}", path.string(), e.what()));
  }
}

RunConfig resolve(const Flags& f, const EnvLookup& env) {
  RunConfig c;
  if (f.set("config")) apply_config_file(c, f.config);
  if (f.set("fps")) c.fps = f.fps;
  if (f.set("budget")) c.keyframes.budget = f.budget;
  if (f.set("nms_window")) c.keyframes.nms_window = f.nms_window;
  if (f.set("keyframe_mode")) c.keyframes.mode = parse_mode(f.keyframe_mode);
  if (f.set("no_bev")) c.no_bev = true;
  if (f.set("ovd")) c.ovd = f.ovd;
  if (f.set("depth")) c.depth = f.depth;
  if (f.set("vlm")) c.vlm = f.vlm;
  if (f.set("vocabulary")) c.vocabulary = f.vocabulary;
  if (f.set("parallelism")) c.parallelism = f.parallelism;
  if (f.set("seed")) c.seed = f.seed;
  if (f.set("question")) c.question = f.question;
  if (f.set("question_type")) c.question_type = *parse_question_type(f.question_type);

  if (auto v = env("KITE_OVD_URL")) c.ovd = *v;
  if (auto v = env("KITE_DEPTH_URL")) c.depth = *v;
  if (auto v = env("KITE_VLM_URL")) c.vlm = *v;
  if (auto v = env("KITE_VLM_MODEL")) c.vlm_model = *v;
  if (auto v = env("KITE_VLM_TIMEOUT")) c.vlm_timeout_s = parse_double("KITE_VLM_TIMEOUT", *v);
  validate(c);
  return c;
}

std::unique_ptr<DetectionBackend> detector_for(const RunConfig& c,
                                               std::span<const std::string> vocabulary) {
  const BackendSpec s = parse_backend_spec(c.ovd);
  DetectionBackendRef ref;
  ref.kind = s.kind;
  ref.endpoint_or_path = s.target;
  ref.vocabulary.assign(vocabulary.begin(), vocabulary.end());
  ref.timeout_s = c.backend_timeout_s;
  return make_detection_backend(ref);
}

std::unique_ptr<DepthBackend> depth_for(const RunConfig& c) {
  const BackendSpec s = parse_backend_spec(c.depth);
  if (s.kind == BackendKind::kMock && !s.target.empty()) {
    bad("the mock depth backend takes no script");
  }
  DepthBackendRef ref;
  ref.kind = s.kind;
  ref.endpoint_or_path = s.target;
  ref.clamp_quantile = c.clamp_quantile;
  ref.timeout_s = c.backend_timeout_s;
  return make_depth_backend(ref);
}

std::unique_ptr<VlmBackend> vlm_for(const RunConfig& c) {
  const BackendSpec s = parse_backend_spec(c.vlm);
  if (s.kind == BackendKind::kDirectory) bad("the VLM backend must be mock[:script] or a URL");
  VlmBackendRef ref;
  ref.kind = s.kind == BackendKind::kHttp ? VlmKind::kHttpChat : VlmKind::kMock;
  ref.endpoint = s.target;
  ref.model_name = c.vlm_model;
  ref.timeout_s = c.vlm_timeout_s;
  return make_vlm_backend(ref);
}

std::vector<std::string> effective_vocabulary(const RunConfig& c, const RobotProfile& robot) {
  std::vector<std::string> v = c.vocabulary;
  if (v.empty()) return v;  // no filtering
  for (const std::string& g : robot.gripper_class_labels) {
    if (std::find(v.begin(), v.end(), g) == v.end()) v.push_back(g);
  }
  return v;
}

std::string_view role_name(ImageRole r) {
  switch (r) {
    case ImageRole::kRgbOverlay: return "rgb";
    case ImageRole::kBev: return "bev";
    case ImageRole::kStoryboard: return "storyboard";
  }
  return "rgb";
}

std::string prompt_json(const PromptBundle& b) {
  json images = json::array();
  for (const PromptImage& img : b.images) {
    images.push_back({{"role", std::string(role_name(img.role))},
                      {"keyframe", img.keyframe_ordinal},
                      {"bytes", img.png.size()},
                      {"fnv1a", fnv1a_hex(std::string_view(
                                    reinterpret_cast<const char*>(img.png.data()),
                                    img.png.size()))}});
  }
  return json{{"image_count", b.images.size()},
              {"images", images},
              {"question", b.question},
              {"text", b.text}}
             .dump(2) +
         "\n";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure, kModule,
                fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  }
}

std::string saliency_csv(const SaliencyCurve& curve) {
  std::ostringstream os;
  write_saliency_csv(os, curve);
  return os.str();
}

int cmd_keyframes(const Flags& f, const RunConfig& c, std::ostream& out) {
  const FrameSource source = open_frame_source(f.frames, c.fps);
  const SaliencyCurve curve = saliency_series(source, c.keyframes);
  const auto selected = select_keyframes(curve, c.keyframes);
  const auto keyframes = extract_keyframes(source, selected);
  const fs::path dir = f.out;
  ensure_dir(dir);
  write_text(dir / "saliency.csv", saliency_csv(curve));
  write_text(dir / "keyframes.json", keyframes_json(keyframes));
  for (std::size_t k = 0; k < keyframes.size(); ++k) {
    write_file_bytes(dir / fmt::format("kf_{}.png", k), encode_png(keyframes[k].image));
  }
  out << fmt::format("{} keyframes from {} frames written to {}\n", keyframes.size(),
                     source.meta().frame_count, dir.string());
  return kExitOk;
}

int cmd_analyze(const Flags& f, const RunConfig& c, std::ostream& out) {
  const FrameSource source = open_frame_source(f.frames, c.fps);
  const RobotProfile robot = load_robot_profile(f.robot_profile);
  std::optional<std::vector<std::string>> plan;
  if (!f.plan.empty()) plan = load_plan(f.plan);
  const std::string question =
      c.question.empty() ? default_question(c.question_type) : c.question;

  const auto vocabulary = effective_vocabulary(c, robot);
  auto detector = detector_for(c, vocabulary);
  auto depth = depth_for(c);
  auto vlm = vlm_for(c);

  const Analysis a = analyze_episode(source, robot, plan, c, *detector, *depth);
  const EpisodeEvidence& e = a.evidence;
  const fs::path dir = f.out;
  ensure_dir(dir);
  write_text(dir / "saliency.csv", saliency_csv(a.curve));
  write_text(dir / "keyframes.json", keyframes_json(e.keyframes));
  for (std::size_t k = 0; k < e.keyframes.size(); ++k) {
    write_file_bytes(dir / fmt::format("kf_{}_rgb.png", k), encode_png(a.overlays[k]));
    if (!e.bev_images.empty()) write_file_bytes(dir / fmt::format("kf_{}_bev.png", k), e.bev_images[k]);
  }
  write_text(dir / "evidence.json", evidence_json(e));
  write_text(dir / "scene_graph.json", scene_graph_json(e.global_graph, a.local_graphs));
  write_text(dir / "kite_context.txt", a.context.text);
  write_file_bytes(dir / "storyboard.png", a.storyboard);

  const bool localize = c.question_type == QuestionType::kLocalize;
  const std::string asked = localize ? localization_question(question) : question;
  const PromptBundle bundle = build_prompt(a.context, asked, e, {.include_bev = !c.no_bev});
  write_text(dir / "prompt.json", prompt_json(bundle));
  const std::string answer = vlm->query(bundle);
  write_text(dir / "answer.txt", answer);

  if (localize) {
    std::vector<int> valid(static_cast<std::size_t>(e.meta.frame_count));
    for (int i = 0; i < e.meta.frame_count; ++i) valid[i] = i;
    LocalizationResult loc;
    try {
      loc = parse_localization(answer, valid);
    } catch (const Error& err) {
      // The model answered, but not in the required shape.
      throw Error(ErrorCode::kBackendMalformed, "vlm-interface", err.what());
    }
    write_text(dir / "localization.json", localization_json(loc) + "\n");
    if (loc.candidates.empty()) {
      out << "no localization\n";
      return kExitNoLocalization;
    }
    const auto top = top_candidate(loc);
    out << fmt::format("failure localized at frame {} (confidence {:.2f})\n", top.frame_num,
                       top.confidence);
  }
  out << fmt::format("{} keyframes, {} images in prompt, outputs in {}\n", e.keyframes.size(),
                     bundle.images.size(), dir.string());
  return kExitOk;
}

int cmd_simulate(const Flags& f, std::optional<std::uint64_t> seed, std::ostream& out) {
  ScenarioSpec spec = load_scenario_spec(f.spec);
  if (seed) spec.seed = *seed;
  const GroundTruth truth =
      generate_episode(spec, f.out, {.write_perception = !f.no_perception});
  out << fmt::format("{} frames, {} bursts written to {}\n", truth.duration_frames,
                     truth.motion_bursts.size(), fs::path(f.out).string());
  return kExitOk;
}

int cmd_narrate(const Flags& f, const RunConfig& c, std::ostream& out) {
  const fs::path dir = f.evidence;
  for (const char* name : {"kite_context.txt", "storyboard.png", "keyframes.json"}) {
    if (!fs::is_regular_file(dir / name)) {
      bad(fmt::format("evidence bundle {} lacks {}", dir.string(), name));
    }
  }
  KiteContext ctx;
  ctx.text = read_text(dir / "kite_context.txt");
  const PngBytes storyboard = read_file_bytes(dir / "storyboard.png");
  const auto indices = parse_keyframe_indices(read_text(dir / "keyframes.json"));
  auto vlm = vlm_for(c);
  const Narrative n = request_narrative(*vlm, ctx, storyboard, indices);
  const fs::path target = f.out.empty() ? dir : fs::path(f.out);
  ensure_dir(target);
  write_text(target / "narrative.txt", n.text);
  out << fmt::format("narrative references {} keyframes, written to {}\n",
                     n.referenced_keyframes.size(), (target / "narrative.txt").string());
  return kExitOk;
}

int exit_code_for(const Error& e) {
  if (is_backend_error(e.code()) || e.code() == ErrorCode::kMissingRecord) return kExitBackend;
  return kExitInput;
}

}  // namespace

std::string_view to_string(QuestionType type) {
  switch (type) {
    case QuestionType::kDetect: return "detect";
    case QuestionType::kIdentify: return "identify";
    case QuestionType::kLocalize: return "localize";
    case QuestionType::kExplain: return "explain";
    case QuestionType::kCorrect: return "correct";
  }
  return "explain";
}

std::optional<QuestionType> parse_question_type(std::string_view s) {
  for (QuestionType t : {QuestionType::kDetect, QuestionType::kIdentify, QuestionType::kLocalize,
                         QuestionType::kExplain, QuestionType::kCorrect}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string default_question(QuestionType type) {
  switch (type) {
    case QuestionType::kDetect:
      return "Did the robot successfully complete the task? Answer yes or no, then explain briefly.";
    case QuestionType::kIdentify:
      return "What type of failure occurred in this execution?";
    case QuestionType::kLocalize:
      return "At which frame does the execution first visibly deviate from the intended behavior?";
    case QuestionType::kExplain:
      return "Explain why the execution failed.";
    case QuestionType::kCorrect:
      return "Suggest a high-level correction and a low-level correction for this failure.";
  }
  return {};
}

void validate(const RunConfig& c) {
  if (!(c.fps > 0.0)) bad(fmt::format("fps must be positive, got {}", c.fps));
  kite::validate(c.keyframes);
  kite::validate(c.contact);
  if (!(c.contact.min_confidence >= 0.0 && c.contact.min_confidence <= 1.0)) {
    bad("min_confidence must be in [0,1]");
  }
  if (!(c.relation_tolerance >= 0.0)) bad("relation_tolerance must be >= 0");
  if (!(c.tracking.iou_floor > 0.0 && c.tracking.iou_floor <= 1.0)) {
    bad("iou_floor must be in (0,1]");
  }
  if (!(c.clamp_quantile > 0.0 && c.clamp_quantile <= 1.0)) bad("clamp_quantile must be in (0,1]");
  if (!(c.vlm_timeout_s > 0.0)) bad("vlm timeout must be positive");
  if (!(c.backend_timeout_s > 0.0)) bad("backend timeout must be positive");
  if (c.parallelism < 1) bad("parallelism must be >= 1");
  parse_backend_spec(c.ovd);
  parse_backend_spec(c.depth);
  parse_backend_spec(c.vlm);
}

std::string run_config_json(const RunConfig& c) {
  json doc = {{"fps", c.fps},
              {"budget", c.keyframes.budget},
              {"nms_window", c.keyframes.nms_window},
              {"keyframe_mode", std::string(mode_name(c.keyframes.mode))},
              {"no_bev", c.no_bev},
              {"tau_iou", c.contact.tau_iou},
              {"tau_d", c.contact.tau_d},
              {"min_confidence", c.contact.min_confidence},
              {"relation_tolerance", c.relation_tolerance},
              {"iou_floor", c.tracking.iou_floor},
              {"clamp_quantile", c.clamp_quantile},
              {"vocabulary", c.vocabulary},
              {"ovd", c.ovd},
              {"depth", c.depth},
              {"vlm", c.vlm},
              {"vlm_model", c.vlm_model},
              {"vlm_timeout", c.vlm_timeout_s},
              {"backend_timeout", c.backend_timeout_s},
              {"parallelism", c.parallelism},
              {"question_type", std::string(to_string(c.question_type))},
              {"question", c.question}};
  doc["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return doc.dump(2) + "\n";
}

BackendSpec parse_backend_spec(std::string_view text) {
  if (text == "mock") return {BackendKind::kMock, ""};
  if (text.starts_with("mock:") && text.size() > 5) {
    return {BackendKind::kMock, std::string(text.substr(5))};
  }
  if (text.starts_with("dir:") && text.size() > 4) {
    return {BackendKind::kDirectory, std::string(text.substr(4))};
  }
  if (text.starts_with("http://")) return {BackendKind::kHttp, std::string(text)};
  bad(fmt::format("backend must be mock, mock:<script>, dir:<path> or http://..., got '{}'", text));
}

std::vector<Keyframe> extract_keyframes(const FrameSource& source,
                                        std::span<const SelectedFrame> selected) {
  std::vector<Keyframe> out;
  for (const SelectedFrame& s : selected) {
    Frame frame = source.read_frame(s.frame_index);
    Keyframe k;
    k.frame_index = s.frame_index;
    k.timestamp = frame.timestamp;
    k.reason = s.reason;
    k.image = frame.pixels.width() == kKeyframeSize && frame.pixels.height() == kKeyframeSize
                  ? std::move(frame.pixels)
                  : resize_area(frame.pixels, kKeyframeSize, kKeyframeSize);
    out.push_back(std::move(k));
  }
  return out;
}

Analysis analyze_episode(const FrameSource& source, const RobotProfile& robot,
                         std::optional<std::vector<std::string>> plan, const RunConfig& config,
                         DetectionBackend& detector, DepthBackend& depth) {
  validate(config);
  Analysis a;
  a.curve = saliency_series(source, config.keyframes);
  const auto selected = select_keyframes(a.curve, config.keyframes);
  std::vector<Keyframe> keyframes = extract_keyframes(source, selected);

  const auto vocabulary = effective_vocabulary(config, robot);
  PerceptionOutput perceived = perceive_keyframes(keyframes, detector, depth, vocabulary,
                                                  config.clamp_quantile, config.parallelism);
  TrackingResult tracked = link_tracks(std::move(perceived.detections), config.tracking);

  EpisodeEvidence& e = a.evidence;
  e.meta = source.meta();
  e.robot = robot;
  e.plan_steps = std::move(plan);
  e.contacts = episode_contacts(tracked.detections, robot, config.contact);
  for (std::size_t k = 0; k < keyframes.size(); ++k) {
    a.local_graphs.push_back(build_local_graph(tracked.detections[k], static_cast<int>(k),
                                               CameraModel{}, config.relation_tolerance));
  }
  e.global_graph = aggregate_global(a.local_graphs, tracked.tracks);
  e.local_graphs = a.local_graphs;

  std::vector<RgbImage> bevs;
  for (std::size_t k = 0; k < keyframes.size(); ++k) {
    const int ord = static_cast<int>(k);
    a.overlays.push_back(overlay_keyframe(keyframes[k], tracked.detections[k], ord));
    if (!config.no_bev) {
      bevs.push_back(render_bev_image(a.local_graphs[k], keyframes[k].timestamp, ord));
      e.bev_images.push_back(encode_png(bevs.back()));
    }
  }
  e.keyframes = std::move(keyframes);
  e.detections = std::move(tracked.detections);
  e.tracks = std::move(tracked.tracks);

  a.validation.budget = config.keyframes.budget;
  a.validation.contact_analysis = !robot.gripper_class_labels.empty();
  a.context = serialize_context(e, a.validation);
  a.storyboard = config.no_bev ? encode_png(render_filmstrip_image(a.overlays))
                               : render_storyboard(a.overlays, bevs);
  return a;
}

std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err,
        const EnvLookup& env) {
  CLI::App app{"Keyframe-indexed evidence builder for robot failure analysis", "kite"};
  app.require_subcommand(1);
  // One flag set per subcommand: CLI11 binds options to these addresses.
  Flags kf, an, sim, nar, cfg;

  auto* keyframes = app.add_subcommand("keyframes", "Select motion keyframes from a frame source");
  keyframes->add_option("--frames", kf.frames, "Frame directory or TSV manifest")->required();
  keyframes->add_option("--out", kf.out, "Output directory")->required();
  add_config_flags(keyframes, kf);

  auto* analyze = app.add_subcommand("analyze", "Build the evidence bundle and query the VLM");
  analyze->add_option("--frames", an.frames, "Frame directory or TSV manifest")->required();
  analyze->add_option("--robot-profile", an.robot_profile, "Robot profile JSON")->required();
  analyze->add_option("--plan", an.plan, "Plan file, one step per line");
  analyze->add_option("--out", an.out, "Output directory")->required();
  add_config_flags(analyze, an);
  add_backend_flags(analyze, an);
  add_vlm_flags(analyze, an);
  an.opts["no_bev"] = analyze->add_flag("--no-bev", an.no_bev, "Drop pseudo-BEV images");

  auto* simulate = app.add_subcommand("simulate", "Render a scripted synthetic episode");
  simulate->add_option("--spec", sim.spec, "Scenario spec JSON")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_flag("--no-perception", sim.no_perception, "Skip the perception records");
  sim.opts["seed"] = simulate->add_option("--seed", sim.seed, "Override the spec seed");

  auto* narrate = app.add_subcommand("narrate", "Ask the VLM for a causal narrative");
  narrate->add_option("--evidence", nar.evidence, "Output directory of a previous analyze run")
      ->required();
  narrate->add_option("--out", nar.out, "Where to write narrative.txt (default: evidence dir)");
  nar.opts["config"] = narrate->add_option("--config", nar.config, "JSON run configuration");
  nar.opts["vlm"] = narrate->add_option("--vlm", nar.vlm, "VLM backend: mock[:script] or URL");

  auto* config = app.add_subcommand("config", "Print the resolved run configuration");
  add_config_flags(config, cfg);
  add_backend_flags(config, cfg);
  add_vlm_flags(config, cfg);
  cfg.opts["no_bev"] = config->add_flag("--no-bev", cfg.no_bev, "Drop pseudo-BEV images");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (simulate->parsed()) {
      return cmd_simulate(sim, sim.set("seed") ? std::optional(sim.seed) : std::nullopt, out);
    }
    if (keyframes->parsed()) return cmd_keyframes(kf, resolve(kf, env), out);
    if (analyze->parsed()) return cmd_analyze(an, resolve(an, env), out);
    if (narrate->parsed()) return cmd_narrate(nar, resolve(nar, env), out);
    out << run_config_json(resolve(cfg, env));
    return kExitOk;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "[cli] " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace kite::cli
