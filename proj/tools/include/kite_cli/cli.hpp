#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kite/backend.hpp"
#include "kite/contact.hpp"
#include "kite/ingest.hpp"
#include "kite/perception.hpp"
#include "kite/saliency.hpp"
#include "kite/scene_graph.hpp"
#include "kite/serializer.hpp"
#include "kite/vlm.hpp"

namespace kite::cli {

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitBackend = 3, kExitNoLocalization = 4 };

enum class QuestionType { kDetect, kIdentify, kLocalize, kExplain, kCorrect };

std::string_view to_string(QuestionType type);
std::optional<QuestionType> parse_question_type(std::string_view s);
std::string default_question(QuestionType type);

/// Every tunable of a run. Resolution order: env var > flag > config file > default.
struct RunConfig {
  double fps = 10.0;
  KeyframeSelectionParams keyframes;
  ContactParams contact;
  TrackingParams tracking;
  double relation_tolerance = kDefaultRelationTolerance;
  double clamp_quantile = 0.8;
  bool no_bev = false;
  std::vector<std::string> vocabulary;
  std::string ovd = "mock";
  std::string depth = "mock";
  std::string vlm = "mock";
  std::string vlm_model = "qwen2.5-vl-7b-instruct";
  double vlm_timeout_s = 120.0;
  double backend_timeout_s = 30.0;
  int parallelism = 4;
  std::optional<std::uint64_t> seed;
  QuestionType question_type = QuestionType::kExplain;
  std::string question;
};

/// Throws Error(kInvalidArgument) when any module parameter is out of range.
void validate(const RunConfig& config);
std::string run_config_json(const RunConfig& config);

/// `mock`, `mock:<script>`, `dir:<path>` or an http:// URL.
struct BackendSpec {
  BackendKind kind = BackendKind::kMock;
  std::string target;
};
BackendSpec parse_backend_spec(std::string_view text);

std::vector<Keyframe> extract_keyframes(const FrameSource& source,
                                        std::span<const SelectedFrame> selected);

struct Analysis {
  SaliencyCurve curve;
  EpisodeEvidence evidence;
  std::vector<RgbImage> overlays;
  std::vector<SceneGraph> local_graphs;
  ValidationOptions validation;
  KiteContext context;
  PngBytes storyboard;
};

/// Everything up to and including the serialized context and storyboard.
Analysis analyze_episode(const FrameSource& source, const RobotProfile& robot,
                         std::optional<std::vector<std::string>> plan, const RunConfig& config,
                         DetectionBackend& detector, DepthBackend& depth);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
std::optional<std::string> process_env(const char* name);

/// `args` excludes the program name. Returns the process exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env);

}  // namespace kite::cli
