#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kite/backend.hpp"
#include "kite/serializer.hpp"

namespace kite {

enum class VlmKind { kHttpChat, kMock };

struct VlmBackendRef {
  VlmKind kind = VlmKind::kMock;
  std::string endpoint;     // full URL for kHttpChat; script path (optional) for kMock
  std::string model_name;
  double timeout_s = 120.0;
  RetryPolicy retry;
};

class VlmBackend {
 public:
  virtual ~VlmBackend() = default;
  /// One completion for the bundle. Errors: kTimeout, kBackendUnreachable,
  /// kBackendMalformed.
  virtual std::string query(const PromptBundle& bundle) = 0;
};

/// Scripted replies keyed by fnv1a_hex(question), with an optional default.
class MockVlmBackend final : public VlmBackend {
 public:
  MockVlmBackend() = default;
  /// Loads `{"responses": {"<fnv1a hex of question>": "...", ...}, "default": "..."}`.
  static std::unique_ptr<MockVlmBackend> from_script_file(const std::filesystem::path& path);
  static std::string key_for(std::string_view question);

  void script(std::string_view question, std::string response);
  void script_default(std::string response);
  int calls() const noexcept { return calls_.load(); }
  /// Image count of the most recent bundle.
  std::size_t last_image_count() const noexcept { return last_images_.load(); }

  std::string query(const PromptBundle& bundle) override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::string> responses_;
  std::optional<std::string> fallback_;
  std::atomic<int> calls_{0};
  std::atomic<std::size_t> last_images_{0};
};

/// POST {model, messages:[{role:"user", content:[{type:"image", image:<b64 png>}...,
/// {type:"text", text}]}]}; reads choices[0].message.content.
class HttpChatBackend final : public VlmBackend {
 public:
  explicit HttpChatBackend(VlmBackendRef ref);
  std::string query(const PromptBundle& bundle) override;

 private:
  VlmBackendRef ref_;
};

/// A mock without a script answers every question with a fixed sentence.
std::unique_ptr<VlmBackend> make_vlm_backend(const VlmBackendRef& ref);

std::string chat_request_json(const PromptBundle& bundle, std::string_view model_name);
/// Errors: kBackendMalformed for an empty body, missing fields or empty content.
std::string parse_chat_response(std::string_view body);

// --- failure localization --------------------------------------------------

inline constexpr std::size_t kMaxLocalizationCandidates = 3;

struct LocalizationCandidate {
  int frame_num = 0;
  double confidence = 0.0;

  friend bool operator==(const LocalizationCandidate&, const LocalizationCandidate&) = default;
};

struct LocalizationResult {
  /// At most three, sorted by descending confidence then ascending frame.
  std::vector<LocalizationCandidate> candidates;
  std::vector<int> dropped_frames;  // frame_num values outside valid_frames
  bool clamped = false;             // some confidence was outside [0,1]
  std::string raw_text;
};

/// Appends the strict-JSON answer instruction to a localization question.
std::string localization_question(std::string_view question);

/// Finds the first JSON object in `raw` (inside a ``` fence when present,
/// otherwise anywhere in surrounding prose), validates the candidates
/// schema, clamps confidences, drops frames outside `valid_frames`,
/// deduplicates frames, sorts and keeps the top three.
/// Errors: kNoJsonFound, kSchemaViolation.
LocalizationResult parse_localization(std::string_view raw, std::span<const int> valid_frames);

/// `{"candidates":[{"frame_num":..,"confidence":..}, ...]}`
std::string localization_json(const LocalizationResult& result);

/// Errors: kNoCandidates.
LocalizationCandidate top_candidate(const LocalizationResult& result);

// --- narrative ---------------------------------------------------------------

struct Narrative {
  std::string text;
  std::vector<int> referenced_keyframes;
  std::string high_level_correction;
  std::string low_level_correction;
};

std::string_view narrative_instruction();

/// Pulls `KF <int>` references (restricted to `keyframe_indices` when it is
/// non-empty) and the text after "High-level:" / "Low-level:".
Narrative extract_narrative(std::string text, std::span<const int> keyframe_indices);

/// Sends the context plus the storyboard with the narrative instruction.
Narrative request_narrative(VlmBackend& backend, const KiteContext& context,
                            const PngBytes& storyboard, std::span<const int> keyframe_indices);

}  // namespace kite
