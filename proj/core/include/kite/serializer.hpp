#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kite/error.hpp"
#include "kite/model.hpp"

namespace kite {

struct SectionOffset {
  std::string tag;      // "ROBOT", "PLAN", "KF", "CONTACT", "GLOBAL_SCENE"
  std::size_t offset;   // byte offset of the line start
};

/// The serialized evidence prefix. Line grammar, in order:
///
///   [ROBOT] <name>; arms=<n>; grippers=<n>; ee=<csv>; sensors=<csv>; workspace=<note>
///   [PLAN] <step> | <step> | ...                      (only with plan steps)
///   [KF <frame> @ <t.2f>s] dets=<class>#<id>(<s.2f>),...  (one per keyframe)
///   [CONTACT <k>-><k+1>] GAIN|LOSS|STABLE             (one per keyframe pair)
///   [GLOBAL_SCENE]
///   obj#<a> <class> <relation> obj#<b> <class> (persist <n>/<M>)
struct KiteContext {
  std::string text;
  std::vector<SectionOffset> sections;
};

/// Errors: kInvalidEvidence when validate_evidence reports violations.
KiteContext serialize_context(const EpisodeEvidence& evidence,
                              const ValidationOptions& options = {});

inline constexpr std::string_view kBevDisclaimer =
    "The pseudo-BEV images are schematic top-down layouts, not to scale; use them only for "
    "relative spatial reasoning.";

enum class ImageRole { kRgbOverlay, kBev, kStoryboard };

struct PromptImage {
  ImageRole role = ImageRole::kRgbOverlay;
  int keyframe_ordinal = 0;
  PngBytes png;
};

struct PromptBundle {
  std::vector<PromptImage> images;
  std::string text;      // context + disclaimer + question
  std::string question;  // the bare question, for backends that key on it
};

struct PromptOptions {
  bool include_bev = true;
};

/// Images interleaved [rgb_0, bev_0, rgb_1, bev_1, ...] (RGB only when
/// include_bev is false). Errors: kEmptyQuestion, kMissingImages.
PromptBundle build_prompt(const KiteContext& context, std::string_view question,
                          const EpisodeEvidence& evidence, const PromptOptions& options = {});

/// What parse_context recovers from a context string.
struct ContextEcho {
  std::vector<std::pair<int, double>> keyframes;  // (frame index, seconds)
  std::vector<ContactLabel> contacts;
  std::size_t edge_count = 0;
  bool has_plan = false;
};

class GrammarError : public Error {
 public:
  GrammarError(int line, const std::string& message);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Throws GrammarError (code kGrammarViolation) with a 1-based line number.
ContextEcho parse_context(std::string_view text);

/// Replaces CR/LF inside a field with spaces.
std::string sanitize_field(std::string_view field);

}  // namespace kite
