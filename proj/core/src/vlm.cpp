#include "kite/vlm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "http_client.hpp"
#include "json.hpp"
#include "kite/codec.hpp"
#include "kite/error.hpp"

namespace kite {

using nlohmann::json;

namespace {

constexpr const char* kModule = "vlm-interface";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Index just past the '}' closing the object opened at `open`, or npos.
std::size_t match_object(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<json> first_object(std::string_view s) {
  for (std::size_t open = s.find('{'); open != std::string_view::npos;
       open = s.find('{', open + 1)) {
    const std::size_t close = match_object(s, open);
    if (close == std::string_view::npos) continue;
    json doc = json::parse(s.substr(open, close - open), nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) return doc;
  }
  return std::nullopt;
}

// Contents of the first ``` fenced block, without the info string.
std::optional<std::string_view> fenced_block(std::string_view raw) {
  const auto open = raw.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto body = raw.find('\n', open + 3);
  if (body == std::string_view::npos) return std::nullopt;
  ++body;
  const auto close = raw.find("```", body);
  return raw.substr(body, close == std::string_view::npos ? std::string_view::npos : close - body);
}

// Case-insensitive search.
std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from = 0) {
  if (needle.size() > hay.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size() && ok; ++j) {
      ok = std::tolower(static_cast<unsigned char>(hay[i + j])) ==
           std::tolower(static_cast<unsigned char>(needle[j]));
    }
    if (ok) return i;
  }
  return std::string_view::npos;
}

std::string extract_after(std::string_view text, std::string_view label, std::string_view stop) {
  const auto at = find_ci(text, label);
  if (at == std::string_view::npos) return {};
  const auto start = at + label.size();
  auto end = text.find('\n', start);
  if (end == std::string_view::npos) end = text.size();
  const auto other = find_ci(text.substr(0, end), stop, start);
  if (other != std::string_view::npos) end = other;
  return trim(text.substr(start, end - start));
}

}  // namespace

// --- backends ----------------------------------------------------------------

std::unique_ptr<MockVlmBackend> MockVlmBackend::from_script_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("mock VLM script {} is not a JSON object", path.string()));
  }
  auto backend = std::make_unique<MockVlmBackend>();
  if (doc.contains("responses")) {
    if (!doc["responses"].is_object()) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "'responses' must be an object");
    }
    for (const auto& [key, value] : doc["responses"].items()) {
      if (!value.is_string()) {
        throw Error(ErrorCode::kInvalidArgument, kModule, "scripted responses must be strings");
      }
      std::lock_guard lock(backend->mutex_);
      backend->responses_[key] = value.get<std::string>();
    }
  }
  if (doc.contains("default")) {
    if (!doc["default"].is_string()) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "'default' must be a string");
    }
    backend->script_default(doc["default"].get<std::string>());
  }
  return backend;
}

std::string MockVlmBackend::key_for(std::string_view question) { return fnv1a_hex(question); }

void MockVlmBackend::script(std::string_view question, std::string response) {
  std::lock_guard lock(mutex_);
  responses_[key_for(question)] = std::move(response);
}

void MockVlmBackend::script_default(std::string response) {
  std::lock_guard lock(mutex_);
  fallback_ = std::move(response);
}

std::string MockVlmBackend::query(const PromptBundle& bundle) {
  ++calls_;
  last_images_ = bundle.images.size();
  std::lock_guard lock(mutex_);
  if (const auto it = responses_.find(key_for(bundle.question)); it != responses_.end()) {
    return it->second;
  }
  if (fallback_) return *fallback_;
  throw Error(ErrorCode::kBackendMalformed, kModule,
              fmt::format("no scripted response for question key {}", key_for(bundle.question)));
}

HttpChatBackend::HttpChatBackend(VlmBackendRef ref) : ref_(std::move(ref)) {
  if (!(ref_.timeout_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "timeout must be positive");
  }
  detail::split_url(ref_.endpoint, kModule);
}

std::string HttpChatBackend::query(const PromptBundle& bundle) {
  const std::string body =
      detail::post_json(ref_.endpoint, chat_request_json(bundle, ref_.model_name), ref_.retry,
                        ref_.timeout_s, kModule, ErrorCode::kTimeout);
  return parse_chat_response(body);
}

std::unique_ptr<VlmBackend> make_vlm_backend(const VlmBackendRef& ref) {
  if (ref.kind == VlmKind::kHttpChat) return std::make_unique<HttpChatBackend>(ref);
  if (ref.endpoint.empty()) {
    auto mock = std::make_unique<MockVlmBackend>();
    mock->script_default("No scripted response is configured for this question.");
    return mock;
  }
  return MockVlmBackend::from_script_file(ref.endpoint);
}

std::string chat_request_json(const PromptBundle& bundle, std::string_view model_name) {
  json content = json::array();
  for (const PromptImage& img : bundle.images) {
    content.push_back({{"type", "image"}, {"image", base64_encode(img.png)}});
  }
  content.push_back({{"type", "text"}, {"text", bundle.text}});
  json request = {{"model", std::string(model_name)},
                  {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
  return request.dump();
}

std::string parse_chat_response(std::string_view body) {
  if (trim(body).empty()) {
    throw Error(ErrorCode::kBackendMalformed, kModule, "empty response body");
  }
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kBackendMalformed, kModule, "response body is not JSON");
  }
  const json* content = nullptr;
  if (doc.is_object() && doc.contains("choices") && doc["choices"].is_array() &&
      !doc["choices"].empty()) {
    const json& first = doc["choices"][0];
    if (first.is_object() && first.contains("message") && first["message"].is_object() &&
        first["message"].contains("content")) {
      content = &first["message"]["content"];
    }
  }
  if (content == nullptr || !content->is_string() || content->get<std::string>().empty()) {
    throw Error(ErrorCode::kBackendMalformed, kModule,
                "response lacks a non-empty choices[0].message.content");
  }
  return content->get<std::string>();
}

// --- localization -------------------------------------------------------------

std::string localization_question(std::string_view question) {
  return fmt::format(
      "{}\nAnswer with strict JSON only, no prose: "
      "{{\"candidates\":[{{\"frame_num\": INT, \"confidence\": FLOAT}}, ...]}} "
      "listing up to three candidate frame numbers with confidences in [0,1].",
      question);
}

LocalizationResult parse_localization(std::string_view raw, std::span<const int> valid_frames) {
  std::optional<json> doc;
  if (const auto fence = fenced_block(raw)) doc = first_object(*fence);
  if (!doc) doc = first_object(raw);
  if (!doc) {
    throw Error(ErrorCode::kNoJsonFound, kModule, "no JSON object in response");
  }
  if (!doc->contains("candidates") || !(*doc)["candidates"].is_array()) {
    throw Error(ErrorCode::kSchemaViolation, kModule, "expected a 'candidates' array");
  }

  LocalizationResult result;
  result.raw_text = std::string(raw);
  const std::set<int> valid(valid_frames.begin(), valid_frames.end());
  std::vector<LocalizationCandidate> kept;
  for (const json& c : (*doc)["candidates"]) {
    if (!c.is_object() || !c.contains("frame_num") || !c.contains("confidence")) {
      throw Error(ErrorCode::kSchemaViolation, kModule,
                  "each candidate needs 'frame_num' and 'confidence'");
    }
    if (!c["frame_num"].is_number_integer() || !c["confidence"].is_number()) {
      throw Error(ErrorCode::kSchemaViolation, kModule,
                  "'frame_num' must be an integer and 'confidence' a number");
    }
    const int frame = c["frame_num"].get<int>();
    double conf = c["confidence"].get<double>();
    if (!(conf >= 0.0 && conf <= 1.0)) {
      result.clamped = true;
      conf = std::isnan(conf) ? 0.0 : std::clamp(conf, 0.0, 1.0);
    }
    if (!valid.contains(frame)) {
      result.dropped_frames.push_back(frame);
      continue;
    }
    kept.push_back({frame, conf});
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.confidence != b.confidence ? a.confidence > b.confidence : a.frame_num < b.frame_num;
  });
  std::set<int> seen;
  for (const auto& c : kept) {
    if (result.candidates.size() >= kMaxLocalizationCandidates) break;
    if (seen.insert(c.frame_num).second) result.candidates.push_back(c);
  }
  return result;
}

std::string localization_json(const LocalizationResult& result) {
  json arr = json::array();
  for (const auto& c : result.candidates) {
    arr.push_back({{"frame_num", c.frame_num}, {"confidence", c.confidence}});
  }
  return json{{"candidates", arr}}.dump();
}

LocalizationCandidate top_candidate(const LocalizationResult& result) {
  if (result.candidates.empty()) {
    throw Error(ErrorCode::kNoCandidates, kModule, "localization has no candidates");
  }
  return result.candidates.front();
}

// --- narrative ------------------------------------------------------------------

std::string_view narrative_instruction() {
  return "Using the evidence above and the attached storyboard (top row: RGB keyframes with "
         "detections, bottom row: matching pseudo-BEV layouts), write a concise causal narrative "
         "of the execution and of what went wrong. Refer to keyframes as \"KF <frame index>\" "
         "and mention their timestamps. Finish with one line starting \"High-level:\" giving a "
         "task-level correction and one line starting \"Low-level:\" giving a motion-level "
         "correction.";
}

Narrative extract_narrative(std::string text, std::span<const int> keyframe_indices) {
  static const std::regex kRef(R"(\bKF\s+(\d+))");
  Narrative n;
  const std::set<int> allowed(keyframe_indices.begin(), keyframe_indices.end());
  std::set<int> seen;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kRef); it != std::sregex_iterator();
       ++it) {
    int id = 0;
    try {
      id = std::stoi((*it)[1].str());
    } catch (const std::out_of_range&) {
      continue;
    }
    if (!allowed.empty() && !allowed.contains(id)) continue;
    if (seen.insert(id).second) n.referenced_keyframes.push_back(id);
  }
  n.high_level_correction = extract_after(text, "High-level:", "Low-level:");
  n.low_level_correction = extract_after(text, "Low-level:", "High-level:");
  n.text = std::move(text);
  return n;
}

Narrative request_narrative(VlmBackend& backend, const KiteContext& context,
                            const PngBytes& storyboard, std::span<const int> keyframe_indices) {
  PromptBundle bundle;
  bundle.images.push_back({ImageRole::kStoryboard, 0, storyboard});
  bundle.question = std::string(narrative_instruction());
  bundle.text = context.text;
  if (!bundle.text.empty() && bundle.text.back() != '\n') bundle.text += '\n';
  bundle.text += kBevDisclaimer;
  bundle.text += '\n';
  bundle.text += bundle.question;
  return extract_narrative(backend.query(bundle), keyframe_indices);
}

}  // namespace kite
