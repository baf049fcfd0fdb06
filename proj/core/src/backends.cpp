#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "http_client.hpp"
#include "json.hpp"
#include "kite/codec.hpp"
#include "kite/error.hpp"
#include "kite/perception.hpp"

namespace kite {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kModule = "perception";

DepthRaster gray16_to_depth(const Gray16Raster& g) {
  DepthRaster d(g.width, g.height);
  for (std::size_t i = 0; i < g.values.size(); ++i) d.values[i] = g.values[i] / 65535.0;
  return d;
}

std::vector<RawDetection> parse_detection_array(const json& arr) {
  if (!arr.is_array()) {
    throw Error(ErrorCode::kBackendMalformed, kModule, "'detections' must be an array");
  }
  std::vector<RawDetection> out;
  for (const json& item : arr) {
    if (!item.is_object() || !item.contains("box") || !item.contains("label") ||
        !item.contains("score")) {
      throw Error(ErrorCode::kBackendMalformed, kModule,
                  "each detection needs 'box', 'label' and 'score'");
    }
    const json& box = item["box"];
    if (!box.is_array() || box.size() != 4 ||
        !std::all_of(box.begin(), box.end(), [](const json& v) { return v.is_number(); })) {
      throw Error(ErrorCode::kBackendMalformed, kModule, "'box' must be four numbers");
    }
    if (!item["label"].is_string() || !item["score"].is_number()) {
      throw Error(ErrorCode::kBackendMalformed, kModule, "'label' must be a string, 'score' a number");
    }
    RawDetection d;
    for (std::size_t i = 0; i < 4; ++i) d.box[i] = box[i].get<double>();
    d.label = item["label"].get<std::string>();
    d.score = item["score"].get<double>();
    if (!(d.score >= 0.0 && d.score <= 1.0) ||
        !std::all_of(d.box.begin(), d.box.end(), [](double v) { return std::isfinite(v); })) {
      throw Error(ErrorCode::kBackendMalformed, kModule,
                  fmt::format("detection '{}' has score {} or non-finite box", d.label, d.score));
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string keyframe_png_base64(const Keyframe& kf) {
  return base64_encode(encode_png(kf.image));
}

}  // namespace

std::vector<RawDetection> parse_detection_response(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("detections")) {
    throw Error(ErrorCode::kBackendMalformed, kModule,
                "response is not a JSON object with 'detections'");
  }
  return parse_detection_array(doc["detections"]);
}

std::string detection_response_json(std::span<const RawDetection> detections) {
  json arr = json::array();
  for (const RawDetection& d : detections) {
    arr.push_back({{"box", d.box}, {"label", d.label}, {"score", d.score}});
  }
  return json{{"detections", arr}}.dump();
}

// --- mock -----------------------------------------------------------------

std::unique_ptr<MockDetectionBackend> MockDetectionBackend::from_script_file(const fs::path& p) {
  const auto bytes = read_file_bytes(p);
  json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("mock detection script {} is not a JSON object", p.string()));
  }
  auto backend = std::make_unique<MockDetectionBackend>();
  try {
    if (doc.contains("default")) {
      backend->script_default(parse_detection_array(doc["default"].at("detections")));
    }
    if (doc.contains("frames")) {
      for (const auto& [key, value] : doc["frames"].items()) {
        backend->script(std::stoi(key), parse_detection_array(value.at("detections")));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("mock detection script {}: {}", p.string(), e.what()));
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("mock detection script {}: bad frame key", p.string()));
  }
  return backend;
}

void MockDetectionBackend::script(int frame_index, std::vector<RawDetection> detections) {
  std::lock_guard lock(mutex_);
  scripted_[frame_index] = std::move(detections);
}

void MockDetectionBackend::script_default(std::vector<RawDetection> detections) {
  std::lock_guard lock(mutex_);
  fallback_ = std::move(detections);
}

std::vector<RawDetection> MockDetectionBackend::detect(const Keyframe& keyframe,
                                                       std::span<const std::string>, int) {
  ++calls_;
  std::lock_guard lock(mutex_);
  const auto it = scripted_.find(keyframe.frame_index);
  return it != scripted_.end() ? it->second : fallback_;
}

MockDepthBackend::MockDepthBackend()
    : MockDepthBackend([](const Keyframe& kf) {
        DepthRaster d(kf.image.width(), kf.image.height());
        for (int y = 0; y < d.height; ++y) {
          for (int x = 0; x < d.width; ++x) d.at(x, y) = 1.0 - static_cast<double>(y) / d.height;
        }
        return d;
      }) {}

MockDepthBackend::MockDepthBackend(Generator generator) : generator_(std::move(generator)) {}

DepthRaster MockDepthBackend::estimate(const Keyframe& keyframe) {
  ++calls_;
  return generator_(keyframe);
}

// --- directory ------------------------------------------------------------

DirectoryDetectionBackend::DirectoryDetectionBackend(fs::path dir) : dir_(std::move(dir)) {}

std::vector<RawDetection> DirectoryDetectionBackend::detect(const Keyframe& keyframe,
                                                            std::span<const std::string>, int) {
  const fs::path p = dir_ / fmt::format("{}.det.json", keyframe.frame_index);
  if (!fs::is_regular_file(p)) {
    throw Error(ErrorCode::kMissingRecord, kModule, fmt::format("missing {}", p.string()));
  }
  const auto bytes = read_file_bytes(p);
  return parse_detection_response(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

DirectoryDepthBackend::DirectoryDepthBackend(fs::path dir) : dir_(std::move(dir)) {}

DepthRaster DirectoryDepthBackend::estimate(const Keyframe& keyframe) {
  const fs::path p = dir_ / fmt::format("{}.depth.png", keyframe.frame_index);
  if (!fs::is_regular_file(p)) {
    throw Error(ErrorCode::kMissingRecord, kModule, fmt::format("missing {}", p.string()));
  }
  try {
    return gray16_to_depth(decode_gray16(read_file_bytes(p)));
  } catch (const Error& e) {
    throw Error(ErrorCode::kBackendMalformed, kModule, e.what());
  }
}

// --- http -----------------------------------------------------------------

HttpDetectionBackend::HttpDetectionBackend(std::string endpoint, RetryPolicy retry,
                                           double timeout_s)
    : endpoint_(std::move(endpoint)), retry_(retry), timeout_s_(timeout_s) {}

std::vector<RawDetection> HttpDetectionBackend::detect(const Keyframe& keyframe,
                                                       std::span<const std::string> vocabulary,
                                                       int max_detections) {
  json request = {{"image", keyframe_png_base64(keyframe)},
                  {"vocabulary", std::vector<std::string>(vocabulary.begin(), vocabulary.end())},
                  {"max_detections", max_detections}};
  std::string url = endpoint_;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const std::string body =
      detail::post_json(url + "/detect", request.dump(), retry_, timeout_s_, kModule);
  return parse_detection_response(body);
}

HttpDepthBackend::HttpDepthBackend(std::string endpoint, RetryPolicy retry, double timeout_s)
    : endpoint_(std::move(endpoint)), retry_(retry), timeout_s_(timeout_s) {}

DepthRaster HttpDepthBackend::estimate(const Keyframe& keyframe) {
  json request = {{"image", keyframe_png_base64(keyframe)}};
  std::string url = endpoint_;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const std::string body =
      detail::post_json(url + "/depth", request.dump(), retry_, timeout_s_, kModule);
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("depth_png16") ||
      !doc["depth_png16"].is_string()) {
    throw Error(ErrorCode::kBackendMalformed, kModule,
                "depth response needs a base64 string 'depth_png16'");
  }
  try {
    return gray16_to_depth(decode_gray16(base64_decode(doc["depth_png16"].get<std::string>())));
  } catch (const Error& e) {
    throw Error(ErrorCode::kBackendMalformed, kModule, e.what());
  }
}

std::unique_ptr<DetectionBackend> make_detection_backend(const DetectionBackendRef& ref) {
  switch (ref.kind) {
    case BackendKind::kHttp:
      if (ref.vocabulary.empty()) {
        throw Error(ErrorCode::kInvalidArgument, kModule,
                    "an HTTP detection backend needs a non-empty vocabulary");
      }
      return std::make_unique<HttpDetectionBackend>(ref.endpoint_or_path, ref.retry,
                                                    ref.timeout_s);
    case BackendKind::kDirectory:
      return std::make_unique<DirectoryDetectionBackend>(ref.endpoint_or_path);
    case BackendKind::kMock:
      if (ref.endpoint_or_path.empty()) return std::make_unique<MockDetectionBackend>();
      return MockDetectionBackend::from_script_file(ref.endpoint_or_path);
  }
  throw Error(ErrorCode::kInvalidArgument, kModule, "unknown detection backend kind");
}

std::unique_ptr<DepthBackend> make_depth_backend(const DepthBackendRef& ref) {
  if (!(ref.clamp_quantile > 0.0 && ref.clamp_quantile <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("clamp_quantile must be in (0,1], got {}", ref.clamp_quantile));
  }
  switch (ref.kind) {
    case BackendKind::kHttp:
      return std::make_unique<HttpDepthBackend>(ref.endpoint_or_path, ref.retry, ref.timeout_s);
    case BackendKind::kDirectory:
      return std::make_unique<DirectoryDepthBackend>(ref.endpoint_or_path);
    case BackendKind::kMock:
      return std::make_unique<MockDepthBackend>();
  }
  throw Error(ErrorCode::kInvalidArgument, kModule, "unknown depth backend kind");
}

}  // namespace kite
