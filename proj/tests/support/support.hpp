#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kite/error.hpp"
#include "kite/model.hpp"
#include "kite/synthetic.hpp"

namespace httplib {
class Server;
}

namespace kite::testing {

std::filesystem::path fixtures_dir();
std::filesystem::path golden_dir();
/// True when goldens should be rewritten instead of compared.
bool update_goldens();

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);

/// Empty string when both trees hold the same files with the same bytes,
/// otherwise a description of the first difference.
std::string compare_trees(const std::filesystem::path& a, const std::filesystem::path& b);

/// Compares against tests/golden/<name>, or rewrites it in update mode.
/// Returns an empty string on match.
std::string check_golden(const std::string& name, const std::vector<std::uint8_t>& bytes);
std::string check_golden(const std::string& name, const std::string& text);

/// Uniform integer in [lo, hi] from raw engine output.
int rand_int(std::mt19937_64& rng, int lo, int hi);
double rand_unit(std::mt19937_64& rng);

/// T = 200 frames, 3..8 bursts of 3..6 frames separated by at least 12 static frames.
ScenarioSpec recall_scenario(std::uint64_t seed);
/// Static two-actor scene of `frames` frames with one burst when long enough.
ScenarioSpec scaling_scenario(int frames);
/// Gripper moves onto the cup between the 3rd and 4th keyframes of an 8-keyframe grid.
ScenarioSpec grasp_scenario();
/// Gripper holds the cup and then pulls away from it.
ScenarioSpec drop_scenario();

Detection make_detection(const std::string& label, Box box, double confidence,
                         std::optional<int> id = std::nullopt,
                         std::optional<double> median_depth = std::nullopt);

/// A valid bundle with random keyframes, detections, tracks, contacts and graphs.
EpisodeEvidence random_evidence(std::mt19937_64& rng, bool with_plan);

/// Two keyframes, one GAIN contact, one persistent edge.
EpisodeEvidence fixture_evidence();

/// Storyboard of the fixture bundle: RGB overlays above their BEVs.
PngBytes fixture_storyboard();

/// Three fixed scene graphs used for the BEV goldens.
SceneGraph fixture_graph(int which);

struct LocalizationCase {
  std::string name;
  std::string raw;
  std::vector<int> valid_frames;
  /// (frame, confidence) pairs, ignored when an error is expected.
  std::vector<std::pair<int, double>> expected;
  std::optional<ErrorCode> error;
  std::vector<int> dropped;
  bool clamped = false;
};

/// The twelve localization parsing cases shared by the unit and acceptance suites.
std::vector<LocalizationCase> localization_cases();

/// Runs an httplib server on a free loopback port until destroyed.
class TestServer {
 public:
  using Setup = std::function<void(httplib::Server&)>;
  explicit TestServer(const Setup& setup);
  ~TestServer();
  std::string url() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace kite::testing
