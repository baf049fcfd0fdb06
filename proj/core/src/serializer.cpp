#include "kite/serializer.hpp"

#include <charconv>
#include <map>
#include <regex>

#include <fmt/format.h>

#include "kite/bev.hpp"
#include "kite/codec.hpp"

namespace kite {

namespace {

constexpr const char* kModule = "evidence-serializer";

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += sanitize_field(parts[i]);
  }
  return out;
}

int to_int(const std::string& s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

std::string sanitize_field(std::string_view field) {
  std::string out(field);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

KiteContext serialize_context(const EpisodeEvidence& e, const ValidationOptions& options) {
  const auto violations = validate_evidence(e, options);
  if (!violations.empty()) {
    std::string summary;
    for (const Violation& v : violations) {
      summary += fmt::format("{}{} ({})", summary.empty() ? "" : "; ", v.code, v.detail);
    }
    throw Error(ErrorCode::kInvalidEvidence, kModule, summary);
  }

  KiteContext ctx;
  auto line = [&ctx](std::string_view tag, const std::string& text) {
    ctx.sections.push_back({std::string(tag), ctx.text.size()});
    ctx.text += text;
    ctx.text += '\n';
  };

  const RobotProfile& r = e.robot;
  line("ROBOT", fmt::format("[ROBOT] {}; arms={}; grippers={}; ee={}; sensors={}; workspace={}",
                            sanitize_field(r.name), r.num_arms, r.num_grippers,
                            join(r.end_effector_types, ","), join(r.sensors, ","),
                            sanitize_field(r.workspace_note)));
  if (e.plan_steps) line("PLAN", fmt::format("[PLAN] {}", join(*e.plan_steps, " | ")));

  for (std::size_t k = 0; k < e.keyframes.size(); ++k) {
    const Keyframe& kf = e.keyframes[k];
    std::string dets;
    for (const Detection& d : e.detections[k]) {
      if (!dets.empty()) dets += ',';
      dets += fmt::format("{}#{}({:.2f})", sanitize_field(d.class_label), d.instance_id.value_or(0),
                          d.confidence);
    }
    line("KF", fmt::format("[KF {} @ {:.2f}s] dets={}", kf.frame_index, kf.timestamp, dets));
  }
  for (const ContactTransition& c : e.contacts) {
    line("CONTACT", fmt::format("[CONTACT {}->{}] {}", c.from_keyframe, c.to_keyframe,
                                to_string(c.label)));
  }

  line("GLOBAL_SCENE", "[GLOBAL_SCENE]");
  std::map<int, std::string> classes;
  for (const Track& t : e.tracks) classes[t.instance_id] = sanitize_field(t.class_label);
  for (const GlobalNode& n : e.global_graph.nodes) {
    classes.emplace(n.instance_id, sanitize_field(n.class_label));
  }
  const std::size_t m = e.keyframes.size();
  for (const PersistentEdge& pe : e.global_graph.edges) {
    const SceneEdge& edge = pe.edge;
    ctx.text += fmt::format("obj#{} {} {} obj#{} {} (persist {}/{})\n", edge.subject_id,
                            classes[edge.subject_id], to_string(edge.relation), edge.object_id,
                            classes[edge.object_id], pe.persistence, m);
  }
  return ctx;
}

PromptBundle build_prompt(const KiteContext& context, std::string_view question,
                          const EpisodeEvidence& e, const PromptOptions& options) {
  if (question.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::kEmptyQuestion, kModule, "question is empty");
  }
  if (e.keyframes.empty() || e.detections.size() != e.keyframes.size()) {
    throw Error(ErrorCode::kMissingImages, kModule, "evidence has no keyframe overlays");
  }
  if (options.include_bev && e.bev_images.size() != e.keyframes.size()) {
    throw Error(ErrorCode::kMissingImages, kModule,
                fmt::format("{} BEV images for {} keyframes", e.bev_images.size(),
                            e.keyframes.size()));
  }

  PromptBundle bundle;
  for (std::size_t k = 0; k < e.keyframes.size(); ++k) {
    const int ordinal = static_cast<int>(k);
    bundle.images.push_back(
        {ImageRole::kRgbOverlay, ordinal,
         encode_png(overlay_keyframe(e.keyframes[k], e.detections[k], ordinal))});
    if (options.include_bev) bundle.images.push_back({ImageRole::kBev, ordinal, e.bev_images[k]});
  }
  bundle.question = std::string(question);
  bundle.text = context.text;
  if (!bundle.text.empty() && bundle.text.back() != '\n') bundle.text += '\n';
  bundle.text += kBevDisclaimer;
  bundle.text += '\n';
  bundle.text += question;
  return bundle;
}

GrammarError::GrammarError(int line, const std::string& message)
    : Error(ErrorCode::kGrammarViolation, kModule, fmt::format("line {}: {}", line, message)),
      line_(line) {}

ContextEcho parse_context(std::string_view text) {
  static const std::regex kRobot(
      R"(\[ROBOT\] .*; arms=\d+; grippers=\d+; ee=.*; sensors=.*; workspace=.*)");
  static const std::regex kPlan(R"(\[PLAN\] .*)");
  static const std::regex kKeyframe(R"(\[KF (\d+) @ (\d+(?:\.\d+)?)s\] dets=(.*))");
  static const std::regex kDet(R"([^,]+#\d+\(\d+(?:\.\d+)?\))");
  static const std::regex kContact(R"(\[CONTACT (\d+)->(\d+)\] (\S+))");
  static const std::regex kGlobal(R"(\[GLOBAL_SCENE\])");
  static const std::regex kEdge(
      R"(obj#(\d+) .+ (left_of|above|in_front_of) obj#(\d+) .+ \(persist (\d+)/(\d+)\))");

  enum class Stage { kRobot, kPlan, kKeyframes, kContacts, kScene };
  Stage stage = Stage::kRobot;
  ContextEcho echo;
  std::smatch m;

  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::size_t end = eol == std::string_view::npos ? text.size() : eol;
    const std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;

    if (stage == Stage::kRobot) {
      if (!std::regex_match(line, kRobot)) throw GrammarError(line_no, "expected [ROBOT] line");
      stage = Stage::kPlan;
      continue;
    }
    if (stage == Stage::kPlan && line.rfind("[PLAN]", 0) == 0) {
      if (!std::regex_match(line, kPlan)) throw GrammarError(line_no, "malformed [PLAN] line");
      echo.has_plan = true;
      stage = Stage::kKeyframes;
      continue;
    }
    if (stage <= Stage::kKeyframes && line.rfind("[KF", 0) == 0) {
      if (!std::regex_match(line, m, kKeyframe)) {
        throw GrammarError(line_no, "malformed keyframe tag");
      }
      const std::string dets = m[3].str();
      if (!dets.empty()) {
        std::size_t start = 0;
        while (start <= dets.size()) {
          const std::size_t comma = dets.find(',', start);
          const std::string item =
              dets.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
          if (!std::regex_match(item, kDet)) {
            throw GrammarError(line_no, fmt::format("malformed detection '{}'", item));
          }
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
      }
      echo.keyframes.emplace_back(to_int(m[1].str()), std::stod(m[2].str()));
      stage = Stage::kKeyframes;
      continue;
    }
    if (stage <= Stage::kContacts && line.rfind("[CONTACT", 0) == 0) {
      if (!std::regex_match(line, m, kContact)) {
        throw GrammarError(line_no, "malformed contact tag");
      }
      const int from = to_int(m[1].str());
      const int to = to_int(m[2].str());
      if (to != from + 1) {
        throw GrammarError(line_no, fmt::format("contact spans {}->{}", from, to));
      }
      const auto label = parse_contact_label(m[3].str());
      if (!label) {
        throw GrammarError(line_no, fmt::format("unknown contact token '{}'", m[3].str()));
      }
      echo.contacts.push_back(*label);
      stage = Stage::kContacts;
      continue;
    }
    if (stage < Stage::kScene) {
      if (!std::regex_match(line, kGlobal)) {
        throw GrammarError(line_no, fmt::format("unexpected line '{}'", line));
      }
      stage = Stage::kScene;
      continue;
    }
    if (!std::regex_match(line, kEdge)) {
      throw GrammarError(line_no, fmt::format("malformed scene edge '{}'", line));
    }
    ++echo.edge_count;
  }
  if (stage != Stage::kScene) {
    throw GrammarError(line_no + 1, "missing [GLOBAL_SCENE] section");
  }
  return echo;
}

}  // namespace kite
