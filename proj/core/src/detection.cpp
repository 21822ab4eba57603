#include "drowsy/detection.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "drowsy/error.hpp"

namespace drowsy {

namespace {

constexpr std::array<std::string_view, kDetectionLabelCount> kLabelNames = {
    "face", "opened_eye", "closed_eye", "mouth", "yawn", "eyebrow",
};

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), end);
}

std::uint32_t coordinate(const nlohmann::json& v, std::size_t line) {
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max())
    throw ParseError(line, "box coordinate must be a non-negative 32-bit integer");
  return static_cast<std::uint32_t>(v.get<std::uint64_t>());
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::uint32_t parse_xml_coordinate(const boost::property_tree::ptree& box, const char* key,
                                   std::size_t object) {
  const auto child = box.get_child_optional(key);
  if (!child) throw ParseError("object " + std::to_string(object) + ": missing <" + key + ">");
  const auto text = trim(child->data());
  std::uint32_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw ParseError("object " + std::to_string(object) + ": <" + key +
                     "> is not a non-negative integer: '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::string_view to_string(DetectionLabel label) noexcept {
  return kLabelNames[static_cast<std::size_t>(label)];
}

std::optional<DetectionLabel> parse_label(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i)
    if (kLabelNames[i] == name) return static_cast<DetectionLabel>(i);
  return std::nullopt;
}

bool FrameDetection::contains(DetectionLabel label) const noexcept {
  return std::any_of(detections.begin(), detections.end(),
                     [label](const Detection& d) { return d.label == label; });
}

std::size_t FrameDetection::count(DetectionLabel label) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      detections.begin(), detections.end(), [label](const Detection& d) { return d.label == label; }));
}

FrameDetection parse_detection_record(std::string_view line, std::size_t line_number) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_number, std::string("malformed record: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(line_number, "record is not an object");

  const auto t = doc.find("t");
  if (t == doc.end() || !t->is_number_integer())
    throw ParseError(line_number, "missing or non-integer \"t\"");
  const auto d = doc.find("d");
  if (d == doc.end() || !d->is_array()) throw ParseError(line_number, "missing or non-array \"d\"");

  FrameDetection frame;
  frame.timestamp_ms = t->get<std::int64_t>();
  if (frame.timestamp_ms < 0) throw ParseError(line_number, "negative timestamp");
  frame.detections.reserve(d->size());
  for (const auto& entry : *d) {
    if (!entry.is_array() || entry.size() != 3)
      throw ParseError(line_number, "detection must be [label, box, confidence]");
    if (!entry[0].is_string()) throw ParseError(line_number, "label must be a string");
    const auto name = entry[0].get<std::string>();
    const auto label = parse_label(name);
    if (!label) throw ParseError(line_number, "unknown label '" + name + "'");

    const auto& b = entry[1];
    if (!b.is_array() || b.size() != 4) throw ParseError(line_number, "box must have 4 coordinates");
    BoundingBox box{coordinate(b[0], line_number), coordinate(b[1], line_number),
                    coordinate(b[2], line_number), coordinate(b[3], line_number)};
    if (!box.valid()) throw ParseError(line_number, "degenerate box (min >= max)");

    if (!entry[2].is_number()) throw ParseError(line_number, "confidence must be a number");
    const double confidence = entry[2].get<double>();
    if (!(confidence >= 0.0 && confidence <= 1.0))
      throw ParseError(line_number, "confidence outside [0,1]");

    frame.detections.push_back({*label, box, confidence});
  }
  return frame;
}

std::string format_detection_record(const FrameDetection& frame) {
  std::string out;
  out.reserve(32 + frame.detections.size() * 48);
  out += "{\"t\":";
  out += std::to_string(frame.timestamp_ms);
  out += ",\"d\":[";
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const auto& det = frame.detections[i];
    if (i) out += ',';
    out += "[\"";
    out += to_string(det.label);
    out += "\",[";
    out += std::to_string(det.box.x_min) + ',' + std::to_string(det.box.y_min) + ',' +
           std::to_string(det.box.x_max) + ',' + std::to_string(det.box.y_max);
    out += "],";
    out += format_double(det.confidence);
    out += ']';
  }
  out += "]}";
  return out;
}

std::optional<FrameDetection> DetectionLogReader::next() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    auto frame = parse_detection_record(line, line_);
    if (last_timestamp_ && frame.timestamp_ms <= *last_timestamp_)
      throw StreamError(line_, "timestamp " + std::to_string(frame.timestamp_ms) +
                                   " does not follow " + std::to_string(*last_timestamp_));
    last_timestamp_ = frame.timestamp_ms;
    return frame;
  }
  return std::nullopt;
}

std::vector<FrameDetection> parse_detection_log(std::istream& in) {
  DetectionLogReader reader(in);
  std::vector<FrameDetection> frames;
  while (auto frame = reader.next()) frames.push_back(std::move(*frame));
  return frames;
}

std::vector<FrameDetection> parse_detection_log(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_detection_log(in);
}

void write_detection_log(std::ostream& out, std::span<const FrameDetection> frames) {
  for (const auto& frame : frames) out << format_detection_record(frame) << '\n';
}

std::vector<AnnotatedObject> parse_annotation_xml(std::string_view contents) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    std::istringstream in{std::string(contents)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(e.line(), "malformed XML: " + e.message());
  }

  const pt::ptree* root = nullptr;
  for (const auto& [key, child] : doc) {
    if (key == "<xmlcomment>" || key == "<xmlattr>") continue;
    if (root) throw ParseError("annotation has more than one root element");
    root = &child;
  }
  if (!root) throw ParseError("annotation has no root element");

  std::vector<AnnotatedObject> objects;
  for (const auto& [key, node] : *root) {
    if (key != "object") continue;
    const std::size_t ordinal = objects.size() + 1;
    const auto name_node = node.get_child_optional("name");
    if (!name_node) throw ParseError("object " + std::to_string(ordinal) + ": missing <name>");
    const auto name = trim(name_node->data());
    const auto label = parse_label(name);
    if (!label)
      throw ParseError("object " + std::to_string(ordinal) + ": unknown label '" +
                       std::string(name) + "'");
    const auto box_node = node.get_child_optional("bndbox");
    if (!box_node) throw ParseError("object " + std::to_string(ordinal) + ": missing <bndbox>");
    BoundingBox box{parse_xml_coordinate(*box_node, "xmin", ordinal),
                    parse_xml_coordinate(*box_node, "ymin", ordinal),
                    parse_xml_coordinate(*box_node, "xmax", ordinal),
                    parse_xml_coordinate(*box_node, "ymax", ordinal)};
    if (!box.valid())
      throw ParseError("object " + std::to_string(ordinal) + ": degenerate box (min >= max)");
    objects.push_back({*label, box});
  }
  return objects;
}

std::string format_annotation_xml(std::span<const AnnotatedObject> objects,
                                  std::string_view filename) {
  std::ostringstream out;
  out << "<annotation>\n";
  if (!filename.empty()) out << "  <filename>" << filename << "</filename>\n";
  for (const auto& obj : objects) {
    out << "  <object>\n"
        << "    <name>" << to_string(obj.label) << "</name>\n"
        << "    <bndbox>\n"
        << "      <xmin>" << obj.box.x_min << "</xmin>\n"
        << "      <ymin>" << obj.box.y_min << "</ymin>\n"
        << "      <xmax>" << obj.box.x_max << "</xmax>\n"
        << "      <ymax>" << obj.box.y_max << "</ymax>\n"
        << "    </bndbox>\n"
        << "  </object>\n";
  }
  out << "</annotation>\n";
  return out.str();
}

ParticipantCode parse_participant_code(std::string_view code) {
  auto fail = [&](const std::string& why) -> ParticipantCode {
    throw ParseError("participant code '" + std::string(code) + "': " + why);
  };

  ParticipantCode out;
  std::size_t pos = 0;
  if (code.size() < 4) return fail("too short");

  switch (code[pos++]) {
    case 'F': out.gender = Gender::female; break;
    case 'M': out.gender = Gender::male; break;
    default: return fail("gender must be F or M");
  }
  switch (code[pos++]) {
    case 'B': out.light = Lighting::bright; break;
    case 'D': out.light = Lighting::dark; break;
    default: return fail("light must be B or D");
  }
  if (code.substr(pos, 2) == "Ng") {
    out.glasses = false;
    pos += 2;
  } else if (code[pos] == 'G') {
    out.glasses = true;
    pos += 1;
  } else {
    return fail("glasses must be G or Ng");
  }

  const auto digits = code.substr(pos);
  if (digits.empty()) return fail("missing participant index");
  if (digits.front() == '0') return fail("index must be positive without leading zeros");
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return fail("index must be decimal digits");
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out.index);
  if (ec != std::errc() || end != digits.data() + digits.size()) return fail("index out of range");
  return out;
}

std::string format_participant_code(const ParticipantCode& code) {
  std::string out;
  out += code.gender == Gender::female ? 'F' : 'M';
  out += code.light == Lighting::bright ? 'B' : 'D';
  out += code.glasses ? "G" : "Ng";
  out += std::to_string(code.index);
  return out;
}

}  // namespace drowsy
