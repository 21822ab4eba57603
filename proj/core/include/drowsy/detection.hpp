#pragma once

// Boundary between an external facial-state detector and the engine:
// detection labels and boxes, the line-delimited detection log, per-image
// XML annotations and the dataset's participant folder codes.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drowsy {

enum class DetectionLabel : std::uint8_t {
  face,
  opened_eye,
  closed_eye,
  mouth,
  yawn,
  eyebrow,
};

inline constexpr std::size_t kDetectionLabelCount = 6;

/// Canonical wire name, e.g. "opened_eye".
std::string_view to_string(DetectionLabel label) noexcept;

/// Inverse of to_string; nullopt for anything outside the six labels.
std::optional<DetectionLabel> parse_label(std::string_view name) noexcept;

struct BoundingBox {
  std::uint32_t x_min = 0;
  std::uint32_t y_min = 0;
  std::uint32_t x_max = 0;
  std::uint32_t y_max = 0;

  bool valid() const noexcept { return x_min < x_max && y_min < y_max; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  DetectionLabel label = DetectionLabel::face;
  BoundingBox box;
  double confidence = 1.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct FrameDetection {
  std::int64_t timestamp_ms = 0;
  std::vector<Detection> detections;

  bool contains(DetectionLabel label) const noexcept;
  std::size_t count(DetectionLabel label) const noexcept;

  friend bool operator==(const FrameDetection&, const FrameDetection&) = default;
};

// ---------------------------------------------------------------------------
// Detection log: one record per line,
//   {"t":<int ms>,"d":[[<label>,[x_min,y_min,x_max,y_max],<confidence>],...]}
// Blank lines are ignored. Timestamps must strictly increase.

/// Decodes a single record. `line_number` is only used for error reporting.
/// Throws ParseError on malformed text, unknown labels, degenerate boxes or
/// out-of-range confidences.
FrameDetection parse_detection_record(std::string_view line, std::size_t line_number);

/// Encodes one record without a trailing newline.
std::string format_detection_record(const FrameDetection& frame);

/// Streaming reader over a detection log. Not copyable; movable.
class DetectionLogReader {
 public:
  explicit DetectionLogReader(std::istream& in) : in_(&in) {}

  /// Next frame, or nullopt at end of stream. Throws ParseError for a
  /// malformed line and StreamError for a non-increasing timestamp.
  std::optional<FrameDetection> next();

  /// 1-based number of the last line read.
  std::size_t line_number() const noexcept { return line_; }

 private:
  std::istream* in_;
  std::size_t line_ = 0;
  std::optional<std::int64_t> last_timestamp_;
};

std::vector<FrameDetection> parse_detection_log(std::istream& in);
std::vector<FrameDetection> parse_detection_log(std::string_view text);

void write_detection_log(std::ostream& out, std::span<const FrameDetection> frames);

// ---------------------------------------------------------------------------
// Annotation XML (object/name/bndbox layout):
//   <annotation>
//     <object><name>yawn</name>
//       <bndbox><xmin>..</xmin><ymin>..</ymin><xmax>..</xmax><ymax>..</ymax></bndbox>
//     </object> ...
//   </annotation>

struct AnnotatedObject {
  DetectionLabel label = DetectionLabel::face;
  BoundingBox box;

  friend bool operator==(const AnnotatedObject&, const AnnotatedObject&) = default;
};

/// Objects in file order. Throws ParseError on malformed XML, unknown labels
/// or degenerate boxes.
std::vector<AnnotatedObject> parse_annotation_xml(std::string_view contents);

std::string format_annotation_xml(std::span<const AnnotatedObject> objects,
                                  std::string_view filename = {});

// ---------------------------------------------------------------------------
// Participant folder codes, e.g. "FBNg21": gender F/M, light B/D,
// glasses G (yes) / Ng (no), then the participant index.

enum class Gender : std::uint8_t { female, male };
enum class Lighting : std::uint8_t { bright, dark };

struct ParticipantCode {
  Gender gender = Gender::female;
  Lighting light = Lighting::bright;
  bool glasses = false;
  std::uint32_t index = 1;

  friend bool operator==(const ParticipantCode&, const ParticipantCode&) = default;
};

/// Grammar `[FM](B|D)(G|Ng)<digits>`; the index is positive with no leading
/// zeros so that format(parse(s)) == s. Throws ParseError otherwise.
ParticipantCode parse_participant_code(std::string_view code);

std::string format_participant_code(const ParticipantCode& code);

}  // namespace drowsy
