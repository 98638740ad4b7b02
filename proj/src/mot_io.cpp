#include "lowmot/mot_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lowmot/log.hpp"

namespace lowmot {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double parse_number(const std::string& s, const std::string& path, int line) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw IoError(path + ":" + std::to_string(line) + ": non-numeric field '" +
                  s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
    ++pos;
  }
  if (pos != s.size()) {
    throw IoError(path + ":" + std::to_string(line) + ": non-numeric field '" +
                  s + "'");
  }
  return value;
}

BBox parse_bbox(const std::vector<std::string>& f, const std::string& path,
                int line) {
  const double x = parse_number(f[2], path, line);
  const double y = parse_number(f[3], path, line);
  const double w = parse_number(f[4], path, line);
  const double h = parse_number(f[5], path, line);
  if (!(w > 0.0 && h > 0.0)) {
    throw IoError(path + ":" + std::to_string(line) +
                  ": box width/height must be positive");
  }
  return BBox(x, y, w, h);
}

std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<DetectionRow> read_detections(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<DetectionRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() < 7) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected at least 7 fields");
    }
    const int frame = static_cast<int>(parse_number(fields[0], path, line_no));
    if (frame < 1) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": frame index must be >= 1");
    }
    const double id = parse_number(fields[1], path, line_no);
    if (id != -1.0) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": detection rows must carry id -1");
    }
    const double conf = parse_number(fields[6], path, line_no);
    if (!(conf >= 0.0 && conf <= 1.0)) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": confidence out of [0,1]");
    }
    rows.push_back({frame, parse_bbox(fields, path, line_no), conf});
  }
  return rows;
}

std::vector<Embedding> read_embeddings(const std::string& path) {
  std::ifstream in = open_input(path, true);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "EMB1", 4) != 0) {
    throw IoError(path + ": bad magic, expected EMB1");
  }
  std::uint8_t dim_bytes[4];
  if (!in.read(reinterpret_cast<char*>(dim_bytes), 4)) {
    throw IoError(path + ": truncated header");
  }
  const std::uint32_t dim = static_cast<std::uint32_t>(dim_bytes[0]) |
                            (static_cast<std::uint32_t>(dim_bytes[1]) << 8) |
                            (static_cast<std::uint32_t>(dim_bytes[2]) << 16) |
                            (static_cast<std::uint32_t>(dim_bytes[3]) << 24);
  if (dim == 0 || dim > 65536) {
    throw IoError(path + ": implausible embedding dimension");
  }

  std::vector<Embedding> out;
  std::vector<float> record(dim);
  int index = 0;
  while (true) {
    in.read(reinterpret_cast<char*>(record.data()),
            static_cast<std::streamsize>(dim * sizeof(float)));
    const std::streamsize got = in.gcount();
    if (got == 0) break;
    if (got != static_cast<std::streamsize>(dim * sizeof(float))) {
      throw IoError(path + ": truncated record " + std::to_string(index));
    }
    double norm_sq = 0.0;
    for (float v : record) {
      if (!std::isfinite(v)) {
        throw IoError(path + ": non-finite value in record " +
                      std::to_string(index));
      }
      norm_sq += static_cast<double>(v) * v;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm < 0.5) {
      throw IoError(path + ": record " + std::to_string(index) +
                    " has norm " + std::to_string(norm) +
                    ", too short to normalize");
    }
    if (std::abs(norm - 1.0) > 1e-3) {
      log_warn("%s: record %d has norm %.4f, renormalizing", path.c_str(),
               index, norm);
    }
    out.push_back(Embedding::normalized(record));
    ++index;
  }
  return out;
}

void write_embeddings(const std::string& path,
                      const std::vector<Embedding>& embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write("EMB1", 4);
  const std::uint32_t dim =
      embeddings.empty() ? 0u
                         : static_cast<std::uint32_t>(embeddings[0].dim());
  const std::uint8_t dim_bytes[4] = {
      static_cast<std::uint8_t>(dim & 0xff),
      static_cast<std::uint8_t>((dim >> 8) & 0xff),
      static_cast<std::uint8_t>((dim >> 16) & 0xff),
      static_cast<std::uint8_t>((dim >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(dim_bytes), 4);
  for (const Embedding& e : embeddings) {
    if (e.dim() != dim) {
      throw IoError(path + ": embeddings must share one dimension");
    }
    out.write(reinterpret_cast<const char*>(e.values().data()),
              static_cast<std::streamsize>(dim * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<TrackRow> read_track_file(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<TrackRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() < 6) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected at least 6 fields");
    }
    const int frame = static_cast<int>(parse_number(fields[0], path, line_no));
    if (frame < 1) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": frame index must be >= 1");
    }
    const auto id =
        static_cast<std::int64_t>(parse_number(fields[1], path, line_no));
    double conf = 1.0;
    if (fields.size() >= 7) conf = parse_number(fields[6], path, line_no);
    rows.push_back({frame, id, parse_bbox(fields, path, line_no), conf});
  }
  return rows;
}

void write_results(const std::string& path, std::vector<TrackRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const TrackRow& a, const TrackRow& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[256];
  for (const TrackRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.2f,%.2f,%.2f,%.2f,%.2f,-1,-1,-1\n",
                  r.frame, static_cast<long long>(r.id), r.bbox.left,
                  r.bbox.top, r.bbox.width, r.bbox.height, r.confidence);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_gt(const std::string& path, const std::vector<TrackRow>& rows,
              const std::vector<double>& visibilities) {
  if (rows.size() != visibilities.size()) {
    throw std::invalid_argument("write_gt: rows/visibilities size mismatch");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[256];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TrackRow& r = rows[i];
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.2f,%.2f,%.2f,%.2f,1,1,%.2f\n",
                  r.frame, static_cast<long long>(r.id), r.bbox.left,
                  r.bbox.top, r.bbox.width, r.bbox.height, visibilities[i]);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

SubsampleSchedule subsample(const SequenceMeta& meta, double target_hz) {
  if (!(meta.source_fps > 0.0) || meta.frame_count < 1) {
    throw std::invalid_argument("subsample: invalid sequence metadata");
  }
  if (!(target_hz > 0.0)) {
    throw std::invalid_argument("subsample: target rate must be positive");
  }
  if (target_hz > meta.source_fps) {
    throw std::invalid_argument(
        "subsample: target rate above the source frame rate");
  }
  // Round-half-up keeps the effective rate nearest to the requested one.
  const int stride =
      std::max(1, static_cast<int>(std::floor(meta.source_fps / target_hz + 0.5)));
  SubsampleSchedule schedule;
  for (int f = 1; f <= meta.frame_count; f += stride) {
    schedule.detection_frames.push_back(f);
  }
  for (std::size_t i = 1; i < schedule.detection_frames.size(); ++i) {
    const int a = schedule.detection_frames[i - 1];
    const int b = schedule.detection_frames[i];
    const int mid = (a + b) / 2;
    if (mid > a && mid < b) schedule.intermediate_frames.push_back(mid);
  }
  return schedule;
}

ImageFrame read_image(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") {
    throw IoError(path + ": PNG support is not compiled in; use P6 PPM");
  }
  std::ifstream in = open_input(path, true);

  auto next_token = [&in, &path]() {
    std::string tok;
    while (true) {
      const int c = in.get();
      if (c == EOF) throw IoError(path + ": malformed PPM header");
      if (c == '#') {  // comment runs to end of line
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
  };

  if (next_token() != "P6") throw IoError(path + ": not a P6 PPM");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw IoError(path + ": malformed PPM header");
  }
  if (width < 1 || height < 1) throw IoError(path + ": bad PPM dimensions");
  if (maxval != 255) {
    throw IoError(path + ": unsupported PPM maxval (must be 255)");
  }

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height *
                                   3);
  in.read(reinterpret_cast<char*>(pixels.data()),
          static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw IoError(path + ": truncated pixel payload");
  }
  return ImageFrame(width, height, std::move(pixels));
}

void write_image(const std::string& path, const ImageFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw IoError("write failed: " + path);
}

SequenceMeta read_seqinfo(const std::string& path) {
  std::ifstream in = open_input(path);
  SequenceMeta meta;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '[' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "name") meta.name = value;
      else if (key == "frameRate") meta.source_fps = std::stod(value);
      else if (key == "seqLength") meta.frame_count = std::stoi(value);
      else if (key == "imWidth") meta.width = std::stoi(value);
      else if (key == "imHeight") meta.height = std::stoi(value);
    } catch (const std::exception&) {
      throw IoError(path + ": bad value for " + key);
    }
  }
  if (meta.frame_count < 1 || !(meta.source_fps > 0.0)) {
    throw IoError(path + ": missing frameRate or seqLength");
  }
  return meta;
}

void write_seqinfo(const std::string& path, const SequenceMeta& meta) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "[Sequence]\n";
  out << "name=" << meta.name << "\n";
  out << "imDir=img1\n";
  out << "frameRate=" << meta.source_fps << "\n";
  out << "seqLength=" << meta.frame_count << "\n";
  out << "imWidth=" << meta.width << "\n";
  out << "imHeight=" << meta.height << "\n";
  out << "imExt=.ppm\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace lowmot
