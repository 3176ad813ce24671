#include "qclfm/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace qclfm::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

struct ByteWriter {
  std::string buf;

  template <typename T>
  void put(T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
  }
  void magic(const char m[4]) { buf.append(m, 4); }
};

struct ByteReader {
  const std::string& buf;
  std::size_t pos = 0;

  template <typename T>
  T get() {
    if (pos + sizeof(T) > buf.size()) throw IoError("unexpected end of file");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  void expect_magic(const char m[4], const char* what) {
    if (pos + 4 > buf.size() || std::memcmp(buf.data() + pos, m, 4) != 0) {
      throw IoError(std::string("bad magic, not a ") + what + " file");
    }
    pos += 4;
  }
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

void write_fld1(const std::filesystem::path& path, const ComplexField& field) {
  ByteWriter w;
  w.magic("FLD1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(field.width()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(field.height()));
  w.put<double>(field.pitch_um());
  w.put<double>(field.lambda_um());
  for (const auto& v : field.values()) {
    w.put<float>(static_cast<float>(v.real()));
    w.put<float>(static_cast<float>(v.imag()));
  }
  atomic_write(path, w.buf);
}

ComplexField read_fld1(const std::filesystem::path& path) {
  std::string buf = slurp(path);
  ByteReader r{buf};
  r.expect_magic("FLD1", "FLD1");
  auto width = r.get<std::uint32_t>();
  auto height = r.get<std::uint32_t>();
  auto pitch = r.get<double>();
  auto lambda = r.get<double>();
  if (width < 2 || height < 2 || width > 1u << 16 || height > 1u << 16) {
    throw IoError("FLD1 dimensions out of range in " + path.string());
  }
  ComplexField field(static_cast<int>(width), static_cast<int>(height), pitch, lambda);
  for (auto& v : field.values()) {
    float re = r.get<float>();
    float im = r.get<float>();
    v = {re, im};
  }
  return field;
}

void write_evt1(const std::filesystem::path& path, std::span<const DetectionEvent> events) {
  ByteWriter w;
  w.magic("EVT1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(events.size()));
  for (const auto& e : events) {
    w.put<std::uint8_t>(e.cam);
    w.put<float>(static_cast<float>(e.x_px));
    w.put<float>(static_cast<float>(e.y_px));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(std::llround(std::max(e.t_ns, 0.0))));
    w.put<std::uint16_t>(e.cluster_size);
  }
  atomic_write(path, w.buf);
}

std::vector<DetectionEvent> read_evt1(const std::filesystem::path& path) {
  std::string buf = slurp(path);
  ByteReader r{buf};
  r.expect_magic("EVT1", "EVT1");
  auto count = r.get<std::uint32_t>();
  std::vector<DetectionEvent> events(count);
  for (auto& e : events) {
    e.cam = r.get<std::uint8_t>();
    e.x_px = r.get<float>();
    e.y_px = r.get<float>();
    e.t_ns = static_cast<double>(r.get<std::uint64_t>());
    e.cluster_size = r.get<std::uint16_t>();
  }
  return events;
}

void write_raw1(const std::filesystem::path& path, std::span<const RawPixelHit> hits) {
  ByteWriter w;
  w.magic("RAW1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(hits.size()));
  for (const auto& h : hits) {
    w.put<std::uint8_t>(h.cam);
    w.put<std::uint16_t>(h.x);
    w.put<std::uint16_t>(h.y);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(std::llround(std::max(h.t_ns, 0.0))));
    w.put<float>(h.amplitude);
  }
  atomic_write(path, w.buf);
}

std::vector<RawPixelHit> read_raw1(const std::filesystem::path& path) {
  std::string buf = slurp(path);
  ByteReader r{buf};
  r.expect_magic("RAW1", "RAW1");
  auto count = r.get<std::uint32_t>();
  std::vector<RawPixelHit> hits(count);
  for (auto& h : hits) {
    h.cam = r.get<std::uint8_t>();
    h.x = r.get<std::uint16_t>();
    h.y = r.get<std::uint16_t>();
    h.t_ns = static_cast<double>(r.get<std::uint64_t>());
    h.amplitude = r.get<float>();
  }
  return hits;
}

void write_dpt1(const std::filesystem::path& path, int width, int height, double pitch_um,
                double lambda_um, std::span<const float> values) {
  if (static_cast<std::size_t>(width) * height != values.size()) {
    throw IoError("DPT1 value count does not match dimensions");
  }
  ByteWriter w;
  w.magic("DPT1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(width));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(height));
  w.put<double>(pitch_um);
  w.put<double>(lambda_um);
  for (float v : values) w.put<float>(v);
  atomic_write(path, w.buf);
}

DepthRaster read_dpt1(const std::filesystem::path& path) {
  std::string buf = slurp(path);
  ByteReader r{buf};
  r.expect_magic("DPT1", "DPT1");
  DepthRaster d;
  d.width = static_cast<int>(r.get<std::uint32_t>());
  d.height = static_cast<int>(r.get<std::uint32_t>());
  d.pitch_um = r.get<double>();
  d.lambda_um = r.get<double>();
  d.values.resize(static_cast<std::size_t>(d.width) * d.height);
  for (auto& v : d.values) v = r.get<float>();
  return d;
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const double> values) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (first || v < lo) lo = v;
    if (first || v > hi) hi = v;
    first = false;
  }
  double span = hi > lo ? hi - lo : 1.0;
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + values.size());
  for (double v : values) {
    double n = std::isfinite(v) ? (v - lo) / span : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(n * 255.0))));
  }
  atomic_write(path, out);
}

void write_ppm_colormap(const std::filesystem::path& path, int width, int height,
                        std::span<const float> values, float lo, float hi) {
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + values.size() * 3);
  float span = hi > lo ? hi - lo : 1.0f;
  for (float v : values) {
    unsigned char rgb[3] = {0, 0, 0};
    if (std::isfinite(v)) {
      float t = (v - lo) / span;
      t = std::min(std::max(t, 0.0f), 1.0f);
      // blue -> cyan -> green -> yellow -> red
      float h = (1.0f - t) * 4.0f;
      int seg = static_cast<int>(h);
      float f = h - seg;
      auto to8 = [](float x) { return static_cast<unsigned char>(std::lround(x * 255.0f)); };
      switch (seg) {
        case 0: rgb[0] = 255;        rgb[1] = to8(f);        rgb[2] = 0;            break;
        case 1: rgb[0] = to8(1 - f); rgb[1] = 255;           rgb[2] = 0;            break;
        case 2: rgb[0] = 0;          rgb[1] = 255;           rgb[2] = to8(f);       break;
        default: rgb[0] = 0;         rgb[1] = to8(1 - f);    rgb[2] = 255;          break;
      }
    }
    out.append(reinterpret_cast<const char*>(rgb), 3);
  }
  atomic_write(path, out);
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  out << header << "\n";
  out.precision(12);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << row[i];
    }
    out << "\n";
  }
  atomic_write(path, std::move(out).str());
}

}  // namespace qclfm::io
