/*
 * Copyright 2026 The spadsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spadsim/scene_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "spadsim/constants.hpp"
#include "spadsim/error.hpp"

namespace spadsim {
namespace {

constexpr std::array<char, 8> kGridMagic{'S', 'P', 'A', 'D', 'G', 'R', 'D', '\0'};
constexpr std::array<char, 8> kCubeMagic{'S', 'P', 'A', 'D', 'C', 'U', 'B', 'E'};
constexpr std::uint32_t kGridVersion = 1;
constexpr std::uint32_t kCubeVersion = 1;
constexpr std::size_t kGridHeaderBytes = 64;
constexpr std::size_t kUnitsBytes = 16;

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  template <class U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void zeros(std::size_t n) { buf_.append(n, '\0'); }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string data, std::string source)
      : data_(std::move(data)), source_(std::move(source)) {}

  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  template <class U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t pos() const { return pos_; }
  const std::string& source() const { return source_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw IoError(source_ + ": truncated file, needed " + std::to_string(n) +
                    " bytes at offset " + std::to_string(pos_) + " of " +
                    std::to_string(data_.size()));
    }
  }

  std::string data_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Shortest text that reads back to the same double.
std::string format_value(double v) {
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), r.ptr};
}

std::string cell(std::size_t r, std::size_t c) {
  return "row " + std::to_string(r) + ", col " + std::to_string(c);
}

void check_kind(const GridFile& f, const std::string& source) {
  for (std::size_t r = 0; r < f.values.rows(); ++r) {
    for (std::size_t c = 0; c < f.values.cols(); ++c) {
      const double v = f.values(r, c);
      bool ok = std::isfinite(v);
      switch (f.kind) {
        case ValueKind::kDepth: ok = ok && (v > 0.0 || v == kInvalidDepth); break;
        case ValueKind::kReflectivity: ok = ok && v >= 0.0 && v <= 1.0; break;
        case ValueKind::kCounts: ok = ok && v >= 0.0 && v == std::floor(v); break;
      }
      if (!ok) throw DomainError(source + ": value " + format_value(v) + " invalid at " + cell(r, c));
    }
  }
}

}  // namespace

GridFormat parse_grid_format(std::string_view name) {
  if (name == "csv") return GridFormat::kCsv;
  if (name == "grid_binary") return GridFormat::kGridBinary;
  throw ConfigError("format", "expected csv or grid_binary, got '" + std::string(name) + "'");
}

Grid<double> read_csv_grid(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    std::size_t c = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = text.find(',', start);
      const std::string_view field = trim(text.substr(start, comma - start));
      double v = 0.0;
      const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || end != field.data() + field.size()) {
        throw IoError(source + ": cannot parse '" + std::string(field) + "' at " + cell(rows, c));
      }
      values.push_back(v);
      ++c;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = c;
    } else if (c != cols) {
      throw IoError(source + ": row " + std::to_string(rows) + " has " + std::to_string(c) +
                    " columns, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw IoError(source + ": no data rows");
  return Grid<double>(rows, cols, std::move(values));
}

void write_csv_grid(std::ostream& out, const Grid<double>& grid) {
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      if (c) out << ',';
      out << format_value(grid(r, c));
    }
    out << '\n';
  }
}

Grid<double> load_csv_grid(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_csv_grid(in, path.string());
}

void save_csv_grid(const std::filesystem::path& path, const Grid<double>& grid) {
  std::ostringstream out;
  write_csv_grid(out, grid);
  write_file(path, out.str());
}

void save_grid_binary(const std::filesystem::path& path, const GridFile& file) {
  if (file.units.size() >= kUnitsBytes) throw DomainError("units tag longer than 15 bytes");
  check_kind(file, path.string());
  ByteWriter w;
  w.raw(kGridMagic.data(), kGridMagic.size());
  w.uint(kGridVersion);
  w.uint(static_cast<std::uint32_t>(file.kind));
  w.uint(static_cast<std::uint64_t>(file.values.rows()));
  w.uint(static_cast<std::uint64_t>(file.values.cols()));
  w.raw(file.units.data(), file.units.size());
  w.zeros(kUnitsBytes - file.units.size());
  w.uint(std::uint32_t{8});
  w.zeros(12);
  for (double v : file.values.values()) w.f64(v);
  write_file(path, w.bytes());
}

GridFile load_grid_binary(const std::filesystem::path& path) {
  ByteReader r(read_file(path), path.string());
  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kGridMagic) throw IoError(r.source() + ": not a grid file (bad magic)");
  const auto version = r.uint<std::uint32_t>();
  if (version > kGridVersion) {
    throw IoError(r.source() + ": grid format version " + std::to_string(version) +
                  " is newer than supported version " + std::to_string(kGridVersion));
  }
  GridFile f;
  const auto kind = r.uint<std::uint32_t>();
  if (kind > static_cast<std::uint32_t>(ValueKind::kCounts)) {
    throw IoError(r.source() + ": unknown value kind " + std::to_string(kind));
  }
  f.kind = static_cast<ValueKind>(kind);
  const auto rows = r.uint<std::uint64_t>();
  const auto cols = r.uint<std::uint64_t>();
  std::array<char, kUnitsBytes> units{};
  r.raw(units.data(), units.size());
  f.units.assign(units.data(), strnlen(units.data(), units.size()));
  if (r.uint<std::uint32_t>() != 8) throw IoError(r.source() + ": unsupported value width");
  r.skip(12);
  if (rows != 0 && cols > (std::uint64_t{1} << 40) / rows) {
    throw IoError(r.source() + ": implausible grid dimensions");
  }
  std::vector<double> values(rows * cols);
  for (double& v : values) v = r.f64();
  if (!r.at_end()) throw IoError(r.source() + ": trailing bytes after payload");
  f.values = Grid<double>(rows, cols, std::move(values));
  check_kind(f, r.source());
  return f;
}

Grid<double> load_grid_any(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 8> head{};
  in.read(head.data(), head.size());
  if (in.gcount() == 8 && head == kGridMagic) return load_grid_binary(path).values;
  return load_csv_grid(path);
}

Scene load_scene(const std::filesystem::path& depth_path,
                 const std::filesystem::path& reflectivity_path, double invalid_sentinel) {
  Grid<double> depth = load_grid_any(depth_path);
  Grid<double> refl = load_grid_any(reflectivity_path);
  if (!depth.same_shape(refl)) {
    throw DomainError("depth is " + std::to_string(depth.rows()) + "x" +
                      std::to_string(depth.cols()) + " but reflectivity is " +
                      std::to_string(refl.rows()) + "x" + std::to_string(refl.cols()));
  }
  Scene s{depth, refl, Grid<std::uint8_t>(depth.rows(), depth.cols(), 0)};
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (depth[i] == invalid_sentinel) s.no_return[i] = 1;
  }
  s.validate();
  return s;
}

void save_depth_image(const DepthImage& image, const std::filesystem::path& path,
                      GridFormat format) {
  Grid<double> out(image.rows(), image.cols(), kInvalidDepth);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (image.valid[i]) out[i] = image.depth[i];
  }
  if (format == GridFormat::kCsv) {
    std::ostringstream text;
    text << "# depth image, units " << image.units << ", mode "
         << to_string(image.provenance.mode) << ", seed " << image.provenance.seed
         << ", config " << std::hex << image.provenance.config_digest << std::dec << ", image "
         << image.provenance.image_index << ", invalid " << kInvalidDepth << '\n';
    write_csv_grid(text, out);
    write_file(path, text.str());
  } else {
    save_grid_binary(path, {ValueKind::kDepth, image.units, std::move(out)});
  }
}

DepthImage load_depth_image(const std::filesystem::path& path) {
  Grid<double> values = load_grid_any(path);
  DepthImage img(values.rows(), values.cols());
  for (std::size_t i = 0; i < values.size(); ++i) {
    img.depth[i] = values[i];
    if (values[i] == kInvalidDepth) {
      img.status[i] = PixelStatus::kInvalidInput;
    } else {
      img.valid[i] = 1;
    }
  }
  return img;
}

void save_histogram_cube(const HistogramCube& cube, const std::filesystem::path& path) {
  cube.validate();
  ByteWriter w;
  w.raw(kCubeMagic.data(), kCubeMagic.size());
  w.uint(kCubeVersion);
  w.uint(std::uint32_t{0});
  w.uint(static_cast<std::uint64_t>(cube.rows));
  w.uint(static_cast<std::uint64_t>(cube.cols));
  w.uint(static_cast<std::uint64_t>(cube.n_bins));
  w.f64(cube.bin_width);
  w.f64(cube.gate_delay);
  w.uint(static_cast<std::uint64_t>(cube.acquisition.frames));
  w.f64(cube.acquisition.exposure);
  w.f64(cube.acquisition.rep_rate);
  w.uint(static_cast<std::uint64_t>(cube.pulses_per_frame));
  w.uint(cube.seed);
  w.uint(cube.config_digest);
  for (std::size_t i = 0; i < cube.pixels.size(); ++i) {
    const Histogram& h = cube.pixels[i];
    w.uint(static_cast<std::uint8_t>(cube.status[i]));
    w.uint(h.n_frames);
    w.uint(h.n_empty);
    const auto nnz = static_cast<std::uint32_t>(
        std::count_if(h.counts.begin(), h.counts.end(), [](std::uint32_t c) { return c != 0; }));
    w.uint(nnz);
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      if (h.counts[b] == 0) continue;
      w.uint(static_cast<std::uint32_t>(b));
      w.uint(h.counts[b]);
    }
  }
  write_file(path, w.bytes());
}

HistogramCube load_histogram_cube(const std::filesystem::path& path) {
  ByteReader r(read_file(path), path.string());
  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kCubeMagic) throw IoError(r.source() + ": not a histogram cube (bad magic)");
  const auto version = r.uint<std::uint32_t>();
  if (version > kCubeVersion) {
    throw IoError(r.source() + ": cube format version " + std::to_string(version) +
                  " is newer than supported version " + std::to_string(kCubeVersion));
  }
  r.skip(4);
  HistogramCube cube;
  cube.rows = r.uint<std::uint64_t>();
  cube.cols = r.uint<std::uint64_t>();
  const auto n_bins = r.uint<std::uint64_t>();
  if (n_bins == 0 || n_bins > (std::uint64_t{1} << 32)) {
    throw IoError(r.source() + ": implausible bin count");
  }
  cube.n_bins = static_cast<long>(n_bins);
  cube.bin_width = r.f64();
  cube.gate_delay = r.f64();
  cube.acquisition.frames = static_cast<long>(r.uint<std::uint64_t>());
  cube.acquisition.exposure = r.f64();
  cube.acquisition.rep_rate = r.f64();
  cube.pulses_per_frame = static_cast<long>(r.uint<std::uint64_t>());
  cube.seed = r.uint<std::uint64_t>();
  cube.config_digest = r.uint<std::uint64_t>();

  const std::uint64_t n = cube.rows * cube.cols;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto status = r.uint<std::uint8_t>();
    if (status > static_cast<std::uint8_t>(PixelStatus::kNonConvergence)) {
      throw IoError(r.source() + ": unknown pixel status at offset " + std::to_string(r.pos()));
    }
    Histogram h(cube.n_bins);
    h.n_frames = r.uint<std::uint64_t>();
    h.n_empty = r.uint<std::uint64_t>();
    const auto nnz = r.uint<std::uint32_t>();
    for (std::uint32_t k = 0; k < nnz; ++k) {
      const auto bin = r.uint<std::uint32_t>();
      const auto count = r.uint<std::uint32_t>();
      if (bin >= n_bins) throw IoError(r.source() + ": bin index out of range");
      h.counts[bin] = count;
    }
    cube.status.push_back(static_cast<PixelStatus>(status));
    cube.pixels.push_back(std::move(h));
  }
  if (!r.at_end()) throw IoError(r.source() + ": trailing bytes after last pixel");
  try {
    cube.validate();
  } catch (const DomainError& e) {
    throw IoError(r.source() + ": " + e.what());
  }
  return cube;
}

void save_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path) {
  if (sweep.histogram.points.size() != sweep.crb.points.size()) {
    throw DomainError("sweep curves differ in length");
  }
  std::ostringstream out;
  out << "# distinguishability (one FWHM); times in s, lengths in m\n";
  out << "frames,histogram_s,histogram_se_s,histogram_m,n_valid,n_repeats,ill_defined,crb_s,crb_m\n";
  for (std::size_t k = 0; k < sweep.histogram.points.size(); ++k) {
    const CurvePoint& h = sweep.histogram.points[k];
    const CurvePoint& c = sweep.crb.points[k];
    out << h.frames << ',' << format_value(h.value) << ',' << format_value(h.std_error) << ','
        << format_value(time_to_depth(h.value)) << ',' << h.n_valid << ',' << h.n_repeats << ','
        << (h.ill_defined ? 1 : 0) << ',' << format_value(c.value) << ','
        << format_value(time_to_depth(c.value)) << '\n';
  }
  write_file(path, out.str());
}

void save_distribution_csv(const DepthDistribution& dist, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# bar width " << format_value(dist.bin_width) << " m, outside " << dist.outside << '\n';
  out << "depth_m,pixels\n";
  for (std::size_t i = 0; i < dist.counts.size(); ++i) {
    out << format_value(dist.bar_center(i)) << ',' << dist.counts[i] << '\n';
  }
  write_file(path, out.str());
}

}  // namespace spadsim
