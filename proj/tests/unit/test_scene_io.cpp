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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "spadsim/error.hpp"
#include "spadsim/scene_io.hpp"

namespace spadsim {
namespace {

namespace fs = std::filesystem;

class SceneIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("spadsim_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path file(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }
  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path dir_;
};

TEST_F(SceneIo, LoadsCsvScene) {
  const Scene s = load_scene(file("d.csv", "# depth in m\n1,2\n3,4\n"),
                             file("r.csv", "0.5, 0.5\n0.5, 0.5\n"));
  EXPECT_EQ(s.rows(), 2u);
  EXPECT_EQ(s.cols(), 2u);
  EXPECT_EQ(s.range(1, 0), 3.0);
  EXPECT_EQ(s.reflectivity(0, 1), 0.5);
  for (auto v : s.no_return.values()) EXPECT_EQ(v, 0);
}

TEST_F(SceneIo, SentinelMarksNoReturn) {
  const Scene s = load_scene(file("d.csv", "1,-1\n3,4\n"), file("r.csv", "0.5,0.5\n0.5,0.5\n"));
  EXPECT_EQ(s.no_return(0, 1), 1);
  EXPECT_EQ(s.no_return(0, 0), 0);
}

TEST_F(SceneIo, ReflectivityOutOfRangeNamesCell) {
  try {
    load_scene(file("d.csv", "1,2\n3,4\n"), file("r.csv", "0.5,0.5\n0.5,1.5\n"));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1, col 1"), std::string::npos) << e.what();
  }
}

TEST_F(SceneIo, ParseErrorNamesCell) {
  try {
    load_csv_grid(file("d.csv", "1,2\n3,x\n"));
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1, col 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_csv_grid(file("ragged.csv", "1,2\n3\n")), IoError);
  EXPECT_THROW(load_csv_grid(path("missing.csv")), IoError);
}

TEST_F(SceneIo, DimensionMismatch) {
  EXPECT_THROW(load_scene(file("d.csv", "1,2\n"), file("r.csv", "0.5\n0.5\n")), DomainError);
}

DepthImage random_image(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(14.0, 16.0);
  DepthImage img(rows, cols);
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    img.depth[i] = d(gen);
    img.valid[i] = 1;
  }
  return img;
}

TEST_F(SceneIo, BinaryRoundTripIsBitExact) {
  DepthImage img = random_image(7, 9, 1);
  img.valid[4] = 0;
  img.depth[4] = kInvalidDepth;
  save_depth_image(img, path("img.grd"), GridFormat::kGridBinary);
  const DepthImage back = load_depth_image(path("img.grd"));
  EXPECT_EQ(back.depth, img.depth);
  EXPECT_EQ(back.valid, img.valid);
  const GridFile raw = load_grid_binary(path("img.grd"));
  EXPECT_EQ(raw.kind, ValueKind::kDepth);
  EXPECT_EQ(raw.units, "m");
  EXPECT_EQ(fs::file_size(path("img.grd")), 64u + 63u * 8u);
}

TEST_F(SceneIo, BinaryHeaderLayout) {
  save_grid_binary(path("g.grd"), {ValueKind::kReflectivity, "1", Grid<double>(2, 3, 0.25)});
  std::ifstream in(path("g.grd"), std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), 64u + 48u);
  EXPECT_EQ(bytes.substr(0, 8), std::string("SPADGRD\0", 8));
  auto u32 = [&](std::size_t o) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(bytes[o + i])) << (8 * i);
    return v;
  };
  EXPECT_EQ(u32(8), 1u);   // version
  EXPECT_EQ(u32(12), 1u);  // reflectivity
  EXPECT_EQ(u32(16), 2u);  // rows (low word)
  EXPECT_EQ(u32(24), 3u);  // cols (low word)
  EXPECT_EQ(bytes[32], '1');
  EXPECT_EQ(u32(48), 8u);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 64, 8);
  EXPECT_EQ(first, 0.25);
}

TEST_F(SceneIo, CsvRoundTripPrecision) {
  DepthImage img = random_image(10, 10, 2);
  img.valid[3] = 0;
  save_depth_image(img, path("img.csv"), GridFormat::kCsv);
  const DepthImage back = load_depth_image(path("img.csv"));
  EXPECT_FALSE(back.valid[3]);
  EXPECT_EQ(back.depth[3], kInvalidDepth);
  double worst = 0.0;
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    if (i != 3) worst = std::max(worst, std::abs(back.depth[i] - img.depth[i]));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST_F(SceneIo, GridKindConstraintsEnforced) {
  EXPECT_THROW(save_grid_binary(path("bad.grd"), {ValueKind::kReflectivity, "", Grid<double>(1, 1, 2.0)}),
               DomainError);
  EXPECT_THROW(save_grid_binary(path("bad.grd"), {ValueKind::kDepth, "m", Grid<double>(1, 1, -3.0)}),
               DomainError);
}

TEST_F(SceneIo, HigherGridVersionRejected) {
  save_grid_binary(path("g.grd"), {ValueKind::kDepth, "m", Grid<double>(1, 1, 1.0)});
  std::fstream f(path("g.grd"), std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(8);
  f.put(2);
  f.close();
  try {
    load_grid_binary(path("g.grd"));
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

HistogramCube sample_cube() {
  SystemConfig c = testing::table1();
  Scene s = Scene::uniform(3, 2, 14.73, 0.09);
  s.no_return[1] = 1;
  AcquisitionSpec acq = c.acquisition();
  acq.frames = 20;
  return simulate_histogram_cube(s, c, acq, 5);
}

TEST_F(SceneIo, CubeRoundTrip) {
  const HistogramCube cube = sample_cube();
  save_histogram_cube(cube, path("c.bin"));
  EXPECT_EQ(load_histogram_cube(path("c.bin")), cube);
}

TEST_F(SceneIo, TruncatedCubeIsStructuredError) {
  save_histogram_cube(sample_cube(), path("c.bin"));
  const auto size = fs::file_size(path("c.bin"));
  for (auto cut : {size - 1, size / 2, std::uintmax_t{5}}) {
    fs::resize_file(path("c.bin"), cut);
    try {
      load_histogram_cube(path("c.bin"));
      FAIL() << "cut " << cut;
    } catch (const IoError& e) {
      EXPECT_FALSE(std::string(e.what()).empty());
    }
  }
}

TEST_F(SceneIo, CubeWithoutFramesRejectedOnSave) {
  HistogramCube cube = sample_cube();
  cube.acquisition.frames = 0;
  for (Histogram& h : cube.pixels) h = Histogram(cube.n_bins);
  EXPECT_THROW(save_histogram_cube(cube, path("c.bin")), DomainError);
}

TEST_F(SceneIo, HigherCubeVersionRejected) {
  save_histogram_cube(sample_cube(), path("c.bin"));
  std::fstream f(path("c.bin"), std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(8);
  f.put(7);
  f.close();
  EXPECT_THROW(load_histogram_cube(path("c.bin")), IoError);
}

TEST_F(SceneIo, SweepAndDistributionCsv) {
  SweepResult r;
  r.histogram.points.push_back({10, 1e-10, 1e-11, 5, 5, false});
  r.crb.points.push_back({10, 5e-11, 0, 0, 0, false});
  save_sweep_csv(r, path("s.csv"));
  std::ifstream in(path("s.csv"));
  std::string header, cols, row;
  std::getline(in, header);
  std::getline(in, cols);
  std::getline(in, row);
  EXPECT_EQ(row.substr(0, 3), "10,");
  save_distribution_csv({14.0, 0.01, {1, 2}, 0}, path("d.csv"));
  EXPECT_TRUE(fs::exists(path("d.csv")));
}

}  // namespace
}  // namespace spadsim
