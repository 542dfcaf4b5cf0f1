#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "core/error.hpp"
#include "core/fuse.hpp"

using namespace fgai;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

GaiImage random_gai(DescriptorKind kind, int w, int h, std::uint64_t seed, const std::string& mesh = "scan") {
  std::mt19937_64 rng(seed);
  GaiImage g;
  g.kind = kind;
  g.image = GrayImage(w, h);
  g.coverage.assign(static_cast<std::size_t>(w) * h, 0);
  for (std::size_t i = 0; i < g.image.pixels.size(); ++i) {
    g.coverage[i] = rng() % 4 != 0;
    g.image.pixels[i] = g.coverage[i] ? static_cast<std::uint8_t>(rng() % 256) : 0;
  }
  g.mesh_id = mesh;
  g.quantization = {static_cast<double>(seed), static_cast<double>(seed) + 1};
  return g;
}

FgaiImage random_fgai(int w, int h, std::uint64_t seed) {
  return fuse(random_gai(DescriptorKind::K, w, h, seed), random_gai(DescriptorKind::H, w, h, seed + 1),
              random_gai(DescriptorKind::LD, w, h, seed + 2));
}

}  // namespace

TEST_CASE("the ten combinations in canonical order") {
  std::vector<std::string> names;
  for (const Combo& c : enumerate_combos(kAllKinds)) names.push_back(combo_name(c));
  CHECK(names == std::vector<std::string>{"K-H-GL", "K-H-LD", "K-H-SI", "K-GL-LD", "K-GL-SI", "K-LD-SI", "H-GL-LD",
                                          "H-GL-SI", "H-LD-SI", "GL-LD-SI"});
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == 10);
  std::vector<Combo> listed = parse_combo_list("all");
  CHECK(listed == enumerate_combos(kAllKinds));
  CHECK(parse_combo_list("") == listed);
}

TEST_CASE("a missing kind is named in the error") {
  const std::vector<DescriptorKind> four{DescriptorKind::K, DescriptorKind::H, DescriptorKind::GL, DescriptorKind::SI};
  try {
    enumerate_combos(four);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find("LD") != std::string::npos);
  }
}

TEST_CASE("combo names canonicalize unless order is kept") {
  CHECK(combo_name(parse_combo("SI-K-GL")) == "K-GL-SI");
  CHECK(combo_name(parse_combo("SI-K-GL", true)) == "SI-K-GL");
  CHECK(canonical({DescriptorKind::SI, DescriptorKind::H, DescriptorKind::K}) ==
        Combo{DescriptorKind::K, DescriptorKind::H, DescriptorKind::SI});
  const auto list = parse_combo_list("LD-H-K,GL-LD-SI");
  REQUIRE(list.size() == 2);
  CHECK(combo_name(list[0]) == "K-H-LD");
  for (const char* bad : {"K-H", "K-H-GL-LD", "K-K-H", "K-H-XX", "", "K--H"})
    CHECK(code_of([&] { parse_combo(bad); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { parse_combo_list("K-H-GL,"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("channels are bit-identical to the source GAIs, in canonical order whatever the argument order") {
  const auto k = random_gai(DescriptorKind::K, 23, 17, 1), gl = random_gai(DescriptorKind::GL, 23, 17, 2),
             si = random_gai(DescriptorKind::SI, 23, 17, 3);
  for (const auto& f : {fuse(k, gl, si), fuse(si, k, gl), fuse(gl, si, k)}) {
    CHECK(f.name == "K-GL-SI");
    CHECK(f.channel(0).pixels == k.image.pixels);
    CHECK(f.channel(1).pixels == gl.image.pixels);
    CHECK(f.channel(2).pixels == si.image.pixels);
    CHECK(f.quantization[2].lo == si.quantization.lo);
    const Raster r = f.to_raster();
    CHECK(r.channels == 3);
    for (std::size_t i = 0; i < k.image.pixels.size(); ++i) {
      CHECK(r.data[3 * i] == k.image.pixels[i]);
      CHECK(r.data[3 * i + 1] == gl.image.pixels[i]);
      CHECK(r.data[3 * i + 2] == si.image.pixels[i]);
      CHECK(f.coverage[i] == (k.coverage[i] | gl.coverage[i] | si.coverage[i]));
    }
  }
  const auto ordered = fuse_ordered(si, k, gl);
  CHECK(ordered.name == "SI-K-GL");
  CHECK(ordered.channel(0).pixels == si.image.pixels);
}

TEST_CASE("fusion rejects mismatched inputs") {
  const auto k = random_gai(DescriptorKind::K, 8, 8, 1), h = random_gai(DescriptorKind::H, 8, 8, 2);
  CHECK(code_of([&] { fuse(k, h, random_gai(DescriptorKind::SI, 9, 8, 3)); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { fuse(k, h, random_gai(DescriptorKind::SI, 8, 8, 3, "other")); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { fuse(k, h, random_gai(DescriptorKind::K, 8, 8, 3)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("identity augmentation leaves the image unchanged") {
  const auto f = random_fgai(31, 20, 5);
  const auto a = augment(f, AugmentSpec{});
  CHECK(a.planes == f.planes);
  CHECK(a.coverage == f.coverage);
  const auto r0 = augment(f, AugmentSpec{false, 0.0, 0.0, 99});
  CHECK(r0.planes == f.planes);
}

TEST_CASE("horizontal flip mirrors columns and is an involution") {
  const auto f = random_fgai(31, 20, 6);
  const AugmentSpec flip{true, 0.0, 0.0, 0};
  const auto once = augment(f, flip);
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 31; ++c) CHECK(once.channel(ch).at(r, c) == f.channel(ch).at(r, 30 - c));
  const auto twice = augment(once, flip);
  CHECK(twice.planes == f.planes);
  CHECK(twice.coverage == f.coverage);
}

TEST_CASE("rotation by 90 degrees about the centre of a square image is an exact permutation") {
  const auto f = random_fgai(16, 16, 7);
  const auto rot = augment(f, AugmentSpec{false, 90.0, 0.0, 0});
  // Output (r, c) samples the source at (16 - 1 - c, r) for a 90 degree turn, or the
  // transpose; establish which from one channel, then require it everywhere.
  auto src_of = [&](int r, int c, bool ccw) { return ccw ? std::pair(c, 15 - r) : std::pair(15 - c, r); };
  for (bool ccw : {true, false}) {
    bool all = true;
    for (int r = 0; r < 16 && all; ++r)
      for (int c = 0; c < 16 && all; ++c) {
        const auto [sr, sc] = src_of(r, c, ccw);
        all = rot.channel(0).at(r, c) == f.channel(0).at(sr, sc);
      }
    if (!all) continue;
    for (int ch = 0; ch < 3; ++ch)
      for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) {
          const auto [sr, sc] = src_of(r, c, ccw);
          CHECK(rot.channel(ch).at(r, c) == f.channel(ch).at(sr, sc));
        }
    const auto back = augment(augment(augment(rot, {false, 90.0, 0.0, 0}), {false, 90.0, 0.0, 0}), {false, 90.0, 0.0, 0});
    CHECK(back.planes == f.planes);
    return;
  }
  FAIL("90 degree rotation is not a pixel permutation");
}

TEST_CASE("small rotations keep a constant interior and fill corners with background") {
  GaiImage g;
  g.kind = DescriptorKind::H;
  g.image = GrayImage(40, 40, 200);
  g.coverage.assign(1600, 1);
  const auto r = augment(g, AugmentSpec{false, 30.0, 0.0, 0});
  CHECK(r.image.at(20, 20) == 200);
  CHECK(r.image.at(0, 0) == 0);
  CHECK(r.coverage[0] == 0);
}

TEST_CASE("noise has the requested spread and is reproducible from the seed") {
  GaiImage g;
  g.kind = DescriptorKind::K;
  g.image = GrayImage(200, 200, 128);
  g.coverage.assign(40000, 1);
  const AugmentSpec spec{false, 0.0, 5.0, 42};
  const auto a = augment(g, spec);
  double mean = 0, var = 0;
  for (auto p : a.image.pixels) mean += p;
  mean /= 40000.0;
  for (auto p : a.image.pixels) var += (p - mean) * (p - mean);
  const double sd = std::sqrt(var / 39999.0);
  CHECK(std::abs(mean - 128.0) < 0.1);
  // Rounding to integers adds 1/12 to the variance.
  CHECK(sd == doctest::Approx(std::sqrt(25.0 + 1.0 / 12.0)).epsilon(0.03));
  CHECK(augment(g, spec).image.pixels == a.image.pixels);
  CHECK(augment(g, AugmentSpec{false, 0.0, 5.0, 43}).image.pixels != a.image.pixels);

  GaiImage dark = g;
  dark.image = GrayImage(200, 200, 0);
  const auto d = augment(dark, AugmentSpec{false, 0.0, 50.0, 1});
  CHECK(*std::min_element(d.image.pixels.begin(), d.image.pixels.end()) == 0);

  CHECK(code_of([&] { augment(g, AugmentSpec{false, 0.0, -1.0, 0}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { augment(g, AugmentSpec{false, NAN, 0.0, 0}); }) == ErrorCode::InvalidArgument);
}
