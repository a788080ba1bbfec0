#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "egotopo/common.hpp"
#include "egotopo/dataset.hpp"
#include "egotopo/rng.hpp"
#include "egotopo/synth.hpp"

using namespace egotopo;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("egotopo_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

EmbeddingMatrix make_video(const std::string& id, int frames, int dim, double fps,
                           std::uint64_t seed) {
  EmbeddingMatrix m;
  m.video_id = id;
  m.fps = fps;
  m.dim = dim;
  m.rows.resize(frames, dim);
  Rng rng(seed);
  for (int f = 0; f < frames; ++f)
    for (int d = 0; d < dim; ++d) m.rows(f, d) = static_cast<float>(rng.gaussian());
  return m;
}

Dataset make_dataset(int frames = 40) {
  Dataset ds;
  ds.vocab.verbs = {"cut", "wash"};
  ds.vocab.nouns = {"tomato", "plate"};
  ds.vocab.interactions = {{0, 0}, {1, 1}};
  ds.videos.emplace("v1", make_video("v1", frames, 8, 30.0, 1));
  ds.videos.emplace("v2", make_video("v2", frames, 8, 30.0, 2));
  ds.kitchen_of["v1"] = "k1";
  ds.kitchen_of["v2"] = "k1";
  ds.annotations.push_back({"v1", 2, 10, 0, 0});
  ds.annotations.push_back({"v2", 5, 20, 1, 1});
  return ds;
}

// Independent remapping oracle: enumerate the kept frames and pick the
// nearest, breaking ties toward the earlier one.
int nearest_kept_oracle(int frame, int stride, int num_frames) {
  int best_idx = 0;
  int best_dist = INT32_MAX;
  int idx = 0;
  for (int kept = 0; kept < num_frames; kept += stride, ++idx) {
    int dist = std::abs(frame - kept);
    if (dist < best_dist) {  // strict: ties keep the earlier kept frame
      best_dist = dist;
      best_idx = idx;
    }
  }
  return best_idx;
}

}  // namespace

TEST_CASE("round-trips through save and load bit-exactly") {
  fs::path dir = temp_dir("roundtrip");
  Dataset ds = make_dataset();
  fs::path manifest = save_dataset(ds, dir);
  Dataset loaded = load_dataset(manifest);

  REQUIRE(loaded.videos.size() == 2);
  CHECK(loaded.videos.at("v1").rows == ds.videos.at("v1").rows);
  CHECK(loaded.videos.at("v2").rows == ds.videos.at("v2").rows);
  REQUIRE(loaded.annotations.size() == 2);
  CHECK(loaded.annotations[0].start_frame == 2);
  CHECK(loaded.annotations[1].stop_frame == 20);
  CHECK(loaded.kitchen_of.at("v2") == "k1");
  CHECK(loaded.vocab.num_interactions() == 2);

  // Second save of the loaded dataset produces byte-identical files.
  fs::path dir2 = temp_dir("roundtrip2");
  save_dataset(loaded, dir2);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir / "videos/v1.bin") == slurp(dir2 / "videos/v1.bin"));
  CHECK(slurp(dir / "annotations.jsonl") == slurp(dir2 / "annotations.jsonl"));
  CHECK(slurp(dir / "manifest.json") == slurp(dir2 / "manifest.json"));
}

TEST_CASE("load rejects bad data") {
  SUBCASE("annotation past the end of the video") {
    fs::path dir = temp_dir("badann");
    Dataset ds = make_dataset();
    ds.annotations.push_back({"v1", 10, 40, 0, 0});  // stop == num_frames
    fs::path manifest = save_dataset(ds, dir);
    CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("out of range"),
                         DataError);
  }

  SUBCASE("non-finite embedding entry") {
    fs::path dir = temp_dir("nan");
    Dataset ds = make_dataset();
    fs::path manifest = save_dataset(ds, dir);
    // Corrupt one float in place.
    std::fstream f(dir / "videos/v1.bin",
                   std::ios::binary | std::ios::in | std::ios::out);
    float nan = std::numeric_limits<float>::quiet_NaN();
    f.seekp(3 * sizeof(float));
    f.write(reinterpret_cast<const char*>(&nan), sizeof(nan));
    f.close();
    CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("non-finite"),
                         DataError);
  }

  SUBCASE("dim mismatch across videos") {
    fs::path dir = temp_dir("dim");
    Dataset ds = make_dataset();
    fs::path manifest = save_dataset(ds, dir);
    EmbeddingMatrix other = make_video("v2", 40, 16, 30.0, 7);
    save_embedding_file(other, dir / "videos/v2.bin");
    CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("dim mismatch"),
                         DataError);
  }

  SUBCASE("missing embedding file") {
    fs::path dir = temp_dir("missing");
    Dataset ds = make_dataset();
    fs::path manifest = save_dataset(ds, dir);
    fs::remove(dir / "videos/v1.bin");
    CHECK_THROWS_AS(load_dataset(manifest), DataError);
  }
}

TEST_CASE("subsample keeps every stride-th frame from frame 0") {
  EmbeddingMatrix m = make_video("v", 300, 4, 30.0, 3);
  SubsampleResult r = subsample_fps(m, 6.0);
  CHECK(r.stride == 5);
  CHECK(r.video.num_frames() == 60);
  CHECK(r.video.fps == doctest::Approx(6.0));
  for (int i = 0; i < 60; ++i) CHECK(r.video.rows.row(i) == m.rows.row(5 * i));

  SUBCASE("identity at target_fps == fps") {
    SubsampleResult id = subsample_fps(m, 30.0);
    CHECK(id.stride == 1);
    CHECK(id.video.rows == m.rows);
  }

  SUBCASE("rejects nonpositive and too-large targets") {
    CHECK_THROWS_AS(subsample_fps(m, 0.0), UsageError);
    CHECK_THROWS_AS(subsample_fps(m, 31.0), UsageError);
  }
}

TEST_CASE("annotation remapping goes to the nearest kept frame") {
  // 24-frame video at stride 5 keeps {0,5,10,15,20}: the interval [7,23]
  // lands on kept indices [1,4] (frames 5 and 20). Frozen from the
  // enumeration oracle below.
  CHECK(nearest_kept_oracle(7, 5, 24) == 1);
  CHECK(nearest_kept_oracle(23, 5, 24) == 4);
  ClipAnnotation ann{"v", 7, 23, 0, 0};
  ClipAnnotation remapped = remap_annotation(ann, 5, 5);
  CHECK(remapped.start_frame == 1);
  CHECK(remapped.stop_frame == 4);

  // In a longer video frame 23 is closer to kept frame 25 (index 5).
  CHECK(nearest_kept_oracle(23, 5, 300) == 5);
  CHECK(remap_frame(23, 5, 60) == 5);

  SUBCASE("matches the oracle everywhere, ties break earlier") {
    for (int stride : {2, 3, 5, 7}) {
      int num_frames = 83;
      int num_kept = (num_frames + stride - 1) / stride;
      for (int f = 0; f < num_frames; ++f)
        CHECK(remap_frame(f, stride, num_kept) ==
              nearest_kept_oracle(f, stride, num_frames));
    }
  }

  SUBCASE("remapping never inverts annotation order") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      int stride = rng.uniform_int(1, 8);
      int frames = rng.uniform_int(stride + 1, 400);
      int num_kept = (frames + stride - 1) / stride;
      int a = rng.uniform_int(0, frames - 1);
      int b = rng.uniform_int(a, frames - 1);
      CHECK(remap_frame(a, stride, num_kept) <= remap_frame(b, stride, num_kept));
    }
  }
}

TEST_CASE("subsample count equals ceil(frames / stride)") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    int frames = rng.uniform_int(1, 500);
    double fps = rng.uniform(5.0, 60.0);
    double target = rng.uniform(1.0, fps);
    EmbeddingMatrix m = make_video("v", frames, 2, fps, trial);
    SubsampleResult r = subsample_fps(m, target);
    int expected = (frames + r.stride - 1) / r.stride;
    CHECK(r.video.num_frames() == expected);
  }
}

TEST_CASE("manifest-level target_fps subsamples at load time") {
  fs::path dir = temp_dir("targetfps");
  Dataset ds = make_dataset(300);
  ds.annotations.clear();
  ds.annotations.push_back({"v1", 7, 23, 0, 0});
  save_dataset(ds, dir);

  // Inject target_fps into the manifest.
  std::ifstream in(dir / "manifest.json");
  std::string text(std::istreambuf_iterator<char>(in), {});
  in.close();
  text.insert(text.rfind('}'), ",\"target_fps\": 6.0");
  std::ofstream out(dir / "manifest.json");
  out << text;
  out.close();

  Dataset loaded = load_dataset(dir / "manifest.json");
  CHECK(loaded.videos.at("v1").num_frames() == 60);
  CHECK(loaded.annotations[0].start_frame == 1);
  CHECK(loaded.annotations[0].stop_frame == 5);  // 23 -> kept frame 25
}
