#include "egotopo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "egotopo/common.hpp"
#include "json.hpp"

namespace egotopo {

namespace fs = std::filesystem;
using nlohmann::json;

const EmbeddingMatrix& Dataset::video(const std::string& id) const {
  auto it = videos.find(id);
  if (it == videos.end()) throw DataError("unknown video id: " + id);
  return it->second;
}

std::vector<const ClipAnnotation*> Dataset::clips_of(const std::string& video_id) const {
  std::vector<const ClipAnnotation*> out;
  for (const auto& a : annotations)
    if (a.video_id == video_id) out.push_back(&a);
  std::sort(out.begin(), out.end(), [](const ClipAnnotation* a, const ClipAnnotation* b) {
    if (a->start_frame != b->start_frame) return a->start_frame < b->start_frame;
    return a->stop_frame < b->stop_frame;
  });
  return out;
}

std::vector<std::string> Dataset::video_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : videos) ids.push_back(id);
  return ids;
}

std::vector<std::string> Dataset::kitchen_ids() const {
  std::set<std::string> ks;
  for (const auto& [_, k] : kitchen_of) ks.insert(k);
  return {ks.begin(), ks.end()};
}

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

EmbeddingMatrix load_embedding_file(const fs::path& bin_path) {
  fs::path header_path = bin_path;
  header_path += ".json";
  json h = read_json_file(header_path);
  EmbeddingMatrix m;
  try {
    m.video_id = h.at("video_id").get<std::string>();
    m.fps = h.at("fps").get<double>();
    m.dim = h.at("dim").get<int>();
    int num_frames = h.at("num_frames").get<int>();
    if (num_frames < 1 || m.dim < 1 || !(m.fps > 0.0))
      throw DataError("invalid embedding header in " + header_path.string());
    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw DataError("missing file: " + bin_path.string());
    m.rows.resize(num_frames, m.dim);
    in.read(reinterpret_cast<char*>(m.rows.data()),
            static_cast<std::streamsize>(sizeof(float)) * num_frames * m.dim);
    if (in.gcount() != static_cast<std::streamsize>(sizeof(float)) * num_frames * m.dim)
      throw DataError("truncated embedding file: " + bin_path.string());
  } catch (const json::exception& e) {
    throw DataError("bad embedding header " + header_path.string() + ": " + e.what());
  }
  if (!m.rows.allFinite())
    throw DataError("non-finite embedding entry in " + bin_path.string());
  return m;
}

void save_embedding_file(const EmbeddingMatrix& m, const fs::path& bin_path) {
  {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + bin_path.string());
    out.write(reinterpret_cast<const char*>(m.rows.data()),
              static_cast<std::streamsize>(sizeof(float)) * m.rows.size());
  }
  json h = {{"video_id", m.video_id},
            {"num_frames", m.num_frames()},
            {"dim", m.dim},
            {"fps", m.fps}};
  fs::path header_path = bin_path;
  header_path += ".json";
  std::ofstream out(header_path);
  out << h.dump(2) << "\n";
}

std::vector<ClipAnnotation> load_annotations_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  std::vector<ClipAnnotation> anns;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      ClipAnnotation a;
      a.video_id = j.at("video_id").get<std::string>();
      a.start_frame = j.at("start_frame").get<int>();
      a.stop_frame = j.at("stop_frame").get<int>();
      a.verb_id = j.at("verb_id").get<int>();
      a.noun_id = j.at("noun_id").get<int>();
      anns.push_back(a);
    } catch (const json::exception& e) {
      throw DataError("bad annotation at " + path.string() + ":" +
                      std::to_string(lineno) + ": " + e.what());
    }
  }
  return anns;
}

void save_annotations_file(const std::vector<ClipAnnotation>& anns, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& a : anns) {
    json j = {{"video_id", a.video_id},
              {"start_frame", a.start_frame},
              {"stop_frame", a.stop_frame},
              {"verb_id", a.verb_id},
              {"noun_id", a.noun_id}};
    out << j.dump() << "\n";
  }
}

InteractionVocab vocab_from_json_text(const std::string& text) {
  json j = json::parse(text);
  InteractionVocab v;
  v.verbs = j.at("verbs").get<std::vector<std::string>>();
  v.nouns = j.at("nouns").get<std::vector<std::string>>();
  for (const auto& pair : j.at("interactions")) {
    v.interactions.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
  }
  return v;
}

namespace {

void validate_vocab(const InteractionVocab& v) {
  std::set<std::string> verbs(v.verbs.begin(), v.verbs.end());
  if (verbs.size() != v.verbs.size()) throw DataError("duplicate verb in vocab");
  std::set<std::string> nouns(v.nouns.begin(), v.nouns.end());
  if (nouns.size() != v.nouns.size()) throw DataError("duplicate noun in vocab");
  std::set<std::pair<int, int>> inter(v.interactions.begin(), v.interactions.end());
  if (inter.size() != v.interactions.size())
    throw DataError("duplicate interaction in vocab");
  for (const auto& [verb, noun] : v.interactions) {
    if (verb < 0 || verb >= v.num_verbs() || noun < 0 || noun >= v.num_nouns())
      throw DataError("interaction references out-of-range verb or noun id");
  }
}

}  // namespace

void validate_dataset(const Dataset& ds) {
  validate_vocab(ds.vocab);
  int dim = -1;
  for (const auto& [id, m] : ds.videos) {
    if (m.num_frames() < 1 || m.dim < 1)
      throw DataError("empty embedding matrix for video " + id);
    if (!m.rows.allFinite()) throw DataError("non-finite embedding in video " + id);
    if (dim < 0) dim = m.dim;
    if (m.dim != dim)
      throw DataError("dim mismatch across videos (video " + id + ")");
    if (ds.kitchen_of.find(id) == ds.kitchen_of.end())
      throw DataError("video " + id + " has no kitchen id");
  }
  for (const auto& a : ds.annotations) {
    auto it = ds.videos.find(a.video_id);
    if (it == ds.videos.end())
      throw DataError("annotation references unknown video " + a.video_id);
    int n = it->second.num_frames();
    if (a.start_frame < 0 || a.start_frame > a.stop_frame || a.stop_frame >= n)
      throw DataError("annotation out of range for video " + a.video_id + " [" +
                      std::to_string(a.start_frame) + "," +
                      std::to_string(a.stop_frame) + "] with " + std::to_string(n) +
                      " frames");
    if (a.verb_id < 0 || a.verb_id >= ds.vocab.num_verbs())
      throw DataError("annotation verb id out of vocab range");
    if (a.noun_id < 0 || a.noun_id >= ds.vocab.num_nouns())
      throw DataError("annotation noun id out of vocab range");
    if (ds.vocab.interaction_id(a.verb_id, a.noun_id) < 0)
      throw DataError("annotation (verb, noun) pair not in interaction vocab");
  }
  if (ds.splits) {
    for (const auto& id : ds.splits->train)
      if (ds.videos.find(id) == ds.videos.end())
        throw DataError("train split references unknown video " + id);
    for (const auto& id : ds.splits->eval)
      if (ds.videos.find(id) == ds.videos.end())
        throw DataError("eval split references unknown video " + id);
  }
}

Dataset load_dataset(const fs::path& manifest_path) {
  json m = read_json_file(manifest_path);
  fs::path base = manifest_path.parent_path();
  Dataset ds;
  std::optional<double> target_fps;
  try {
    if (m.contains("schema_version") && m["schema_version"].get<int>() != kSchemaVersion)
      throw DataError("manifest schema version mismatch");
    if (m.contains("target_fps")) target_fps = m["target_fps"].get<double>();
    if (m.at("vocab").is_string()) {
      json v = read_json_file(base / m["vocab"].get<std::string>());
      ds.vocab = vocab_from_json_text(v.dump());
    } else {
      ds.vocab = vocab_from_json_text(m.at("vocab").dump());
    }
    for (const auto& ventry : m.at("videos")) {
      fs::path p = base / ventry.at("embeddings").get<std::string>();
      EmbeddingMatrix em = load_embedding_file(p);
      std::string vid = ventry.at("video_id").get<std::string>();
      if (em.video_id != vid)
        throw DataError("video id mismatch between manifest and header for " + vid);
      ds.kitchen_of[vid] = ventry.at("kitchen").get<std::string>();
      ds.videos.emplace(vid, std::move(em));
    }
    for (const auto& apath : m.at("annotations")) {
      auto anns = load_annotations_file(base / apath.get<std::string>());
      ds.annotations.insert(ds.annotations.end(), anns.begin(), anns.end());
    }
    if (m.contains("splits")) {
      DatasetSplits sp;
      sp.train = m["splits"].at("train").get<std::vector<std::string>>();
      sp.eval = m["splits"].at("eval").get<std::vector<std::string>>();
      ds.splits = sp;
    }
  } catch (const json::exception& e) {
    throw DataError("bad manifest " + manifest_path.string() + ": " + e.what());
  }

  if (target_fps) {
    for (auto& [id, video] : ds.videos) {
      if (*target_fps >= video.fps) continue;
      SubsampleResult r = subsample_fps(video, *target_fps);
      int num_kept = r.video.num_frames();
      for (auto& a : ds.annotations)
        if (a.video_id == id) a = remap_annotation(a, r.stride, num_kept);
      video = std::move(r.video);
    }
  }
  validate_dataset(ds);
  return ds;
}

fs::path save_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir / "videos");
  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["videos"] = json::array();
  for (const auto& [id, m] : ds.videos) {
    fs::path rel = fs::path("videos") / (id + ".bin");
    save_embedding_file(m, dir / rel);
    manifest["videos"].push_back({{"video_id", id},
                                  {"embeddings", rel.string()},
                                  {"kitchen", ds.kitchen_of.at(id)}});
  }
  save_annotations_file(ds.annotations, dir / "annotations.jsonl");
  manifest["annotations"] = json::array({"annotations.jsonl"});
  json inter = json::array();
  for (const auto& [v, n] : ds.vocab.interactions) inter.push_back({v, n});
  manifest["vocab"] = {{"verbs", ds.vocab.verbs},
                       {"nouns", ds.vocab.nouns},
                       {"interactions", inter}};
  if (ds.splits)
    manifest["splits"] = {{"train", ds.splits->train}, {"eval", ds.splits->eval}};
  fs::path mpath = dir / "manifest.json";
  std::ofstream out(mpath);
  out << manifest.dump(2) << "\n";
  return mpath;
}

SubsampleResult subsample_fps(const EmbeddingMatrix& m, double target_fps) {
  if (!(target_fps > 0.0)) throw UsageError("target_fps must be positive");
  if (target_fps > m.fps)
    throw UsageError("target_fps exceeds the video fps (" + std::to_string(m.fps) + ")");
  int stride = static_cast<int>(std::lround(m.fps / target_fps));
  if (stride < 1) stride = 1;
  SubsampleResult r;
  r.stride = stride;
  for (int f = 0; f < m.num_frames(); f += stride) r.kept_frames.push_back(f);
  r.video.video_id = m.video_id;
  r.video.fps = m.fps / stride;
  r.video.dim = m.dim;
  r.video.rows.resize(static_cast<int>(r.kept_frames.size()), m.dim);
  for (std::size_t i = 0; i < r.kept_frames.size(); ++i)
    r.video.rows.row(static_cast<int>(i)) = m.rows.row(r.kept_frames[i]);
  return r;
}

int remap_frame(int frame, int stride, int num_kept) {
  EGOTOPO_CHECK(stride >= 1 && num_kept >= 1, "bad remap arguments");
  int q = frame / stride;
  int rem = frame - q * stride;
  int idx = (2 * rem > stride) ? q + 1 : q;  // ties (2*rem == stride) go earlier
  return std::min(idx, num_kept - 1);
}

ClipAnnotation remap_annotation(const ClipAnnotation& ann, int stride, int num_kept) {
  ClipAnnotation out = ann;
  out.start_frame = remap_frame(ann.start_frame, stride, num_kept);
  out.stop_frame = remap_frame(ann.stop_frame, stride, num_kept);
  EGOTOPO_CHECK(out.start_frame <= out.stop_frame, "remap inverted an annotation");
  return out;
}

}  // namespace egotopo
