#include "pipeline.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "error.hpp"

#ifndef FGAI_BUILD_ID
#define FGAI_BUILD_ID "dev"
#endif

namespace fgai {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<DescriptorKind, 4> kGeometricKinds{DescriptorKind::K, DescriptorKind::H, DescriptorKind::LD,
                                                        DescriptorKind::SI};

std::size_t slot(DescriptorKind k) { return static_cast<std::size_t>(k); }

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

AugmentSpec seeded_for(const AugmentSpec& spec, const std::string& scan_id, const std::string& name) {
  AugmentSpec s = spec;
  s.seed = spec.seed ^ fnv1a(scan_id + "." + name);
  return s;
}

std::vector<Combo> requested_combos(const PipelineConfig& config) {
  return config.combos.empty() ? enumerate_combos(kAllKinds) : config.combos;
}

/// Writes through a temporary name so a crash never leaves a truncated file
/// that a rerun would mistake for finished output.
template <typename Image>
void write_png_atomic(const fs::path& path, const Image& image) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_png(tmp, image);
  fs::rename(tmp, path);
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorCode::Io, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

ojson quantization_json(const Quantization& q, bool normalized, const std::string& mode) {
  ojson j;
  j["mode"] = mode;
  if (normalized) {
    j["lo"] = q.lo;
    j["hi"] = q.hi;
  }
  return j;
}

struct Emitted {
  std::string file;
  ojson record;
};

fs::path provenance_path(const fs::path& dir, const std::string& scan_id) {
  return dir / (scan_id + ".provenance.jsonl");
}

std::vector<std::string> expected_files(const std::string& scan_id, const PipelineConfig& config) {
  std::vector<std::string> names;
  for (DescriptorKind k : kAllKinds) {
    names.push_back(image_file_name(scan_id, std::string(kind_name(k))));
    if (config.augment && config.augment_gais) names.push_back(image_file_name(scan_id, std::string(kind_name(k)) + ".aug"));
  }
  for (const Combo& c : requested_combos(config)) {
    const std::string n = combo_name(config.keep_channel_order ? c : canonical(c));
    names.push_back(image_file_name(scan_id, n));
    if (config.augment) names.push_back(image_file_name(scan_id, n + ".aug"));
  }
  return names;
}

bool scan_complete(const fs::path& dir, const std::string& scan_id, const PipelineConfig& config) {
  std::ifstream in(provenance_path(dir, scan_id));
  if (!in) return false;
  std::set<std::string> recorded;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    try {
      recorded.insert(ojson::parse(line).at("file").get<std::string>());
    } catch (const std::exception&) {
      return false;
    }
  }
  for (const auto& f : expected_files(scan_id, config))
    if (!recorded.count(f) || !fs::exists(dir / f)) return false;
  return true;
}

class Logger {
 public:
  Logger(const fs::path& path, const LogSink& sink) : out_(path, std::ios::app), sink_(sink) {}
  void operator()(const std::string& line) {
    std::lock_guard lock(mu_);
    out_ << line << '\n';
    out_.flush();
    if (sink_) sink_(line);
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
  const LogSink& sink_;
};

template <typename Fn>
void for_each_parallel(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (workers == 1) return run();
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
}

void dump_debug(const fs::path& dir, const ScanRasters& r) {
  std::vector<std::array<Vec2, 3>> uv(r.tmap.facet_pixels.size());
  for (std::size_t f = 0; f < uv.size(); ++f)
    for (int i = 0; i < 3; ++i) {
      const Vec2& p = r.tmap.facet_pixels[f][i];
      uv[f][i] = {p.x() / r.tmap.texture_width, 1.0 - p.y() / r.tmap.texture_height};
    }
  write_obj(dir / (r.scan_id + ".resampled.obj"), r.resampled.mesh, &uv);
  for (const DescriptorField& field : r.fields) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "vertex_index,value,valid\n";
    for (std::size_t v = 0; v < field.values.size(); ++v)
      csv << v << ',' << field.values[v] << ',' << int(field.valid[v]) << '\n';
    write_text_atomic(dir / (r.scan_id + "." + std::string(kind_name(field.kind)) + ".field.csv"), csv.str());
  }
}

/// Writes every image of a scan, then its provenance (last, so its presence
/// marks the scan complete).
std::size_t write_scan(const fs::path& dir, const ManifestRow& row, const ScanRasters* rasters, const ScanImages& images,
                       const PipelineConfig& config) {
  std::vector<Emitted> emitted;
  auto base = [&](const std::string& file, const std::string& name) {
    ojson j;
    j["file"] = file;
    j["scan_id"] = row.scan_id;
    j["image"] = name;
    j["mesh"] = row.mesh.string();
    j["texture"] = row.texture.string();
    j["step"] = config.resample.step;
    if (rasters) {
      j["spacing"] = rasters->resampled.spacing;
      j["resampled_vertices"] = rasters->resampled.mesh.vertices.size();
      j["resampled_facets"] = rasters->resampled.mesh.facets.size();
    }
    j["width"] = config.size.width;
    j["height"] = config.size.height;
    j["background"] = 0;
    j["build"] = FGAI_BUILD_ID;
    return j;
  };

  for (DescriptorKind k : kAllKinds) {
    const GaiImage& g = images.gais[slot(k)];
    const std::string name(kind_name(k));
    auto emit = [&](const GaiImage& img, const std::string& n, const AugmentSpec* aug) {
      const std::string file = image_file_name(row.scan_id, n);
      write_png_atomic(dir / file, img.image);
      ojson j = base(file, n);
      j["kind"] = name;
      j["normalization"] = quantization_json(g.quantization, g.normalized, g.normalization_mode);
      if (aug) j["augment"] = {{"flip", aug->horizontal_flip}, {"rotation_degrees", aug->rotation_degrees},
                               {"noise_sigma", aug->noise_sigma}, {"seed", aug->seed}};
      emitted.push_back({file, j});
    };
    emit(g, name, nullptr);
    if (config.augment && config.augment_gais) {
      const AugmentSpec spec = seeded_for(*config.augment, row.scan_id, name);
      emit(augment(g, spec), name + ".aug", &spec);
    }
  }
  for (const FgaiImage& f : images.fgais) {
    auto emit = [&](const FgaiImage& img, const std::string& n, const AugmentSpec* aug) {
      const std::string file = image_file_name(row.scan_id, n);
      write_png_atomic(dir / file, img.to_raster());
      ojson j = base(file, n);
      j["combo"] = f.name;
      ojson channels = ojson::array();
      for (std::size_t i = 0; i < 3; ++i) {
        const GaiImage& src = images.gais[slot(f.kinds[i])];
        ojson c;
        c["kind"] = std::string(kind_name(f.kinds[i]));
        c["source"] = image_file_name(row.scan_id, std::string(kind_name(f.kinds[i])));
        c["normalization"] = quantization_json(src.quantization, src.normalized, src.normalization_mode);
        channels.push_back(c);
      }
      j["channels"] = channels;
      if (aug) j["augment"] = {{"flip", aug->horizontal_flip}, {"rotation_degrees", aug->rotation_degrees},
                               {"noise_sigma", aug->noise_sigma}, {"seed", aug->seed}};
      emitted.push_back({file, j});
    };
    emit(f, f.name, nullptr);
    if (config.augment) {
      const AugmentSpec spec = seeded_for(*config.augment, row.scan_id, f.name);
      emit(augment(f, spec), f.name + ".aug", &spec);
    }
  }

  std::string text;
  for (const auto& e : emitted) text += e.record.dump() + "\n";
  write_text_atomic(provenance_path(dir, row.scan_id), text);
  return emitted.size();
}

}  // namespace

std::string image_file_name(const std::string& scan_id, const std::string& name) {
  return scan_id + "." + name + ".png";
}

void PipelineConfig::validate() const {
  require(resample.step >= 1.0 && std::isfinite(resample.step), "step must be >= 1");
  require(neighborhood.radius_multiplier > 0.0, "neighbourhood radius multiplier must be positive");
  require(size.width > 0 && size.height > 0, "image size must be positive");
  require(workers >= 1, "need at least one worker");
  if (augment) {
    require(augment->noise_sigma >= 0.0 && std::isfinite(augment->noise_sigma), "noise sigma must be >= 0");
    require(std::isfinite(augment->rotation_degrees), "rotation must be finite");
  }
  std::set<std::string> names;
  for (const Combo& c : combos) {
    if (c[0] == c[1] || c[1] == c[2] || c[0] == c[2]) fail(ErrorCode::InvalidArgument, "combo repeats a kind");
    if (!names.insert(combo_name(keep_channel_order ? c : canonical(c))).second)
      fail(ErrorCode::InvalidArgument, "combo listed twice: " + combo_name(c));
  }
}

ScanRasters compute_scan_rasters(const TexturedMesh& mesh, const std::string& scan_id, const PipelineConfig& config) {
  ScanRasters out;
  out.scan_id = scan_id;
  const PrincipalFrame frame = principal_frame(mesh.geometry);
  out.resampled = resample(mesh, frame, config.resample);
  out.tmap = rebuild_texture_map(out.resampled, mesh);

  DescriptorOptions opts;
  opts.neighborhood = config.neighborhood;
  if (config.field_source == FieldSource::Resampled) {
    const SurfaceIndex surface(out.resampled.mesh, &out.resampled.frame);
    out.fields = descriptor_fields(surface, kGeometricKinds, opts);
  } else {
    const SurfaceIndex surface(mesh.geometry, &frame);
    for (const DescriptorField& f : descriptor_fields(surface, kGeometricKinds, opts))
      out.fields.push_back(map_field(f, out.resampled.correspondence));
  }
  for (const DescriptorField& f : out.fields)
    out.rasters[slot(f.kind)] = rasterize_values(out.resampled, out.tmap, f, config.size);
  out.gl = tessellated_gray(mesh, out.resampled, out.tmap, config.size);
  out.gl.mesh_id = scan_id;
  out.gl.step = config.resample.step;
  return out;
}

ScanImages quantize_scan(const ScanRasters& rasters, const PipelineConfig& config,
                         const std::optional<std::array<Quantization, 5>>& global) {
  ScanImages out;
  out.scan_id = rasters.scan_id;
  for (DescriptorKind k : kGeometricKinds) {
    std::optional<Quantization> fixed;
    if (global) fixed = (*global)[slot(k)];
    GaiImage g = quantize_raster(rasters.rasters[slot(k)], k, fixed);
    g.mesh_id = rasters.scan_id;
    g.step = config.resample.step;
    out.gais[slot(k)] = std::move(g);
  }
  out.gais[slot(DescriptorKind::GL)] = rasters.gl;
  for (const Combo& c : requested_combos(config)) {
    const GaiImage &a = out.gais[slot(c[0])], &b = out.gais[slot(c[1])], &d = out.gais[slot(c[2])];
    out.fgais.push_back(config.keep_channel_order ? fuse_ordered(a, b, d) : fuse(a, b, d));
  }
  return out;
}

ScanImages process_scan(const TexturedMesh& mesh, const std::string& scan_id, const PipelineConfig& config) {
  config.validate();
  return quantize_scan(compute_scan_rasters(mesh, scan_id, config), config);
}

PipelineResult run_pipeline(const PipelineConfig& config, const Manifest& manifest, const LogSink& sink) {
  config.validate();
  manifest.validate();
  const fs::path& dir = config.output_dir;
  fs::create_directories(dir);
  Logger log(dir / "process.log", sink);
  const std::size_t n = manifest.rows.size();
  log("run: " + std::to_string(n) + " scans, step " + std::to_string(config.resample.step) + ", size " +
      std::to_string(config.size.width) + "x" + std::to_string(config.size.height) + ", normalization " +
      (config.normalization == NormalizationMode::Global ? "global" : "image") + ", build " + FGAI_BUILD_ID);

  std::vector<char> todo(n, 1);
  PipelineResult result;
  if (!config.force)
    for (std::size_t i = 0; i < n; ++i)
      if (scan_complete(dir, manifest.rows[i].scan_id, config)) todo[i] = 0;
  const bool global = config.normalization == NormalizationMode::Global;
  if (std::none_of(todo.begin(), todo.end(), [](char t) { return t != 0; })) {
    for (const auto& row : manifest.rows) log("skip " + row.scan_id + " (complete)");
    result.skipped = n;
    return result;
  }

  std::vector<std::optional<ScanRasters>> rasters(n);
  std::vector<std::string> errors(n);
  std::vector<std::size_t> written(n, 0);
  auto guarded = [&](std::size_t i, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      errors[i] = e.what();
      rasters[i].reset();
    }
  };
  auto compute = [&](std::size_t i) {
    const ManifestRow& row = manifest.rows[i];
    const TexturedMesh mesh = load_textured_mesh(row.mesh, row.texture);
    if (mesh.dropped_facets) log(row.scan_id + ": dropped " + std::to_string(mesh.dropped_facets) + " degenerate facets");
    rasters[i] = compute_scan_rasters(mesh, row.scan_id, config);
    if (config.debug_dump) dump_debug(dir, *rasters[i]);
  };
  auto emit = [&](std::size_t i, const std::optional<std::array<Quantization, 5>>& q) {
    const ScanImages images = quantize_scan(*rasters[i], config, q);
    written[i] = write_scan(dir, manifest.rows[i], &*rasters[i], images, config);
    rasters[i].reset();
  };

  if (!global) {
    for_each_parallel(n, config.workers, [&](std::size_t i) {
      if (!todo[i]) return;
      guarded(i, [&] {
        compute(i);
        emit(i, std::nullopt);
      });
    });
  } else {
    // Pass 1 rasterizes every scan so the clamp range covers the whole set,
    // including scans whose images are already on disk.
    for_each_parallel(n, config.workers, [&](std::size_t i) { guarded(i, [&] { compute(i); }); });
    std::array<Quantization, 5> params{};
    for (DescriptorKind k : kGeometricKinds) {
      std::vector<double> pooled;
      for (std::size_t i = 0; i < n; ++i)
        if (rasters[i]) {
          const auto v = rasters[i]->rasters[slot(k)].covered_values();
          pooled.insert(pooled.end(), v.begin(), v.end());
        }
      if (!pooled.empty()) params[slot(k)] = fit_quantization(pooled);
      log(std::string("global ") + std::string(kind_name(k)) + " range [" + std::to_string(params[slot(k)].lo) + ", " +
          std::to_string(params[slot(k)].hi) + "]");
    }
    for_each_parallel(n, config.workers, [&](std::size_t i) {
      if (!todo[i] || !rasters[i]) return;
      guarded(i, [&] { emit(i, params); });
    });
  }

  for (std::size_t i = 0; i < n; ++i) {
    const std::string& id = manifest.rows[i].scan_id;
    if (!errors[i].empty()) {
      if (!todo[i]) {
        // Complete scan that failed only while gathering global statistics.
        log("skip " + id + " (complete; statistics pass failed: " + errors[i] + ")");
        ++result.skipped;
        continue;
      }
      log("FAIL " + id + ": " + errors[i]);
      result.failures.emplace_back(id, errors[i]);
    } else if (!todo[i]) {
      log("skip " + id + " (complete)");
      ++result.skipped;
    } else {
      log("ok " + id + ": " + std::to_string(written[i]) + " images");
      ++result.processed;
      result.images_written += written[i];
    }
  }
  log("done: " + std::to_string(result.processed) + " processed, " + std::to_string(result.skipped) + " skipped, " +
      std::to_string(result.failures.size()) + " failed");
  return result;
}

PipelineResult fuse_directory(const fs::path& dir, const Manifest& manifest, const std::vector<Combo>& combos_in,
                              bool keep_order, const std::optional<AugmentSpec>& augment_spec,
                              const fs::path& output_dir) {
  const std::vector<Combo> combos = combos_in.empty() ? enumerate_combos(kAllKinds) : combos_in;
  fs::create_directories(output_dir);
  PipelineResult result;
  for (const ManifestRow& row : manifest.rows) {
    try {
      std::array<std::optional<GaiImage>, 5> gais;
      auto load = [&](DescriptorKind k) -> const GaiImage& {
        auto& slot_ref = gais[slot(k)];
        if (!slot_ref) {
          GaiImage g;
          g.kind = k;
          g.mesh_id = row.scan_id;
          g.image = read_gray(dir / image_file_name(row.scan_id, std::string(kind_name(k))));
          g.coverage.resize(g.image.pixels.size());
          for (std::size_t p = 0; p < g.coverage.size(); ++p) g.coverage[p] = g.image.pixels[p] != g.background;
          slot_ref = std::move(g);
        }
        return *slot_ref;
      };
      std::string text;
      for (const Combo& c : combos) {
        const GaiImage &a = load(c[0]), &b = load(c[1]), &d = load(c[2]);
        const FgaiImage f = keep_order ? fuse_ordered(a, b, d) : fuse(a, b, d);
        auto emit = [&](const FgaiImage& img, const std::string& name) {
          const std::string file = image_file_name(row.scan_id, name);
          write_png_atomic(output_dir / file, img.to_raster());
          ojson j;
          j["file"] = file;
          j["scan_id"] = row.scan_id;
          j["combo"] = f.name;
          ojson sources = ojson::array();
          for (DescriptorKind k : f.kinds) sources.push_back(image_file_name(row.scan_id, std::string(kind_name(k))));
          j["sources"] = sources;
          j["augmented"] = &img != &f;
          j["build"] = FGAI_BUILD_ID;
          text += j.dump() + "\n";
          ++result.images_written;
        };
        emit(f, f.name);
        if (augment_spec) emit(augment(f, seeded_for(*augment_spec, row.scan_id, f.name)), f.name + ".aug");
      }
      write_text_atomic(output_dir / (row.scan_id + ".fuse.provenance.jsonl"), text);
      ++result.processed;
    } catch (const std::exception& e) {
      result.failures.emplace_back(row.scan_id, e.what());
    }
  }
  return result;
}

FeatureMatrix pixel_features(const fs::path& dir, const Manifest& manifest, const std::string& image_name, int cell) {
  require(cell >= 1, "cell size must be >= 1");
  require(!manifest.rows.empty(), "empty manifest");
  FeatureMatrix fm;
  fm.layer = "pixels:" + image_name + ":" + std::to_string(cell);
  std::vector<std::vector<double>> rows;
  int width = -1, height = -1, channels = -1;
  const bool sequences = std::any_of(manifest.rows.begin(), manifest.rows.end(),
                                     [](const ManifestRow& r) { return r.frame_index.has_value(); });
  for (const ManifestRow& row : manifest.rows) {
    const Raster img = read_raster(dir / image_file_name(row.scan_id, image_name));
    if (width < 0) {
      width = img.width;
      height = img.height;
      channels = img.channels;
    } else if (img.width != width || img.height != height || img.channels != channels) {
      fail(ErrorCode::InvalidArgument, "image of scan '" + row.scan_id + "' differs in size or channel count");
    }
    const int gw = (width + cell - 1) / cell, gh = (height + cell - 1) / cell;
    std::vector<double> feats;
    feats.reserve(static_cast<std::size_t>(gw) * gh * channels);
    for (int ch = 0; ch < channels; ++ch)
      for (int br = 0; br < gh; ++br)
        for (int bc = 0; bc < gw; ++bc) {
          double sum = 0.0;
          int count = 0;
          for (int r = br * cell; r < std::min(height, (br + 1) * cell); ++r)
            for (int c = bc * cell; c < std::min(width, (bc + 1) * cell); ++c, ++count)
              sum += img.data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
          feats.push_back(sum / count);
        }
    rows.push_back(std::move(feats));
    fm.sample_ids.push_back(row.scan_id);
    fm.subject_ids.push_back(row.subject_id);
    fm.labels.push_back(row.label);
    if (sequences) {
      fm.sequence_ids.push_back(row.sequence_id);
      fm.frame_indices.push_back(row.frame_index.value_or(0));
    }
  }
  fm.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) fm.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return fm;
}

}  // namespace fgai
