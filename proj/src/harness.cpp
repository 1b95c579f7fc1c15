#include "srfuse/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "srfuse/d4.hpp"
#include "srfuse/fusion.hpp"
#include "srfuse/resample.hpp"
#include "srfuse/tiler.hpp"

namespace srfuse {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kBranchChunk = 8;

std::string sanitize(const std::string& text) {
  std::string out;
  for (char c : text) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

void warn(const std::string& msg) { std::cerr << "srfuse: warning: " << msg << '\n'; }
void info(const std::string& msg) { std::cerr << "srfuse: " << msg << '\n'; }

// Sorted stems of the .png files in `dir`.
std::vector<std::string> png_stems(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw InvalidArgument("not a directory: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".png") continue;
    const auto name = e.path().filename().string();
    if (!name.empty() && name.front() == '.') continue;  // in-flight temp files
    stems.push_back(e.path().stem().string());
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

[[noreturn]] void throw_pairing(const std::string& what, std::vector<std::string> missing,
                                std::vector<std::string> extra) {
  std::string msg = what;
  if (!missing.empty()) {
    msg += "; unmatched in first set:";
    for (const auto& m : missing) msg += " " + m;
  }
  if (!extra.empty()) {
    msg += "; unmatched in second set:";
    for (const auto& x : extra) msg += " " + x;
  }
  throw PairingError(msg, std::move(missing), std::move(extra));
}

void check_same_stems(const std::vector<std::string>& a, const std::vector<std::string>& b,
                      const std::string& what) {
  std::vector<std::string> missing, extra;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(missing));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(extra));
  if (!missing.empty() || !extra.empty()) throw_pairing(what, std::move(missing), std::move(extra));
}

// Writes through a dot-prefixed temp name so a crash never leaves a
// truncated PNG under the final name.
void save_atomic(const PixelGrid& grid, const fs::path& path) {
  const fs::path tmp = path.parent_path() / ("." + path.filename().string() + ".tmp.png");
  save_image(grid, tmp);
  fs::rename(tmp, path);
}

// HR reference cropped bottom/right to exactly scale x the LR size.
PixelGrid load_truth(const DatasetManifest::Entry& e, const PixelGrid& sr) {
  PixelGrid hr = load_image(e.hr_path);
  if (hr.width() == sr.width() && hr.height() == sr.height()) return hr;
  if (hr.width() < sr.width() || hr.height() < sr.height())
    throw DimensionMismatch("HR image for '" + e.id + "' is smaller than its SR output");
  return crop_rect(hr, 0, 0, sr.width(), sr.height());
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int i = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string BranchConfig::fingerprint() const {
  std::string fp = sanitize(backend.id) + "__" + to_string(backend.kind) + "__x" +
                   std::to_string(backend.scale.value()) + "__se" + (self_ensemble ? "1" : "0");
  if (tiling)
    fp += "__t" + std::to_string(tiling->tile_size) + "o" + std::to_string(tiling->overlap);
  else
    fp += "__full";
  return fp;
}

void PipelineConfig::validate() const {
  for (const auto* b : {&base, &strong}) {
    b->backend.validate();
    if (b->backend.scale != scale)
      throw ConfigError("backend '" + b->backend.id + "' scale " +
                        std::to_string(b->backend.scale.value()) + " differs from pipeline scale " +
                        std::to_string(scale.value()));
    if (b->tiling) {
      if (b->tiling->tile_size <= 0 || b->tiling->overlap < 0 ||
          b->tiling->overlap >= b->tiling->tile_size)
        throw ConfigError("backend '" + b->backend.id + "': need 0 <= overlap < tile_size");
    }
  }
  if (!alpha && !sweep_step) throw ConfigError("config needs 'alpha' and/or 'sweep_step'");
  if (alpha && !(*alpha >= 0.0 && *alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
  if (sweep_step && !(*sweep_step > 0.0 && *sweep_step <= 0.5))
    throw ConfigError("sweep_step must lie in (0, 0.5]");
  if (metric.border_crop < 0) throw ConfigError("metric.crop must be non-negative");
}

namespace harness {

std::string lr_file_name(const std::string& id, ScaleFactor scale) {
  return id + "x" + std::to_string(scale.value()) + ".png";
}

void validate_manifest(const DatasetManifest& manifest) {
  const int s = manifest.scale.value();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (!seen.insert(e.id).second) throw InvalidArgument("manifest: duplicate id '" + e.id + "'");
    if (i > 0 && !(manifest.entries[i - 1].id < e.id))
      throw InvalidArgument("manifest: ids are not sorted at '" + e.id + "'");
    const ImageSize hr = read_image_size(e.hr_path);
    const ImageSize lr = read_image_size(e.lr_path);
    if (lr.width != hr.width / s || lr.height != hr.height / s || lr.channels != hr.channels)
      throw DimensionMismatch("manifest: '" + e.id + "' LR is " + std::to_string(lr.width) + "x" +
                              std::to_string(lr.height) + " but HR " + std::to_string(hr.width) +
                              "x" + std::to_string(hr.height) + " at x" + std::to_string(s) +
                              " needs " + std::to_string(hr.width / s) + "x" +
                              std::to_string(hr.height / s));
  }
}

DatasetManifest discover_pairs(const fs::path& hr_dir, const fs::path& lr_dir, ScaleFactor scale) {
  const auto hr = png_stems(hr_dir);
  const auto lr = png_stems(lr_dir);
  const std::string suffix = "x" + std::to_string(scale.value());

  std::set<std::string> lr_ids;
  std::vector<std::string> unmatched_lr;
  for (const auto& stem : lr) {
    if (stem.size() > suffix.size() && stem.ends_with(suffix))
      lr_ids.insert(stem.substr(0, stem.size() - suffix.size()));
    else
      unmatched_lr.push_back(stem + ".png");
  }
  std::vector<std::string> unmatched_hr;
  const std::set<std::string> hr_ids(hr.begin(), hr.end());
  for (const auto& id : hr)
    if (!lr_ids.contains(id)) unmatched_hr.push_back(id);
  for (const auto& id : lr_ids)
    if (!hr_ids.contains(id)) unmatched_lr.push_back(lr_file_name(id, scale));
  if (!unmatched_hr.empty() || !unmatched_lr.empty())
    throw_pairing("HR/LR pairing failed (HR without LR, LR without HR)", std::move(unmatched_hr),
                  std::move(unmatched_lr));

  DatasetManifest manifest;
  manifest.scale = scale;
  manifest.source_note = "discovered: " + hr_dir.string() + " + " + lr_dir.string();
  for (const auto& id : hr)
    manifest.entries.push_back({id, hr_dir / (id + ".png"), lr_dir / lr_file_name(id, scale)});
  if (manifest.entries.empty()) warn("no image pairs found in " + hr_dir.string());
  validate_manifest(manifest);
  return manifest;
}

DatasetManifest degrade_dataset(const fs::path& hr_dir, const fs::path& lr_dir, ScaleFactor scale,
                                bool pre_crop) {
  const auto stems = png_stems(hr_dir);
  const int s = scale.value();
  fs::create_directories(lr_dir);

  // Check everything first so a bad file does not leave a half-written set.
  if (!pre_crop) {
    for (const auto& id : stems) {
      const ImageSize size = read_image_size(hr_dir / (id + ".png"));
      if (size.width % s != 0 || size.height % s != 0)
        throw InvalidArgument("HR image '" + id + "' is " + std::to_string(size.width) + "x" +
                              std::to_string(size.height) + ", not divisible by " +
                              std::to_string(s) + " (use pre-crop)");
    }
  }

  DatasetManifest manifest;
  manifest.scale = scale;
  manifest.source_note = "bicubic x" + std::to_string(s) + " from " + hr_dir.string();
  for (const auto& id : stems) {
    PixelGrid hr = load_image(hr_dir / (id + ".png"));
    if (hr.width() % s != 0 || hr.height() % s != 0)
      hr = crop_rect(hr, 0, 0, hr.width() - hr.width() % s, hr.height() - hr.height() % s);
    const fs::path lr_path = lr_dir / lr_file_name(id, scale);
    save_atomic(resample::downscale(hr, scale), lr_path);
    manifest.entries.push_back({id, hr_dir / (id + ".png"), lr_path});
  }
  if (manifest.entries.empty()) warn("no HR images found in " + hr_dir.string());
  validate_manifest(manifest);
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ImageIoError(ImageIoError::Kind::Unwritable, path.string(), "");
  for (const auto& e : manifest.entries)
    f << e.id << '\t' << e.hr_path.string() << '\t' << e.lr_path.string() << '\n';
  if (!f) throw ImageIoError(ImageIoError::Kind::Unwritable, path.string(), "write failed");
}

DatasetManifest read_manifest(const fs::path& path, ScaleFactor scale) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ImageIoError(ImageIoError::Kind::MissingFile, path.string(), "");
  DatasetManifest manifest;
  manifest.scale = scale;
  manifest.source_note = "manifest: " + path.string();
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": CRLF line ending");
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) +
                            ": expected id<TAB>hr-path<TAB>lr-path");
    manifest.entries.push_back(
        {line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)});
  }
  validate_manifest(manifest);
  return manifest;
}

std::vector<std::string> split_command(const std::string& text) {
  std::vector<std::string> argv;
  std::string cur;
  bool in_token = false;
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else if (c == '\\' && quote == '"' && i + 1 < text.size()) {
        cur += text[++i];
      } else {
        cur += c;
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (c == '\\' && i + 1 < text.size()) {
      cur += text[++i];
      in_token = true;
    } else if (c == ' ' || c == '\t') {
      if (in_token) argv.push_back(std::move(cur));
      cur.clear();
      in_token = false;
    } else {
      cur += c;
      in_token = true;
    }
  }
  if (quote) throw ConfigError("unterminated quote in command: " + text);
  if (in_token) argv.push_back(std::move(cur));
  return argv;
}

PipelineConfig parse_config_text(const std::string& text, const fs::path& base_dir) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (kv.contains(key)) throw ConfigError("config: duplicate key '" + key + "'");
    kv[key] = trim(line.substr(eq + 1));
  }

  std::set<std::string> used;
  const auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    used.insert(key);
    return it->second;
  };

  PipelineConfig cfg;
  if (auto v = get("scale")) cfg.scale = ScaleFactor(parse_int("scale", *v));

  const auto branch = [&](const std::string& name, bool default_se) {
    BranchConfig b;
    const std::string p = name + ".";
    const auto kind = parse_backend_kind(get(p + "kind").value_or("builtin-bicubic"));
    const std::string id = get(p + "id").value_or(name);
    if (kind == BackendSpec::Kind::External) {
      const auto cmd = get(p + "command");
      if (!cmd) throw ConfigError(p + "command is required for external backends");
      b.backend = BackendSpec::external(id, cfg.scale, split_command(*cmd));
    } else {
      b.backend = kind == BackendSpec::Kind::BuiltinNearest
                      ? BackendSpec::builtin_nearest(id, cfg.scale)
                      : BackendSpec::builtin_bicubic(id, cfg.scale);
      if (get(p + "command")) throw ConfigError(p + "command is only valid for external backends");
    }
    if (auto v = get(p + "workdir")) {
      fs::path w = *v;
      b.backend.workdir = (w.is_relative() && !base_dir.empty()) ? base_dir / w : w;
    }
    if (auto v = get(p + "timeout")) {
      const double sec = parse_double(p + "timeout", *v);
      if (!(sec > 0)) throw ConfigError(p + "timeout must be positive");
      b.backend.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(sec * 1000)));
    }
    if (auto v = get(p + "reentrant")) b.backend.reentrant = parse_bool(p + "reentrant", *v);
    if (auto v = get(p + "deterministic"))
      b.backend.deterministic = parse_bool(p + "deterministic", *v);
    b.self_ensemble = default_se;
    if (auto v = get(p + "self_ensemble")) b.self_ensemble = parse_bool(p + "self_ensemble", *v);
    const auto ts = get(p + "tile_size");
    const auto ov = get(p + "tile_overlap");
    if (ts) {
      TileParams t;
      t.tile_size = parse_int(p + "tile_size", *ts);
      t.overlap = ov ? parse_int(p + "tile_overlap", *ov) : tiler::kDefaultOverlap;
      b.tiling = t;
    } else if (ov) {
      throw ConfigError(p + "tile_overlap given without " + p + "tile_size");
    }
    return b;
  };
  cfg.base = branch("base", false);
  cfg.strong = branch("strong", true);

  if (auto v = get("alpha")) cfg.alpha = parse_double("alpha", *v);
  if (auto v = get("sweep_step")) cfg.sweep_step = parse_double("sweep_step", *v);
  cfg.metric.border_crop = cfg.scale.value();
  if (auto v = get("metric.mode")) cfg.metric.mode = parse_metric_mode(*v);
  if (auto v = get("metric.crop")) cfg.metric.border_crop = parse_int("metric.crop", *v);
  if (auto v = get("metric.quantize")) cfg.metric.quantize = parse_bool("metric.quantize", *v);
  if (auto v = get("output_dir")) cfg.output_dir = *v;

  for (const auto& [key, _] : kv)
    if (!used.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
  cfg.validate();
  return cfg;
}

PipelineConfig parse_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str(), path.parent_path());
}

namespace {

// One backend input derived from an image: transform k, tile t.
struct Job {
  std::size_t image = 0;
  int transform = 0;
};

std::string image_of_key(const std::string& key) {
  const auto dot = key.find(".k");
  return dot == std::string::npos ? key : key.substr(0, dot);
}

}  // namespace

BranchStats run_branch(const BranchConfig& branch, std::span<const BranchInput> inputs,
                       const fs::path& out_dir, const std::string& branch_name, bool reuse) {
  fs::create_directories(out_dir);
  const int s = branch.backend.scale.value();
  BranchStats stats;

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    backend::check_image_key(inputs[i].id);
    const fs::path out = out_dir / (inputs[i].id + ".png");
    if (reuse && fs::exists(out)) {
      try {
        const ImageSize lr = read_image_size(inputs[i].lr_path);
        const ImageSize sr = read_image_size(out);
        if (sr.width == lr.width * s && sr.height == lr.height * s && sr.channels == lr.channels) {
          load_image(out);  // full decode: a truncated file must not count as cached
          ++stats.reused;
          continue;
        }
      } catch (const ImageIoError&) {
      }
      warn("discarding stale cached output " + out.string());
    }
    pending.push_back(i);
  }

  const int transforms = branch.self_ensemble ? TransformId::kGroupSize : 1;
  for (std::size_t start = 0; start < pending.size(); start += kBranchChunk) {
    const std::size_t stop = std::min(pending.size(), start + kBranchChunk);

    std::vector<NamedGrid> batch;
    std::vector<TileLayout> layouts;  // one per (image, transform)
    for (std::size_t p = start; p < stop; ++p) {
      const auto& in = inputs[pending[p]];
      const PixelGrid lr = load_image(in.lr_path);
      for (int k = 0; k < transforms; ++k) {
        PixelGrid view = d4::apply(TransformId(k), lr);
        const std::string key = in.id + ".k" + std::to_string(k);
        if (!branch.tiling) {
          TileLayout whole = tiler::plan(view.width(), view.height(), std::max(view.width(), view.height()), 0);
          layouts.push_back(std::move(whole));
          batch.push_back({key, std::move(view)});
          continue;
        }
        auto [tiles, layout] = tiler::split(view, branch.tiling->tile_size, branch.tiling->overlap);
        for (std::size_t t = 0; t < tiles.size(); ++t) {
          char suffix[24];
          std::snprintf(suffix, sizeof suffix, ".t%05zu", t);
          batch.push_back({key + suffix, std::move(tiles[t])});
        }
        layouts.push_back(std::move(layout));
      }
    }

    std::vector<NamedGrid> results;
    try {
      results = backend::run_backend_batch(branch.backend, batch);
    } catch (const BackendError& e) {
      std::string image = image_of_key(e.image_id());
      if (image.empty()) {
        image = inputs[pending[start]].id;
        if (stop - start > 1) image += ".." + inputs[pending[stop - 1]].id;
      }
      throw PipelineError(branch_name, image, e.what());
    }

    std::size_t cursor = 0;
    std::size_t layout_index = 0;
    for (std::size_t p = start; p < stop; ++p) {
      const auto& in = inputs[pending[p]];
      std::vector<PixelGrid> per_transform;
      for (int k = 0; k < transforms; ++k) {
        const TileLayout& layout = layouts[layout_index++];
        std::vector<PixelGrid> tiles;
        for (std::size_t t = 0; t < layout.tiles.size(); ++t) tiles.push_back(std::move(results[cursor++].grid));
        per_transform.push_back(tiles.size() == 1 ? std::move(tiles.front())
                                                  : tiler::stitch(tiles, layout, s));
      }
      const PixelGrid sr = branch.self_ensemble ? d4::merge_ensemble(per_transform)
                                                : std::move(per_transform.front());
      save_atomic(sr, out_dir / (in.id + ".png"));
      ++stats.computed;
    }
    info(branch_name + ": " + std::to_string(stop) + "/" + std::to_string(pending.size()) +
         " images computed");
  }
  return stats;
}

namespace {

using json = nlohmann::ordered_json;

json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json report_json(const MetricReport& r) {
  json j;
  j["mean_psnr"] = number(r.mean_psnr);
  j["mean_ssim"] = r.mean_ssim;
  j["infinite_psnr_count"] = r.infinite_psnr_count;
  j["images"] = json::array();
  for (const auto& s : r.images) j["images"].push_back({{"id", s.id}, {"psnr", number(s.psnr)}, {"ssim", s.ssim}});
  return j;
}

json branch_json(const BranchConfig& b) {
  json j;
  j["backend"] = b.backend.id;
  j["kind"] = to_string(b.backend.kind);
  if (!b.backend.command.empty()) j["command"] = b.backend.command;
  j["self_ensemble"] = b.self_ensemble;
  if (b.tiling)
    j["tiling"] = {{"tile_size", b.tiling->tile_size}, {"overlap", b.tiling->overlap}};
  else
    j["tiling"] = nullptr;
  j["fingerprint"] = b.fingerprint();
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ImageIoError(ImageIoError::Kind::Unwritable, path.string(), "");
  f << text;
  if (!f) throw ImageIoError(ImageIoError::Kind::Unwritable, path.string(), "write failed");
}

std::string alpha_label(double alpha) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "fused (%.2f / %.2f)", 1.0 - alpha, alpha);
  return buf;
}

}  // namespace

PipelineResult run_pipeline(const DatasetManifest& manifest, const PipelineConfig& cfg) {
  cfg.validate();
  if (manifest.scale != cfg.scale)
    throw ConfigError("manifest scale x" + std::to_string(manifest.scale.value()) +
                      " differs from config scale x" + std::to_string(cfg.scale.value()));
  validate_manifest(manifest);
  if (cfg.output_dir.empty()) throw ConfigError("pipeline output directory not set");

  const fs::path out = cfg.output_dir;
  const fs::path base_dir = out / "branches" / cfg.base.fingerprint();
  const fs::path strong_dir = out / "branches" / cfg.strong.fingerprint();
  const fs::path fused_dir = out / "fused";
  fs::create_directories(out);

  std::vector<BranchInput> inputs;
  for (const auto& e : manifest.entries) inputs.push_back({e.id, e.lr_path});

  PipelineResult result;
  result.base_stats = run_branch(cfg.base, inputs, base_dir, "base");
  result.strong_stats = run_branch(cfg.strong, inputs, strong_dir, "strong");
  info("base: " + std::to_string(result.base_stats.reused) + " cached, strong: " +
       std::to_string(result.strong_stats.reused) + " cached");

  if (cfg.alpha) fs::create_directories(fused_dir);
  std::optional<sweep::CurveAccumulator> curve_acc;
  if (cfg.sweep_step) curve_acc.emplace(*cfg.sweep_step, cfg.metric);

  std::vector<ImageScore> base_scores, strong_scores, fused_scores;
  for (const auto& e : manifest.entries) {
    const PixelGrid base = load_image(base_dir / (e.id + ".png"));
    const PixelGrid strong = load_image(strong_dir / (e.id + ".png"));
    const PixelGrid truth = load_truth(e, base);
    base_scores.push_back({e.id, metrics::psnr(base, truth, cfg.metric), metrics::ssim(base, truth, cfg.metric)});
    strong_scores.push_back({e.id, metrics::psnr(strong, truth, cfg.metric), metrics::ssim(strong, truth, cfg.metric)});
    if (cfg.alpha) {
      const PixelGrid fused = fusion::fuse(base, strong, FusionWeight(*cfg.alpha));
      save_atomic(fused, fused_dir / (e.id + ".png"));
      fused_scores.push_back({e.id, metrics::psnr(fused, truth, cfg.metric), metrics::ssim(fused, truth, cfg.metric)});
    }
    if (curve_acc)
      curve_acc->add(e.id, sweep::score_alphas(base, strong, truth, cfg.metric, curve_acc->grid()));
  }

  result.base_report = metrics::summarize(std::move(base_scores), cfg.metric);
  result.strong_report = metrics::summarize(std::move(strong_scores), cfg.metric);
  std::string base_label = cfg.base.backend.id;
  std::string strong_label = cfg.strong.backend.id;
  if (base_label == strong_label) {
    base_label += " (base)";
    strong_label += " (strong)";
  }
  std::vector<ComparisonRow> rows{
      {base_label, result.base_report.mean_psnr, result.base_report.mean_ssim, 0, 0},
      {strong_label, result.strong_report.mean_psnr, result.strong_report.mean_ssim, 0, 0}};
  if (cfg.alpha) {
    result.fused_report = metrics::summarize(std::move(fused_scores), cfg.metric);
    rows.push_back({alpha_label(*cfg.alpha), result.fused_report->mean_psnr, result.fused_report->mean_ssim, 0, 0});
  }
  if (curve_acc) {
    result.curve = curve_acc->finish();
    sweep::emit_curve(*result.curve, out / "sweep.csv", out / "sweep.svg");
    if (!cfg.alpha) {
      for (const auto& smp : result.curve->samples)
        if (smp.alpha == result.curve->best_psnr_alpha)
          rows.push_back({alpha_label(smp.alpha), smp.mean_psnr, smp.mean_ssim, 0, 0});
    }
  }
  result.table = sweep::comparison_table(std::span<const ComparisonRow>(rows), rows.front().label);

  json j;
  j["scale"] = cfg.scale.value();
  j["images"] = manifest.entries.size();
  j["metric"] = {{"mode", to_string(cfg.metric.mode)},
                 {"border_crop", cfg.metric.border_crop},
                 {"quantize", cfg.metric.quantize}};
  j["base"] = branch_json(cfg.base);
  j["strong"] = branch_json(cfg.strong);
  j["alpha"] = cfg.alpha ? json(*cfg.alpha) : json(nullptr);
  j["reports"]["base"] = report_json(result.base_report);
  j["reports"]["strong"] = report_json(result.strong_report);
  if (result.fused_report) j["reports"]["fused"] = report_json(*result.fused_report);
  j["table"] = json::array();
  for (const auto& r : result.table)
    j["table"].push_back({{"label", r.label},
                          {"psnr", number(r.psnr)},
                          {"ssim", r.ssim},
                          {"delta_psnr", number(r.delta_psnr)},
                          {"delta_ssim", r.delta_ssim}});
  if (result.curve) {
    j["sweep"] = {{"step", result.curve->step},
                  {"samples", result.curve->samples.size()},
                  {"best_psnr_alpha", result.curve->best_psnr_alpha},
                  {"best_ssim_alpha", result.curve->best_ssim_alpha},
                  {"csv", "sweep.csv"},
                  {"svg", "sweep.svg"}};
  }
  write_text(out / "report.json", j.dump(2) + "\n");

  std::string text = sweep::render_table(result.table, result.table.front().label);
  if (result.curve) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "best alpha: %.4f (PSNR), %.4f (SSIM), step %g\n",
                  result.curve->best_psnr_alpha, result.curve->best_ssim_alpha, result.curve->step);
    text += buf;
  }
  write_text(out / "report.txt", text);
  write_text(out / "table.csv", sweep::render_table_csv(result.table));
  return result;
}

std::vector<NamedGrid> load_directory(const fs::path& dir) {
  std::vector<NamedGrid> out;
  for (const auto& stem : png_stems(dir)) out.push_back({stem, load_image(dir / (stem + ".png"))});
  return out;
}

int fuse_directories(const fs::path& base_dir, const fs::path& strong_dir, FusionWeight w,
                     const fs::path& out_dir) {
  const auto base = png_stems(base_dir);
  const auto strong = png_stems(strong_dir);
  check_same_stems(base, strong, "base/strong directories differ");
  fs::create_directories(out_dir);
  for (const auto& id : base) {
    const PixelGrid fused = fusion::fuse(load_image(base_dir / (id + ".png")),
                                         load_image(strong_dir / (id + ".png")), w);
    save_atomic(fused, out_dir / (id + ".png"));
  }
  return static_cast<int>(base.size());
}

MetricReport evaluate_directories(const fs::path& sr_dir, const fs::path& hr_dir,
                                  const MetricConfig& cfg) {
  const auto sr = png_stems(sr_dir);
  const auto hr = png_stems(hr_dir);
  check_same_stems(sr, hr, "SR/HR directories differ");
  std::vector<ImageScore> scores;
  for (const auto& id : sr) {
    const PixelGrid out = load_image(sr_dir / (id + ".png"));
    const PixelGrid truth = load_image(hr_dir / (id + ".png"));
    scores.push_back({id, metrics::psnr(out, truth, cfg), metrics::ssim(out, truth, cfg)});
  }
  return metrics::summarize(std::move(scores), cfg);
}

SweepCurve sweep_directories(const fs::path& base_dir, const fs::path& strong_dir,
                             const fs::path& hr_dir, const MetricConfig& cfg, double step) {
  const auto base = png_stems(base_dir);
  check_same_stems(base, png_stems(strong_dir), "base/strong directories differ");
  check_same_stems(base, png_stems(hr_dir), "base/HR directories differ");
  sweep::CurveAccumulator acc(step, cfg);
  for (const auto& id : base) {
    const PixelGrid b = load_image(base_dir / (id + ".png"));
    const PixelGrid s = load_image(strong_dir / (id + ".png"));
    const PixelGrid t = load_image(hr_dir / (id + ".png"));
    acc.add(id, sweep::score_alphas(b, s, t, cfg, acc.grid()));
  }
  return acc.finish();
}

int self_ensemble_directory(const BackendSpec& spec, const fs::path& lr_dir, const fs::path& out_dir) {
  std::vector<BranchInput> inputs;
  for (const auto& stem : png_stems(lr_dir)) inputs.push_back({stem, lr_dir / (stem + ".png")});
  BranchConfig branch{spec, true, std::nullopt};
  const BranchStats stats = run_branch(branch, inputs, out_dir, spec.id, /*reuse=*/false);
  return stats.computed;
}

std::string render_report(const MetricReport& report) {
  std::ostringstream os;
  char line[160];
  for (const auto& s : report.images) {
    char psnr[32] = "inf";
    if (!metrics::is_infinite(s.psnr)) std::snprintf(psnr, sizeof psnr, "%.4f", s.psnr);
    std::snprintf(line, sizeof line, "%-16s  %10s dB  %.6f\n", s.id.c_str(), psnr, s.ssim);
    os << line;
  }
  std::snprintf(line, sizeof line, "mean (%zu images, %s, crop %d%s): PSNR %.4f dB  SSIM %.6f\n",
                report.images.size(), to_string(report.config.mode).c_str(),
                report.config.border_crop, report.config.quantize ? ", quantized" : "",
                report.mean_psnr, report.mean_ssim);
  os << line;
  if (report.infinite_psnr_count > 0)
    os << "warning: " << report.infinite_psnr_count
       << " identical image(s) scored infinite PSNR and were left out of the mean\n";
  return os.str();
}

}  // namespace harness
}  // namespace srfuse
