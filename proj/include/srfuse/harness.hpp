#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "srfuse/backend.hpp"
#include "srfuse/metrics.hpp"
#include "srfuse/sweep.hpp"

namespace srfuse {

/// HR/LR pairs of an evaluation set, sorted by id.
struct DatasetManifest {
  struct Entry {
    std::string id;
    std::filesystem::path hr_path;
    std::filesystem::path lr_path;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::vector<Entry> entries;
  ScaleFactor scale{4};
  std::string source_note;
};

struct TileParams {
  int tile_size = 256;
  int overlap = 16;
};

/// One reconstruction branch: a backend plus its test-time wrappers.
struct BranchConfig {
  BackendSpec backend;
  bool self_ensemble = false;
  std::optional<TileParams> tiling;

  /// Cache key: backend id, kind, scale, self-ensemble flag, tiling params.
  std::string fingerprint() const;
};

struct PipelineConfig {
  ScaleFactor scale{4};
  BranchConfig base;
  BranchConfig strong;
  /// Fixed operating point; fused images and a fused report are produced.
  std::optional<double> alpha;
  /// Weight sweep request.
  std::optional<double> sweep_step;
  MetricConfig metric;
  std::filesystem::path output_dir;

  /// Throws ConfigError on inconsistent settings (scale mismatch, nothing to do).
  void validate() const;
};

struct BranchInput {
  std::string id;
  std::filesystem::path lr_path;
};

struct BranchStats {
  int computed = 0;
  int reused = 0;
};

/// Everything run_pipeline produced; the same content is persisted under output_dir.
struct PipelineResult {
  MetricReport base_report;
  MetricReport strong_report;
  std::optional<MetricReport> fused_report;
  std::optional<SweepCurve> curve;
  std::vector<ComparisonRow> table;
  BranchStats base_stats;
  BranchStats strong_stats;
};

/// A pipeline failure attributed to a branch and, when known, an image.
class PipelineError : public Error {
 public:
  PipelineError(std::string branch, std::string image_id, const std::string& detail)
      : Error("branch '" + branch + "'" + (image_id.empty() ? "" : ", image '" + image_id + "'") +
              ": " + detail),
        branch_(std::move(branch)),
        image_id_(std::move(image_id)) {}
  const std::string& branch() const noexcept { return branch_; }
  const std::string& image_id() const noexcept { return image_id_; }

 private:
  std::string branch_;
  std::string image_id_;
};

namespace harness {

/// LR file name for an id: "<id>x<scale>.png".
std::string lr_file_name(const std::string& id, ScaleFactor scale);

/// Pairs `<id>.png` in hr_dir with `<id>x<scale>.png` in lr_dir and validates
/// dimensions. Throws PairingError naming every unmatched file.
DatasetManifest discover_pairs(const std::filesystem::path& hr_dir,
                               const std::filesystem::path& lr_dir, ScaleFactor scale);

/// Bicubic-downscales every HR image into lr_dir. Without pre_crop, HR sizes
/// must be divisible by the scale; with it, bottom/right rows and columns are
/// dropped first.
DatasetManifest degrade_dataset(const std::filesystem::path& hr_dir,
                                const std::filesystem::path& lr_dir, ScaleFactor scale,
                                bool pre_crop = false);

/// Checks floor(hr / scale) == lr for every entry (reads PNG headers only).
void validate_manifest(const DatasetManifest& manifest);

/// `id<TAB>hr-path<TAB>lr-path` lines, sorted, LF endings.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path, ScaleFactor scale);

/// Splits a command line into argv, honouring single and double quotes.
std::vector<std::string> split_command(const std::string& text);

/// `key = value` lines; `#` starts a comment. Relative workdirs resolve against `base_dir`.
PipelineConfig parse_config_text(const std::string& text,
                                 const std::filesystem::path& base_dir = {});
PipelineConfig parse_config(const std::filesystem::path& path);

/// Runs one branch over LR files and writes `<id>.png` outputs to out_dir.
///
/// Pending images are processed in chunks, each chunk being a single backend
/// batch (one process for external backends) covering every transform and
/// tile. With `reuse`, existing outputs of the right size are kept as is.
BranchStats run_branch(const BranchConfig& branch, std::span<const BranchInput> inputs,
                       const std::filesystem::path& out_dir, const std::string& branch_name,
                       bool reuse = true);

/// The end-to-end protocol: base branch, strong branch, fusion and/or sweep,
/// metrics, persisted reports.
PipelineResult run_pipeline(const DatasetManifest& manifest, const PipelineConfig& cfg);

/// `<stem>.png` files of a directory keyed by stem, sorted.
std::vector<NamedGrid> load_directory(const std::filesystem::path& dir);

/// Fuses same-named images of two directories into out_dir. Returns the count.
int fuse_directories(const std::filesystem::path& base_dir, const std::filesystem::path& strong_dir,
                     FusionWeight w, const std::filesystem::path& out_dir);

MetricReport evaluate_directories(const std::filesystem::path& sr_dir,
                                  const std::filesystem::path& hr_dir, const MetricConfig& cfg);

SweepCurve sweep_directories(const std::filesystem::path& base_dir,
                             const std::filesystem::path& strong_dir,
                             const std::filesystem::path& hr_dir, const MetricConfig& cfg,
                             double step);

/// Self-ensembles every `<stem>.png` of lr_dir into out_dir with one backend batch.
int self_ensemble_directory(const BackendSpec& spec, const std::filesystem::path& lr_dir,
                            const std::filesystem::path& out_dir);

/// Human-readable per-image and mean scores.
std::string render_report(const MetricReport& report);

}  // namespace harness
}  // namespace srfuse
