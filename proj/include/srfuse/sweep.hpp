#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srfuse/backend.hpp"
#include "srfuse/fusion.hpp"
#include "srfuse/metrics.hpp"

namespace srfuse {

struct CurveSample {
  double alpha = 0.0;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

/// Dataset-mean PSNR/SSIM as a function of the strong-branch weight.
struct SweepCurve {
  std::vector<CurveSample> samples;  // strictly increasing alpha, 0 and 1 included
  double best_psnr_alpha = 0.0;
  double best_ssim_alpha = 0.0;
  double step = 0.0;
};

/// One row of a method comparison; deltas are row minus baseline.
struct ComparisonRow {
  std::string label;
  double psnr = 0.0;
  double ssim = 0.0;
  double delta_psnr = 0.0;
  double delta_ssim = 0.0;
};

namespace sweep {

inline constexpr double kDefaultStep = 0.01;

enum class Criterion { Psnr, Ssim };

/// {0, step, 2 step, ..., 1}. When 1/step is an integer the grid is i/n,
/// otherwise 1 is appended after the last multiple of step below it.
std::vector<double> alpha_grid(double step);

/// Scores one image at every alpha of `grid`: fuse, then PSNR/SSIM vs truth.
std::vector<CurveSample> score_alphas(const PixelGrid& base, const PixelGrid& strong,
                                      const PixelGrid& truth, const MetricConfig& cfg,
                                      std::span<const double> grid);

/// Collects per-image score_alphas results and reduces them to dataset means
/// with metrics::summarize, one image in memory at a time.
class CurveAccumulator {
 public:
  CurveAccumulator(double step, MetricConfig cfg);
  const std::vector<double>& grid() const noexcept { return grid_; }
  void add(const std::string& id, std::span<const CurveSample> per_alpha);
  /// Per-alpha report, e.g. the alpha = 0 report equals the base branch report.
  MetricReport report_at(std::size_t alpha_index) const;
  SweepCurve finish() const;

 private:
  double step_;
  MetricConfig cfg_;
  std::vector<double> grid_;
  std::vector<std::vector<ImageScore>> scores_;  // [alpha][image]
};

/// Fuses every (base, strong) pair at each grid alpha and evaluates against
/// truth. Inputs are cached branch outputs; backends are never re-run.
SweepCurve sweep(std::span<const NamedGrid> base, std::span<const NamedGrid> strong,
                 std::span<const NamedGrid> truths, const MetricConfig& cfg,
                 double step = kDefaultStep);

/// Builds a curve from precomputed samples, filling in the best markers.
SweepCurve make_curve(std::vector<CurveSample> samples, double step);

/// Argmax alpha under the criterion; ties go to the smallest alpha.
FusionWeight best_operating_point(const SweepCurve& curve, Criterion criterion);

std::vector<ComparisonRow> comparison_table(
    std::span<const std::pair<std::string, MetricReport>> rows, const std::string& baseline);

/// Same, from already-aggregated (label, psnr, ssim) values.
std::vector<ComparisonRow> comparison_table(std::span<const ComparisonRow> rows,
                                            const std::string& baseline);

/// Aligned plain text: PSNR to 4 decimals, SSIM to 6, signed deltas.
std::string render_table(std::span<const ComparisonRow> rows, const std::string& baseline);

/// `label,psnr,ssim,delta_psnr,delta_ssim` with full precision.
std::string render_table_csv(std::span<const ComparisonRow> rows);

/// `alpha,psnr,ssim` header then one row per sample, 6 decimals.
std::string curve_csv(const SweepCurve& curve);

/// Self-contained SVG 1.1: PSNR and SSIM polylines on dual y-axes plus the
/// two best-operating-point markers.
std::string curve_svg(const SweepCurve& curve);

/// Writes curve_csv and curve_svg. Throws ImageIoError(Unwritable) on failure.
void emit_curve(const SweepCurve& curve, const std::filesystem::path& csv_path,
                const std::filesystem::path& svg_path);

SweepCurve read_curve_csv(const std::filesystem::path& path);

}  // namespace sweep
}  // namespace srfuse
