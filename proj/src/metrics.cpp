#include "srfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>

#include "srfuse/error.hpp"

namespace srfuse {

std::string to_string(MetricConfig::Mode mode) {
  return mode == MetricConfig::Mode::YChannel ? "y" : "rgb";
}

MetricConfig::Mode parse_metric_mode(const std::string& text) {
  if (text == "y") return MetricConfig::Mode::YChannel;
  if (text == "rgb") return MetricConfig::Mode::Rgb;
  throw ConfigError("metric mode must be 'y' or 'rgb', got '" + text + "'");
}

namespace metrics {

const kernels::Window& gaussian_window() {
  static const kernels::Window window = [] {
    kernels::Window w;
    w.taps.resize(kSsimWindow);
    const int r = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
      const double d = i - r;
      w.taps[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
      sum += w.taps[i];
    }
    for (double& t : w.taps) t /= sum;
    return w;
  }();
  return window;
}

PixelGrid prepare(const PixelGrid& grid, const MetricConfig& cfg) {
  PixelGrid g = cfg.quantize ? quantize(grid) : grid;
  // Single-channel inputs are already luma.
  if (cfg.mode == MetricConfig::Mode::YChannel && g.channels() == 3) g = to_luma(g);
  return crop_border(g, BorderCrop{cfg.border_crop});
}

bool is_infinite(double psnr) noexcept { return std::isinf(psnr); }

namespace {

std::pair<PixelGrid, PixelGrid> prepare_pair(const PixelGrid& a, const PixelGrid& b,
                                             const MetricConfig& cfg) {
  if (!a.same_shape(b))
    throw DimensionMismatch("metric inputs differ in shape: " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + "x" + std::to_string(a.channels()) +
                            " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()) +
                            "x" + std::to_string(b.channels()));
  return {prepare(a, cfg), prepare(b, cfg)};
}

std::vector<double> channel(const PixelGrid& g, int c) {
  std::vector<double> out(static_cast<std::size_t>(g.width()) * g.height());
  auto src = g.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = src[i * g.channels() + c];
  return out;
}

}  // namespace

double psnr(const PixelGrid& a, const PixelGrid& b, const MetricConfig& cfg) {
  const auto [pa, pb] = prepare_pair(a, b, cfg);
  const double sse =
      kernels::parallel::sum_squared_diff(pa.data(), pb.data(), {pa.width(), pa.height(), pa.channels()});
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(pa.size());
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const PixelGrid& a, const PixelGrid& b, const MetricConfig& cfg) {
  const auto [pa, pb] = prepare_pair(a, b, cfg);
  if (pa.width() < kSsimWindow || pa.height() < kSsimWindow)
    throw InvalidArgument("ssim needs at least " + std::to_string(kSsimWindow) + "x" +
                          std::to_string(kSsimWindow) + " pixels after cropping, got " +
                          std::to_string(pa.width()) + "x" + std::to_string(pa.height()));
  const double c1 = kSsimK1 * kSsimK1;
  const double c2 = kSsimK2 * kSsimK2;
  const kernels::Plane plane{pa.width(), pa.height(), 1};
  if (pa.channels() == 1)
    return kernels::parallel::ssim_mean(pa.data(), pb.data(), plane, gaussian_window(), c1, c2);

  double total = 0.0;
  for (int c = 0; c < pa.channels(); ++c) {
    const auto ca = channel(pa, c);
    const auto cb = channel(pb, c);
    total += kernels::parallel::ssim_mean(ca, cb, plane, gaussian_window(), c1, c2);
  }
  return total / pa.channels();
}

MetricReport summarize(std::vector<ImageScore> scores, const MetricConfig& cfg) {
  std::sort(scores.begin(), scores.end(),
            [](const ImageScore& x, const ImageScore& y) { return x.id < y.id; });
  MetricReport report;
  report.config = cfg;
  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  int finite = 0;
  for (const auto& s : scores) {
    if (is_infinite(s.psnr)) {
      ++report.infinite_psnr_count;
    } else {
      psnr_sum += s.psnr;
      ++finite;
    }
    ssim_sum += s.ssim;
  }
  if (!scores.empty()) {
    report.mean_psnr = finite > 0 ? psnr_sum / finite : std::numeric_limits<double>::infinity();
    report.mean_ssim = ssim_sum / static_cast<double>(scores.size());
  }
  report.images = std::move(scores);
  return report;
}

MetricReport evaluate_pairs(std::span<const NamedGrid> outputs, std::span<const NamedGrid> truths,
                            const MetricConfig& cfg) {
  std::map<std::string, const PixelGrid*> truth_by_id;
  for (const auto& t : truths) truth_by_id[t.id] = &t.grid;

  std::vector<std::string> missing;  // truth without output
  std::vector<std::string> extra;    // output without truth
  std::map<std::string, const PixelGrid*> out_by_id;
  for (const auto& o : outputs) {
    out_by_id[o.id] = &o.grid;
    if (!truth_by_id.contains(o.id)) extra.push_back(o.id);
  }
  for (const auto& [id, _] : truth_by_id)
    if (!out_by_id.contains(id)) missing.push_back(id);
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "output/truth id sets differ;";
    if (!missing.empty()) {
      msg += " missing outputs:";
      for (const auto& id : missing) msg += " " + id;
    }
    if (!extra.empty()) {
      msg += " outputs without truth:";
      for (const auto& id : extra) msg += " " + id;
    }
    throw PairingError(msg, std::move(missing), std::move(extra));
  }

  std::vector<std::pair<std::string, std::pair<const PixelGrid*, const PixelGrid*>>> jobs;
  for (const auto& [id, out] : out_by_id) jobs.push_back({id, {out, truth_by_id.at(id)}});

  std::vector<ImageScore> scores(jobs.size());
  std::exception_ptr failure;
  const int n = static_cast<int>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const auto& [id, pair] = jobs[i];
      scores[i] = {id, psnr(*pair.first, *pair.second, cfg), ssim(*pair.first, *pair.second, cfg)};
    } catch (...) {
#pragma omp critical(srfuse_metric_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return summarize(std::move(scores), cfg);
}

}  // namespace metrics
}  // namespace srfuse
