#include "srfuse/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "srfuse/error.hpp"

namespace srfuse::sweep {

namespace {

std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string signed_fixed(double v, int decimals) {
  std::string s = fixed(v, decimals);
  // "-0.0000" reads as a regression; a zero delta is printed as +0.
  if (s.find_first_not_of("-0.") == std::string::npos) s = fixed(0.0, decimals);
  return (s.front() == '-') ? s : "+" + s;
}

std::set<std::string> keys(std::span<const NamedGrid> set) {
  std::set<std::string> k;
  for (const auto& g : set) k.insert(g.id);
  return k;
}

void check_keys(const std::set<std::string>& want, const std::set<std::string>& have,
                const std::string& what) {
  std::vector<std::string> missing, extra;
  std::set_difference(want.begin(), want.end(), have.begin(), have.end(), std::back_inserter(missing));
  std::set_difference(have.begin(), have.end(), want.begin(), want.end(), std::back_inserter(extra));
  if (missing.empty() && extra.empty()) return;
  std::string msg = "sweep: " + what + " keys differ from truth keys;";
  for (const auto& id : missing) msg += " missing " + id;
  for (const auto& id : extra) msg += " extra " + id;
  throw PairingError(msg, std::move(missing), std::move(extra));
}

}  // namespace

std::vector<double> alpha_grid(double step) {
  if (!(step > 0.0 && step <= 0.5))
    throw InvalidArgument("sweep step must be in (0, 0.5], got " + std::to_string(step));
  std::vector<double> grid;
  const double inv = 1.0 / step;
  const long n = std::lround(inv);
  if (std::abs(inv - static_cast<double>(n)) < 1e-9) {
    for (long i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
    return grid;
  }
  for (long i = 0; static_cast<double>(i) * step < 1.0 - 1e-9; ++i)
    grid.push_back(static_cast<double>(i) * step);
  grid.push_back(1.0);
  return grid;
}

SweepCurve make_curve(std::vector<CurveSample> samples, double step) {
  if (samples.empty()) throw InvalidArgument("curve has no samples");
  SweepCurve curve;
  curve.samples = std::move(samples);
  curve.step = step;
  curve.best_psnr_alpha = best_operating_point(curve, Criterion::Psnr).alpha();
  curve.best_ssim_alpha = best_operating_point(curve, Criterion::Ssim).alpha();
  return curve;
}

FusionWeight best_operating_point(const SweepCurve& curve, Criterion criterion) {
  if (curve.samples.empty()) throw InvalidArgument("best_operating_point: empty curve");
  const auto value = [criterion](const CurveSample& s) {
    return criterion == Criterion::Psnr ? s.mean_psnr : s.mean_ssim;
  };
  const CurveSample* best = &curve.samples.front();
  for (const auto& s : curve.samples)
    if (value(s) > value(*best) || (value(s) == value(*best) && s.alpha < best->alpha)) best = &s;
  return FusionWeight(best->alpha);
}

std::vector<CurveSample> score_alphas(const PixelGrid& base, const PixelGrid& strong,
                                      const PixelGrid& truth, const MetricConfig& cfg,
                                      std::span<const double> grid) {
  std::vector<CurveSample> out(grid.size());
  std::exception_ptr failure;
  const int n = static_cast<int>(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const PixelGrid fused = fusion::fuse(base, strong, FusionWeight(grid[i]));
      out[i] = {grid[i], metrics::psnr(fused, truth, cfg), metrics::ssim(fused, truth, cfg)};
    } catch (...) {
#pragma omp critical(srfuse_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

CurveAccumulator::CurveAccumulator(double step, MetricConfig cfg)
    : step_(step), cfg_(cfg), grid_(alpha_grid(step)), scores_(grid_.size()) {}

void CurveAccumulator::add(const std::string& id, std::span<const CurveSample> per_alpha) {
  if (per_alpha.size() != grid_.size())
    throw InvalidArgument("CurveAccumulator: expected " + std::to_string(grid_.size()) +
                          " samples for '" + id + "', got " + std::to_string(per_alpha.size()));
  for (std::size_t i = 0; i < grid_.size(); ++i)
    scores_[i].push_back({id, per_alpha[i].mean_psnr, per_alpha[i].mean_ssim});
}

MetricReport CurveAccumulator::report_at(std::size_t alpha_index) const {
  return metrics::summarize(scores_.at(alpha_index), cfg_);
}

SweepCurve CurveAccumulator::finish() const {
  std::vector<CurveSample> samples;
  samples.reserve(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const MetricReport r = report_at(i);
    samples.push_back({grid_[i], r.mean_psnr, r.mean_ssim});
  }
  return make_curve(std::move(samples), step_);
}

SweepCurve sweep(std::span<const NamedGrid> base, std::span<const NamedGrid> strong,
                 std::span<const NamedGrid> truths, const MetricConfig& cfg, double step) {
  CurveAccumulator acc(step, cfg);
  const auto truth_keys = keys(truths);
  check_keys(truth_keys, keys(base), "base");
  check_keys(truth_keys, keys(strong), "strong");

  std::map<std::string, const PixelGrid*> base_by_id, strong_by_id;
  for (const auto& b : base) base_by_id[b.id] = &b.grid;
  for (const auto& s : strong) strong_by_id[s.id] = &s.grid;
  for (const auto& t : truths)
    acc.add(t.id, score_alphas(*base_by_id.at(t.id), *strong_by_id.at(t.id), t.grid, cfg, acc.grid()));
  return acc.finish();
}

std::vector<ComparisonRow> comparison_table(std::span<const ComparisonRow> rows,
                                            const std::string& baseline) {
  const auto it = std::find_if(rows.begin(), rows.end(),
                               [&](const ComparisonRow& r) { return r.label == baseline; });
  if (it == rows.end()) throw InvalidArgument("baseline row '" + baseline + "' not present");
  std::vector<ComparisonRow> out;
  for (const auto& r : rows)
    out.push_back({r.label, r.psnr, r.ssim, r.psnr - it->psnr, r.ssim - it->ssim});
  return out;
}

std::vector<ComparisonRow> comparison_table(
    std::span<const std::pair<std::string, MetricReport>> rows, const std::string& baseline) {
  std::vector<ComparisonRow> flat;
  for (const auto& [label, report] : rows)
    flat.push_back({label, report.mean_psnr, report.mean_ssim, 0.0, 0.0});
  return comparison_table(flat, baseline);
}

std::string render_table(std::span<const ComparisonRow> rows, const std::string& baseline) {
  std::size_t label_width = std::string("Method").size();
  for (const auto& r : rows) label_width = std::max(label_width, r.label.size());
  const std::string delta_head = "vs " + baseline;

  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %9s  %9s  %9s  %10s   (%s)\n",
                static_cast<int>(label_width), "Method", "PSNR", "SSIM", "dPSNR", "dSSIM",
                delta_head.c_str());
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-*s  %9s  %9s  %9s  %10s\n", static_cast<int>(label_width),
                  r.label.c_str(), fixed(r.psnr, 4).c_str(), fixed(r.ssim, 6).c_str(),
                  signed_fixed(r.delta_psnr, 4).c_str(), signed_fixed(r.delta_ssim, 6).c_str());
    os << line;
  }
  return os.str();
}

std::string render_table_csv(std::span<const ComparisonRow> rows) {
  std::ostringstream os;
  os.precision(17);
  os << "label,psnr,ssim,delta_psnr,delta_ssim\n";
  for (const auto& r : rows)
    os << r.label << ',' << r.psnr << ',' << r.ssim << ',' << r.delta_psnr << ',' << r.delta_ssim
       << '\n';
  return os.str();
}

std::string curve_csv(const SweepCurve& curve) {
  std::string out = "alpha,psnr,ssim\n";
  for (const auto& s : curve.samples)
    out += fixed(s.alpha, 6) + ',' + fixed(s.mean_psnr, 6) + ',' + fixed(s.mean_ssim, 6) + '\n';
  return out;
}

namespace {

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range finite_range(const SweepCurve& curve, bool psnr) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : curve.samples) {
    const double v = psnr ? s.mean_psnr : s.mean_ssim;
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  const double pad = hi > lo ? 0.05 * (hi - lo) : 0.5 * std::max(std::abs(hi), 1e-3);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string curve_svg(const SweepCurve& curve) {
  constexpr double kW = 720, kH = 420, kLeft = 80, kRight = 80, kTop = 40, kBottom = 60;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  const Range pr = finite_range(curve, true);
  const Range sr = finite_range(curve, false);

  const auto px = [&](double a) { return kLeft + a * pw; };
  const auto py = [&](double v, const Range& r) {
    if (std::isinf(v)) return v > 0 ? kTop : kTop + ph;  // off-scale values pinned to the frame
    return kTop + (r.hi - v) / (r.hi - r.lo) * ph;
  };
  const auto num = [](double v) { return fixed(v, 2); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kW
     << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Axes ticks: alpha on x, PSNR left, SSIM right.
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 10; ++i) {
    const double a = i / 10.0;
    os << "<text x=\"" << num(px(a)) << "\" y=\"" << num(kTop + ph + 16)
       << "\" text-anchor=\"middle\">" << fixed(a, 1) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double t = i / 5.0;
    const double y = kTop + t * ph;
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" fill=\"#1f77b4\">"
       << fixed(pr.hi - t * (pr.hi - pr.lo), 3) << "</text>\n";
    os << "<text x=\"" << num(kLeft + pw + 6) << "\" y=\"" << num(y + 4) << "\" fill=\"#d62728\">"
       << fixed(sr.hi - t * (sr.hi - sr.lo), 5) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kH - 16)
     << "\" text-anchor=\"middle\">strong-branch weight alpha</text>\n"
     << "<text x=\"16\" y=\"" << num(kTop + ph / 2) << "\" transform=\"rotate(-90 16 "
     << num(kTop + ph / 2) << ")\" text-anchor=\"middle\" fill=\"#1f77b4\">mean PSNR (dB)</text>\n"
     << "<text x=\"" << num(kW - 12) << "\" y=\"" << num(kTop + ph / 2) << "\" transform=\"rotate(90 "
     << num(kW - 12) << ' ' << num(kTop + ph / 2)
     << ")\" text-anchor=\"middle\" fill=\"#d62728\">mean SSIM</text>\n"
     << "</g>\n";

  const auto polyline = [&](bool psnr, const char* color) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& s : curve.samples) {
      if (!first) os << ' ';
      first = false;
      os << num(px(s.alpha)) << ','
         << num(psnr ? py(s.mean_psnr, pr) : py(s.mean_ssim, sr));
    }
    os << "\"/>\n";
  };
  polyline(true, "#1f77b4");
  polyline(false, "#d62728");

  const auto marker = [&](double alpha, const char* what, const char* color, double label_y) {
    os << "<g class=\"marker\" data-criterion=\"" << what << "\" data-alpha=\"" << fixed(alpha, 6)
       << "\">"
       << "<line x1=\"" << num(px(alpha)) << "\" y1=\"" << kTop << "\" x2=\"" << num(px(alpha))
       << "\" y2=\"" << kTop + ph << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\"/>"
       << "<text x=\"" << num(px(alpha) - 4) << "\" y=\"" << num(label_y)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
       << "\">best " << what << " @ " << fixed(alpha, 2) << "</text></g>\n";
  };
  marker(curve.best_psnr_alpha, "PSNR", "#1f77b4", kTop + 14);
  marker(curve.best_ssim_alpha, "SSIM", "#d62728", kTop + 28);

  os << "</svg>\n";
  return os.str();
}

void emit_curve(const SweepCurve& curve, const std::filesystem::path& csv_path,
                const std::filesystem::path& svg_path) {
  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ImageIoError(ImageIoError::Kind::Unwritable, p.string(), "");
    f << text;
    if (!f) throw ImageIoError(ImageIoError::Kind::Unwritable, p.string(), "write failed");
  };
  write(csv_path, curve_csv(curve));
  write(svg_path, curve_svg(curve));
}

SweepCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ImageIoError(ImageIoError::Kind::MissingFile, path.string(), "");
  std::string line;
  if (!std::getline(f, line) || line != "alpha,psnr,ssim")
    throw InvalidArgument(path.string() + ": expected header 'alpha,psnr,ssim'");
  std::vector<CurveSample> samples;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, p, s;
    if (!std::getline(row, a, ',') || !std::getline(row, p, ',') || !std::getline(row, s))
      throw InvalidArgument(path.string() + ": malformed row '" + line + "'");
    samples.push_back({std::stod(a), std::stod(p), std::stod(s)});
  }
  const double step = samples.size() > 1 ? samples[1].alpha - samples[0].alpha : 0.0;
  return make_curve(std::move(samples), step);
}

}  // namespace srfuse::sweep
