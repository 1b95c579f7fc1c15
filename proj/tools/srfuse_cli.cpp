// srfuse: command-line driver for the super-resolution fusion toolkit.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "srfuse/backend.hpp"
#include "srfuse/error.hpp"
#include "srfuse/fusion.hpp"
#include "srfuse/harness.hpp"
#include "srfuse/metrics.hpp"
#include "srfuse/sweep.hpp"

namespace {

using namespace srfuse;

struct MetricFlags {
  std::string mode = "y";
  std::optional<int> crop;
  bool no_quantize = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "Metric channel mode")->check(CLI::IsMember({"y", "rgb"}));
    cmd->add_option("--crop", crop, "Border crop in pixels (default: 4)")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--no-quantize", no_quantize, "Score unquantized values");
  }

  MetricConfig config() const {
    MetricConfig cfg;
    cfg.mode = parse_metric_mode(mode);
    cfg.border_crop = crop.value_or(4);
    cfg.quantize = !no_quantize;
    return cfg;
  }
};

// "builtin:nearest", "builtin:bicubic", or an external command line.
BackendSpec backend_from_flag(const std::string& text, ScaleFactor scale, double timeout_s) {
  BackendSpec spec;
  if (text == "builtin:nearest") {
    spec = BackendSpec::builtin_nearest("builtin-nearest", scale);
  } else if (text == "builtin:bicubic") {
    spec = BackendSpec::builtin_bicubic("builtin-bicubic", scale);
  } else {
    auto argv = harness::split_command(text);
    if (argv.empty()) throw ConfigError("--backend is empty");
    spec = BackendSpec::external("external", scale, std::move(argv));
  }
  spec.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
  return spec;
}

void print_curve_summary(const SweepCurve& curve) {
  std::printf("samples: %zu (step %g)\n", curve.samples.size(), curve.step);
  for (const auto& s : curve.samples) {
    if (s.alpha != curve.best_psnr_alpha && s.alpha != curve.best_ssim_alpha) continue;
    std::printf("alpha %.4f: PSNR %.4f dB, SSIM %.6f%s%s\n", s.alpha, s.mean_psnr, s.mean_ssim,
                s.alpha == curve.best_psnr_alpha ? "  <- best PSNR" : "",
                s.alpha == curve.best_ssim_alpha ? "  <- best SSIM" : "");
  }
  const auto& first = curve.samples.front();
  const auto& last = curve.samples.back();
  std::printf("alpha 0 (base):   PSNR %.4f dB, SSIM %.6f\n", first.mean_psnr, first.mean_ssim);
  std::printf("alpha 1 (strong): PSNR %.4f dB, SSIM %.6f\n", last.mean_psnr, last.mean_ssim);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free super-resolution output fusion toolkit"};
  app.require_subcommand(1);

  // degrade
  auto* degrade = app.add_subcommand("degrade", "Generate bicubic LR inputs from HR images");
  std::string hr_dir, lr_dir, manifest_out;
  int scale = 4;
  bool pre_crop = false;
  degrade->add_option("--hr-dir", hr_dir)->required();
  degrade->add_option("--lr-dir", lr_dir)->required();
  degrade->add_option("--scale", scale)->check(CLI::Range(2, 16));
  degrade->add_flag("--pre-crop", pre_crop, "Crop HR bottom/right to a multiple of the scale");
  degrade->add_option("--manifest", manifest_out, "Also write the pair manifest here");

  // discover
  auto* discover = app.add_subcommand("discover", "Pair existing HR/LR directories into a manifest");
  discover->add_option("--hr-dir", hr_dir)->required();
  discover->add_option("--lr-dir", lr_dir)->required();
  discover->add_option("--scale", scale)->check(CLI::Range(2, 16));
  discover->add_option("--manifest", manifest_out)->required();

  // run
  auto* run = app.add_subcommand("run", "Run both branches, fuse and/or sweep, and report");
  std::string manifest_path, config_path, out_dir;
  run->add_option("--manifest", manifest_path)->required();
  run->add_option("--config", config_path)->required();
  run->add_option("--out", out_dir)->required();

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Blend two directories of SR outputs at a fixed alpha");
  std::string base_dir, strong_dir;
  double alpha = 0.0;
  fuse->add_option("--base-dir", base_dir)->required();
  fuse->add_option("--strong-dir", strong_dir)->required();
  fuse->add_option("--alpha", alpha, "Strong-branch weight")->required()->check(CLI::Range(0.0, 1.0));
  fuse->add_option("--out", out_dir)->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate the fusion over a grid of alphas");
  double step = sweep::kDefaultStep;
  std::string csv_path, svg_path;
  MetricFlags sweep_metric;
  sweep_cmd->add_option("--base-dir", base_dir)->required();
  sweep_cmd->add_option("--strong-dir", strong_dir)->required();
  sweep_cmd->add_option("--hr-dir", hr_dir)->required();
  sweep_cmd->add_option("--step", step);
  sweep_cmd->add_option("--csv", csv_path)->required();
  sweep_cmd->add_option("--svg", svg_path)->required();
  sweep_metric.attach(sweep_cmd);

  // eval
  auto* eval = app.add_subcommand("eval", "Score a directory of SR outputs against HR references");
  std::string sr_dir;
  MetricFlags eval_metric;
  eval->add_option("--sr-dir", sr_dir)->required();
  eval->add_option("--hr-dir", hr_dir)->required();
  eval_metric.attach(eval);

  // self-ensemble
  auto* se = app.add_subcommand("self-ensemble", "Eight-transform geometric self-ensemble of a backend");
  std::string backend_cmd;
  double timeout_s = 600.0;
  se->add_option("--backend", backend_cmd, "builtin:nearest, builtin:bicubic or a command line")->required();
  se->add_option("--lr-dir", lr_dir)->required();
  se->add_option("--out", out_dir)->required();
  se->add_option("--scale", scale)->check(CLI::Range(2, 16));
  se->add_option("--timeout", timeout_s, "Seconds per backend batch")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*degrade) {
      const auto m = harness::degrade_dataset(hr_dir, lr_dir, ScaleFactor(scale), pre_crop);
      if (!manifest_out.empty()) harness::write_manifest(m, manifest_out);
      std::printf("degraded %zu image(s) to %s\n", m.entries.size(), lr_dir.c_str());
    } else if (*discover) {
      const auto m = harness::discover_pairs(hr_dir, lr_dir, ScaleFactor(scale));
      harness::write_manifest(m, manifest_out);
      std::printf("paired %zu image(s)\n", m.entries.size());
    } else if (*run) {
      PipelineConfig cfg = harness::parse_config(config_path);
      cfg.output_dir = out_dir;
      const auto manifest = harness::read_manifest(manifest_path, cfg.scale);
      const auto result = harness::run_pipeline(manifest, cfg);
      std::fputs(sweep::render_table(result.table, result.table.front().label).c_str(), stdout);
      if (result.curve)
        std::printf("best alpha: %.4f (PSNR), %.4f (SSIM)\n", result.curve->best_psnr_alpha,
                    result.curve->best_ssim_alpha);
    } else if (*fuse) {
      const int n = harness::fuse_directories(base_dir, strong_dir, FusionWeight(alpha), out_dir);
      std::printf("fused %d image(s) at alpha %g\n", n, alpha);
    } else if (*sweep_cmd) {
      const auto curve =
          harness::sweep_directories(base_dir, strong_dir, hr_dir, sweep_metric.config(), step);
      sweep::emit_curve(curve, csv_path, svg_path);
      print_curve_summary(curve);
    } else if (*eval) {
      const auto report = harness::evaluate_directories(sr_dir, hr_dir, eval_metric.config());
      std::fputs(harness::render_report(report).c_str(), stdout);
    } else if (*se) {
      const auto spec = backend_from_flag(backend_cmd, ScaleFactor(scale), timeout_s);
      const int n = harness::self_ensemble_directory(spec, lr_dir, out_dir);
      std::printf("self-ensembled %d image(s)\n", n);
    }
  } catch (const PairingError& e) {
    std::fprintf(stderr, "srfuse: error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "srfuse: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
