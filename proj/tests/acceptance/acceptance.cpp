// Acceptance gate: one PASS/FAIL line per criterion, each timed against its limit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles/oracles.hpp"
#include "srfuse/backend.hpp"
#include "srfuse/d4.hpp"
#include "srfuse/fusion.hpp"
#include "srfuse/harness.hpp"
#include "srfuse/metrics.hpp"
#include "srfuse/resample.hpp"
#include "srfuse/sweep.hpp"
#include "srfuse/tiler.hpp"

using namespace srfuse;
namespace fs = std::filesystem;

namespace {

// Records the first violated check; later checks still run.
struct Check {
  std::string failure;
  void require(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

struct Criterion {
  const char* name;
  double limit_s;
  std::function<void(Check&)> body;
};

MetricConfig raw_metric() {
  MetricConfig cfg;
  cfg.border_crop = 0;
  cfg.quantize = false;
  return cfg;
}

double max_abs_diff(const PixelGrid& a, const PixelGrid& b) {
  if (!a.same_shape(b)) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void metric_oracles(Check& c) {
  const PixelGrid a = PixelGrid::filled(32, 32, 1, 0.25);
  const double p1 = metrics::psnr(a, PixelGrid::filled(32, 32, 1, 0.25 + 1.0 / 255.0), raw_metric());
  c.require(std::fabs(p1 - 48.1308) <= 1e-4, fmt("psnr(1/255) = %.6f", p1));
  const double p2 = metrics::psnr(a, PixelGrid::filled(32, 32, 1, 0.75), raw_metric());
  c.require(std::fabs(p2 - 6.0206) <= 1e-4, fmt("psnr(0.5) = %.6f", p2));

  std::mt19937_64 rng(1);
  const PixelGrid x = oracle::random_grid(rng, 40, 32, 3);
  for (const MetricConfig& cfg : {MetricConfig{}, raw_metric()}) {
    const double s = metrics::ssim(x, x, cfg);
    c.require(std::fabs(s - 1.0) <= 1e-9, fmt("ssim(x,x) = %.12f", s));
  }
  const double closed = (2 * 0.2 * 0.8 + 1e-4) / (0.2 * 0.2 + 0.8 * 0.8 + 1e-4);
  const double s = metrics::ssim(PixelGrid::filled(16, 16, 1, 0.2), PixelGrid::filled(16, 16, 1, 0.8),
                                 raw_metric());
  c.require(std::fabs(s - closed) <= 1e-6, fmt("constant-pair ssim = %.8f", s));
}

void d4_group(Check& c) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(1, 17);
  int nonsquare = 0;
  for (int i = 0; i < 128; ++i) {
    const PixelGrid g = oracle::random_grid(rng, dim(rng), dim(rng), i % 2 ? 3 : 1, -0.2, 1.2);
    if (g.width() != g.height()) ++nonsquare;
    std::vector<double> want(g.data().begin(), g.data().end());
    std::sort(want.begin(), want.end());
    for (auto k : d4::all_transforms()) {
      const PixelGrid t = d4::apply(k, g);
      c.require(d4::apply(d4::inverse_of(k), t) == g, "inverse round trip, k=" + std::to_string(k.value()));
      c.require(t == oracle::d4_apply(k.value(), g), "geometric oracle, k=" + std::to_string(k.value()));
      std::vector<double> got(t.data().begin(), t.data().end());
      std::sort(got.begin(), got.end());
      c.require(got == want, "multiset, k=" + std::to_string(k.value()));
    }
  }
  c.require(nonsquare >= 50, "too few non-square grids");
}

void self_ensemble_equivariance(Check& c) {
  std::mt19937_64 rng(3);
  const auto spec = BackendSpec::builtin_nearest("nearest", ScaleFactor(4));
  const auto model = [&spec](const PixelGrid& g) { return backend::run_backend(spec, g); };
  for (int i = 0; i < 24; ++i) {
    const PixelGrid lr = oracle::random_grid(rng, 5 + i % 7, 4 + i % 5, i % 2 ? 3 : 1);
    const double d = max_abs_diff(d4::self_ensemble(model, lr), model(lr));
    c.require(d <= 1e-6, fmt("max deviation %.3g", d));
  }
}

void fusion_endpoints(Check& c) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 30; ++i) {
    const PixelGrid b = oracle::random_grid(rng, 17, 11, 3, -0.1, 1.1);
    const PixelGrid s = oracle::random_grid(rng, 17, 11, 3, -0.1, 1.1);
    c.require(fusion::fuse(b, s, FusionWeight(0.0)) == b, "alpha 0 not bit-exact");
    c.require(fusion::fuse(b, s, FusionWeight(1.0)) == s, "alpha 1 not bit-exact");
    for (int k = 0; k <= 10; ++k) {
      const PixelGrid f = fusion::fuse(b, s, FusionWeight(k / 10.0));
      for (std::size_t p = 0; p < f.size(); ++p) {
        const double v = f.data()[p];
        c.require(v >= std::min(b.data()[p], s.data()[p]) && v <= std::max(b.data()[p], s.data()[p]),
                  fmt("betweenness at alpha %.1f", k / 10.0));
      }
    }
  }
}

void optimal_weight(Check& c) {
  oracle::TempDir dir;
  for (const char* sub : {"base", "strong", "hr"}) fs::create_directories(dir / sub);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> mag(13, 30);
  for (int i = 0; i < 4; ++i) {
    // Byte-lattice version of truth 0.5, base truth + d, strong truth - 3d.
    PixelGrid t = PixelGrid::filled(32, 32, 3, 128 / 255.0), b(32, 32, 3), s(32, 32, 3);
    for (std::size_t p = 0; p < t.size(); ++p) {
      const int k = (rng() % 2 ? 1 : -1) * mag(rng);
      b.data()[p] = (128 + k) / 255.0;
      s.data()[p] = (128 - 3 * k) / 255.0;
    }
    const std::string name = "im" + std::to_string(i) + ".png";
    save_image(t, dir / "hr" / name);
    save_image(b, dir / "base" / name);
    save_image(s, dir / "strong" / name);
  }
  const int rc = oracle::run({oracle::cli_path(), "sweep", "--base-dir", (dir / "base").string(),
                              "--strong-dir", (dir / "strong").string(), "--hr-dir",
                              (dir / "hr").string(), "--step", "0.01", "--csv",
                              (dir / "sweep.csv").string(), "--svg", (dir / "sweep.svg").string()},
                             dir / "sweep.log");
  c.require(rc == 0, "srfuse sweep exited with " + std::to_string(rc));
  if (rc == 0) {
    const auto curve = sweep::read_curve_csv(dir / "sweep.csv");
    c.require(std::fabs(curve.best_psnr_alpha - 0.25) <= 0.005,
              fmt("best-psnr-alpha = %.4f", curve.best_psnr_alpha));
  }

  for (int i = 0; i < 5; ++i) {
    const PixelGrid d = oracle::random_grid(rng, 24, 24, 1, -0.05, 0.05);
    PixelGrid truth = PixelGrid::filled(24, 24, 1, 0.5), base(24, 24, 1), strong(24, 24, 1);
    for (std::size_t p = 0; p < d.size(); ++p) {
      base.data()[p] = 0.5 + d.data()[p];
      strong.data()[p] = 0.5 - 3 * d.data()[p];
    }
    const double a = fusion::optimal_alpha_mse(base, strong, truth).alpha();
    const double g = oracle::grid_argmin_alpha(base, strong, truth, 1e-4);
    c.require(std::fabs(a - g) <= 5e-5, fmt("closed form vs grid differ by %.3g", a - g));
    c.require(std::fabs(a - 0.25) <= 1e-12, fmt("alpha* = %.15f", a));
  }
}

void table_arithmetic(Check& c) {
  const std::vector<ComparisonRow> rows{{"HAT + TLC", 29.1696, 0.854802, 0, 0},
                                        {"MambaIRv2 + self-ensemble", 30.3451, 0.880466, 0, 0},
                                        {"Ours (0.11 / 0.89)", 30.3527, 0.880438, 0, 0}};
  const auto vs_base = sweep::comparison_table(rows, "HAT + TLC");
  c.require(std::fabs(vs_base[2].delta_psnr - 1.1831) <= 1e-9, fmt("dPSNR = %.10f", vs_base[2].delta_psnr));
  c.require(std::fabs(vs_base[2].delta_ssim - 0.025636) <= 1e-12, fmt("dSSIM = %.10f", vs_base[2].delta_ssim));
  const std::string text = sweep::render_table(vs_base, "HAT + TLC");
  c.require(text.find("+1.1831") != std::string::npos, "rendered table lacks +1.1831");
  c.require(text.find("+0.025636") != std::string::npos, "rendered table lacks +0.025636");
  const auto vs_strong = sweep::comparison_table(rows, "MambaIRv2 + self-ensemble");
  c.require(std::fabs(vs_strong[2].delta_psnr - 0.0076) <= 1e-9, fmt("dPSNR vs strong = %.10f", vs_strong[2].delta_psnr));
  c.require(sweep::render_table(vs_strong, "MambaIRv2 + self-ensemble").find("+0.0076") != std::string::npos,
            "rendered table lacks +0.0076");
}

void tiler_equivalence(Check& c) {
  std::mt19937_64 rng(6);
  const auto bicubic = BackendSpec::builtin_bicubic("bicubic", ScaleFactor(4));
  const auto nearest = BackendSpec::builtin_nearest("nearest", ScaleFactor(2));
  for (int i = 0; i < 10; ++i) {
    const PixelGrid lr = oracle::random_grid(rng, 9 + i, 7 + i, 3);
    c.require(tiler::tiled_run(bicubic, lr, 32, 8) == backend::run_backend(bicubic, lr),
              "tile >= image not bit-exact");
  }
  for (int i = 0; i < 60; ++i) {
    const PixelGrid lr = oracle::random_grid(rng, 16, 16, i % 2 ? 3 : 1);
    const int t = 2 + static_cast<int>(rng() % 15);
    const int ov = static_cast<int>(rng() % t);
    const double d = max_abs_diff(tiler::tiled_run(nearest, lr, t, ov), backend::run_backend(nearest, lr));
    c.require(d <= 1e-9, fmt("pointwise tiled deviation %.3g", d));
  }
  for (int i = 0; i < 60; ++i) {
    const int w = 1 + static_cast<int>(rng() % 50), h = 1 + static_cast<int>(rng() % 50);
    const int t = 2 + static_cast<int>(rng() % 20);
    const int ov = static_cast<int>(rng() % t);
    for (double v : tiler::weight_sum_field(tiler::plan(w, h, t, ov), 1 + i % 4))
      c.require(std::fabs(v - 1.0) <= 1e-9, fmt("weight sum %.12f", v));
  }
}

void bicubic_oracle(Check& c) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 12; ++i) {
    const int s = 2 + i % 3;
    const int w = s * (2 + i % 4), h = s * (2 + (i * 5) % 3);
    const PixelGrid g = oracle::random_grid(rng, w, h, i % 2 ? 3 : 1);
    const PixelGrid down = resample::downscale(g, ScaleFactor(s));
    const double dd = max_abs_diff(
        down, oracle::apply_matrices(g, oracle::downscale_matrix(w, s), oracle::downscale_matrix(h, s)));
    c.require(dd <= 1e-6, fmt("downscale deviation %.3g", dd));
    const PixelGrid up = resample::upscale(g, ScaleFactor(s));
    const double du = max_abs_diff(
        up, oracle::apply_matrices(g, oracle::upscale_matrix(w, s), oracle::upscale_matrix(h, s)));
    c.require(du <= 1e-6, fmt("upscale deviation %.3g", du));
  }
  const PixelGrid flat_down = resample::downscale(PixelGrid::filled(16, 12, 3, 0.37), ScaleFactor(4));
  const PixelGrid flat_up = resample::upscale(PixelGrid::filled(5, 3, 1, 0.37), ScaleFactor(3));
  for (double v : flat_down.data())
    c.require(std::fabs(v - 0.37) <= 1e-12, "downscale constant");
  for (double v : flat_up.data())
    c.require(std::fabs(v - 0.37) <= 1e-12, "upscale constant");

  oracle::TempDir dir;
  fs::create_directories(dir / "hr");
  for (int i = 0; i < 3; ++i) save_image(oracle::random_byte_grid(rng, 24, 20, 3), dir / "hr" / ("080" + std::to_string(i + 1) + ".png"));
  const auto made = harness::degrade_dataset(dir / "hr", dir / "lr", ScaleFactor(4));
  const auto found = harness::discover_pairs(dir / "hr", dir / "lr", ScaleFactor(4));
  c.require(made.entries == found.entries && found.entries.size() == 3, "degrade/discover disagree");
  harness::validate_manifest(found);
}

void end_to_end_determinism(Check& c) {
  oracle::TempDir dir;
  fs::create_directories(dir / "hr");
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5; ++i) {
    PixelGrid g(64, 48, 3);
    const PixelGrid noise = oracle::random_grid(rng, 64, 48, 3, -0.1, 0.1);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x)
        for (int ch = 0; ch < 3; ++ch)
          g.at(x, y, ch) = 0.2 + 0.5 * (x + (ch + i) * y) / 200.0 + noise.at(x, y, ch);
    save_image(g, dir / "hr" / ("08" + std::to_string(10 + i) + ".png"));
  }
  const std::string cli = oracle::cli_path();
  int rc = oracle::run({cli, "degrade", "--hr-dir", (dir / "hr").string(), "--lr-dir",
                        (dir / "lr").string(), "--scale", "4", "--manifest",
                        (dir / "manifest.tsv").string()});
  c.require(rc == 0, "degrade exited with " + std::to_string(rc));
  oracle::write_text(dir / "run.cfg",
                     "scale = 4\n"
                     "alpha = 0.89\n"
                     "sweep_step = 0.05\n"
                     "base.id = nearest\n"
                     "base.kind = builtin-nearest\n"
                     "base.tile_size = 8\n"
                     "base.tile_overlap = 2\n"
                     "strong.id = bicubic\n"
                     "strong.kind = builtin-bicubic\n"
                     "strong.self_ensemble = true\n");
  for (const char* out : {"run1", "run2"}) {
    rc = oracle::run({cli, "run", "--manifest", (dir / "manifest.tsv").string(), "--config",
                      (dir / "run.cfg").string(), "--out", (dir / out).string()},
                     dir / (std::string(out) + ".log"));
    c.require(rc == 0, std::string(out) + " exited with " + std::to_string(rc));
  }
  if (!c.failure.empty()) return;
  const auto a = oracle::snapshot_tree(dir / "run1");
  const auto b = oracle::snapshot_tree(dir / "run2");
  c.require(a.size() >= 5 * 3 + 5, "output tree incomplete: " + std::to_string(a.size()) + " files");
  for (const char* f : {"report.json", "report.txt", "table.csv", "sweep.csv", "sweep.svg"})
    c.require(a.contains(f), std::string("missing ") + f);
  c.require(a == b, "output trees differ");
  c.require(oracle::read_bytes(dir / "run1.log") == oracle::read_bytes(dir / "run2.log"),
            "console reports differ");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"metric oracles", 1, metric_oracles},
      {"D4 group suite", 5, d4_group},
      {"self-ensemble equivariance", 10, self_ensemble_equivariance},
      {"fusion endpoints and betweenness", 5, fusion_endpoints},
      {"optimal-weight recovery", 30, optimal_weight},
      {"comparison table arithmetic", 1, table_arithmetic},
      {"tiler equivalence", 10, tiler_equivalence},
      {"bicubic oracle", 10, bicubic_oracle},
      {"end-to-end determinism", 60, end_to_end_determinism},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (check.failure.empty() && secs > cr.limit_s) check.failure = fmt("over time limit (%.3f s)", secs);
    const bool ok = check.failure.empty();
    failed += ok ? 0 : 1;
    std::printf("%s  %-34s %8.3f s (limit %g s)%s%s\n", ok ? "PASS" : "FAIL", cr.name, secs, cr.limit_s,
                ok ? "" : "  ", check.failure.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
