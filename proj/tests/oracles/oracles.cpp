#include "oracles/oracles.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oracle {

namespace fs = std::filesystem;

PixelGrid random_grid(std::mt19937_64& rng, int w, int h, int c, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(w) * h * c);
  for (double& x : v) x = dist(rng);
  return PixelGrid(w, h, c, std::move(v));
}

PixelGrid random_byte_grid(std::mt19937_64& rng, int w, int h, int c) {
  std::uniform_int_distribution<int> dist(0, 255);
  std::vector<double> v(static_cast<std::size_t>(w) * h * c);
  for (double& x : v) x = dist(rng) / 255.0;
  return PixelGrid(w, h, c, std::move(v));
}

double keys(double x) {
  const double a = -0.5;
  const double t = std::fabs(x);
  if (t <= 1.0) return (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0;
  if (t < 2.0) return a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a;
  return 0.0;
}

namespace {

Matrix build(int n_in, int n_out, double ratio, double stretch) {
  Matrix m(n_out, std::vector<double>(n_in, 0.0));
  for (int o = 0; o < n_out; ++o) {
    const double centre = (o + 0.5) * ratio - 0.5;
    const int lo = static_cast<int>(std::floor(centre - 2.0 * stretch)) - 2;
    const int hi = static_cast<int>(std::ceil(centre + 2.0 * stretch)) + 2;
    double total = 0.0;
    for (int p = lo; p <= hi; ++p) {
      const double w = keys((centre - p) / stretch);
      m[o][std::clamp(p, 0, n_in - 1)] += w;
      total += w;
    }
    for (double& w : m[o]) w /= total;
  }
  return m;
}

}  // namespace

Matrix downscale_matrix(int n, int s) { return build(n, n / s, s, s); }
Matrix upscale_matrix(int n, int s) { return build(n, n * s, 1.0 / s, 1.0); }

PixelGrid apply_matrices(const PixelGrid& in, const Matrix& wx, const Matrix& wy) {
  const int ow = static_cast<int>(wx.size());
  const int oh = static_cast<int>(wy.size());
  PixelGrid out(ow, oh, in.channels());
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int c = 0; c < in.channels(); ++c) {
        double acc = 0.0;
        for (int j = 0; j < in.height(); ++j)
          for (int i = 0; i < in.width(); ++i) acc += wy[y][j] * wx[x][i] * in.at(i, j, c);
        out.at(x, y, c) = acc;
      }
  return out;
}

PixelGrid d4_apply(int k, const PixelGrid& g) {
  const int w = g.width();
  const int h = g.height();
  const int r = k % 4;
  const bool odd = r % 2 == 1;
  const int ow = odd ? h : w;
  const int oh = odd ? w : h;
  PixelGrid out(ow, oh, g.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // Doubled centred coordinates stay integral.
      int u = 2 * x - (w - 1);
      int v = 2 * y - (h - 1);
      if (k >= 4) u = -u;
      for (int q = 0; q < r; ++q) {
        const int nu = v;
        const int nv = -u;
        u = nu;
        v = nv;
      }
      const int ox = (u + ow - 1) / 2;
      const int oy = (v + oh - 1) / 2;
      for (int c = 0; c < g.channels(); ++c) out.at(ox, oy, c) = g.at(x, y, c);
    }
  return out;
}

std::vector<int> coverage(const std::vector<int>& offsets, int t, int n) {
  std::vector<int> count(n, 0);
  for (int o : offsets)
    for (int p = o; p < o + t; ++p)
      if (p >= 0 && p < n) ++count[p];
  return count;
}

double ssim_direct(const PixelGrid& a, const PixelGrid& b) {
  constexpr int n = 11;
  constexpr double sigma = 1.5;
  double win[n][n];
  double total = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double dx = i - n / 2;
      const double dy = j - n / 2;
      win[j][i] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      total += win[j][i];
    }
  for (auto& row : win)
    for (double& w : row) w /= total;

  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double sum = 0.0;
  int count = 0;
  for (int y = 0; y + n <= a.height(); ++y)
    for (int x = 0; x + n <= a.width(); ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double w = win[j][i];
          const double pa = a.at(x + i, y + j);
          const double pb = b.at(x + i, y + j);
          ma += w * pa;
          mb += w * pb;
          saa += w * pa * pa;
          sbb += w * pb * pb;
          sab += w * pa * pb;
        }
      const double va = saa - ma * ma;
      const double vb = sbb - mb * mb;
      const double cov = sab - ma * mb;
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return sum / count;
}

double mse(const PixelGrid& a, const PixelGrid& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double grid_argmin_alpha(const PixelGrid& base, const PixelGrid& strong, const PixelGrid& truth,
                         double step) {
  const int n = static_cast<int>(std::llround(1.0 / step));
  double best_alpha = 0.0;
  double best = INFINITY;
  for (int i = 0; i <= n; ++i) {
    const double alpha = static_cast<double>(i) / n;
    double s = 0.0;
    for (std::size_t p = 0; p < truth.size(); ++p) {
      const double f = (1.0 - alpha) * base.data()[p] + alpha * strong.data()[p];
      const double d = f - truth.data()[p];
      s += d * d;
    }
    if (s < best) {
      best = s;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "srfuse-test-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_bytes(e.path());
  return out;
}

int run(const std::vector<std::string>& argv, const fs::path& log) {
  std::string cmd;
  for (const auto& a : argv) {
    std::string q = "'";
    for (char ch : a) q += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    cmd += q + "' ";
  }
  cmd += log.empty() ? ">/dev/null 2>&1" : "> '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace oracle
