#pragma once

// Straight loop re-implementation of the recurrent Q-network reading the
// flat parameter vector by hand. Layout (row-major, in order):
//   w_input 4H x D, w_recurrent 4H x H, bias 4H, head_weight A x H, head_bias A
// Gate order within the 4H rows: input, forget, output, candidate.

#include <cmath>
#include <vector>

namespace oracle {

struct NaiveNet {
  int D, H, A;
  std::vector<double> p;

  double wx(int r, int c) const { return p[static_cast<std::size_t>(r * D + c)]; }
  double wh(int r, int c) const { return p[static_cast<std::size_t>(4 * H * D + r * H + c)]; }
  double b(int r) const { return p[static_cast<std::size_t>(4 * H * (D + H) + r)]; }
  double wq(int a, int c) const { return p[static_cast<std::size_t>(4 * H * (D + H + 1) + a * H + c)]; }
  double bq(int a) const { return p[static_cast<std::size_t>(4 * H * (D + H + 1) + A * H + a)]; }

  static double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  void step(const std::vector<double>& x, std::vector<double>& h, std::vector<double>& c) const {
    std::vector<double> z(static_cast<std::size_t>(4 * H));
    for (int r = 0; r < 4 * H; ++r) {
      double s = b(r);
      for (int k = 0; k < D; ++k) s += wx(r, k) * x[static_cast<std::size_t>(k)];
      for (int k = 0; k < H; ++k) s += wh(r, k) * h[static_cast<std::size_t>(k)];
      z[static_cast<std::size_t>(r)] = s;
    }
    for (int j = 0; j < H; ++j) {
      const double ig = sig(z[static_cast<std::size_t>(j)]);
      const double fg = sig(z[static_cast<std::size_t>(H + j)]);
      const double og = sig(z[static_cast<std::size_t>(2 * H + j)]);
      const double gg = std::tanh(z[static_cast<std::size_t>(3 * H + j)]);
      c[static_cast<std::size_t>(j)] = fg * c[static_cast<std::size_t>(j)] + ig * gg;
      h[static_cast<std::size_t>(j)] = og * std::tanh(c[static_cast<std::size_t>(j)]);
    }
  }

  std::vector<double> q(const std::vector<std::vector<double>>& seq, std::vector<double>* h_out = nullptr) const {
    std::vector<double> h(static_cast<std::size_t>(H), 0.0), c(static_cast<std::size_t>(H), 0.0);
    for (const auto& x : seq) step(x, h, c);
    std::vector<double> out(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a) {
      double s = bq(a);
      for (int k = 0; k < H; ++k) s += wq(a, k) * h[static_cast<std::size_t>(k)];
      out[static_cast<std::size_t>(a)] = s;
    }
    if (h_out) *h_out = h;
    return out;
  }
};

}  // namespace oracle
