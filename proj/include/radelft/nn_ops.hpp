#ifndef RADELFT_NN_OPS_HPP
#define RADELFT_NN_OPS_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "radelft/parallel.hpp"
#include "radelft/tensor.hpp"

namespace radelft {
namespace nn {

namespace detail_ops {

// Thread spawn costs more than small convolutions; only fan out when the
// kernel has real work.
template <typename Fn>
inline void forEachMaybeParallel(std::size_t n, std::size_t flops, const Fn& fn) {
  if (flops >= 1u << 20) {
    parallelFor(n, fn);
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace detail_ops

enum class Activation { None, ReLU, LeakyReLU, Tanh, Softplus };

Activation activationFromName(const std::string& name);
std::string activationName(Activation a);

template <typename T>
inline T activate(Activation act, T x) {
  switch (act) {
    case Activation::None: return x;
    case Activation::ReLU: return x > T(0) ? x : T(0);
    case Activation::LeakyReLU: return x > T(0) ? x : T(0.1) * x;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Softplus:
      return x > T(20) ? x : T(std::log1p(std::exp(static_cast<double>(x))));
  }
  return x;
}

template <typename T>
inline T activateGrad(Activation act, T pre) {
  switch (act) {
    case Activation::None: return T(1);
    case Activation::ReLU: return pre > T(0) ? T(1) : T(0);
    case Activation::LeakyReLU: return pre > T(0) ? T(1) : T(0.1);
    case Activation::Tanh: {
      const T t = std::tanh(pre);
      return T(1) - t * t;
    }
    case Activation::Softplus:
      return T(1) / (T(1) + T(std::exp(-static_cast<double>(pre))));
  }
  return T(1);
}

template <typename T>
Tensor<T> activationForward(Activation act, const Tensor<T>& pre) {
  Tensor<T> out(pre.shape());
  for (std::size_t i = 0; i < pre.size(); ++i) out[i] = activate(act, pre[i]);
  return out;
}

// g_out -> g_pre given the cached pre-activation.
template <typename T>
void activationBackward(Activation act, const Tensor<T>& pre, Tensor<T>& g) {
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= activateGrad(act, pre[i]);
}

// 3-D convolution over a [C][X][Y][Z] tensor. The backbone uses it with a
// trailing singleton axis as a plain 2-D convolution and the temporal head
// with (T, R, A) as the spatial axes, so one verified kernel covers all
// stages.
template <typename T>
struct Conv3d {
  int ci = 0, co = 0;
  int kx = 1, ky = 1, kz = 1;
  int sx = 1, sy = 1, sz = 1;
  int px = 0, py = 0, pz = 0;
  Tensor<T> w;  // [co][ci][kx][ky][kz]
  Tensor<T> b;  // [co]
  Tensor<T> gw, gb;

  static Conv3d make(int ci, int co, int kx, int ky, int kz, int sx, int sy, int sz, int px,
                     int py, int pz) {
    Conv3d c;
    c.ci = ci;
    c.co = co;
    c.kx = kx;
    c.ky = ky;
    c.kz = kz;
    c.sx = sx;
    c.sy = sy;
    c.sz = sz;
    c.px = px;
    c.py = py;
    c.pz = pz;
    c.w = Tensor<T>({static_cast<std::size_t>(co), static_cast<std::size_t>(ci),
                     static_cast<std::size_t>(kx), static_cast<std::size_t>(ky),
                     static_cast<std::size_t>(kz)});
    c.b = Tensor<T>({static_cast<std::size_t>(co)});
    c.gw = Tensor<T>(c.w.shape());
    c.gb = Tensor<T>(c.b.shape());
    return c;
  }

  std::size_t outDim(std::size_t in, int k, int s, int p) const {
    return (in + 2 * p - k) / s + 1;
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    const std::size_t X = x.dim(1), Y = x.dim(2), Z = x.dim(3);
    const std::size_t Xo = outDim(X, kx, sx, px), Yo = outDim(Y, ky, sy, py),
                      Zo = outDim(Z, kz, sz, pz);
    Tensor<T> out({static_cast<std::size_t>(co), Xo, Yo, Zo});
    const T* xd = x.data();
    const T* wd = w.data();
    T* od = out.data();
    const std::size_t xs_c = X * Y * Z, xs_x = Y * Z;
    const std::size_t ws_co = static_cast<std::size_t>(ci) * kx * ky * kz;
    const std::size_t os_c = Xo * Yo * Zo;
    const std::size_t flops = static_cast<std::size_t>(co) * os_c * ci * kx * ky * kz;

    detail_ops::forEachMaybeParallel(static_cast<std::size_t>(co), flops, [&](std::size_t c) {
      const T bias = b[c];
      const T* wc = wd + c * ws_co;
      T* oc = od + c * os_c;
      for (std::size_t xo = 0; xo < Xo; ++xo) {
        const long long x0 = static_cast<long long>(xo) * sx - px;
        const int kxlo = static_cast<int>(std::max(0LL, -x0));
        const int kxhi = static_cast<int>(std::min<long long>(kx - 1, static_cast<long long>(X) - 1 - x0));
        for (std::size_t yo = 0; yo < Yo; ++yo) {
          const long long y0 = static_cast<long long>(yo) * sy - py;
          const int kylo = static_cast<int>(std::max(0LL, -y0));
          const int kyhi = static_cast<int>(std::min<long long>(ky - 1, static_cast<long long>(Y) - 1 - y0));
          for (std::size_t zo = 0; zo < Zo; ++zo) {
            const long long z0 = static_cast<long long>(zo) * sz - pz;
            const int kzlo = static_cast<int>(std::max(0LL, -z0));
            const int kzhi = static_cast<int>(std::min<long long>(kz - 1, static_cast<long long>(Z) - 1 - z0));
            T acc = bias;
            for (int c_in = 0; c_in < ci; ++c_in) {
              const T* xc = xd + c_in * xs_c;
              const T* wci = wc + static_cast<std::size_t>(c_in) * kx * ky * kz;
              for (int fx = kxlo; fx <= kxhi; ++fx) {
                const std::size_t xi = static_cast<std::size_t>(x0 + fx);
                for (int fy = kylo; fy <= kyhi; ++fy) {
                  const std::size_t yi = static_cast<std::size_t>(y0 + fy);
                  const T* xrow = xc + xi * xs_x + yi * Z;
                  const T* wrow = wci + (static_cast<std::size_t>(fx) * ky + fy) * kz;
                  for (int fz = kzlo; fz <= kzhi; ++fz) acc += wrow[fz] * xrow[z0 + fz];
                }
              }
            }
            oc[(xo * Yo + yo) * Zo + zo] = acc;
          }
        }
      }
    });
    return out;
  }

  // Accumulates gw/gb and returns the input gradient.
  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gout) {
    const std::size_t X = x.dim(1), Y = x.dim(2), Z = x.dim(3);
    const std::size_t Xo = gout.dim(1), Yo = gout.dim(2), Zo = gout.dim(3);
    Tensor<T> gx(x.shape());
    const T* xd = x.data();
    const T* gd = gout.data();
    const T* wd = w.data();
    T* gxd = gx.data();
    const std::size_t xs_c = X * Y * Z, xs_x = Y * Z;
    const std::size_t ws_co = static_cast<std::size_t>(ci) * kx * ky * kz;
    const std::size_t os_c = Xo * Yo * Zo;
    const std::size_t flops = static_cast<std::size_t>(co) * os_c * ci * kx * ky * kz;

    // dW, dB: each output channel owns its kernel slice.
    detail_ops::forEachMaybeParallel(static_cast<std::size_t>(co), flops, [&](std::size_t c) {
      T* gwc = gw.data() + c * ws_co;
      const T* gc = gd + c * os_c;
      T gbias = T(0);
      for (std::size_t xo = 0; xo < Xo; ++xo) {
        const long long x0 = static_cast<long long>(xo) * sx - px;
        const int kxlo = static_cast<int>(std::max(0LL, -x0));
        const int kxhi = static_cast<int>(std::min<long long>(kx - 1, static_cast<long long>(X) - 1 - x0));
        for (std::size_t yo = 0; yo < Yo; ++yo) {
          const long long y0 = static_cast<long long>(yo) * sy - py;
          const int kylo = static_cast<int>(std::max(0LL, -y0));
          const int kyhi = static_cast<int>(std::min<long long>(ky - 1, static_cast<long long>(Y) - 1 - y0));
          for (std::size_t zo = 0; zo < Zo; ++zo) {
            const long long z0 = static_cast<long long>(zo) * sz - pz;
            const int kzlo = static_cast<int>(std::max(0LL, -z0));
            const int kzhi = static_cast<int>(std::min<long long>(kz - 1, static_cast<long long>(Z) - 1 - z0));
            const T g = gc[(xo * Yo + yo) * Zo + zo];
            if (g == T(0)) continue;
            gbias += g;
            for (int c_in = 0; c_in < ci; ++c_in) {
              const T* xc = xd + c_in * xs_c;
              T* gwci = gwc + static_cast<std::size_t>(c_in) * kx * ky * kz;
              for (int fx = kxlo; fx <= kxhi; ++fx) {
                const std::size_t xi = static_cast<std::size_t>(x0 + fx);
                for (int fy = kylo; fy <= kyhi; ++fy) {
                  const std::size_t yi = static_cast<std::size_t>(y0 + fy);
                  const T* xrow = xc + xi * xs_x + yi * Z;
                  T* gwrow = gwci + (static_cast<std::size_t>(fx) * ky + fy) * kz;
                  for (int fz = kzlo; fz <= kzhi; ++fz) gwrow[fz] += g * xrow[z0 + fz];
                }
              }
            }
          }
        }
      }
      gb[c] += gbias;
    });

    // dX: each input channel is written by exactly one task.
    detail_ops::forEachMaybeParallel(static_cast<std::size_t>(ci), flops, [&](std::size_t c_in) {
      T* gxc = gxd + c_in * xs_c;
      for (int c = 0; c < co; ++c) {
        const T* wci = wd + c * ws_co + c_in * static_cast<std::size_t>(kx) * ky * kz;
        const T* gc = gd + static_cast<std::size_t>(c) * os_c;
        for (std::size_t xo = 0; xo < Xo; ++xo) {
          const long long x0 = static_cast<long long>(xo) * sx - px;
          const int kxlo = static_cast<int>(std::max(0LL, -x0));
          const int kxhi = static_cast<int>(std::min<long long>(kx - 1, static_cast<long long>(X) - 1 - x0));
          for (std::size_t yo = 0; yo < Yo; ++yo) {
            const long long y0 = static_cast<long long>(yo) * sy - py;
            const int kylo = static_cast<int>(std::max(0LL, -y0));
            const int kyhi = static_cast<int>(std::min<long long>(ky - 1, static_cast<long long>(Y) - 1 - y0));
            for (std::size_t zo = 0; zo < Zo; ++zo) {
              const long long z0 = static_cast<long long>(zo) * sz - pz;
              const int kzlo = static_cast<int>(std::max(0LL, -z0));
              const int kzhi = static_cast<int>(std::min<long long>(kz - 1, static_cast<long long>(Z) - 1 - z0));
              const T g = gc[(xo * Yo + yo) * Zo + zo];
              if (g == T(0)) continue;
              for (int fx = kxlo; fx <= kxhi; ++fx) {
                const std::size_t xi = static_cast<std::size_t>(x0 + fx);
                for (int fy = kylo; fy <= kyhi; ++fy) {
                  const std::size_t yi = static_cast<std::size_t>(y0 + fy);
                  T* gxrow = gxc + xi * xs_x + yi * Z;
                  const T* wrow = wci + (static_cast<std::size_t>(fx) * ky + fy) * kz;
                  for (int fz = kzlo; fz <= kzhi; ++fz) gxrow[z0 + fz] += wrow[fz] * g;
                }
              }
            }
          }
        }
      }
    });
    return gx;
  }
};

// Max over the full trailing axis, keeping a singleton in its place.
// Ties keep the lowest index.
template <typename T>
Tensor<T> maxPoolZForward(const Tensor<T>& x, Tensor<std::int32_t>& argmax) {
  const std::size_t C = x.dim(0), X = x.dim(1), Y = x.dim(2), Z = x.dim(3);
  Tensor<T> out({C, X, Y, 1});
  argmax = Tensor<std::int32_t>({C, X, Y, 1});
  const std::size_t cells = C * X * Y;
  for (std::size_t i = 0; i < cells; ++i) {
    const T* row = x.data() + i * Z;
    T best = row[0];
    std::int32_t bi = 0;
    for (std::size_t z = 1; z < Z; ++z)
      if (row[z] > best) {
        best = row[z];
        bi = static_cast<std::int32_t>(z);
      }
    out[i] = best;
    argmax[i] = bi;
  }
  return out;
}

template <typename T>
Tensor<T> maxPoolZBackward(const Tensor<std::int32_t>& argmax, const Tensor<T>& gout,
                           std::size_t Z) {
  const std::size_t C = gout.dim(0), X = gout.dim(1), Y = gout.dim(2);
  Tensor<T> gx({C, X, Y, Z});
  const std::size_t cells = C * X * Y;
  for (std::size_t i = 0; i < cells; ++i)
    gx[i * Z + static_cast<std::size_t>(argmax[i])] = gout[i];
  return gx;
}

// Nearest-neighbor x2 upsampling of the two leading spatial axes, cropped to
// an explicit target size (handles odd extents from strided downsampling).
template <typename T>
Tensor<T> upsample2Forward(const Tensor<T>& x, std::size_t Xt, std::size_t Yt) {
  const std::size_t C = x.dim(0), X = x.dim(1), Y = x.dim(2), Z = x.dim(3);
  (void)X;
  (void)Y;
  Tensor<T> out({C, Xt, Yt, Z});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t xo = 0; xo < Xt; ++xo)
      for (std::size_t yo = 0; yo < Yt; ++yo)
        for (std::size_t z = 0; z < Z; ++z) out(c, xo, yo, z) = x(c, xo / 2, yo / 2, z);
  return out;
}

template <typename T>
Tensor<T> upsample2Backward(const Tensor<T>& gout, std::size_t X, std::size_t Y) {
  const std::size_t C = gout.dim(0), Xt = gout.dim(1), Yt = gout.dim(2), Z = gout.dim(3);
  Tensor<T> gx({C, X, Y, Z});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t xo = 0; xo < Xt; ++xo)
      for (std::size_t yo = 0; yo < Yt; ++yo)
        for (std::size_t z = 0; z < Z; ++z) gx(c, xo / 2, yo / 2, z) += gout(c, xo, yo, z);
  return gx;
}

}  // namespace nn
}  // namespace radelft

#endif
