#include "qpqc/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpqc/error.hpp"

namespace qpqc {

namespace {

struct ConvGeom {
  std::size_t c, h, w, oc, oh, ow, k, s, p;
};

ConvGeom conv_geom(const LayerSpec& spec, std::span<const std::size_t> in) {
  const auto out = spec.output_shape(in);
  return {in[0], in[1], in[2], out[0], out[1], out[2],
          static_cast<std::size_t>(spec.kernel), static_cast<std::size_t>(spec.stride),
          static_cast<std::size_t>(spec.padding)};
}

void check_weights(const LayerSpec& spec, std::span<const double> w) {
  if (w.size() != spec.weight_count()) {
    throw ShapeError(to_string(spec.kind) + " expects " + std::to_string(spec.weight_count()) + " weights, got " +
                     std::to_string(w.size()));
  }
}

}  // namespace

LayerSpec LayerSpec::conv2d(int in, int out, int kernel, int stride, int padding) {
  LayerSpec s;
  s.kind = LayerKind::Conv2D;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  return s;
}

LayerSpec LayerSpec::dense(int in, int out) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.in_features = in;
  s.out_features = out;
  return s;
}

LayerSpec LayerSpec::relu() { return LayerSpec{}; }

LayerSpec LayerSpec::leaky_relu(double slope) {
  LayerSpec s;
  s.kind = LayerKind::LeakyReLU;
  s.slope = slope;
  return s;
}

LayerSpec LayerSpec::max_pool(int kernel, int stride) {
  LayerSpec s;
  s.kind = LayerKind::MaxPool2D;
  s.kernel = kernel;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::global_avg_pool() {
  LayerSpec s;
  s.kind = LayerKind::GlobalAvgPool;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::Flatten;
  return s;
}

LayerSpec LayerSpec::softmax() {
  LayerSpec s;
  s.kind = LayerKind::Softmax;
  return s;
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2D: return "Conv2D";
    case LayerKind::Dense: return "Dense";
    case LayerKind::ReLU: return "ReLU";
    case LayerKind::LeakyReLU: return "LeakyReLU";
    case LayerKind::MaxPool2D: return "MaxPool2D";
    case LayerKind::GlobalAvgPool: return "GlobalAvgPool";
    case LayerKind::Flatten: return "Flatten";
    case LayerKind::Softmax: return "Softmax";
  }
  return "?";
}

std::size_t LayerSpec::weight_count() const {
  switch (kind) {
    case LayerKind::Conv2D:
      return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel + out_channels;
    case LayerKind::Dense:
      return static_cast<std::size_t>(out_features) * in_features + out_features;
    default:
      return 0;
  }
}

std::size_t LayerSpec::fan_in() const {
  switch (kind) {
    case LayerKind::Conv2D: return static_cast<std::size_t>(in_channels) * kernel * kernel;
    case LayerKind::Dense: return static_cast<std::size_t>(in_features);
    default: return 0;
  }
}

std::vector<std::size_t> LayerSpec::output_shape(std::span<const std::size_t> in) const {
  const auto fail = [&](const std::string& why) {
    return ShapeError(to_string(kind) + " cannot take input " + shape_string(in) + ": " + why);
  };
  switch (kind) {
    case LayerKind::Conv2D: {
      if (in.size() != 3 || in[0] != static_cast<std::size_t>(in_channels)) throw fail("expected (C,H,W) channels");
      if (kernel < 1 || stride < 1 || padding < 0) throw fail("bad kernel geometry");
      const long h = static_cast<long>(in[1]) + 2 * padding - kernel;
      const long w = static_cast<long>(in[2]) + 2 * padding - kernel;
      if (h < 0 || w < 0) throw fail("kernel larger than padded input");
      return {static_cast<std::size_t>(out_channels), static_cast<std::size_t>(h / stride + 1),
              static_cast<std::size_t>(w / stride + 1)};
    }
    case LayerKind::Dense:
      if (shape_size(in) != static_cast<std::size_t>(in_features)) throw fail("feature count");
      return {static_cast<std::size_t>(out_features)};
    case LayerKind::MaxPool2D: {
      if (in.size() != 3 || in[1] < static_cast<std::size_t>(kernel) || in[2] < static_cast<std::size_t>(kernel)) {
        throw fail("expected (C,H,W) at least kernel-sized");
      }
      return {in[0], (in[1] - kernel) / stride + 1, (in[2] - kernel) / stride + 1};
    }
    case LayerKind::GlobalAvgPool:
      if (in.size() != 3) throw fail("expected (C,H,W)");
      return {in[0]};
    case LayerKind::Flatten:
      return {shape_size(in)};
    case LayerKind::Softmax:
      if (in.size() != 1) throw fail("expected a vector");
      return {in.begin(), in.end()};
    case LayerKind::ReLU:
    case LayerKind::LeakyReLU:
      return {in.begin(), in.end()};
  }
  return {};
}

Tensor layer_forward(const LayerSpec& spec, std::span<const double> w, const Tensor& in, LayerCache* cache) {
  check_weights(spec, w);
  Tensor out(spec.output_shape(in.shape));
  std::vector<std::size_t> argmax;
  switch (spec.kind) {
    case LayerKind::Conv2D: {
      const auto g = conv_geom(spec, in.shape);
      const double* bias = w.data() + g.oc * g.c * g.k * g.k;
      for (std::size_t o = 0; o < g.oc; ++o) {
        double* dst = out.data.data() + o * g.oh * g.ow;
        std::fill(dst, dst + g.oh * g.ow, bias[o]);
        for (std::size_t i = 0; i < g.c; ++i) {
          const double* kern = w.data() + (o * g.c + i) * g.k * g.k;
          const double* src = in.data.data() + i * g.h * g.w;
          for (std::size_t ky = 0; ky < g.k; ++ky) {
            for (std::size_t kx = 0; kx < g.k; ++kx) {
              const double kv = kern[ky * g.k + kx];
              for (std::size_t y = 0; y < g.oh; ++y) {
                const long iy = static_cast<long>(y * g.s + ky) - static_cast<long>(g.p);
                if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
                for (std::size_t x = 0; x < g.ow; ++x) {
                  const long ix = static_cast<long>(x * g.s + kx) - static_cast<long>(g.p);
                  if (ix < 0 || ix >= static_cast<long>(g.w)) continue;
                  dst[y * g.ow + x] += kv * src[iy * static_cast<long>(g.w) + ix];
                }
              }
            }
          }
        }
      }
      break;
    }
    case LayerKind::Dense: {
      const std::size_t ni = spec.in_features, no = spec.out_features;
      for (std::size_t o = 0; o < no; ++o) {
        double acc = w[no * ni + o];
        const double* row = w.data() + o * ni;
        for (std::size_t i = 0; i < ni; ++i) acc += row[i] * in.data[i];
        out.data[o] = acc;
      }
      break;
    }
    case LayerKind::ReLU:
      for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > 0 ? in.data[i] : 0.0;
      break;
    case LayerKind::LeakyReLU:
      for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > 0 ? in.data[i] : spec.slope * in.data[i];
      break;
    case LayerKind::MaxPool2D: {
      const std::size_t c = in.dim(0), h = in.dim(1), wd = in.dim(2), oh = out.dim(1), ow = out.dim(2);
      argmax.resize(out.size());
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t at = 0;
            for (int ky = 0; ky < spec.kernel; ++ky) {
              for (int kx = 0; kx < spec.kernel; ++kx) {
                const std::size_t idx = (ch * h + y * spec.stride + ky) * wd + x * spec.stride + kx;
                if (in.data[idx] > best) {
                  best = in.data[idx];
                  at = idx;
                }
              }
            }
            const std::size_t o = (ch * oh + y) * ow + x;
            out.data[o] = best;
            argmax[o] = at;
          }
        }
      }
      break;
    }
    case LayerKind::GlobalAvgPool: {
      const std::size_t plane = in.dim(1) * in.dim(2);
      for (std::size_t ch = 0; ch < in.dim(0); ++ch) {
        double s = 0.0;
        for (std::size_t i = 0; i < plane; ++i) s += in.data[ch * plane + i];
        out.data[ch] = s / static_cast<double>(plane);
      }
      break;
    }
    case LayerKind::Flatten:
      out.data = in.data;
      break;
    case LayerKind::Softmax: {
      const double mx = *std::max_element(in.data.begin(), in.data.end());
      double z = 0.0;
      for (std::size_t i = 0; i < in.size(); ++i) z += out.data[i] = std::exp(in.data[i] - mx);
      for (auto& v : out.data) v /= z;
      break;
    }
  }
  if (cache) {
    cache->kind = spec.kind;
    cache->input = in;
    cache->output = out;
    cache->argmax = std::move(argmax);
  }
  return out;
}

LayerGrad layer_backward(const LayerSpec& spec, std::span<const double> w, const LayerCache& cache,
                         const Tensor& d_out) {
  check_weights(spec, w);
  if (cache.kind != spec.kind) throw StateError("cache from a " + to_string(cache.kind) + " layer");
  const Tensor& in = cache.input;
  if (d_out.shape != cache.output.shape) throw StateError("output gradient shape does not match the cached output");
  LayerGrad g{Tensor(in.shape), std::vector<double>(spec.weight_count(), 0.0)};
  switch (spec.kind) {
    case LayerKind::Conv2D: {
      const auto geo = conv_geom(spec, in.shape);
      double* dbias = g.d_weights.data() + geo.oc * geo.c * geo.k * geo.k;
      for (std::size_t o = 0; o < geo.oc; ++o) {
        const double* dy = d_out.data.data() + o * geo.oh * geo.ow;
        for (std::size_t i = 0; i < geo.oh * geo.ow; ++i) dbias[o] += dy[i];
        for (std::size_t i = 0; i < geo.c; ++i) {
          const double* kern = w.data() + (o * geo.c + i) * geo.k * geo.k;
          double* dkern = g.d_weights.data() + (o * geo.c + i) * geo.k * geo.k;
          const double* src = in.data.data() + i * geo.h * geo.w;
          double* dsrc = g.d_input.data.data() + i * geo.h * geo.w;
          for (std::size_t ky = 0; ky < geo.k; ++ky) {
            for (std::size_t kx = 0; kx < geo.k; ++kx) {
              const double kv = kern[ky * geo.k + kx];
              double acc = 0.0;
              for (std::size_t y = 0; y < geo.oh; ++y) {
                const long iy = static_cast<long>(y * geo.s + ky) - static_cast<long>(geo.p);
                if (iy < 0 || iy >= static_cast<long>(geo.h)) continue;
                for (std::size_t x = 0; x < geo.ow; ++x) {
                  const long ix = static_cast<long>(x * geo.s + kx) - static_cast<long>(geo.p);
                  if (ix < 0 || ix >= static_cast<long>(geo.w)) continue;
                  const long at = iy * static_cast<long>(geo.w) + ix;
                  acc += dy[y * geo.ow + x] * src[at];
                  dsrc[at] += dy[y * geo.ow + x] * kv;
                }
              }
              dkern[ky * geo.k + kx] += acc;
            }
          }
        }
      }
      break;
    }
    case LayerKind::Dense: {
      const std::size_t ni = spec.in_features, no = spec.out_features;
      for (std::size_t o = 0; o < no; ++o) {
        const double dy = d_out.data[o];
        g.d_weights[no * ni + o] = dy;
        const double* row = w.data() + o * ni;
        double* drow = g.d_weights.data() + o * ni;
        for (std::size_t i = 0; i < ni; ++i) {
          drow[i] = dy * in.data[i];
          g.d_input.data[i] += dy * row[i];
        }
      }
      break;
    }
    case LayerKind::ReLU:
      for (std::size_t i = 0; i < in.size(); ++i) g.d_input.data[i] = in.data[i] > 0 ? d_out.data[i] : 0.0;
      break;
    case LayerKind::LeakyReLU:
      for (std::size_t i = 0; i < in.size(); ++i) {
        g.d_input.data[i] = in.data[i] > 0 ? d_out.data[i] : spec.slope * d_out.data[i];
      }
      break;
    case LayerKind::MaxPool2D:
      if (cache.argmax.size() != d_out.size()) throw StateError("max-pool cache lacks argmax indices");
      for (std::size_t o = 0; o < d_out.size(); ++o) g.d_input.data[cache.argmax[o]] += d_out.data[o];
      break;
    case LayerKind::GlobalAvgPool: {
      const std::size_t plane = in.dim(1) * in.dim(2);
      for (std::size_t ch = 0; ch < in.dim(0); ++ch) {
        for (std::size_t i = 0; i < plane; ++i) g.d_input.data[ch * plane + i] = d_out.data[ch] / static_cast<double>(plane);
      }
      break;
    }
    case LayerKind::Flatten:
      g.d_input.data = d_out.data;
      break;
    case LayerKind::Softmax: {
      const auto& y = cache.output.data;
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += d_out.data[i] * y[i];
      for (std::size_t i = 0; i < y.size(); ++i) g.d_input.data[i] = y[i] * (d_out.data[i] - dot);
      break;
    }
  }
  return g;
}

std::vector<double> he_init(const LayerSpec& spec, Rng& rng) {
  std::vector<double> w(spec.weight_count(), 0.0);
  if (w.empty()) return w;
  const std::size_t fan_in = spec.fan_in();
  if (fan_in == 0) throw ShapeError("He initialization with zero fan-in");
  const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
  const std::size_t n_bias = spec.kind == LayerKind::Conv2D ? spec.out_channels : spec.out_features;
  for (std::size_t i = 0; i + n_bias < w.size(); ++i) w[i] = sd * rng.normal();
  return w;
}

std::vector<double> he_init(const LayerSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return he_init(spec, rng);
}

}  // namespace qpqc
