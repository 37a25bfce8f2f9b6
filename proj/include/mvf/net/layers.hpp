#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "mvf/error.hpp"
#include "mvf/rng.hpp"

namespace mvf::net {

// Activations for a batch, layout N x C x H x W.
template <typename T>
struct Act {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Act() = default;
  Act(int n_, int c_, int h_, int w_) : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_) {}

  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  T* at(int i, int ch) { return data.data() + (static_cast<std::size_t>(i) * c + ch) * plane(); }
  const T* at(int i, int ch) const { return data.data() + (static_cast<std::size_t>(i) * c + ch) * plane(); }
};

template <typename T>
struct Param {
  std::string name;
  std::vector<T> value;
  std::vector<T> grad;

  Param(std::string n, std::size_t size) : name(std::move(n)), value(size), grad(size) {}
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Act<T> forward(const Act<T>& in) = 0;
  // Accumulates parameter gradients and returns d(loss)/d(input) for the most
  // recent forward call.
  virtual Act<T> backward(const Act<T>& grad_out) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
  virtual void init(Rng&) {}
};

inline int conv_out(int size, int stride) { return (size - 1) / stride + 1; }

// 3x3 convolution, padding 1.
template <typename T>
class Conv3x3 : public Layer<T> {
 public:
  Conv3x3(std::string name, int cin, int cout, int stride)
      : cin_(cin), cout_(cout), stride_(stride),
        weight_(name + ".weight", static_cast<std::size_t>(cout) * cin * 9),
        bias_(name + ".bias", static_cast<std::size_t>(cout)) {}

  Act<T> forward(const Act<T>& in) override {
    if (in.c != cin_) throw ShapeMismatch("conv expects " + std::to_string(cin_) + " channels, got " + std::to_string(in.c));
    in_ = in;
    Act<T> out(in.n, cout_, conv_out(in.h, stride_), conv_out(in.w, stride_));
    for (int i = 0; i < in.n; ++i) {
      for (int o = 0; o < cout_; ++o) {
        T* dst = out.at(i, o);
        std::fill(dst, dst + out.plane(), bias_.value[static_cast<std::size_t>(o)]);
        for (int ci = 0; ci < cin_; ++ci) {
          const T* src = in.at(i, ci);
          const T* k = &weight_.value[(static_cast<std::size_t>(o) * cin_ + ci) * 9];
          for (int y = 0; y < out.h; ++y) {
            for (int ky = 0; ky < 3; ++ky) {
              const int sy = y * stride_ + ky - 1;
              if (sy < 0 || sy >= in.h) continue;
              for (int x = 0; x < out.w; ++x) {
                T acc = 0;
                for (int kx = 0; kx < 3; ++kx) {
                  const int sx = x * stride_ + kx - 1;
                  if (sx >= 0 && sx < in.w) acc += k[ky * 3 + kx] * src[sy * in.w + sx];
                }
                dst[y * out.w + x] += acc;
              }
            }
          }
        }
      }
    }
    return out;
  }

  Act<T> backward(const Act<T>& g) override {
    Act<T> gin(in_.n, in_.c, in_.h, in_.w);
    for (int i = 0; i < g.n; ++i) {
      for (int o = 0; o < cout_; ++o) {
        const T* go = g.at(i, o);
        for (std::size_t p = 0; p < g.plane(); ++p) bias_.grad[static_cast<std::size_t>(o)] += go[p];
        for (int ci = 0; ci < cin_; ++ci) {
          const T* src = in_.at(i, ci);
          T* gsrc = gin.at(i, ci);
          const std::size_t kbase = (static_cast<std::size_t>(o) * cin_ + ci) * 9;
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const T kv = weight_.value[kbase + static_cast<std::size_t>(ky * 3 + kx)];
              T acc = 0;
              for (int y = 0; y < g.h; ++y) {
                const int sy = y * stride_ + ky - 1;
                if (sy < 0 || sy >= in_.h) continue;
                for (int x = 0; x < g.w; ++x) {
                  const int sx = x * stride_ + kx - 1;
                  if (sx < 0 || sx >= in_.w) continue;
                  acc += go[y * g.w + x] * src[sy * in_.w + sx];
                  gsrc[sy * in_.w + sx] += go[y * g.w + x] * kv;
                }
              }
              weight_.grad[kbase + static_cast<std::size_t>(ky * 3 + kx)] += acc;
            }
          }
        }
      }
    }
    return gin;
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

  void init(Rng& rng) override {
    const double scale = std::sqrt(2.0 / (cin_ * 9));
    for (T& v : weight_.value) v = static_cast<T>(rng.normal() * scale);
    std::fill(bias_.value.begin(), bias_.value.end(), T{0});
  }

 private:
  int cin_, cout_, stride_;
  Param<T> weight_, bias_;
  Act<T> in_;
};

// Depthwise 3x3 convolution, padding 1.
template <typename T>
class Depthwise3x3 : public Layer<T> {
 public:
  Depthwise3x3(std::string name, int channels, int stride)
      : c_(channels), stride_(stride),
        weight_(name + ".weight", static_cast<std::size_t>(channels) * 9),
        bias_(name + ".bias", static_cast<std::size_t>(channels)) {}

  Act<T> forward(const Act<T>& in) override {
    if (in.c != c_) throw ShapeMismatch("depthwise conv channel mismatch");
    in_ = in;
    Act<T> out(in.n, c_, conv_out(in.h, stride_), conv_out(in.w, stride_));
    for (int i = 0; i < in.n; ++i) {
      for (int ch = 0; ch < c_; ++ch) {
        const T* src = in.at(i, ch);
        const T* k = &weight_.value[static_cast<std::size_t>(ch) * 9];
        T* dst = out.at(i, ch);
        for (int y = 0; y < out.h; ++y) {
          for (int x = 0; x < out.w; ++x) {
            T acc = bias_.value[static_cast<std::size_t>(ch)];
            for (int ky = 0; ky < 3; ++ky) {
              const int sy = y * stride_ + ky - 1;
              if (sy < 0 || sy >= in.h) continue;
              for (int kx = 0; kx < 3; ++kx) {
                const int sx = x * stride_ + kx - 1;
                if (sx >= 0 && sx < in.w) acc += k[ky * 3 + kx] * src[sy * in.w + sx];
              }
            }
            dst[y * out.w + x] = acc;
          }
        }
      }
    }
    return out;
  }

  Act<T> backward(const Act<T>& g) override {
    Act<T> gin(in_.n, in_.c, in_.h, in_.w);
    for (int i = 0; i < g.n; ++i) {
      for (int ch = 0; ch < c_; ++ch) {
        const T* go = g.at(i, ch);
        const T* src = in_.at(i, ch);
        T* gsrc = gin.at(i, ch);
        const T* k = &weight_.value[static_cast<std::size_t>(ch) * 9];
        T* gk = &weight_.grad[static_cast<std::size_t>(ch) * 9];
        for (int y = 0; y < g.h; ++y) {
          for (int x = 0; x < g.w; ++x) {
            const T gv = go[y * g.w + x];
            bias_.grad[static_cast<std::size_t>(ch)] += gv;
            for (int ky = 0; ky < 3; ++ky) {
              const int sy = y * stride_ + ky - 1;
              if (sy < 0 || sy >= in_.h) continue;
              for (int kx = 0; kx < 3; ++kx) {
                const int sx = x * stride_ + kx - 1;
                if (sx < 0 || sx >= in_.w) continue;
                gk[ky * 3 + kx] += gv * src[sy * in_.w + sx];
                gsrc[sy * in_.w + sx] += gv * k[ky * 3 + kx];
              }
            }
          }
        }
      }
    }
    return gin;
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

  void init(Rng& rng) override {
    const double scale = std::sqrt(2.0 / 9.0);
    for (T& v : weight_.value) v = static_cast<T>(rng.normal() * scale);
    std::fill(bias_.value.begin(), bias_.value.end(), T{0});
  }

 private:
  int c_, stride_;
  Param<T> weight_, bias_;
  Act<T> in_;
};

// 1x1 convolution.
template <typename T>
class Pointwise : public Layer<T> {
 public:
  Pointwise(std::string name, int cin, int cout)
      : cin_(cin), cout_(cout),
        weight_(name + ".weight", static_cast<std::size_t>(cout) * cin),
        bias_(name + ".bias", static_cast<std::size_t>(cout)) {}

  Act<T> forward(const Act<T>& in) override {
    if (in.c != cin_) throw ShapeMismatch("pointwise conv channel mismatch");
    in_ = in;
    Act<T> out(in.n, cout_, in.h, in.w);
    const std::size_t p = in.plane();
    for (int i = 0; i < in.n; ++i) {
      for (int o = 0; o < cout_; ++o) {
        T* dst = out.at(i, o);
        std::fill(dst, dst + p, bias_.value[static_cast<std::size_t>(o)]);
        for (int ci = 0; ci < cin_; ++ci) {
          const T wv = weight_.value[static_cast<std::size_t>(o) * cin_ + ci];
          const T* src = in.at(i, ci);
          for (std::size_t q = 0; q < p; ++q) dst[q] += wv * src[q];
        }
      }
    }
    return out;
  }

  Act<T> backward(const Act<T>& g) override {
    Act<T> gin(in_.n, in_.c, in_.h, in_.w);
    const std::size_t p = g.plane();
    for (int i = 0; i < g.n; ++i) {
      for (int o = 0; o < cout_; ++o) {
        const T* go = g.at(i, o);
        T bsum = 0;
        for (std::size_t q = 0; q < p; ++q) bsum += go[q];
        bias_.grad[static_cast<std::size_t>(o)] += bsum;
        for (int ci = 0; ci < cin_; ++ci) {
          const std::size_t wi = static_cast<std::size_t>(o) * cin_ + ci;
          const T wv = weight_.value[wi];
          const T* src = in_.at(i, ci);
          T* gsrc = gin.at(i, ci);
          T acc = 0;
          for (std::size_t q = 0; q < p; ++q) {
            acc += go[q] * src[q];
            gsrc[q] += go[q] * wv;
          }
          weight_.grad[wi] += acc;
        }
      }
    }
    return gin;
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

  void init(Rng& rng) override {
    const double scale = std::sqrt(2.0 / cin_);
    for (T& v : weight_.value) v = static_cast<T>(rng.normal() * scale);
    std::fill(bias_.value.begin(), bias_.value.end(), T{0});
  }

 private:
  int cin_, cout_;
  Param<T> weight_, bias_;
  Act<T> in_;
};

// Learned per-channel y = gamma * x + beta.
template <typename T>
class ScaleShift : public Layer<T> {
 public:
  ScaleShift(std::string name, int channels)
      : c_(channels), gamma_(name + ".gamma", static_cast<std::size_t>(channels)),
        beta_(name + ".beta", static_cast<std::size_t>(channels)) {}

  Act<T> forward(const Act<T>& in) override {
    if (in.c != c_) throw ShapeMismatch("scale/shift channel mismatch");
    in_ = in;
    Act<T> out = in;
    for (int i = 0; i < in.n; ++i) {
      for (int ch = 0; ch < c_; ++ch) {
        T* d = out.at(i, ch);
        for (std::size_t q = 0; q < in.plane(); ++q) d[q] = gamma_.value[static_cast<std::size_t>(ch)] * d[q] + beta_.value[static_cast<std::size_t>(ch)];
      }
    }
    return out;
  }

  Act<T> backward(const Act<T>& g) override {
    Act<T> gin = g;
    for (int i = 0; i < g.n; ++i) {
      for (int ch = 0; ch < c_; ++ch) {
        const T* go = g.at(i, ch);
        const T* x = in_.at(i, ch);
        T* gi = gin.at(i, ch);
        T gg = 0, gb = 0;
        for (std::size_t q = 0; q < g.plane(); ++q) {
          gg += go[q] * x[q];
          gb += go[q];
          gi[q] = go[q] * gamma_.value[static_cast<std::size_t>(ch)];
        }
        gamma_.grad[static_cast<std::size_t>(ch)] += gg;
        beta_.grad[static_cast<std::size_t>(ch)] += gb;
      }
    }
    return gin;
  }

  std::vector<Param<T>*> params() override { return {&gamma_, &beta_}; }

  void init(Rng&) override {
    std::fill(gamma_.value.begin(), gamma_.value.end(), T{1});
    std::fill(beta_.value.begin(), beta_.value.end(), T{0});
  }

 private:
  int c_;
  Param<T> gamma_, beta_;
  Act<T> in_;
};

template <typename T>
class Relu : public Layer<T> {
 public:
  Act<T> forward(const Act<T>& in) override {
    Act<T> out = in;
    for (T& v : out.data) v = v > T{0} ? v : T{0};
    out_ = out;
    return out;
  }

  Act<T> backward(const Act<T>& g) override {
    Act<T> gin = g;
    for (std::size_t i = 0; i < gin.data.size(); ++i) {
      if (!(out_.data[i] > T{0})) gin.data[i] = 0;
    }
    return gin;
  }

 private:
  Act<T> out_;
};

template <typename T>
class GlobalAvgPool : public Layer<T> {
 public:
  Act<T> forward(const Act<T>& in) override {
    in_h_ = in.h;
    in_w_ = in.w;
    Act<T> out(in.n, in.c, 1, 1);
    for (int i = 0; i < in.n; ++i) {
      for (int ch = 0; ch < in.c; ++ch) {
        const T* s = in.at(i, ch);
        T acc = 0;
        for (std::size_t q = 0; q < in.plane(); ++q) acc += s[q];
        *out.at(i, ch) = acc / static_cast<T>(in.plane());
      }
    }
    return out;
  }

  Act<T> backward(const Act<T>& g) override {
    Act<T> gin(g.n, g.c, in_h_, in_w_);
    for (int i = 0; i < g.n; ++i) {
      for (int ch = 0; ch < g.c; ++ch) {
        const T v = *g.at(i, ch) / static_cast<T>(gin.plane());
        std::fill(gin.at(i, ch), gin.at(i, ch) + gin.plane(), v);
      }
    }
    return gin;
  }

 private:
  int in_h_ = 0, in_w_ = 0;
};

// Fully connected over the flattened C*H*W features.
template <typename T>
class Linear : public Layer<T> {
 public:
  Linear(std::string name, int in, int out)
      : in_f_(in), out_f_(out), weight_(name + ".weight", static_cast<std::size_t>(in) * out),
        bias_(name + ".bias", static_cast<std::size_t>(out)) {}

  Act<T> forward(const Act<T>& in) override {
    if (static_cast<std::size_t>(in.c) * in.plane() != static_cast<std::size_t>(in_f_)) {
      throw ShapeMismatch("linear layer expects " + std::to_string(in_f_) + " features");
    }
    in_ = in;
    Act<T> out(in.n, out_f_, 1, 1);
    for (int i = 0; i < in.n; ++i) {
      const T* x = in.at(i, 0);
      for (int o = 0; o < out_f_; ++o) {
        T acc = bias_.value[static_cast<std::size_t>(o)];
        for (int k = 0; k < in_f_; ++k) acc += weight_.value[static_cast<std::size_t>(o) * in_f_ + k] * x[k];
        *out.at(i, o) = acc;
      }
    }
    return out;
  }

  Act<T> backward(const Act<T>& g) override {
    Act<T> gin(in_.n, in_.c, in_.h, in_.w);
    for (int i = 0; i < g.n; ++i) {
      const T* x = in_.at(i, 0);
      T* gx = gin.at(i, 0);
      for (int o = 0; o < out_f_; ++o) {
        const T go = *g.at(i, o);
        bias_.grad[static_cast<std::size_t>(o)] += go;
        for (int k = 0; k < in_f_; ++k) {
          const std::size_t wi = static_cast<std::size_t>(o) * in_f_ + k;
          weight_.grad[wi] += go * x[k];
          gx[k] += go * weight_.value[wi];
        }
      }
    }
    return gin;
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

  void init(Rng& rng) override {
    const double scale = std::sqrt(1.0 / in_f_);
    for (T& v : weight_.value) v = static_cast<T>(rng.normal() * scale);
    std::fill(bias_.value.begin(), bias_.value.end(), T{0});
  }

 private:
  int in_f_, out_f_;
  Param<T> weight_, bias_;
  Act<T> in_;
};

template <typename T>
class Sequential : public Layer<T> {
 public:
  template <typename L, typename... Args>
  void add(Args&&... args) {
    layers_.push_back(std::make_unique<L>(std::forward<Args>(args)...));
  }

  Act<T> forward(const Act<T>& in) override {
    Act<T> x = in;
    for (auto& layer : layers_) x = layer->forward(x);
    return x;
  }

  Act<T> backward(const Act<T>& g) override {
    Act<T> x = g;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) x = (*it)->backward(x);
    return x;
  }

  std::vector<Param<T>*> params() override {
    std::vector<Param<T>*> all;
    for (auto& layer : layers_) {
      for (Param<T>* p : layer->params()) all.push_back(p);
    }
    return all;
  }

  void init(Rng& rng) override {
    for (auto& layer : layers_) layer->init(rng);
  }

  std::size_t size() const { return layers_.size(); }
  Layer<T>& operator[](std::size_t i) { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

template <typename T>
T sigmoid(T x) {
  return x >= T{0} ? T{1} / (T{1} + std::exp(-x)) : std::exp(x) / (T{1} + std::exp(x));
}

inline constexpr double kBceEpsilon = 1e-7;

// Negated binary cross entropy on a probability clamped to [eps, 1 - eps].
template <typename T>
T bce_loss(T y, T label) {
  const T eps = static_cast<T>(kBceEpsilon);
  const T p = std::clamp(y, eps, T{1} - eps);
  return -(label * std::log(p) + (T{1} - label) * std::log(T{1} - p));
}

// d(bce)/dy; zero where the clamp is active.
template <typename T>
T bce_grad(T y, T label) {
  const T eps = static_cast<T>(kBceEpsilon);
  if (y < eps || y > T{1} - eps) return T{0};
  return -label / y + (T{1} - label) / (T{1} - y);
}

// d(bce(sigmoid(z)))/dz.
template <typename T>
T bce_logit_grad(T z, T label) {
  const T y = sigmoid(z);
  const T eps = static_cast<T>(kBceEpsilon);
  if (y < eps || y > T{1} - eps) return T{0};
  return y - label;
}

}  // namespace mvf::net
