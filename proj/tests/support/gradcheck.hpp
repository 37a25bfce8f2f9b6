#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mvf/net/model.hpp"
#include "mvf/pipeline/pipeline.hpp"
#include "mvf/rng.hpp"

namespace mvf::testing {

using net::Act;
using net::Layer;
using net::Model;
using net::Param;

inline Act<double> random_act(Rng& rng, int n, int c, int h, int w) {
  Act<double> a(n, c, h, w);
  for (double& v : a.data) v = rng.normal();
  return a;
}

inline double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

// loss = sum(r * f(x)); compares analytic input and parameter gradients with
// central differences. Returns the worst relative error.
inline double check_layer(Layer<double>& layer, Act<double> x, Rng& rng) {
  Act<double> y = layer.forward(x);
  Act<double> r = random_act(rng, y.n, y.c, y.h, y.w);
  for (Param<double>* p : layer.params()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  layer.forward(x);
  const Act<double> gx = layer.backward(r);
  auto loss = [&](const Act<double>& in) {
    const Act<double> out = layer.forward(in);
    return std::inner_product(out.data.begin(), out.data.end(), r.data.begin(), 0.0);
  };
  const double h = 1e-6;
  double worst = 0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double saved = x.data[i];
    x.data[i] = saved + h;
    const double up = loss(x);
    x.data[i] = saved - h;
    const double down = loss(x);
    x.data[i] = saved;
    worst = std::max(worst, rel_error(gx.data[i], (up - down) / (2 * h)));
  }
  for (Param<double>* p : layer.params()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss(x);
      p->value[i] = saved - h;
      const double down = loss(x);
      p->value[i] = saved;
      worst = std::max(worst, rel_error(p->grad[i], (up - down) / (2 * h)));
    }
  }
  return worst;
}

// Randomizes every parameter, including scale/shift, away from its init.
inline void perturb(Layer<double>& layer, Rng& rng) {
  for (Param<double>* p : layer.params()) {
    for (double& v : p->value) v += 0.3 * rng.normal();
  }
}

inline double check_model(Model<double>& model, const Act<double>& x, const std::vector<double>& labels) {
  auto loss = [&]() {
    const auto z = model.logits(x);
    double l = 0;
    for (std::size_t i = 0; i < z.size(); ++i) l += net::bce_loss(net::sigmoid(z[i]), labels[i]);
    return l;
  };
  model.zero_grad();
  const auto z = model.logits(x);
  std::vector<double> g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) g[i] = net::bce_logit_grad(z[i], labels[i]);
  model.backward(g);
  const double h = 1e-6;
  double worst = 0;
  Rng pick(1);
  for (Param<double>* p : model.params()) {
    // Every block is checked; large blocks on a random subset of entries.
    std::vector<std::size_t> entries(p->value.size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (entries.size() > 24) {
      std::vector<std::size_t> subset;
      for (int k : pipeline::sample_frames(static_cast<int>(entries.size()), 24, pick.next())) subset.push_back(static_cast<std::size_t>(k));
      entries = subset;
    }
    for (std::size_t i : entries) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss();
      p->value[i] = saved - h;
      const double down = loss();
      p->value[i] = saved;
      worst = std::max(worst, rel_error(p->grad[i], (up - down) / (2 * h)));
    }
  }
  return worst;
}

}  // namespace mvf::testing
