#pragma once

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/common.hpp"
#include "qd/env/game.hpp"
#include "qd/policy/observation.hpp"

namespace qd::policy {

class ShapeMismatch : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Three same-padding stride-1 conv layers with ReLU, adaptive average
// pooling to pool_h x pool_w, then a linear layer to the 5 action logits.
// Pooling keeps the parameter count independent of level size.
struct NetworkTopology {
  int input_channels = kEntityKinds;
  int conv_filters = 18;
  int kernel = 3;
  int pool_h = 2;
  int pool_w = 2;
  static constexpr int kConvLayers = 3;
  static constexpr int dense_out = env::kActionCount;

  size_t param_count() const {
    size_t k2 = static_cast<size_t>(kernel) * kernel;
    size_t c1 = static_cast<size_t>(input_channels) * conv_filters * k2 +
                conv_filters;
    size_t cn = static_cast<size_t>(conv_filters) * conv_filters * k2 +
                conv_filters;
    size_t dense_in = static_cast<size_t>(conv_filters) * pool_h * pool_w;
    size_t d = dense_in * dense_out + dense_out;
    return c1 + (kConvLayers - 1) * cn + d;
  }

  std::uint64_t hash() const {
    std::ostringstream os;
    os << "conv3x" << conv_filters << "k" << kernel << "in" << input_channels
       << "pool" << pool_h << "x" << pool_w << "out" << dense_out;
    return fnv1a(os.str());
  }
};

namespace detail {

// Same-padding stride-1 convolution followed by ReLU. `weights` points at
// w[out][in][kh][kw] then biases[out].
inline void conv_relu(const std::vector<double>& in, int in_ch, int h, int w,
                      std::vector<double>& out, int out_ch, int kernel,
                      const double* weights) {
  const int pad = kernel / 2;
  const double* bias = weights + static_cast<size_t>(out_ch) * in_ch * kernel *
                                     kernel;
  out.assign(static_cast<size_t>(out_ch) * h * w, 0.0);
  for (int oc = 0; oc < out_ch; ++oc) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        double acc = bias[oc];
        for (int ic = 0; ic < in_ch; ++ic) {
          const double* wbase =
              weights + ((static_cast<size_t>(oc) * in_ch + ic) * kernel) *
                            kernel;
          for (int kr = 0; kr < kernel; ++kr) {
            int rr = r + kr - pad;
            if (rr < 0 || rr >= h) continue;
            for (int kc = 0; kc < kernel; ++kc) {
              int cc = c + kc - pad;
              if (cc < 0 || cc >= w) continue;
              acc += wbase[kr * kernel + kc] *
                     in[(static_cast<size_t>(ic) * h + rr) * w + cc];
            }
          }
        }
        out[(static_cast<size_t>(oc) * h + r) * w + c] =
            acc > 0.0 ? acc : 0.0;
      }
    }
  }
}

// Average pooling onto a fixed pool_h x pool_w output grid.
inline void adaptive_avg_pool(const std::vector<double>& in, int ch, int h,
                              int w, int ph, int pw,
                              std::vector<double>& out) {
  out.assign(static_cast<size_t>(ch) * ph * pw, 0.0);
  for (int c = 0; c < ch; ++c) {
    for (int pr = 0; pr < ph; ++pr) {
      int r0 = pr * h / ph, r1 = (pr + 1) * h / ph;
      if (r1 == r0) r1 = r0 + 1;
      for (int pc = 0; pc < pw; ++pc) {
        int c0 = pc * w / pw, c1 = (pc + 1) * w / pw;
        if (c1 == c0) c1 = c0 + 1;
        double acc = 0.0;
        for (int r = r0; r < r1; ++r)
          for (int cc = c0; cc < c1; ++cc)
            acc += in[(static_cast<size_t>(c) * h + r) * w + cc];
        out[(static_cast<size_t>(c) * ph + pr) * pw + pc] =
            acc / ((r1 - r0) * (c1 - c0));
      }
    }
  }
}

}  // namespace detail

inline std::vector<double> forward(const std::vector<double>& params,
                                   const NetworkTopology& topo,
                                   const Observation& obs) {
  if (obs.channels != topo.input_channels)
    throw ShapeMismatch("observation channels do not match topology");
  if (params.size() != topo.param_count())
    throw ShapeMismatch("genome length does not match topology");

  const int h = obs.height, w = obs.width, f = topo.conv_filters,
            k = topo.kernel;
  const double* p = params.data();
  std::vector<double> a, b;

  detail::conv_relu(obs.data, topo.input_channels, h, w, a, f, k, p);
  p += static_cast<size_t>(topo.input_channels) * f * k * k + f;
  detail::conv_relu(a, f, h, w, b, f, k, p);
  p += static_cast<size_t>(f) * f * k * k + f;
  detail::conv_relu(b, f, h, w, a, f, k, p);
  p += static_cast<size_t>(f) * f * k * k + f;

  detail::adaptive_avg_pool(a, f, h, w, topo.pool_h, topo.pool_w, b);

  const size_t dense_in = static_cast<size_t>(f) * topo.pool_h * topo.pool_w;
  const double* bias = p + dense_in * NetworkTopology::dense_out;
  std::vector<double> logits(NetworkTopology::dense_out);
  for (int o = 0; o < NetworkTopology::dense_out; ++o) {
    double acc = bias[o];
    for (size_t i = 0; i < dense_in; ++i) acc += p[o * dense_in + i] * b[i];
    logits[o] = acc;
  }
  return logits;
}

// Argmax with ties to the lowest action index (Up < Down < Left < Right < Use).
inline env::Action select_action(const std::vector<double>& logits) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(logits.size()); ++i)
    if (logits[i] > logits[best]) best = i;
  return static_cast<env::Action>(best);
}

}  // namespace qd::policy
