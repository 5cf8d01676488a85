#pragma once

#include <array>

#include "gapfill/diff/tensor.hpp"

namespace gapfill::diff {

// Elementwise; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

// abs uses subgradient 0 at exact zeros.
Tensor abs_of(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh_of(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
// max(0, log(1 + e^x) - log 2): smooth nonnegative squash with f(0) = 0,
// used by the spectrogram head so zero weights give exactly zero output.
Tensor nonneg_softplus(const Tensor& a);

Tensor sum(const Tensor& a);   // -> [1]
Tensor mean(const Tensor& a);  // -> [1]

// Cross-correlation with centered zero padding of (k-1)*dilation total per
// axis; output length floor((len - 1)/stride) + 1 (same length at stride 1).
// conv1d: x [C_in, L], w [C_out, C_in, K], b [C_out] -> [C_out, L_out]
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b,
              std::int64_t stride, std::int64_t dilation);
// conv2d: x [C_in, H, W], w [C_out, C_in, KH, KW], b [C_out]
//         strides/dilations are (axis0, axis1) = (H, W)
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b,
              std::array<std::int64_t, 2> stride,
              std::array<std::int64_t, 2> dilation);

// out[c, t] = in[c, t / factor]
Tensor upsample_nearest_1d(const Tensor& x, std::int64_t factor);
Tensor upsample_nearest_2d(const Tensor& x,
                           std::array<std::int64_t, 2> factor);

// x [C, ...spatial] -> [C], mean over all spatial positions per channel.
Tensor global_avg_pool(const Tensor& x);

// x [C], w [K, C], b [K] -> [K]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

// logits [K] -> scalar: log(sum(exp(logits))) - logits[target], computed
// with the usual max-shift for stability.
Tensor cross_entropy_logits(const Tensor& logits, std::int64_t target);

}  // namespace gapfill::diff
