#pragma once

#include <cstddef>
#include <span>

#include "art/tensor.hpp"

// Differentiable operations. Every op checks shapes at the boundary and
// throws ShapeError naming the offending shapes; no implicit broadcasting
// except the documented trailing-suffix rule of add/sub/mul.

namespace art {

/// [..., n, k] x [k, m] -> [..., n, m], or batched [..., n, k] x [..., k, m]
/// with identical leading dimensions.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Elementwise. `b` must have the shape of `a` or equal a trailing suffix of
/// it (e.g. a bias [d] against [n, d]).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

Tensor sigmoid(const Tensor& x);
/// Exact erf form.
Tensor gelu(const Tensor& x);

/// Max-subtracted softmax along `axis`. Throws NumericError on non-finite input.
Tensor softmax(const Tensor& x, std::size_t axis);

/// Column-wise softmax of x [E, H] within contiguous row segments
/// [offsets[s], offsets[s+1]).
Tensor segment_softmax(const Tensor& x, std::span<const std::size_t> offsets);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Reductions that drop `axis`.
Tensor sum_axis(const Tensor& x, std::size_t axis);
Tensor mean_axis(const Tensor& x, std::size_t axis);
/// Minimum along `axis`; the gradient goes to the lowest index attaining it.
Tensor min_axis(const Tensor& x, std::size_t axis);

Tensor cumsum(const Tensor& x, std::size_t axis);

/// Euclidean norm over the last axis (dropped). Gradient at a zero vector is 0.
Tensor norm_last(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, std::span<const std::size_t> perm);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);

/// Selects leading-axis rows; an index of -1 yields a zero row.
Tensor gather_rows(const Tensor& x, std::span<const std::ptrdiff_t> rows);
/// out[rows[e]] += x[e]; out has `n` rows.
Tensor index_add_rows(const Tensor& x, std::span<const std::size_t> rows, std::size_t n);

/// Per-head dot products: q, k [E, d] -> [E, heads], head h owning the
/// contiguous channel block [h*d/heads, (h+1)*d/heads).
Tensor head_dot(const Tensor& q, const Tensor& k, std::size_t heads);
/// Scales each head block of v [E, d] by w [E, heads].
Tensor head_weight(const Tensor& w, const Tensor& v, std::size_t heads);

/// x W + b over the last axis of x.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

}  // namespace art
