#include "art/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "art/errors.hpp"

namespace art {

namespace {

using detail::Node;
using Backward = std::function<void(Node&)>;

Tensor make_result(Shape shape, std::vector<double> data, std::initializer_list<const Tensor*> inputs,
                   Backward backward) {
    Tensor out(std::move(shape), std::move(data));
    if (!grad_enabled()) return out;
    bool any = false;
    for (const Tensor* t : inputs) any = any || t->requires_grad();
    if (!any) return out;
    auto& node = *out.node();
    node.requires_grad = true;
    for (const Tensor* t : inputs) node.parents.push_back(t->node());
    node.backward = std::move(backward);
    return out;
}

Tensor make_result_list(Shape shape, std::vector<double> data, std::span<const Tensor> inputs, Backward backward) {
    Tensor out(std::move(shape), std::move(data));
    if (!grad_enabled()) return out;
    bool any = false;
    for (const Tensor& t : inputs) any = any || t.requires_grad();
    if (!any) return out;
    auto& node = *out.node();
    node.requires_grad = true;
    for (const Tensor& t : inputs) node.parents.push_back(t.node());
    node.backward = std::move(backward);
    return out;
}

// Parent i's grad buffer, or nullptr when it takes no gradient.
std::vector<double>* parent_grad(Node& self, std::size_t i) {
    Node& p = *self.parents[i];
    return p.requires_grad ? &p.grad_buffer() : nullptr;
}

struct AxisSplit {
    std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, const char* op) {
    if (axis >= shape.size()) {
        throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " invalid for shape " +
                         shape_str(shape));
    }
    AxisSplit s;
    for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
    s.len = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
    return s;
}

Shape drop_axis(const Shape& shape, std::size_t axis) {
    Shape out = shape;
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
    return out;
}

// Returns the broadcast period of b against a (numel of b), or throws.
std::size_t suffix_period(const Tensor& a, const Tensor& b, const char* op) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    bool ok = sb.size() <= sa.size() && std::equal(sb.rbegin(), sb.rend(), sa.rbegin());
    if (!ok) throw ShapeError(std::string(op) + ": cannot combine " + shape_str(sa) + " with " + shape_str(sb));
    return std::max<std::size_t>(b.numel(), 1);
}

void mm_kernel(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        double* crow = c + i * m;
        const double* arow = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

// c[n,m] += a[n,k] * b[m,k]^T
void mm_bt_kernel(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a + i * k;
        for (std::size_t j = 0; j < m; ++j) {
            const double* brow = b + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            c[i * m + j] += s;
        }
    }
}

// c[k,m] += a[n,k]^T * g[n,m]
void mm_at_kernel(const double* a, const double* g, double* c, std::size_t n, std::size_t k, std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a + i * k;
        const double* grow = g + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            double* crow = c + p * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * grow[j];
        }
    }
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& x, Fwd fwd, Deriv deriv) {
    std::vector<double> out(x.numel());
    auto xd = x.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xd[i]);
    return make_result(x.shape(), std::move(out), {&x}, [deriv](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        const auto& xv = self.parents[0]->data;
        for (std::size_t i = 0; i < xv.size(); ++i) (*gx)[i] += self.grad[i] * deriv(xv[i], self.data[i]);
    });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    auto mismatch = [&] {
        return ShapeError("matmul: incompatible shapes " + shape_str(sa) + " and " + shape_str(sb));
    };
    if (sa.size() < 2 || sb.size() < 2) throw mismatch();
    const std::size_t n = sa[sa.size() - 2];
    const std::size_t k = sa.back();
    if (sb[sb.size() - 2] != k) throw mismatch();
    const std::size_t m = sb.back();

    Shape out_shape = sa;
    out_shape.back() = m;

    if (sb.size() == 2) {
        // Shared right operand: fold all leading dims of a into rows.
        const std::size_t rows = a.numel() / k;
        std::vector<double> out(rows * m, 0.0);
        mm_kernel(a.data().data(), b.data().data(), out.data(), rows, k, m);
        add_mac_tally(static_cast<std::uint64_t>(rows) * k * m);
        return make_result(std::move(out_shape), std::move(out), {&a, &b}, [rows, k, m](Node& self) {
            const double* g = self.grad.data();
            if (auto* ga = parent_grad(self, 0)) mm_bt_kernel(g, self.parents[1]->data.data(), ga->data(), rows, m, k);
            if (auto* gb = parent_grad(self, 1)) mm_at_kernel(self.parents[0]->data.data(), g, gb->data(), rows, k, m);
        });
    }

    if (sa.size() != sb.size() || !std::equal(sa.begin(), sa.end() - 2, sb.begin())) throw mismatch();
    const std::size_t batch = a.numel() / (n * k);
    std::vector<double> out(batch * n * m, 0.0);
    for (std::size_t bi = 0; bi < batch; ++bi) {
        mm_kernel(a.data().data() + bi * n * k, b.data().data() + bi * k * m, out.data() + bi * n * m, n, k, m);
    }
    add_mac_tally(static_cast<std::uint64_t>(batch) * n * k * m);
    return make_result(std::move(out_shape), std::move(out), {&a, &b}, [batch, n, k, m](Node& self) {
        const double* ad = self.parents[0]->data.data();
        const double* bd = self.parents[1]->data.data();
        auto* ga = parent_grad(self, 0);
        auto* gb = parent_grad(self, 1);
        for (std::size_t bi = 0; bi < batch; ++bi) {
            const double* g = self.grad.data() + bi * n * m;
            if (ga) mm_bt_kernel(g, bd + bi * k * m, ga->data() + bi * n * k, n, m, k);
            if (gb) mm_at_kernel(ad + bi * n * k, g, gb->data() + bi * k * m, n, k, m);
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    const std::size_t period = suffix_period(a, b, "add");
    std::vector<double> out(a.data().begin(), a.data().end());
    auto bd = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bd[i % period];
    return make_result(a.shape(), std::move(out), {&a, &b}, [period](Node& self) {
        if (auto* ga = parent_grad(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
        }
        if (auto* gb = parent_grad(self, 1)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) (*gb)[i % period] += self.grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    const std::size_t period = suffix_period(a, b, "sub");
    std::vector<double> out(a.data().begin(), a.data().end());
    auto bd = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bd[i % period];
    return make_result(a.shape(), std::move(out), {&a, &b}, [period](Node& self) {
        if (auto* ga = parent_grad(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
        }
        if (auto* gb = parent_grad(self, 1)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) (*gb)[i % period] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    const std::size_t period = suffix_period(a, b, "mul");
    std::vector<double> out(a.data().begin(), a.data().end());
    auto bd = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bd[i % period];
    return make_result(a.shape(), std::move(out), {&a, &b}, [period](Node& self) {
        const auto& av = self.parents[0]->data;
        const auto& bv = self.parents[1]->data;
        if (auto* ga = parent_grad(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i] * bv[i % period];
        }
        if (auto* gb = parent_grad(self, 1)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) (*gb)[i % period] += self.grad[i] * av[i];
        }
    });
}

Tensor scale(const Tensor& x, double factor) {
    return unary(x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor sigmoid(const Tensor& x) {
    return unary(
        x,
        [](double v) {
            // Branches keep exp() from overflowing for large |v|.
            if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
            const double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor gelu(const Tensor& x) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return unary(
        x, [&](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
        [=](double v, double) {
            return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
        });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    const AxisSplit s = split_axis(x.shape(), axis, "softmax");
    auto xd = x.data();
    std::vector<double> out(x.numel());
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.len * s.inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < s.len; ++l) {
                const double v = xd[base + l * s.inner];
                if (!std::isfinite(v)) throw NumericError("softmax: non-finite input");
                mx = std::max(mx, v);
            }
            double total = 0.0;
            for (std::size_t l = 0; l < s.len; ++l) {
                const double e = std::exp(xd[base + l * s.inner] - mx);
                out[base + l * s.inner] = e;
                total += e;
            }
            const double inv = 1.0 / total;
            for (std::size_t l = 0; l < s.len; ++l) out[base + l * s.inner] *= inv;
        }
    }
    return make_result(x.shape(), std::move(out), {&x}, [s](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        const auto& y = self.data;
        const auto& g = self.grad;
        for (std::size_t o = 0; o < s.outer; ++o) {
            for (std::size_t in = 0; in < s.inner; ++in) {
                const std::size_t base = o * s.len * s.inner + in;
                double dot = 0.0;
                for (std::size_t l = 0; l < s.len; ++l) dot += y[base + l * s.inner] * g[base + l * s.inner];
                for (std::size_t l = 0; l < s.len; ++l) {
                    const std::size_t idx = base + l * s.inner;
                    (*gx)[idx] += y[idx] * (g[idx] - dot);
                }
            }
        }
    });
}

Tensor segment_softmax(const Tensor& x, std::span<const std::size_t> offsets) {
    if (x.dim() != 2) throw ShapeError("segment_softmax: expected [E, H], got " + shape_str(x.shape()));
    const std::size_t rows = x.size(0);
    const std::size_t cols = x.size(1);
    if (offsets.empty() || offsets.front() != 0 || offsets.back() != rows ||
        !std::is_sorted(offsets.begin(), offsets.end())) {
        throw ShapeError("segment_softmax: offsets do not partition " + std::to_string(rows) + " rows");
    }
    std::vector<std::size_t> segs(offsets.begin(), offsets.end());
    auto xd = x.data();
    std::vector<double> out(x.numel());
    for (std::size_t s = 0; s + 1 < segs.size(); ++s) {
        for (std::size_t c = 0; c < cols; ++c) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t r = segs[s]; r < segs[s + 1]; ++r) {
                const double v = xd[r * cols + c];
                if (!std::isfinite(v)) throw NumericError("segment_softmax: non-finite input");
                mx = std::max(mx, v);
            }
            double total = 0.0;
            for (std::size_t r = segs[s]; r < segs[s + 1]; ++r) {
                const double e = std::exp(xd[r * cols + c] - mx);
                out[r * cols + c] = e;
                total += e;
            }
            const double inv = 1.0 / total;
            for (std::size_t r = segs[s]; r < segs[s + 1]; ++r) out[r * cols + c] *= inv;
        }
    }
    return make_result(x.shape(), std::move(out), {&x}, [segs, cols](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        const auto& y = self.data;
        const auto& g = self.grad;
        for (std::size_t s = 0; s + 1 < segs.size(); ++s) {
            for (std::size_t c = 0; c < cols; ++c) {
                double dot = 0.0;
                for (std::size_t r = segs[s]; r < segs[s + 1]; ++r) dot += y[r * cols + c] * g[r * cols + c];
                for (std::size_t r = segs[s]; r < segs[s + 1]; ++r) {
                    const std::size_t idx = r * cols + c;
                    (*gx)[idx] += y[idx] * (g[idx] - dot);
                }
            }
        }
    });
}

Tensor sum(const Tensor& x) {
    double total = 0.0;
    for (double v : x.data()) total += v;
    return make_result(Shape{}, {total}, {&x}, [](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        for (double& g : *gx) g += self.grad[0];
    });
}

Tensor mean(const Tensor& x) {
    if (x.numel() == 0) throw ShapeError("mean: empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor sum_axis(const Tensor& x, std::size_t axis) {
    const AxisSplit s = split_axis(x.shape(), axis, "sum_axis");
    auto xd = x.data();
    std::vector<double> out(s.outer * s.inner, 0.0);
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t l = 0; l < s.len; ++l) {
            const double* src = xd.data() + (o * s.len + l) * s.inner;
            double* dst = out.data() + o * s.inner;
            for (std::size_t in = 0; in < s.inner; ++in) dst[in] += src[in];
        }
    }
    return make_result(drop_axis(x.shape(), axis), std::move(out), {&x}, [s](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        for (std::size_t o = 0; o < s.outer; ++o) {
            for (std::size_t l = 0; l < s.len; ++l) {
                double* dst = gx->data() + (o * s.len + l) * s.inner;
                const double* src = self.grad.data() + o * s.inner;
                for (std::size_t in = 0; in < s.inner; ++in) dst[in] += src[in];
            }
        }
    });
}

Tensor mean_axis(const Tensor& x, std::size_t axis) {
    const std::size_t len = split_axis(x.shape(), axis, "mean_axis").len;
    if (len == 0) throw ShapeError("mean_axis: empty axis");
    return scale(sum_axis(x, axis), 1.0 / static_cast<double>(len));
}

Tensor min_axis(const Tensor& x, std::size_t axis) {
    const AxisSplit s = split_axis(x.shape(), axis, "min_axis");
    if (s.len == 0) throw ShapeError("min_axis: empty axis");
    auto xd = x.data();
    std::vector<double> out(s.outer * s.inner);
    std::vector<std::size_t> arg(s.outer * s.inner);
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
            std::size_t best = 0;
            double best_v = xd[o * s.len * s.inner + in];
            for (std::size_t l = 1; l < s.len; ++l) {
                const double v = xd[(o * s.len + l) * s.inner + in];
                if (v < best_v) {
                    best_v = v;
                    best = l;
                }
            }
            out[o * s.inner + in] = best_v;
            arg[o * s.inner + in] = best;
        }
    }
    return make_result(drop_axis(x.shape(), axis), std::move(out), {&x}, [s, arg](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        for (std::size_t o = 0; o < s.outer; ++o) {
            for (std::size_t in = 0; in < s.inner; ++in) {
                const std::size_t r = o * s.inner + in;
                (*gx)[(o * s.len + arg[r]) * s.inner + in] += self.grad[r];
            }
        }
    });
}

Tensor cumsum(const Tensor& x, std::size_t axis) {
    const AxisSplit s = split_axis(x.shape(), axis, "cumsum");
    std::vector<double> out(x.data().begin(), x.data().end());
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t l = 1; l < s.len; ++l) {
            double* cur = out.data() + (o * s.len + l) * s.inner;
            const double* prev = cur - s.inner;
            for (std::size_t in = 0; in < s.inner; ++in) cur[in] += prev[in];
        }
    }
    return make_result(x.shape(), std::move(out), {&x}, [s](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        // Reverse cumulative sum of the incoming gradient.
        std::vector<double> acc(s.inner);
        for (std::size_t o = 0; o < s.outer; ++o) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t l = s.len; l-- > 0;) {
                const std::size_t base = (o * s.len + l) * s.inner;
                for (std::size_t in = 0; in < s.inner; ++in) {
                    acc[in] += self.grad[base + in];
                    (*gx)[base + in] += acc[in];
                }
            }
        }
    });
}

Tensor norm_last(const Tensor& x) {
    if (x.dim() == 0) throw ShapeError("norm_last: scalar input");
    const std::size_t width = x.shape().back();
    const std::size_t rows = width ? x.numel() / width : 0;
    auto xd = x.data();
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double ss = 0.0;
        for (std::size_t c = 0; c < width; ++c) ss += xd[r * width + c] * xd[r * width + c];
        out[r] = std::sqrt(ss);
    }
    return make_result(drop_axis(x.shape(), x.dim() - 1), std::move(out), {&x}, [rows, width](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        const auto& xv = self.parents[0]->data;
        for (std::size_t r = 0; r < rows; ++r) {
            const double n = self.data[r];
            if (n == 0.0) continue;
            const double f = self.grad[r] / n;
            for (std::size_t c = 0; c < width; ++c) (*gx)[r * width + c] += f * xv[r * width + c];
        }
    });
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
    }
    std::vector<double> out(x.data().begin(), x.data().end());
    return make_result(std::move(shape), std::move(out), {&x}, [](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*gx)[i] += self.grad[i];
    });
}

Tensor permute(const Tensor& x, std::span<const std::size_t> perm) {
    const Shape& in_shape = x.shape();
    const std::size_t nd = in_shape.size();
    std::vector<bool> seen(nd, false);
    bool valid = perm.size() == nd;
    for (std::size_t i = 0; valid && i < nd; ++i) {
        valid = perm[i] < nd && !seen[perm[i]];
        if (valid) seen[perm[i]] = true;
    }
    if (!valid) throw ShapeError("permute: invalid permutation for shape " + shape_str(in_shape));

    std::vector<std::size_t> in_strides(nd, 1);
    for (std::size_t i = nd; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
    Shape out_shape(nd);
    std::vector<std::size_t> src_strides(nd);
    for (std::size_t i = 0; i < nd; ++i) {
        out_shape[i] = in_shape[perm[i]];
        src_strides[i] = in_strides[perm[i]];
    }

    // map[out_flat] = in_flat
    const std::size_t n = x.numel();
    std::vector<std::size_t> map(n);
    std::vector<std::size_t> idx(nd, 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t src = 0;
        for (std::size_t d = 0; d < nd; ++d) src += idx[d] * src_strides[d];
        map[flat] = src;
        for (std::size_t d = nd; d-- > 0;) {
            if (++idx[d] < out_shape[d]) break;
            idx[d] = 0;
        }
    }
    auto xd = x.data();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = xd[map[i]];
    return make_result(std::move(out_shape), std::move(out), {&x}, [map = std::move(map)](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        for (std::size_t i = 0; i < map.size(); ++i) (*gx)[map[i]] += self.grad[i];
    });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const Shape& first = parts[0].shape();
    const AxisSplit s0 = split_axis(first, axis, "concat");
    std::vector<std::size_t> lens;
    std::size_t total_len = 0;
    for (const Tensor& t : parts) {
        const Shape& sh = t.shape();
        bool ok = sh.size() == first.size();
        for (std::size_t d = 0; ok && d < sh.size(); ++d) ok = d == axis || sh[d] == first[d];
        if (!ok) throw ShapeError("concat: shape " + shape_str(sh) + " does not match " + shape_str(first));
        lens.push_back(sh[axis]);
        total_len += sh[axis];
    }
    Shape out_shape = first;
    out_shape[axis] = total_len;
    const std::size_t outer = s0.outer;
    const std::size_t inner = s0.inner;
    std::vector<double> out(outer * total_len * inner);
    std::size_t offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        auto src = parts[p].data();
        const std::size_t block = lens[p] * inner;
        for (std::size_t o = 0; o < outer; ++o) {
            std::copy_n(src.data() + o * block, block, out.data() + o * total_len * inner + offset * inner);
        }
        offset += lens[p];
    }
    return make_result_list(std::move(out_shape), std::move(out), parts,
                            [lens, outer, inner, total_len](Node& self) {
                                std::size_t offset = 0;
                                for (std::size_t p = 0; p < lens.size(); ++p) {
                                    const std::size_t block = lens[p] * inner;
                                    if (auto* gp = parent_grad(self, p)) {
                                        for (std::size_t o = 0; o < outer; ++o) {
                                            const double* src =
                                                self.grad.data() + o * total_len * inner + offset * inner;
                                            double* dst = gp->data() + o * block;
                                            for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
                                        }
                                    }
                                    offset += lens[p];
                                }
                            });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
    const AxisSplit s = split_axis(x.shape(), axis, "slice");
    if (start + length > s.len) {
        throw ShapeError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") exceeds axis of " + shape_str(x.shape()));
    }
    Shape out_shape = x.shape();
    out_shape[axis] = length;
    auto xd = x.data();
    std::vector<double> out(s.outer * length * s.inner);
    for (std::size_t o = 0; o < s.outer; ++o) {
        std::copy_n(xd.data() + (o * s.len + start) * s.inner, length * s.inner,
                    out.data() + o * length * s.inner);
    }
    return make_result(std::move(out_shape), std::move(out), {&x}, [s, start, length](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        for (std::size_t o = 0; o < s.outer; ++o) {
            const double* src = self.grad.data() + o * length * s.inner;
            double* dst = gx->data() + (o * s.len + start) * s.inner;
            for (std::size_t i = 0; i < length * s.inner; ++i) dst[i] += src[i];
        }
    });
}

Tensor gather_rows(const Tensor& x, std::span<const std::ptrdiff_t> rows) {
    if (x.dim() == 0) throw ShapeError("gather_rows: scalar input");
    const std::size_t n = x.size(0);
    const std::size_t width = n ? x.numel() / n : shape_numel(Shape(x.shape().begin() + 1, x.shape().end()));
    for (auto r : rows) {
        if (r < -1 || r >= static_cast<std::ptrdiff_t>(n)) {
            throw ShapeError("gather_rows: row " + std::to_string(r) + " out of range for " + shape_str(x.shape()));
        }
    }
    Shape out_shape = x.shape();
    out_shape[0] = rows.size();
    auto xd = x.data();
    std::vector<double> out(rows.size() * width, 0.0);
    for (std::size_t e = 0; e < rows.size(); ++e) {
        if (rows[e] >= 0) std::copy_n(xd.data() + static_cast<std::size_t>(rows[e]) * width, width, out.data() + e * width);
    }
    std::vector<std::ptrdiff_t> idx(rows.begin(), rows.end());
    return make_result(std::move(out_shape), std::move(out), {&x}, [idx, width](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        for (std::size_t e = 0; e < idx.size(); ++e) {
            if (idx[e] < 0) continue;
            double* dst = gx->data() + static_cast<std::size_t>(idx[e]) * width;
            const double* src = self.grad.data() + e * width;
            for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
        }
    });
}

Tensor index_add_rows(const Tensor& x, std::span<const std::size_t> rows, std::size_t n) {
    if (x.dim() == 0 || x.size(0) != rows.size()) {
        throw ShapeError("index_add_rows: " + std::to_string(rows.size()) + " indices for " + shape_str(x.shape()));
    }
    const std::size_t width = rows.empty() ? shape_numel(Shape(x.shape().begin() + 1, x.shape().end()))
                                           : x.numel() / rows.size();
    for (auto r : rows) {
        if (r >= n) throw ShapeError("index_add_rows: target row " + std::to_string(r) + " >= " + std::to_string(n));
    }
    Shape out_shape = x.shape();
    out_shape[0] = n;
    auto xd = x.data();
    std::vector<double> out(n * width, 0.0);
    for (std::size_t e = 0; e < rows.size(); ++e) {
        double* dst = out.data() + rows[e] * width;
        const double* src = xd.data() + e * width;
        for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
    }
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    return make_result(std::move(out_shape), std::move(out), {&x}, [idx, width](Node& self) {
        auto* gx = parent_grad(self, 0);
        if (!gx) return;
        for (std::size_t e = 0; e < idx.size(); ++e) {
            const double* src = self.grad.data() + idx[e] * width;
            double* dst = gx->data() + e * width;
            for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
        }
    });
}

Tensor head_dot(const Tensor& q, const Tensor& k, std::size_t heads) {
    if (q.dim() != 2 || q.shape() != k.shape() || heads == 0 || q.size(1) % heads != 0) {
        throw ShapeError("head_dot: shapes " + shape_str(q.shape()) + " and " + shape_str(k.shape()) +
                         " with " + std::to_string(heads) + " heads");
    }
    const std::size_t rows = q.size(0);
    const std::size_t d = q.size(1);
    const std::size_t dh = d / heads;
    auto qd = q.data();
    auto kd = k.data();
    std::vector<double> out(rows * heads, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t h = 0; h < heads; ++h) {
            double s = 0.0;
            for (std::size_t c = h * dh; c < (h + 1) * dh; ++c) s += qd[r * d + c] * kd[r * d + c];
            out[r * heads + h] = s;
        }
    }
    add_mac_tally(static_cast<std::uint64_t>(rows) * d);
    return make_result(Shape{rows, heads}, std::move(out), {&q, &k}, [rows, d, dh, heads](Node& self) {
        const auto& qv = self.parents[0]->data;
        const auto& kv = self.parents[1]->data;
        auto* gq = parent_grad(self, 0);
        auto* gk = parent_grad(self, 1);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t h = 0; h < heads; ++h) {
                const double g = self.grad[r * heads + h];
                for (std::size_t c = h * dh; c < (h + 1) * dh; ++c) {
                    if (gq) (*gq)[r * d + c] += g * kv[r * d + c];
                    if (gk) (*gk)[r * d + c] += g * qv[r * d + c];
                }
            }
        }
    });
}

Tensor head_weight(const Tensor& w, const Tensor& v, std::size_t heads) {
    if (w.dim() != 2 || v.dim() != 2 || w.size(0) != v.size(0) || w.size(1) != heads || heads == 0 ||
        v.size(1) % heads != 0) {
        throw ShapeError("head_weight: shapes " + shape_str(w.shape()) + " and " + shape_str(v.shape()) +
                         " with " + std::to_string(heads) + " heads");
    }
    const std::size_t rows = v.size(0);
    const std::size_t d = v.size(1);
    const std::size_t dh = d / heads;
    auto wd = w.data();
    auto vd = v.data();
    std::vector<double> out(rows * d);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < d; ++c) out[r * d + c] = wd[r * heads + c / dh] * vd[r * d + c];
    }
    add_mac_tally(static_cast<std::uint64_t>(rows) * d);
    return make_result(v.shape(), std::move(out), {&w, &v}, [rows, d, dh, heads](Node& self) {
        const auto& wv = self.parents[0]->data;
        const auto& vv = self.parents[1]->data;
        auto* gw = parent_grad(self, 0);
        auto* gv = parent_grad(self, 1);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                const double g = self.grad[r * d + c];
                if (gw) (*gw)[r * heads + c / dh] += g * vv[r * d + c];
                if (gv) (*gv)[r * d + c] += g * wv[r * heads + c / dh];
            }
        }
    });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    return add(matmul(x, weight), bias);
}

}  // namespace art
