#pragma once

// Dense float32 tensors with tape-based reverse-mode differentiation.
//
// Each op builds a graph node holding the forward value and a closure that
// propagates gradients to its parents. backward() topologically sorts the
// graph below a scalar loss and runs the closures in reverse. Leaf gradients
// accumulate across backward() calls; interior gradients are reset per call.
//
// Matrix products are evaluated through Eigen; everything else is plain
// loops. All computation is single-threaded and bitwise deterministic for
// fixed inputs.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <new>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "fsd/error.hpp"

namespace fsd {

// 64-byte-aligned storage so Eigen always sees the same alignment and picks
// the same vectorized kernels; heap placement must not change results.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(alignment)));
    }
    void deallocate(T* p, std::size_t n) {
        ::operator delete(p, n * sizeof(T), std::align_val_t(alignment));
    }
    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using FloatVec = std::vector<float, AlignedAllocator<float>>;

inline bool operator==(const FloatVec& a, const std::vector<float>& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}
inline bool operator==(const std::vector<float>& a, const FloatVec& b) { return b == a; }

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

struct TensorNode {
    Shape shape;
    FloatVec value;
    FloatVec grad; // allocated on first use
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward_fn;

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0f);
    }
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        return filled(std::move(shape), 0.0f, requires_grad);
    }
    static Tensor filled(Shape shape, float v, bool requires_grad = false) {
        auto n = std::make_shared<TensorNode>();
        n->shape = std::move(shape);
        n->value.assign(numel(n->shape), v);
        n->requires_grad = requires_grad;
        return Tensor(std::move(n));
    }
    static Tensor from_data(Shape shape, FloatVec data, bool requires_grad = false) {
        if (numel(shape) != data.size())
            throw ShapeError("from_data: shape " + shape_str(shape) + " does not match " +
                             std::to_string(data.size()) + " values");
        auto n = std::make_shared<TensorNode>();
        n->shape = std::move(shape);
        n->value = std::move(data);
        n->requires_grad = requires_grad;
        return Tensor(std::move(n));
    }
    static Tensor from_data(Shape shape, const std::vector<float>& data,
                            bool requires_grad = false) {
        return from_data(std::move(shape), FloatVec(data.begin(), data.end()), requires_grad);
    }
    static Tensor from_data(Shape shape, std::initializer_list<float> data,
                            bool requires_grad = false) {
        return from_data(std::move(shape), FloatVec(data.begin(), data.end()), requires_grad);
    }
    static Tensor scalar(float v) { return filled({1}, v); }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t ndim() const { return node_->shape.size(); }
    std::size_t size() const { return node_->value.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape[i]; }

    FloatVec& data() { return node_->value; }
    const FloatVec& data() const { return node_->value; }
    float item() const {
        if (size() != 1) throw ShapeError("item: tensor " + shape_str(shape()) + " is not scalar");
        return node_->value[0];
    }

    const FloatVec& grad() const {
        node_->ensure_grad();
        return node_->grad;
    }
    void zero_grad() {
        node_->grad.assign(node_->value.size(), 0.0f);
    }
    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v) { node_->requires_grad = v; }

    std::shared_ptr<TensorNode> node() const { return node_; }

private:
    std::shared_ptr<TensorNode> node_;
};

inline Tensor uniform_tensor(Shape shape, float lo, float hi, std::mt19937_64& rng,
                             bool requires_grad = false) {
    std::uniform_real_distribution<float> dist(lo, hi);
    FloatVec data(numel(shape));
    for (float& v : data) v = dist(rng);
    return Tensor::from_data(std::move(shape), std::move(data), requires_grad);
}

namespace detail {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

// c[m,n] (+)= a[m,k] * b[k,n], with optional transposes on the logical a/b.
inline void gemm(float* c, const float* a, const float* b, std::size_t m, std::size_t k,
                 std::size_t n, bool accumulate, bool trans_a = false, bool trans_b = false) {
    MapMat C(c, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    CMapMat A(a, static_cast<Eigen::Index>(trans_a ? k : m),
              static_cast<Eigen::Index>(trans_a ? m : k));
    CMapMat B(b, static_cast<Eigen::Index>(trans_b ? n : k),
              static_cast<Eigen::Index>(trans_b ? k : n));
    if (!trans_a && !trans_b) {
        if (accumulate) C.noalias() += A * B; else C.noalias() = A * B;
    } else if (trans_a && !trans_b) {
        if (accumulate) C.noalias() += A.transpose() * B; else C.noalias() = A.transpose() * B;
    } else if (!trans_a && trans_b) {
        if (accumulate) C.noalias() += A * B.transpose(); else C.noalias() = A * B.transpose();
    } else {
        if (accumulate) C.noalias() += A.transpose() * B.transpose();
        else C.noalias() = A.transpose() * B.transpose();
    }
}

inline std::shared_ptr<TensorNode> make_node(Shape shape,
                                             std::vector<std::shared_ptr<TensorNode>> parents) {
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->value.resize(numel(n->shape));
    n->parents = std::move(parents);
    for (const auto& p : n->parents)
        if (p->requires_grad) { n->requires_grad = true; break; }
    return n;
}

// Right-aligned broadcast of two shapes; each aligned dim must match or be 1.
inline Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
    const std::size_t nd = std::max(a.size(), b.size());
    Shape out(nd);
    for (std::size_t i = 0; i < nd; ++i) {
        const std::size_t da = i < nd - a.size() ? 1 : a[i - (nd - a.size())];
        const std::size_t db = i < nd - b.size() ? 1 : b[i - (nd - b.size())];
        if (da != db && da != 1 && db != 1)
            throw ShapeError(std::string(op) + ": cannot broadcast " + shape_str(a) + " with " +
                             shape_str(b));
        out[i] = std::max(da, db);
    }
    return out;
}

// Element strides of `shape` viewed inside `out` (0 on broadcast axes).
inline std::vector<std::size_t> broadcast_strides(const Shape& shape, const Shape& out) {
    std::vector<std::size_t> strides(out.size(), 0);
    std::size_t s = 1;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        const std::size_t ax = shape.size() - 1 - i;
        const std::size_t out_ax = out.size() - 1 - i;
        strides[out_ax] = (shape[ax] == 1 && out[out_ax] != 1) ? 0 : s;
        s *= shape[ax];
    }
    return strides;
}

// Applies fn(out_index, a_index, b_index) over every element of `out`.
template <typename Fn>
void for_each_broadcast(const Shape& out, const Shape& a, const Shape& b, Fn&& fn) {
    const std::size_t total = numel(out);
    const auto sa = broadcast_strides(a, out);
    const auto sb = broadcast_strides(b, out);
    std::vector<std::size_t> idx(out.size(), 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t io = 0; io < total; ++io) {
        fn(io, ia, ib);
        for (std::size_t ax = out.size(); ax-- > 0;) {
            ++idx[ax];
            ia += sa[ax];
            ib += sb[ax];
            if (idx[ax] < out[ax]) break;
            ia -= sa[ax] * out[ax];
            ib -= sb[ax] * out[ax];
            idx[ax] = 0;
        }
    }
}

inline bool is_suffix(const Shape& small, const Shape& big) {
    if (small.size() > big.size()) return false;
    for (std::size_t i = 0; i < small.size(); ++i)
        if (small[small.size() - 1 - i] != big[big.size() - 1 - i]) return false;
    return true;
}

} // namespace detail

// ---------------------------------------------------------------------------
// elementwise binary ops with broadcasting over leading axes

namespace detail {

enum class BinKind { add, mul };

inline Tensor binary_op(const Tensor& a, const Tensor& b, BinKind kind) {
    const char* name = kind == BinKind::add ? "add" : "mul";
    const Shape out_shape = broadcast_shape(a.shape(), b.shape(), name);
    auto node = make_node(out_shape, {a.node(), b.node()});

    const auto& av = a.data();
    const auto& bv = b.data();
    auto& ov = node->value;

    const bool same = a.shape() == b.shape();
    const bool b_suf = !same && is_suffix(b.shape(), a.shape()) && out_shape == a.shape();
    const bool a_suf = !same && !b_suf && is_suffix(a.shape(), b.shape()) && out_shape == b.shape();

    auto apply = [kind](float x, float y) { return kind == BinKind::add ? x + y : x * y; };

    if (same) {
        for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = apply(av[i], bv[i]);
    } else if (b_suf) {
        const std::size_t inner = bv.size();
        for (std::size_t o = 0; o < ov.size() / inner; ++o)
            for (std::size_t i = 0; i < inner; ++i)
                ov[o * inner + i] = apply(av[o * inner + i], bv[i]);
    } else if (a_suf) {
        const std::size_t inner = av.size();
        for (std::size_t o = 0; o < ov.size() / inner; ++o)
            for (std::size_t i = 0; i < inner; ++i)
                ov[o * inner + i] = apply(av[i], bv[o * inner + i]);
    } else {
        for_each_broadcast(out_shape, a.shape(), b.shape(),
                           [&](std::size_t io, std::size_t ia, std::size_t ib) {
                               ov[io] = apply(av[ia], bv[ib]);
                           });
    }

    if (node->requires_grad) {
        Shape a_shape = a.shape(), b_shape = b.shape();
        node->backward_fn = [kind, a_shape, b_shape, same, b_suf, a_suf](TensorNode& n) {
            auto& pa = *n.parents[0];
            auto& pb = *n.parents[1];
            const auto& g = n.grad;
            auto acc_same = [&](TensorNode& p, const TensorNode& other, bool left) {
                p.ensure_grad();
                if (kind == BinKind::add) {
                    for (std::size_t i = 0; i < g.size(); ++i) p.grad[i] += g[i];
                } else {
                    const auto& ov = other.value;
                    (void)left;
                    for (std::size_t i = 0; i < g.size(); ++i) p.grad[i] += g[i] * ov[i];
                }
            };
            if (same) {
                if (pa.requires_grad) acc_same(pa, pb, true);
                if (pb.requires_grad) acc_same(pb, pa, false);
                return;
            }
            if (b_suf || a_suf) {
                TensorNode& big = b_suf ? pa : pb;
                TensorNode& small = b_suf ? pb : pa;
                const std::size_t inner = small.value.size();
                const std::size_t outer = g.size() / inner;
                if (big.requires_grad) {
                    big.ensure_grad();
                    if (kind == BinKind::add) {
                        for (std::size_t i = 0; i < g.size(); ++i) big.grad[i] += g[i];
                    } else {
                        for (std::size_t o = 0; o < outer; ++o)
                            for (std::size_t i = 0; i < inner; ++i)
                                big.grad[o * inner + i] += g[o * inner + i] * small.value[i];
                    }
                }
                if (small.requires_grad) {
                    small.ensure_grad();
                    if (kind == BinKind::add) {
                        for (std::size_t o = 0; o < outer; ++o)
                            for (std::size_t i = 0; i < inner; ++i)
                                small.grad[i] += g[o * inner + i];
                    } else {
                        for (std::size_t o = 0; o < outer; ++o)
                            for (std::size_t i = 0; i < inner; ++i)
                                small.grad[i] += g[o * inner + i] * big.value[o * inner + i];
                    }
                }
                return;
            }
            if (pa.requires_grad) pa.ensure_grad();
            if (pb.requires_grad) pb.ensure_grad();
            for_each_broadcast(n.shape, a_shape, b_shape,
                               [&](std::size_t io, std::size_t ia, std::size_t ib) {
                                   if (kind == BinKind::add) {
                                       if (pa.requires_grad) pa.grad[ia] += g[io];
                                       if (pb.requires_grad) pb.grad[ib] += g[io];
                                   } else {
                                       if (pa.requires_grad) pa.grad[ia] += g[io] * pb.value[ib];
                                       if (pb.requires_grad) pb.grad[ib] += g[io] * pa.value[ia];
                                   }
                               });
        };
    }
    return Tensor(node);
}

} // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
    return detail::binary_op(a, b, detail::BinKind::add);
}
inline Tensor mul(const Tensor& a, const Tensor& b) {
    return detail::binary_op(a, b, detail::BinKind::mul);
}

// y = alpha * x + beta, scalar constants
inline Tensor affine(const Tensor& a, float alpha, float beta) {
    auto node = detail::make_node(a.shape(), {a.node()});
    const auto& av = a.data();
    for (std::size_t i = 0; i < av.size(); ++i) node->value[i] = alpha * av[i] + beta;
    if (node->requires_grad) {
        node->backward_fn = [alpha](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += alpha * n.grad[i];
        };
    }
    return Tensor(node);
}

inline Tensor scale(const Tensor& a, float alpha) { return affine(a, alpha, 0.0f); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0f)); }

// ---------------------------------------------------------------------------
// matmul: a [..., m, k] x b [k, n] or [..., k, n] (leading dims must match)

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() < 2 || b.ndim() < 2)
        throw ShapeError("matmul: operands must have >= 2 dims, got " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    const std::size_t m = a.dim(a.ndim() - 2);
    const std::size_t k = a.dim(a.ndim() - 1);
    const std::size_t kb = b.dim(b.ndim() - 2);
    const std::size_t n = b.dim(b.ndim() - 1);
    if (k != kb)
        throw ShapeError("matmul: inner dims disagree: " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));

    const bool rhs_2d = b.ndim() == 2;
    Shape lead(a.shape().begin(), a.shape().end() - 2);
    if (!rhs_2d) {
        Shape lead_b(b.shape().begin(), b.shape().end() - 2);
        if (lead != lead_b)
            throw ShapeError("matmul: batch dims disagree: " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    }
    Shape out_shape = lead;
    out_shape.push_back(m);
    out_shape.push_back(n);

    auto node = detail::make_node(out_shape, {a.node(), b.node()});
    const std::size_t batch = numel(lead);
    const float* ap = a.data().data();
    const float* bp = b.data().data();
    float* op = node->value.data();

    if (rhs_2d) {
        detail::gemm(op, ap, bp, batch * m, k, n, false);
    } else {
        for (std::size_t s = 0; s < batch; ++s)
            detail::gemm(op + s * m * n, ap + s * m * k, bp + s * k * n, m, k, n, false);
    }

    if (node->requires_grad) {
        node->backward_fn = [m, k, n, batch, rhs_2d](TensorNode& nd) {
            auto& pa = *nd.parents[0];
            auto& pb = *nd.parents[1];
            const float* g = nd.grad.data();
            if (pa.requires_grad) {
                pa.ensure_grad();
                if (rhs_2d) {
                    detail::gemm(pa.grad.data(), g, pb.value.data(), batch * m, n, k, true,
                                 false, true);
                } else {
                    for (std::size_t s = 0; s < batch; ++s)
                        detail::gemm(pa.grad.data() + s * m * k, g + s * m * n,
                                     pb.value.data() + s * k * n, m, n, k, true, false, true);
                }
            }
            if (pb.requires_grad) {
                pb.ensure_grad();
                if (rhs_2d) {
                    detail::gemm(pb.grad.data(), pa.value.data(), g, k, batch * m, n, true,
                                 true, false);
                } else {
                    for (std::size_t s = 0; s < batch; ++s)
                        detail::gemm(pb.grad.data() + s * k * n, pa.value.data() + s * m * k,
                                     g + s * m * n, k, m, n, true, true, false);
                }
            }
        };
    }
    return Tensor(node);
}

// ---------------------------------------------------------------------------
// shape ops

inline Tensor reshape(const Tensor& a, Shape new_shape) {
    if (numel(new_shape) != a.size())
        throw ShapeError("reshape: " + shape_str(a.shape()) + " -> " + shape_str(new_shape) +
                         " changes element count");
    auto node = detail::make_node(std::move(new_shape), {a.node()});
    node->value = a.data();
    if (node->requires_grad) {
        node->backward_fn = [](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i];
        };
    }
    return Tensor(node);
}

namespace detail {

// index mapping for swapping two axes
struct AxisSwap {
    std::size_t outer, d0, mid, d1, inner;
};

inline AxisSwap swap_dims(const Shape& s, std::size_t ax0, std::size_t ax1) {
    AxisSwap w{1, s[ax0], 1, s[ax1], 1};
    for (std::size_t i = 0; i < ax0; ++i) w.outer *= s[i];
    for (std::size_t i = ax0 + 1; i < ax1; ++i) w.mid *= s[i];
    for (std::size_t i = ax1 + 1; i < s.size(); ++i) w.inner *= s[i];
    return w;
}

template <typename Fn>
void for_each_swapped(const AxisSwap& w, Fn&& fn) {
    // fn(src_index, dst_index) where dst has the two axes exchanged
    std::size_t src = 0;
    for (std::size_t o = 0; o < w.outer; ++o)
        for (std::size_t i0 = 0; i0 < w.d0; ++i0)
            for (std::size_t m = 0; m < w.mid; ++m)
                for (std::size_t i1 = 0; i1 < w.d1; ++i1)
                    for (std::size_t in = 0; in < w.inner; ++in) {
                        const std::size_t dst =
                            (((o * w.d1 + i1) * w.mid + m) * w.d0 + i0) * w.inner + in;
                        fn(src++, dst);
                    }
}

} // namespace detail

// Swaps two axes (defaults to the last two).
inline Tensor transpose(const Tensor& a, std::ptrdiff_t axis0 = -2, std::ptrdiff_t axis1 = -1) {
    const std::size_t nd = a.ndim();
    auto norm = [&](std::ptrdiff_t ax) {
        std::ptrdiff_t r = ax < 0 ? ax + static_cast<std::ptrdiff_t>(nd) : ax;
        if (r < 0 || r >= static_cast<std::ptrdiff_t>(nd))
            throw ShapeError("transpose: axis out of range for " + shape_str(a.shape()));
        return static_cast<std::size_t>(r);
    };
    std::size_t ax0 = norm(axis0), ax1 = norm(axis1);
    if (ax0 == ax1) return reshape(a, a.shape());
    if (ax0 > ax1) std::swap(ax0, ax1);

    Shape out_shape = a.shape();
    std::swap(out_shape[ax0], out_shape[ax1]);
    auto node = detail::make_node(std::move(out_shape), {a.node()});
    const auto w = detail::swap_dims(a.shape(), ax0, ax1);
    const auto& av = a.data();
    auto& ov = node->value;
    detail::for_each_swapped(w, [&](std::size_t src, std::size_t dst) { ov[dst] = av[src]; });

    if (node->requires_grad) {
        node->backward_fn = [w](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            detail::for_each_swapped(
                w, [&](std::size_t src, std::size_t dst) { p.grad[src] += n.grad[dst]; });
        };
    }
    return Tensor(node);
}

inline Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t len) {
    if (axis >= a.ndim())
        throw ShapeError("slice: axis out of range for " + shape_str(a.shape()));
    if (start + len > a.dim(axis))
        throw ShapeError("slice: range [" + std::to_string(start) + "," +
                         std::to_string(start + len) + ") exceeds dim " +
                         std::to_string(a.dim(axis)));
    Shape out_shape = a.shape();
    out_shape[axis] = len;
    auto node = detail::make_node(std::move(out_shape), {a.node()});

    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= a.dim(i);
    for (std::size_t i = axis + 1; i < a.ndim(); ++i) inner *= a.dim(i);
    const std::size_t d = a.dim(axis);

    const auto& av = a.data();
    auto& ov = node->value;
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t j = 0; j < len; ++j)
            std::copy_n(av.data() + (o * d + start + j) * inner, inner,
                        ov.data() + (o * len + j) * inner);

    if (node->requires_grad) {
        node->backward_fn = [outer, inner, d, start, len](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t j = 0; j < len; ++j) {
                    const float* g = n.grad.data() + (o * len + j) * inner;
                    float* dst = p.grad.data() + (o * d + start + j) * inner;
                    for (std::size_t i = 0; i < inner; ++i) dst[i] += g[i];
                }
        };
    }
    return Tensor(node);
}

inline Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat: no tensors");
    const Shape& base = parts[0].shape();
    if (axis >= base.size()) throw ShapeError("concat: axis out of range");
    std::size_t total = 0;
    for (const auto& t : parts) {
        if (t.ndim() != base.size())
            throw ShapeError("concat: rank mismatch");
        for (std::size_t i = 0; i < base.size(); ++i)
            if (i != axis && t.dim(i) != base[i])
                throw ShapeError("concat: shapes disagree off-axis: " + shape_str(base) +
                                 " vs " + shape_str(t.shape()));
        total += t.dim(axis);
    }
    Shape out_shape = base;
    out_shape[axis] = total;

    std::vector<std::shared_ptr<TensorNode>> parents;
    for (const auto& t : parts) parents.push_back(t.node());
    auto node = detail::make_node(std::move(out_shape), std::move(parents));

    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= base[i];
    for (std::size_t i = axis + 1; i < base.size(); ++i) inner *= base[i];

    std::vector<std::size_t> lens;
    for (const auto& t : parts) lens.push_back(t.dim(axis));

    auto& ov = node->value;
    std::size_t off = 0;
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const auto& pv = parts[pi].data();
        for (std::size_t o = 0; o < outer; ++o)
            std::copy_n(pv.data() + o * lens[pi] * inner, lens[pi] * inner,
                        ov.data() + (o * total + off) * inner);
        off += lens[pi];
    }

    if (node->requires_grad) {
        node->backward_fn = [outer, inner, total, lens](TensorNode& n) {
            std::size_t off2 = 0;
            for (std::size_t pi = 0; pi < n.parents.size(); ++pi) {
                auto& p = *n.parents[pi];
                if (p.requires_grad) {
                    p.ensure_grad();
                    for (std::size_t o = 0; o < outer; ++o) {
                        const float* g = n.grad.data() + (o * total + off2) * inner;
                        float* dst = p.grad.data() + o * lens[pi] * inner;
                        for (std::size_t i = 0; i < lens[pi] * inner; ++i) dst[i] += g[i];
                    }
                }
                off2 += lens[pi];
            }
        };
    }
    return Tensor(node);
}

// ---------------------------------------------------------------------------
// elementwise nonlinearities

namespace detail {

using ArrMap = Eigen::Map<Eigen::ArrayXf>;
using CArrMap = Eigen::Map<const Eigen::ArrayXf>;

inline ArrMap arr(FloatVec& v) {
    return ArrMap(v.data(), static_cast<Eigen::Index>(v.size()));
}
inline CArrMap arr(const FloatVec& v) {
    return CArrMap(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace detail

inline Tensor sigmoid(const Tensor& a) {
    auto node = detail::make_node(a.shape(), {a.node()});
    detail::arr(node->value) = 1.0f / (1.0f + (-detail::arr(a.data())).exp());
    if (node->requires_grad) {
        node->backward_fn = [](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            auto y = detail::arr(n.value);
            detail::arr(p.grad) += detail::arr(n.grad) * y * (1.0f - y);
        };
    }
    return Tensor(node);
}

inline Tensor silu(const Tensor& a) {
    auto node = detail::make_node(a.shape(), {a.node()});
    {
        auto x = detail::arr(a.data());
        detail::arr(node->value) = x / (1.0f + (-x).exp());
    }
    if (node->requires_grad) {
        node->backward_fn = [](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            auto x = detail::arr(p.value);
            auto s = 1.0f / (1.0f + (-x).exp());
            detail::arr(p.grad) += detail::arr(n.grad) * s * (1.0f + x * (1.0f - s));
        };
    }
    return Tensor(node);
}

inline constexpr float kLogFloor = 1e-12f;

// log with the input clamped at a small positive floor
inline Tensor log(const Tensor& a) {
    auto node = detail::make_node(a.shape(), {a.node()});
    const auto& av = a.data();
    for (std::size_t i = 0; i < av.size(); ++i)
        node->value[i] = std::log(std::max(av[i], kLogFloor));
    if (node->requires_grad) {
        node->backward_fn = [](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                if (p.value[i] > kLogFloor) p.grad[i] += n.grad[i] / p.value[i];
        };
    }
    return Tensor(node);
}

// ---------------------------------------------------------------------------
// reductions and normalizations

namespace detail {

struct AxisSplit {
    std::size_t outer, len, inner;
};

inline AxisSplit axis_split(const Shape& s, std::size_t axis) {
    AxisSplit sp{1, s[axis], 1};
    for (std::size_t i = 0; i < axis; ++i) sp.outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) sp.inner *= s[i];
    return sp;
}

inline std::size_t norm_axis(const Tensor& a, std::ptrdiff_t axis, const char* op) {
    std::ptrdiff_t r = axis < 0 ? axis + static_cast<std::ptrdiff_t>(a.ndim()) : axis;
    if (r < 0 || r >= static_cast<std::ptrdiff_t>(a.ndim()))
        throw ShapeError(std::string(op) + ": axis out of range for " + shape_str(a.shape()));
    return static_cast<std::size_t>(r);
}

} // namespace detail

inline Tensor sum(const Tensor& a) {
    auto node = detail::make_node({1}, {a.node()});
    double acc = 0.0;
    for (float v : a.data()) acc += v;
    node->value[0] = static_cast<float>(acc);
    if (node->requires_grad) {
        node->backward_fn = [](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            const float g = n.grad[0];
            for (float& d : p.grad) d += g;
        };
    }
    return Tensor(node);
}

inline Tensor mean(const Tensor& a) {
    const float inv = 1.0f / static_cast<float>(a.size());
    return scale(sum(a), inv);
}

inline Tensor sum(const Tensor& a, std::ptrdiff_t axis) {
    const std::size_t ax = detail::norm_axis(a, axis, "sum");
    const auto sp = detail::axis_split(a.shape(), ax);
    Shape out_shape;
    for (std::size_t i = 0; i < a.ndim(); ++i)
        if (i != ax) out_shape.push_back(a.dim(i));
    if (out_shape.empty()) out_shape.push_back(1);

    auto node = detail::make_node(std::move(out_shape), {a.node()});
    const auto& av = a.data();
    auto& ov = node->value;
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t i = 0; i < sp.inner; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < sp.len; ++j)
                acc += av[(o * sp.len + j) * sp.inner + i];
            ov[o * sp.inner + i] = static_cast<float>(acc);
        }
    if (node->requires_grad) {
        node->backward_fn = [sp](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (std::size_t o = 0; o < sp.outer; ++o)
                for (std::size_t j = 0; j < sp.len; ++j)
                    for (std::size_t i = 0; i < sp.inner; ++i)
                        p.grad[(o * sp.len + j) * sp.inner + i] += n.grad[o * sp.inner + i];
        };
    }
    return Tensor(node);
}

inline Tensor mean(const Tensor& a, std::ptrdiff_t axis) {
    const std::size_t ax = detail::norm_axis(a, axis, "mean");
    return scale(sum(a, axis), 1.0f / static_cast<float>(a.dim(ax)));
}

inline Tensor softmax(const Tensor& a, std::ptrdiff_t axis = -1) {
    const std::size_t ax = detail::norm_axis(a, axis, "softmax");
    const auto sp = detail::axis_split(a.shape(), ax);
    auto node = detail::make_node(a.shape(), {a.node()});
    const auto& av = a.data();
    auto& ov = node->value;
    const float neg_inf = -std::numeric_limits<float>::infinity();

    if (sp.inner == 1) {
        const auto len = static_cast<Eigen::Index>(sp.len);
        for (std::size_t o = 0; o < sp.outer; ++o) {
            detail::CArrMap row(av.data() + o * sp.len, len);
            detail::ArrMap out(ov.data() + o * sp.len, len);
            const float mx = row.maxCoeff();
            if (!(mx > neg_inf)) {
                out.setZero();
                continue;
            }
            // vectorized exp clamps instead of underflowing; force masked
            // entries to exactly zero
            out = (row == neg_inf).select(0.0f, (row - mx).exp());
            out /= out.sum();
        }
    } else {
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t i = 0; i < sp.inner; ++i) {
                float mx = neg_inf;
                for (std::size_t j = 0; j < sp.len; ++j)
                    mx = std::max(mx, av[(o * sp.len + j) * sp.inner + i]);
                if (!(mx > neg_inf)) {
                    for (std::size_t j = 0; j < sp.len; ++j)
                        ov[(o * sp.len + j) * sp.inner + i] = 0.0f;
                    continue;
                }
                double denom = 0.0;
                for (std::size_t j = 0; j < sp.len; ++j) {
                    const float e = std::exp(av[(o * sp.len + j) * sp.inner + i] - mx);
                    ov[(o * sp.len + j) * sp.inner + i] = e;
                    denom += e;
                }
                const float inv = static_cast<float>(1.0 / denom);
                for (std::size_t j = 0; j < sp.len; ++j)
                    ov[(o * sp.len + j) * sp.inner + i] *= inv;
            }
    }

    if (node->requires_grad) {
        node->backward_fn = [sp](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            if (sp.inner == 1) {
                const auto len = static_cast<Eigen::Index>(sp.len);
                for (std::size_t o = 0; o < sp.outer; ++o) {
                    detail::CArrMap y(n.value.data() + o * sp.len, len);
                    detail::CArrMap g(n.grad.data() + o * sp.len, len);
                    detail::ArrMap dst(p.grad.data() + o * sp.len, len);
                    const float dot =
                        static_cast<float>((g.cast<double>() * y.cast<double>()).sum());
                    dst += y * (g - dot);
                }
                return;
            }
            for (std::size_t o = 0; o < sp.outer; ++o)
                for (std::size_t i = 0; i < sp.inner; ++i) {
                    double dot = 0.0;
                    for (std::size_t j = 0; j < sp.len; ++j) {
                        const std::size_t idx = (o * sp.len + j) * sp.inner + i;
                        dot += static_cast<double>(n.grad[idx]) * n.value[idx];
                    }
                    const float d = static_cast<float>(dot);
                    for (std::size_t j = 0; j < sp.len; ++j) {
                        const std::size_t idx = (o * sp.len + j) * sp.inner + i;
                        p.grad[idx] += n.value[idx] * (n.grad[idx] - d);
                    }
                }
        };
    }
    return Tensor(node);
}

// Normalizes over the last axis: y = x / sqrt(mean(x^2) + eps).
inline Tensor rmsnorm(const Tensor& a, float eps = 1e-5f) {
    if (a.ndim() < 1) throw ShapeError("rmsnorm: needs at least 1 dim");
    const std::size_t len = a.dim(a.ndim() - 1);
    const std::size_t rows = a.size() / len;
    auto node = detail::make_node(a.shape(), {a.node()});
    const auto& av = a.data();
    auto& ov = node->value;

    std::vector<float> inv_rms(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double ss = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            const float x = av[r * len + j];
            ss += static_cast<double>(x) * x;
        }
        const float inv = 1.0f / std::sqrt(static_cast<float>(ss / static_cast<double>(len)) + eps);
        inv_rms[r] = inv;
        for (std::size_t j = 0; j < len; ++j) ov[r * len + j] = av[r * len + j] * inv;
    }

    if (node->requires_grad) {
        node->backward_fn = [len, rows, inv_rms = std::move(inv_rms)](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const float inv = inv_rms[r];
                double dot = 0.0;
                for (std::size_t j = 0; j < len; ++j)
                    dot += static_cast<double>(n.grad[r * len + j]) * p.value[r * len + j];
                const float c = static_cast<float>(dot) * inv * inv * inv /
                                static_cast<float>(len);
                for (std::size_t j = 0; j < len; ++j)
                    p.grad[r * len + j] += inv * n.grad[r * len + j] - c * p.value[r * len + j];
            }
        };
    }
    return Tensor(node);
}

// ---------------------------------------------------------------------------
// rotary position phases: rotates pairs (i, i+D/2) of the last axis of a
// [..., seq, n_heads, head_dim] or [..., seq, head_dim] tensor by
// pos * base^(-2i/D), where pos indexes `seq_axis`.

inline Tensor rope(const Tensor& a, std::ptrdiff_t seq_axis, double base = 10000.0) {
    const std::size_t ax = detail::norm_axis(a, seq_axis, "rope");
    const std::size_t hd = a.dim(a.ndim() - 1);
    if (hd % 2 != 0) throw ShapeError("rope: head dim must be even, got " + std::to_string(hd));
    const std::size_t half = hd / 2;
    const std::size_t seq = a.dim(ax);

    std::size_t mid = 1; // dims between seq axis and the last axis
    for (std::size_t i = ax + 1; i + 1 < a.ndim(); ++i) mid *= a.dim(i);
    std::size_t outer = 1;
    for (std::size_t i = 0; i < ax; ++i) outer *= a.dim(i);

    std::vector<float> cos_t(seq * half), sin_t(seq * half);
    for (std::size_t s = 0; s < seq; ++s)
        for (std::size_t i = 0; i < half; ++i) {
            const double angle = static_cast<double>(s) *
                                 std::pow(base, -2.0 * static_cast<double>(i) /
                                                    static_cast<double>(hd));
            cos_t[s * half + i] = static_cast<float>(std::cos(angle));
            sin_t[s * half + i] = static_cast<float>(std::sin(angle));
        }

    auto node = detail::make_node(a.shape(), {a.node()});
    const auto& av = a.data();
    auto& ov = node->value;
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t s = 0; s < seq; ++s)
            for (std::size_t m = 0; m < mid; ++m) {
                const std::size_t off = ((o * seq + s) * mid + m) * hd;
                for (std::size_t i = 0; i < half; ++i) {
                    const float c = cos_t[s * half + i];
                    const float sn = sin_t[s * half + i];
                    const float x0 = av[off + i];
                    const float x1 = av[off + half + i];
                    ov[off + i] = x0 * c - x1 * sn;
                    ov[off + half + i] = x0 * sn + x1 * c;
                }
            }

    if (node->requires_grad) {
        node->backward_fn = [outer, seq, mid, hd, half, cos_t = std::move(cos_t),
                             sin_t = std::move(sin_t)](TensorNode& n) {
            auto& p = *n.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            // inverse rotation on the incoming gradient
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t s = 0; s < seq; ++s)
                    for (std::size_t m = 0; m < mid; ++m) {
                        const std::size_t off = ((o * seq + s) * mid + m) * hd;
                        for (std::size_t i = 0; i < half; ++i) {
                            const float c = cos_t[s * half + i];
                            const float sn = sin_t[s * half + i];
                            const float g0 = n.grad[off + i];
                            const float g1 = n.grad[off + half + i];
                            p.grad[off + i] += g0 * c + g1 * sn;
                            p.grad[off + half + i] += -g0 * sn + g1 * c;
                        }
                    }
        };
    }
    return Tensor(node);
}

// ---------------------------------------------------------------------------
// backward pass

inline void backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1)
        throw NonScalarLoss("backward: loss must be a defined scalar tensor");

    TensorNode* root = loss.node().get();
    std::vector<TensorNode*> topo;
    std::unordered_set<TensorNode*> seen;
    struct Frame {
        TensorNode* n;
        std::size_t child;
    };
    std::vector<Frame> stack{{root, 0}};
    seen.insert(root);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.child < f.n->parents.size()) {
            TensorNode* p = f.n->parents[f.child++].get();
            if (seen.insert(p).second) stack.push_back({p, 0});
        } else {
            topo.push_back(f.n);
            stack.pop_back();
        }
    }

    // interior gradients are per-call scratch; leaves accumulate
    for (TensorNode* n : topo)
        if (n->backward_fn) n->grad.assign(n->value.size(), 0.0f);

    root->ensure_grad();
    root->grad[0] += 1.0f;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        TensorNode* n = *it;
        if (n->backward_fn && n->requires_grad) {
            n->ensure_grad();
            n->backward_fn(*n);
        }
    }
}

// ---------------------------------------------------------------------------
// gradient checking against central finite differences

struct GradCheckReport {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    double grad_scale = 0.0; // largest |gradient| component seen
    bool pass = false;
};

// Compares the tape gradient of f at x with central differences. The
// relative deviation is measured against the largest gradient component,
// so a uniformly tiny mismatch on a large gradient still passes while a
// wrong backward rule fails by orders of magnitude.
template <typename F>
GradCheckReport grad_check(F&& f, Tensor x, float h = 1e-3f, double tol = 1e-3) {
    x.set_requires_grad(true);
    x.zero_grad();
    Tensor loss = f(x);
    if (loss.size() != 1) throw NonScalarLoss("grad_check: f must return a scalar");
    backward(loss);
    const FloatVec analytic = x.grad();

    std::vector<float> numeric(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const float orig = x.data()[i];
        x.data()[i] = orig + h;
        const float up = f(x).item();
        x.data()[i] = orig - h;
        const float down = f(x).item();
        x.data()[i] = orig;
        numeric[i] = (up - down) / (2.0f * h);
    }

    GradCheckReport rep;
    for (std::size_t i = 0; i < x.size(); ++i) {
        rep.max_abs_err = std::max(rep.max_abs_err,
                                   static_cast<double>(std::abs(analytic[i] - numeric[i])));
        rep.grad_scale = std::max({rep.grad_scale, static_cast<double>(std::abs(analytic[i])),
                                   static_cast<double>(std::abs(numeric[i]))});
    }
    rep.max_rel_err = rep.max_abs_err / std::max(rep.grad_scale, 1e-12);
    rep.pass = rep.max_rel_err <= tol;
    return rep;
}

} // namespace fsd
