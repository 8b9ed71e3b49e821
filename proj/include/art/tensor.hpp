#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace art {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// One vertex of the reverse-mode tape. `backward` reads this node's grad and
// accumulates into the parents' grads.
struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    std::vector<double>& grad_buffer();
};

}  // namespace detail

/// Dense row-major float64 tensor with an optional reverse-mode tape.
///
/// Copies share storage (handle semantics); use clone() for a deep copy.
class Tensor {
public:
    Tensor();
    explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

    static Tensor scalar(double value, bool requires_grad = false);

    const Shape& shape() const { return node_->shape; }
    std::size_t dim() const { return node_->shape.size(); }
    std::size_t size(std::size_t axis) const;
    std::size_t numel() const { return node_->data.size(); }

    std::span<const double> data() const { return node_->data; }
    // Writes bypass the tape; only for leaves (parameters, inputs).
    std::span<double> mutable_data() { return node_->data; }
    double operator[](std::size_t flat) const { return node_->data[flat]; }
    double item() const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }

    bool has_grad() const { return !node_->grad.empty(); }
    std::span<const double> grad() const { return node_->grad; }
    Tensor grad_tensor() const;
    void zero_grad();

    Tensor clone() const;
    Tensor detach() const;

    /// Populates grad of every requires_grad leaf reachable from this scalar.
    void backward() const;

    bool same_storage(const Tensor& other) const { return node_ == other.node_; }

    static Tensor from_node(std::shared_ptr<detail::Node> node);
    const std::shared_ptr<detail::Node>& node() const { return node_; }

private:
    std::shared_ptr<detail::Node> node_;
};

/// Thread-local switch: while disabled, ops do not record the tape.
bool grad_enabled();

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

/// Thread-local multiply-accumulate tally, incremented by matmul and the
/// per-head dot/weighting kernels. Elementwise ops are not counted.
std::uint64_t mac_tally();
void reset_mac_tally();
void add_mac_tally(std::uint64_t macs);

}  // namespace art
