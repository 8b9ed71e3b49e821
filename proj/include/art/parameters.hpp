#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "art/tensor.hpp"

namespace art {

class Rng;

struct Parameter {
    std::string name;
    Tensor tensor;
};

/// Ordered, name-unique collection of trainable tensors. Registration order
/// fixes checkpoint layout and optimizer state order.
class ParameterSet {
public:
    /// Registers `tensor` (marking it requires_grad) and returns the same handle.
    Tensor add(const std::string& name, Tensor tensor);

    const Parameter& at(std::size_t i) const { return params_[i]; }
    const Parameter* find(const std::string& name) const;
    std::size_t size() const { return params_.size(); }
    std::size_t scalar_count() const;

    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    void zero_grad();

private:
    std::vector<Parameter> params_;
};

/// Glorot-uniform [fan_in, fan_out] matrix.
Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Central-difference estimate of d f / d param, one coordinate at a time.
/// `f` must re-evaluate the full computation from the parameter's current data.
/// Unreliable at kinks of f (e.g. |x| at 0); that is not reported as an error.
Tensor finite_difference_gradient(const std::function<double()>& f, Tensor& param, double epsilon);

/// max_i |a_i - b_i| / max(max_i |b_i|, 1e-8): error relative to the
/// reference gradient's scale.
double relative_gradient_error(const Tensor& analytic, const Tensor& numeric);

}  // namespace art
