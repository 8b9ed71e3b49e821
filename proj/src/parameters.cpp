#include "art/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "art/errors.hpp"
#include "art/rng.hpp"

namespace art {

Tensor ParameterSet::add(const std::string& name, Tensor tensor) {
    if (find(name)) throw ContractError("duplicate parameter name: " + name);
    tensor.set_requires_grad(true);
    params_.push_back({name, tensor});
    return tensor;
}

const Parameter* ParameterSet::find(const std::string& name) const {
    auto it = std::find_if(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
    return it == params_.end() ? nullptr : &*it;
}

std::size_t ParameterSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.numel();
    return n;
}

void ParameterSet::zero_grad() {
    for (auto& p : params_) {
        Tensor t = p.tensor;
        t.zero_grad();
    }
}

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> values(fan_in * fan_out);
    for (double& v : values) v = rng.uniform(-limit, limit);
    return Tensor(Shape{fan_in, fan_out}, std::move(values));
}

Tensor finite_difference_gradient(const std::function<double()>& f, Tensor& param, double epsilon) {
    if (!(epsilon > 0.0)) throw ContractError("finite_difference_gradient: epsilon must be > 0");
    NoGradGuard no_grad;
    auto values = param.mutable_data();
    std::vector<double> estimate(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double original = values[i];
        values[i] = original + epsilon;
        const double up = f();
        values[i] = original - epsilon;
        const double down = f();
        values[i] = original;
        estimate[i] = (up - down) / (2.0 * epsilon);
    }
    return Tensor(param.shape(), std::move(estimate));
}

double relative_gradient_error(const Tensor& analytic, const Tensor& numeric) {
    if (analytic.shape() != numeric.shape()) {
        throw ShapeError("relative_gradient_error: " + shape_str(analytic.shape()) + " vs " +
                         shape_str(numeric.shape()));
    }
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < analytic.numel(); ++i) {
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        scale = std::max(scale, std::abs(numeric[i]));
    }
    return diff / std::max(scale, 1e-8);
}

}  // namespace art
