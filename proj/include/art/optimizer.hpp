#pragma once

#include <cstddef>
#include <vector>

#include "art/parameters.hpp"

namespace art {

/// Adam with bias-corrected moment estimates.
class Adam {
public:
    Adam(const ParameterSet& params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double epsilon = 1e-8);

    /// Applies one update from the parameters' accumulated grads.
    void step();
    std::size_t steps_taken() const { return t_; }
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
};

}  // namespace art
