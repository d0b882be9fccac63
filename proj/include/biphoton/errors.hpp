#pragma once

#include <stdexcept>
#include <string>

namespace biphoton {

/// Requested a density/information quantity that has no finite value in the
/// epsilon = 0 (delta-correlated) limit. Callers should switch to the
/// closed-form delta-limit APIs in detection.hpp instead.
class delta_limit_error : public std::domain_error {
public:
    explicit delta_limit_error(const std::string& what)
        : std::domain_error(what) {}
};

/// Adaptive quadrature exhausted its subdivision budget before reaching the
/// requested tolerance.
class non_convergence_error : public std::runtime_error {
public:
    explicit non_convergence_error(const std::string& what)
        : std::runtime_error(what) {}
};

class empty_input_error : public std::invalid_argument {
public:
    explicit empty_input_error(const std::string& what)
        : std::invalid_argument(what) {}
};

/// Estimator weights do not satisfy w1 + w2 = 1.
class weight_error : public std::invalid_argument {
public:
    explicit weight_error(const std::string& what)
        : std::invalid_argument(what) {}
};

} // namespace biphoton
