#pragma once

#include <functional>
#include <span>

namespace fapprox {

/// Real-valued function on the cube (-1,1)^d.
using RealFn = std::function<double(std::span<const double>)>;

}  // namespace fapprox
