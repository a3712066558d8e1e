#include "riskplan/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace riskplan {

void Kernel::validate() const {
    if (!(signal_variance > 0.0)) {
        throw std::invalid_argument("Kernel: signal_variance must be positive");
    }
    for (double l : lengthscales) {
        if (!(l > 0.0)) {
            throw std::invalid_argument("Kernel: lengthscales must be positive");
        }
    }
}

double Kernel::operator()(Vec2 a, Vec2 b) const {
    const double dx = (a.x - b.x) / lengthscales[0];
    const double dy = (a.y - b.y) / lengthscales[1];
    return signal_variance * std::exp(-0.5 * (dx * dx + dy * dy));
}

double Kernel::derivative(Vec2 a, Vec2 b, int dim) const {
    const double k = (*this)(a, b);
    const double delta = dim == 0 ? a.x - b.x : a.y - b.y;
    const double l = lengthscales[static_cast<std::size_t>(dim)];
    return -k * delta / (l * l);
}

double Kernel::second_derivative_at_equal(int dim) const {
    const double l = lengthscales[static_cast<std::size_t>(dim)];
    return signal_variance / (l * l);
}

}  // namespace riskplan
