#include "fakespot/tensor.hpp"

#include <cmath>

namespace fakespot {

std::string to_string(const Shape4& shape)
{
    return "(" + std::to_string(shape.n) + "," + std::to_string(shape.c) + "," + std::to_string(shape.h) +
           "," + std::to_string(shape.w) + ")";
}

template <typename T>
bool all_finite(const BasicTensor4<T>& t)
{
    for (T v : t.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

template bool all_finite<float>(const BasicTensor4<float>&);
template bool all_finite<double>(const BasicTensor4<double>&);

}  // namespace fakespot
