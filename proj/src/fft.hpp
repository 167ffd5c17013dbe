#pragma once

#include <complex>
#include <vector>

#include "sugar/fields.hpp"

namespace sugar::detail {

using Spectrum = std::vector<std::complex<double>>;  // rows x (cols/2 + 1), row-major

Spectrum fft2(const ImageField& f);
// Inverse of fft2 including the 1/(rows*cols) normalization.
ImageField ifft2(const Spectrum& s, int rows, int cols);

}  // namespace sugar::detail
