#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pnpsgs::fft {

using cplx = std::complex<double>;

/// In-place forward DFT, X[k] = sum_n x[n] e^{-2*pi*i*k*n/N}. Any length >= 1
/// (radix-2 for powers of two, Bluestein otherwise).
void forward(std::vector<cplx>& v);

/// In-place inverse DFT including the 1/N factor.
void inverse(std::vector<cplx>& v);

/// Row-major 2-D transforms.
void forward_2d(std::vector<cplx>& plane, int h, int w);
void inverse_2d(std::vector<cplx>& plane, int h, int w);

/// 2-D DFT of a real plane.
std::vector<cplx> forward_2d_real(std::span<const double> plane, int h, int w);

/// Inverse 2-D DFT of a Hermitian-symmetric spectrum; imaginary residue is
/// discarded.
void inverse_2d_to_real(std::vector<cplx> freq, int h, int w, std::span<double> out);

}  // namespace pnpsgs::fft
