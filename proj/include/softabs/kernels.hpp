#pragma once

#include "softabs/types.hpp"

#include <span>

// Data-parallel inner loops. Each kernel has a serial reference version,
// kept for testing and benchmarking, and an OpenMP version; the unsuffixed
// entry point picks one by problem size.
namespace softabs::kernels {

/// Below this dimension the OpenMP trace contraction costs more than it saves.
inline constexpr int kParallelMinDim = 48;
/// Below this many lags the autocovariance loop stays serial.
inline constexpr int kParallelMinLags = 64;

/// out(n) = sum_ij K(i,j) * slices[n](i,j), i.e. Tr[K * slices[n]] for symmetric operands.
void trace_contract_serial(const Matrix& K, const HessianPartials& slices, Vector& out);
void trace_contract_parallel(const Matrix& K, const HessianPartials& slices, Vector& out);
void trace_contract(const Matrix& K, const HessianPartials& slices, Vector& out);

/// Biased autocovariance c_k = (1/I) sum_t (x_t - m)(x_{t+k} - m) for k = 0..max_lag.
Vector autocovariance_serial(std::span<const double> series, int max_lag);
Vector autocovariance_parallel(std::span<const double> series, int max_lag);
Vector autocovariance(std::span<const double> series, int max_lag);

} // namespace softabs::kernels
