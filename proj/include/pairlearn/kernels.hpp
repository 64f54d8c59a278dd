#pragma once

// Data-parallel double-precision primitives used by the MLP forward/backward
// passes and the simulators. A scalar reference implementation always exists;
// an AVX2+FMA variant is selected at runtime when the CPU supports it. The
// two backends are equivalence-tested (they may differ by rounding only,
// since SIMD reductions reassociate sums).

#include <cstddef>
#include <string_view>

namespace pairlearn::kern {

struct Ops {
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[i] = a[i] * b[i]
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // out[i] += a[i] * b[i]
    void (*mul_acc)(const double* a, const double* b, double* out, std::size_t n);
    // x[i] *= alpha
    void (*scal)(double alpha, double* x, std::size_t n);
};

// Backend currently in use. Selected once: AVX2 if the CPU supports it,
// unless the PAIRLEARN_KERNELS environment variable ("scalar" | "avx2")
// or force_backend() overrides the choice.
const Ops& ops();

const Ops& scalar_ops();

// AVX2 backend, or nullptr when unsupported on this machine.
const Ops* avx2_ops();

std::string_view active_backend();

// "auto", "scalar" or "avx2". Throws std::invalid_argument for anything else
// or when "avx2" is requested on hardware without it. Intended for tests and
// the CLI --kernels flag; not thread-safe against concurrent kernel use.
void force_backend(std::string_view name);

} // namespace pairlearn::kern
