#include "pairlearn/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace pairlearn::kern {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += alpha * x[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a[i] * b[i];
}

void mul_acc_scalar(const double* a, const double* b, double* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] += a[i] * b[i];
}

void scal_scalar(double alpha, double* x, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= alpha;
}

constexpr Ops scalar_table{ dot_scalar, axpy_scalar, mul_scalar, mul_acc_scalar, scal_scalar };

const Ops* select_initial()
{
    if (const char* env = std::getenv("PAIRLEARN_KERNELS")) {
        std::string v(env);
        if (v == "scalar")
            return &scalar_table;
        if (v == "avx2") {
            if (const Ops* simd = avx2_ops())
                return simd;
            return &scalar_table; // silently degrade: env is a hint
        }
    }
    if (const Ops* simd = avx2_ops())
        return simd;
    return &scalar_table;
}

const Ops* g_active = nullptr;

} // namespace

const Ops& scalar_ops()
{
    return scalar_table;
}

const Ops& ops()
{
    if (!g_active)
        g_active = select_initial();
    return *g_active;
}

std::string_view active_backend()
{
    return &ops() == avx2_ops() ? "avx2" : "scalar";
}

void force_backend(std::string_view name)
{
    if (name == "auto") {
        g_active = nullptr;
        ops();
        return;
    }
    if (name == "scalar") {
        g_active = &scalar_table;
        return;
    }
    if (name == "avx2") {
        const Ops* simd = avx2_ops();
        if (!simd)
            throw std::invalid_argument("kernels: avx2 backend not available on this CPU");
        g_active = simd;
        return;
    }
    throw std::invalid_argument("kernels: unknown backend '" + std::string(name) + "'");
}

} // namespace pairlearn::kern
