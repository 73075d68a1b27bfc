#include "mhdlab/transforms.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace mhdlab::fft {

namespace {

// One cached plan pair per grid size. Plans are created with
// FFTW_ESTIMATE | FFTW_UNALIGNED on scratch buffers and executed through
// the new-array interface, which is thread safe; creation/destruction is
// serialized by the cache mutex.
struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex g_mutex;
std::map<int, PlanPair>& cache() {
    static std::map<int, PlanPair> c;
    return c;
}

PlanPair plans_for(int n) {
    std::lock_guard<std::mutex> lock(g_mutex);
    auto& c = cache();
    auto it = c.find(n);
    if (it != c.end()) return it->second;

    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n) * n);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    PlanPair pair;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    pair.fwd = fftw_plan_dft_2d(n, n, p, p, FFTW_FORWARD, flags);
    pair.bwd = fftw_plan_dft_2d(n, n, p, p, FFTW_BACKWARD, flags);
    if (!pair.fwd || !pair.bwd) throw std::runtime_error("fftw plan creation failed");
    c.emplace(n, pair);
    return pair;
}

}  // namespace

std::vector<std::complex<double>> forward(const Grid2D& grid,
                                          const std::vector<std::complex<double>>& physical) {
    if (physical.size() != grid.modes())
        throw std::invalid_argument("forward: sample count does not match grid");
    const int n = grid.size();
    PlanPair pair = plans_for(n);
    std::vector<std::complex<double>> out(physical);
    auto* p = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(pair.fwd, p, p);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (auto& c : out) c *= scale;
    return out;
}

std::vector<std::complex<double>> inverse(const Grid2D& grid,
                                          const std::vector<std::complex<double>>& coeffs) {
    if (coeffs.size() != grid.modes())
        throw std::invalid_argument("inverse: coefficient count does not match grid");
    PlanPair pair = plans_for(grid.size());
    std::vector<std::complex<double>> out(coeffs);
    auto* p = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(pair.bwd, p, p);
    return out;
}

std::vector<std::complex<double>> forward_real(const Grid2D& grid,
                                               const std::vector<double>& physical) {
    std::vector<std::complex<double>> tmp(physical.size());
    for (std::size_t i = 0; i < physical.size(); ++i) tmp[i] = physical[i];
    return forward(grid, tmp);
}

std::vector<double> inverse_real(const Grid2D& grid,
                                 const std::vector<std::complex<double>>& coeffs) {
    auto tmp = inverse(grid, coeffs);
    std::vector<double> out(tmp.size());
    for (std::size_t i = 0; i < tmp.size(); ++i) out[i] = tmp[i].real();
    return out;
}

void clear_plan_cache() {
    std::lock_guard<std::mutex> lock(g_mutex);
    for (auto& [n, pair] : cache()) {
        fftw_destroy_plan(pair.fwd);
        fftw_destroy_plan(pair.bwd);
    }
    cache().clear();
}

}  // namespace mhdlab::fft
