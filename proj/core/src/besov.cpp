#include "mhdlab/besov.hpp"

#include <cmath>
#include <stdexcept>

#include "mhdlab/ops.hpp"

namespace mhdlab {

namespace {

void check_mean_zero(const SpectralField& f, double s, bool homogeneous) {
    if (!homogeneous || s >= 0.0) return;
    double mx = 0.0;
    for (const auto& c : f.coeffs()) mx = std::max(mx, std::abs(c));
    if (std::abs(f.mean()) > 1e-13 * std::max(1.0, mx))
        throw std::invalid_argument("besov: negative-s homogeneous norm needs a mean-zero field");
}

double lq_sum(const std::vector<double>& terms, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (double v : terms) m = std::max(m, v);
        return m;
    }
    if (q < 1.0) throw std::invalid_argument("besov: q must be >= 1");
    double acc = 0.0;
    if (q == 1.0) {
        for (double v : terms) acc += v;
        return acc;
    }
    if (q == 2.0) {
        for (double v : terms) acc += v * v;
        return std::sqrt(acc);
    }
    for (double v : terms) acc += std::pow(v, q);
    return std::pow(acc, 1.0 / q);
}

void check_series(const FieldSeries& series) {
    if (series.times.size() != series.fields.size())
        throw std::invalid_argument("series: times/fields size mismatch");
    if (series.times.empty()) throw std::invalid_argument("series: empty");
    for (std::size_t i = 1; i < series.times.size(); ++i) {
        if (!(series.times[i] > series.times[i - 1]))
            throw std::invalid_argument("series: times must be strictly increasing");
        if (series.fields[i].grid() != series.fields[0].grid())
            throw std::invalid_argument("series: all fields must share one grid");
    }
}

}  // namespace

double shell_lp(const SpectralField& f, int j, double p, const DyadicPartition& partition) {
    if (p == 2.0) return partition.shell_l2(f, j);
    return lp_norm(partition.block(f, j), p);
}

double besov_norm(const SpectralField& f, const BesovIndex& idx,
                  const DyadicPartition& partition) {
    if (idx.p < 1.0) throw std::invalid_argument("besov: p must be >= 1");
    check_mean_zero(f, idx.s, idx.homogeneous);
    std::vector<double> terms;
    terms.reserve(partition.shell_count());
    for (int j = partition.j_min(); j <= partition.j_max(); ++j)
        terms.push_back(std::pow(2.0, idx.s * j) * shell_lp(f, j, idx.p, partition));
    const double dotted = lq_sum(terms, idx.q);
    if (idx.homogeneous) return dotted;
    return lp_norm(f, idx.p) + dotted;
}

double sobolev_norm(const SpectralField& f, double s) {
    check_mean_zero(f, s, /*homogeneous=*/true);
    const Grid2D& g = f.grid();
    const int n = g.size();
    const auto& c = f.coeffs();
    double acc = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            if (ix == 0 && iy == 0) continue;  // homogeneous scale: skip mean
            const double kx = g.wavenumber(ix), ky = g.wavenumber(iy);
            const double k2 = kx * kx + ky * ky;
            acc += std::pow(k2, s) * std::norm(c[static_cast<std::size_t>(iy) * n + ix]);
        }
    }
    return g.length() * std::sqrt(acc);
}

double mixed_norm(const FieldSeries& series, double r, const BesovIndex& idx,
                  const DyadicPartition& partition) {
    check_series(series);
    if (!std::isinf(r) && r < 1.0) throw std::invalid_argument("mixed_norm: r must be >= 1");
    if (!std::isinf(r) && series.times.size() < 2)
        throw std::invalid_argument("mixed_norm: finite r needs at least two samples");
    for (const auto& f : series.fields) check_mean_zero(f, idx.s, idx.homogeneous);
    if (!idx.homogeneous)
        throw std::invalid_argument("mixed_norm: only homogeneous indices are supported");

    const std::size_t nt = series.times.size();
    std::vector<double> terms;
    terms.reserve(partition.shell_count());
    for (int j = partition.j_min(); j <= partition.j_max(); ++j) {
        std::vector<double> a(nt);
        for (std::size_t i = 0; i < nt; ++i)
            a[i] = shell_lp(series.fields[i], j, idx.p, partition);
        double time_norm;
        if (std::isinf(r)) {
            time_norm = 0.0;
            for (double v : a) time_norm = std::max(time_norm, v);
        } else {
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < nt; ++i) {
                const double dt = series.times[i + 1] - series.times[i];
                acc += 0.5 * dt * (std::pow(a[i], r) + std::pow(a[i + 1], r));
            }
            time_norm = std::pow(acc, 1.0 / r);
        }
        terms.push_back(std::pow(2.0, idx.s * j) * time_norm);
    }
    return lq_sum(terms, idx.q);
}

double besov_norm(const VectorField2D& v, const BesovIndex& idx,
                  const DyadicPartition& partition) {
    if (idx.p != 2.0)
        throw std::invalid_argument("besov_norm(vector): only p = 2 is supported");
    check_mean_zero(v.x_comp, idx.s, idx.homogeneous);
    check_mean_zero(v.y_comp, idx.s, idx.homogeneous);
    std::vector<double> terms;
    terms.reserve(partition.shell_count());
    for (int j = partition.j_min(); j <= partition.j_max(); ++j)
        terms.push_back(std::pow(2.0, idx.s * j) * std::hypot(partition.shell_l2(v.x_comp, j),
                                                              partition.shell_l2(v.y_comp, j)));
    const double dotted = lq_sum(terms, idx.q);
    if (idx.homogeneous) return dotted;
    return std::hypot(l2_norm(v.x_comp), l2_norm(v.y_comp)) + dotted;
}

std::vector<std::vector<double>> shell_norm_history(const FieldSeries& series, double s, double p,
                                                    const DyadicPartition& partition) {
    check_series(series);
    std::vector<std::vector<double>> rows(series.times.size());
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        rows[i].reserve(partition.shell_count());
        for (int j = partition.j_min(); j <= partition.j_max(); ++j)
            rows[i].push_back(std::pow(2.0, s * j) * shell_lp(series.fields[i], j, p, partition));
    }
    return rows;
}

}  // namespace mhdlab
