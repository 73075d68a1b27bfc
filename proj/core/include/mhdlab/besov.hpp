// Besov, Sobolev and mixed time-space (Chemin-Lerner) norms.
#pragma once

#include <limits>
#include <vector>

#include "mhdlab/field.hpp"
#include "mhdlab/littlewood_paley.hpp"

namespace mhdlab {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Index (s, p, q) of B^s_{p,q}; homogeneous selects the dotted scale.
struct BesovIndex {
    double s = 0.0;
    double p = 2.0;
    double q = 2.0;
    bool homogeneous = true;
};

// A time-sampled scalar field trajectory (strictly increasing times).
struct FieldSeries {
    std::vector<double> times;
    std::vector<SpectralField> fields;
};

// ||Delta_j f||_{L^p}; p = 2 is evaluated spectrally (exact Plancherel).
double shell_lp(const SpectralField& f, int j, double p, const DyadicPartition& partition);

// l^q over shells of 2^{sj} ||Delta_j f||_{L^p}. Inhomogeneous adds
// ||f||_{L^p}. Homogeneous with s < 0 requires a mean-zero field.
double besov_norm(const SpectralField& f, const BesovIndex& idx, const DyadicPartition& partition);

// (L^2 sum_k |k|^{2s} |c(k)|^2)^{1/2}, the H^s norm via Plancherel.
// Mean-zero required for s < 0.
double sobolev_norm(const SpectralField& f, double s);

// Chemin-Lerner norm: per-shell time-L^r norm first (trapezoid on the
// recorded instants; r = inf is the sup), shell l^q sum second.
double mixed_norm(const FieldSeries& series, double r, const BesovIndex& idx,
                  const DyadicPartition& partition);

// Per-instant, per-shell table of 2^{sj}||Delta_j f(t)||_{L^p}, for CSV
// export and running-norm consumers. Row i covers series.times[i];
// column c covers shell j_min + c.
std::vector<std::vector<double>> shell_norm_history(const FieldSeries& series, double s, double p,
                                                    const DyadicPartition& partition);

// Vector-field Besov norm, p = 2 only: per-shell values combine the two
// components in l2 before the shell sum.
double besov_norm(const VectorField2D& v, const BesovIndex& idx, const DyadicPartition& partition);

}  // namespace mhdlab
