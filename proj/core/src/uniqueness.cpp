#include "mhdlab/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mhdlab/ops.hpp"

namespace mhdlab {

namespace {

double shell_norm(const DyadicPartition& P, const VectorField2D& v, int j) {
    return std::hypot(P.shell_l2(v.x_comp, j), P.shell_l2(v.y_comp, j));
}

// Instantaneous homogeneous vector Besov norm (p = 2, q in {1, inf}).
double b_norm(const DyadicPartition& P, const VectorField2D& v, double s, double q) {
    double acc = 0.0;
    for (int j = P.j_min(); j <= P.j_max(); ++j) {
        const double val = std::pow(2.0, s * j) * shell_norm(P, v, j);
        acc = std::isinf(q) ? std::max(acc, val) : acc + val;
    }
    return acc;
}

VectorField2D adv_vec(const VectorField2D& v, const VectorField2D& g) {
    return VectorField2D{advect(v, g.x_comp), advect(v, g.y_comp), false};
}

double l2_vec(const VectorField2D& v) { return std::hypot(l2_norm(v.x_comp), l2_norm(v.y_comp)); }

VectorField2D sub_vec(const VectorField2D& a, const VectorField2D& b) { return subtract(a, b); }

VectorField2D tilde_vec(const DyadicPartition& P, const VectorField2D& v, int k) {
    return VectorField2D{P.tilde_block(v.x_comp, k), P.tilde_block(v.y_comp, k), false};
}

double trapezoid_step(double t0, double t1, double v0, double v1) {
    return 0.5 * (t1 - t0) * (v0 + v1);
}

}  // namespace

VectorField2D perturbation_field(const Grid2D& grid, int shell, std::uint64_t seed) {
    const DyadicPartition partition(grid);
    if (shell < partition.j_min() || shell > partition.j_max())
        throw std::invalid_argument("perturbation_field: shell outside the grid's dyadic range");
    auto banded = [&](std::uint64_t s) {
        return partition.block(zero_mean(random_real_field(grid, s)), shell);
    };
    VectorField2D v{banded(seed), banded(seed + 1), false};
    v = leray_project(v);
    v.x_comp = zero_mean(v.x_comp);
    v.y_comp = zero_mean(v.y_comp);
    const double norm = l2_vec(v);
    if (norm == 0.0) throw std::runtime_error("perturbation_field: degenerate draw");
    return scale(v, 1.0 / norm);
}

PairTrajectory run_pair(const MhdState& base, const Perturbation& pert,
                        const SolverConfig& config) {
    const Grid2D& grid = base.u.grid();
    MhdState perturbed = base;
    if (pert.target != "u" && pert.target != "B" && pert.target != "both")
        throw std::invalid_argument("run_pair: target must be u, B or both");
    if (pert.target == "u" || pert.target == "both") {
        const VectorField2D p = perturbation_field(grid, pert.shell, pert.seed);
        perturbed.u = add(perturbed.u, scale(p, pert.epsilon));
        perturbed.u.divergence_free = true;
    }
    if (pert.target == "B" || pert.target == "both") {
        const VectorField2D p = perturbation_field(grid, pert.shell, pert.seed + 7);
        perturbed.B = add(perturbed.B, scale(p, pert.epsilon));
        perturbed.B.divergence_free = true;
    }

    PairTrajectory pair;
    pair.run1 = integrate_from(base, config);
    pair.run2 = integrate_from(perturbed, config);
    pair.completed = pair.run1.completed && pair.run2.completed;

    const std::size_t n = std::min(pair.run1.snapshots.size(), pair.run2.snapshots.size());
    pair.times.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (pair.run1.times[i] != pair.run2.times[i])
            throw std::runtime_error("run_pair: snapshot time grids diverged");
        pair.times.push_back(pair.run1.times[i]);
        pair.delta_u.push_back(sub_vec(pair.run1.snapshots[i].u, pair.run2.snapshots[i].u));
        pair.delta_b.push_back(sub_vec(pair.run1.snapshots[i].B, pair.run2.snapshots[i].B));
    }
    return pair;
}

namespace {

// Per-sample, per-shell block L2 norms of the eight difference-system
// source terms. K rows are later time-integrated; J rows are read off
// instantaneously.
struct MainTerms {
    // [sample][shell - j_min]
    std::vector<std::vector<double>> k1, k2, k3, k4, j1, j2, j3, j4;
};

MainTerms compute_main_terms(const PairTrajectory& pair, const DyadicPartition& P,
                             std::size_t count) {
    MainTerms terms;
    const int shells = P.shell_count();
    auto resize_all = [&](auto&... t) { (t.assign(count, std::vector<double>(shells, 0.0)), ...); };
    resize_all(terms.k1, terms.k2, terms.k3, terms.k4, terms.j1, terms.j2, terms.j3, terms.j4);

    for (std::size_t i = 0; i < count; ++i) {
        const VectorField2D& u1 = pair.run1.snapshots[i].u;
        const VectorField2D& B1 = pair.run1.snapshots[i].B;
        const VectorField2D& u2 = pair.run2.snapshots[i].u;
        const VectorField2D& B2 = pair.run2.snapshots[i].B;
        const VectorField2D& du = pair.delta_u[i];
        const VectorField2D& db = pair.delta_b[i];

        const VectorField2D adv_du = adv_vec(u1, du);  // u1.grad du
        const VectorField2D adv_db = adv_vec(u1, db);  // u1.grad dB
        const VectorField2D g2 = adv_vec(du, u2);      // du.grad u2
        const VectorField2D g3 = adv_vec(B1, db);      // B1.grad dB
        const VectorField2D g4 = adv_vec(db, B2);      // dB.grad B2
        const VectorField2D h2 = adv_vec(du, B2);      // du.grad B2
        const VectorField2D h3 = adv_vec(B1, du);      // B1.grad du
        const VectorField2D h4 = adv_vec(db, u2);      // dB.grad u2

        for (int j = P.j_min(); j <= P.j_max(); ++j) {
            const int jc = j - P.j_min();
            const VectorField2D du_j = P.block(du, j);
            const VectorField2D db_j = P.block(db, j);
            // [Dj, u1.grad] applied to du and dB.
            terms.k1[i][jc] = l2_vec(sub_vec(P.block(adv_du, j), adv_vec(u1, du_j)));
            terms.j1[i][jc] = l2_vec(sub_vec(P.block(adv_db, j), adv_vec(u1, db_j)));
            terms.k2[i][jc] = shell_norm(P, g2, j);
            terms.k3[i][jc] = shell_norm(P, g3, j);
            terms.k4[i][jc] = shell_norm(P, g4, j);
            terms.j2[i][jc] = shell_norm(P, h2, j);
            terms.j3[i][jc] = shell_norm(P, h3, j);
            terms.j4[i][jc] = shell_norm(P, h4, j);
        }
    }
    return terms;
}

}  // namespace

std::vector<StabilityRecord> stability_norms(const PairTrajectory& pair,
                                             const DyadicPartition& partition) {
    const std::size_t count = pair.times.size();
    if (count == 0) return {};
    const DyadicPartition& P = partition;
    const int shells = P.shell_count();

    const MainTerms terms = compute_main_terms(pair, P, count);

    std::vector<StabilityRecord> records(count);
    std::vector<double> a_prev(shells, 0.0), a_cur(shells, 0.0);
    std::vector<double> I_du(shells, 0.0);  // int ||Dj du||_2 dt
    std::array<std::vector<double>, 4> I_k;
    for (auto& v : I_k) v.assign(shells, 0.0);

    double run_sup_neg1 = 0.0, run_sup_y = 0.0;

    for (std::size_t i = 0; i < count; ++i) {
        double sup_neg1 = 0.0, sup_y = 0.0;
        for (int jc = 0; jc < shells; ++jc) {
            const int j = P.j_min() + jc;
            a_cur[jc] = shell_norm(P, pair.delta_u[i], j);
            sup_neg1 = std::max(sup_neg1, std::ldexp(a_cur[jc], -j));
            sup_y = std::max(sup_y, shell_norm(P, pair.delta_b[i], j));
        }
        if (i > 0) {
            const double t0 = pair.times[i - 1], t1 = pair.times[i];
            for (int jc = 0; jc < shells; ++jc) {
                I_du[jc] += trapezoid_step(t0, t1, a_prev[jc], a_cur[jc]);
                for (int m = 0; m < 4; ++m) {
                    const auto& tbl = (m == 0 ? terms.k1 : m == 1 ? terms.k2
                                                       : m == 2 ? terms.k3 : terms.k4);
                    I_k[m][jc] += trapezoid_step(t0, t1, tbl[i - 1][jc], tbl[i][jc]);
                }
            }
        }
        run_sup_neg1 = std::max(run_sup_neg1, sup_neg1);
        run_sup_y = std::max(run_sup_y, sup_y);

        double sup_b1 = 0.0, sup_b0 = 0.0, sup_b2 = 0.0;
        for (int jc = 0; jc < shells; ++jc) {
            const int j = P.j_min() + jc;
            sup_b1 = std::max(sup_b1, std::ldexp(I_du[jc], j));
            sup_b0 = std::max(sup_b0, I_du[jc]);
            sup_b2 = std::max(sup_b2, std::ldexp(I_du[jc], 2 * j));
        }

        StabilityRecord& r = records[i];
        r.t = pair.times[i];
        r.X = run_sup_neg1 + sup_b1;
        r.Y = run_sup_y;
        r.V = sup_b0 + sup_b2;
        for (int m = 0; m < 4; ++m) {
            double sup_k = 0.0, sup_j = 0.0;
            const auto& jtbl = (m == 0 ? terms.j1 : m == 1 ? terms.j2
                                                : m == 2 ? terms.j3 : terms.j4);
            for (int jc = 0; jc < shells; ++jc) {
                const int j = P.j_min() + jc;
                sup_k = std::max(sup_k, std::ldexp(I_k[m][jc], -j));
                sup_j = std::max(sup_j, jtbl[i][jc]);
            }
            r.K[m] = sup_k;
            r.J[m] = sup_j;
        }
        std::swap(a_prev, a_cur);
    }
    return records;
}

namespace {

using ShellTable = std::vector<double>;  // per shell (offset by j_min)

// The paraproduct sub-splits at one sample. w is the difference field
// (du for the K family, dB for the J family); adv is u1 except in the
// "2"-family kernels where the roles swap.
struct SplitKernels {
    const DyadicPartition& P;
    int shells;

    explicit SplitKernels(const DyadicPartition& partition)
        : P(partition), shells(partition.shell_count()) {}

    // sum_{|k-j|<=4} ||[Dj, S_{k-1}a . grad] Dk w||_2
    ShellTable commutator_split(const VectorField2D& a, const VectorField2D& w) const {
        ShellTable acc(shells, 0.0);
        for (int k = P.j_min(); k <= P.j_max(); ++k) {
            const VectorField2D low = P.low_pass(a, k - 1);
            const VectorField2D wk = P.block(w, k);
            const VectorField2D adv = adv_vec(low, wk);
            for (int j = std::max(P.j_min(), k - 4); j <= std::min(P.j_max(), k + 4); ++j) {
                VectorField2D val = P.block(adv, j);
                if (std::abs(j - k) <= 1) val = sub_vec(val, adv_vec(low, P.block(wk, j)));
                acc[j - P.j_min()] += l2_vec(val);
            }
        }
        return acc;
    }

    // sum_{|k-j|<=4} ||Dj(Dk a . grad S_{k-1} w)||_2
    ShellTable high_low_split(const VectorField2D& a, const VectorField2D& w) const {
        ShellTable acc(shells, 0.0);
        for (int k = P.j_min(); k <= P.j_max(); ++k) {
            const VectorField2D adv = adv_vec(P.block(a, k), P.low_pass(w, k - 1));
            for (int j = std::max(P.j_min(), k - 4); j <= std::min(P.j_max(), k + 4); ++j)
                acc[j - P.j_min()] += l2_vec(P.block(adv, j));
        }
        return acc;
    }

    // sum_{k>=j-3} ||Dk a . grad (Dj S_{k+1} w)||_2   (no outer block)
    ShellTable resonant_free_split(const VectorField2D& a, const VectorField2D& w) const {
        ShellTable acc(shells, 0.0);
        for (int j = P.j_min(); j <= P.j_max(); ++j) {
            for (int k = std::max(P.j_min(), j - 3); k <= P.j_max(); ++k) {
                const VectorField2D wj{P.block(P.low_pass(w, k + 1).x_comp, j),
                                       P.block(P.low_pass(w, k + 1).y_comp, j), false};
                acc[j - P.j_min()] += l2_vec(adv_vec(P.block(a, k), wj));
            }
        }
        return acc;
    }

    // sum_{k>=j-3} ||Dj(Dk a . grad D~k w)||_2
    ShellTable remainder_split(const VectorField2D& a, const VectorField2D& w) const {
        ShellTable acc(shells, 0.0);
        for (int k = P.j_min(); k <= P.j_max(); ++k) {
            const VectorField2D adv = adv_vec(P.block(a, k), tilde_vec(P, w, k));
            for (int j = P.j_min(); j <= std::min(P.j_max(), k + 3); ++j)
                acc[j - P.j_min()] += l2_vec(P.block(adv, j));
        }
        return acc;
    }

    // sum_{|k-j|<=4} ||Dj(Dk w . grad S_{k-1} a)||_2
    ShellTable swapped_high_low(const VectorField2D& w, const VectorField2D& a) const {
        ShellTable acc(shells, 0.0);
        for (int k = P.j_min(); k <= P.j_max(); ++k) {
            const VectorField2D adv = adv_vec(P.block(w, k), P.low_pass(a, k - 1));
            for (int j = std::max(P.j_min(), k - 4); j <= std::min(P.j_max(), k + 4); ++j)
                acc[j - P.j_min()] += l2_vec(P.block(adv, j));
        }
        return acc;
    }

    // sum_{|k-j|<=4} ||Dj(S_{k-1} w . grad Dk a)||_2
    ShellTable swapped_low_high(const VectorField2D& w, const VectorField2D& a) const {
        ShellTable acc(shells, 0.0);
        for (int k = P.j_min(); k <= P.j_max(); ++k) {
            const VectorField2D adv = adv_vec(P.low_pass(w, k - 1), P.block(a, k));
            for (int j = std::max(P.j_min(), k - 4); j <= std::min(P.j_max(), k + 4); ++j)
                acc[j - P.j_min()] += l2_vec(P.block(adv, j));
        }
        return acc;
    }

    // sum_{k>=j-3} ||Dj(Dk w . grad D~k a)||_2
    ShellTable swapped_remainder(const VectorField2D& w, const VectorField2D& a) const {
        ShellTable acc(shells, 0.0);
        for (int k = P.j_min(); k <= P.j_max(); ++k) {
            const VectorField2D adv = adv_vec(P.block(w, k), tilde_vec(P, a, k));
            for (int j = P.j_min(); j <= std::min(P.j_max(), k + 3); ++j)
                acc[j - P.j_min()] += l2_vec(P.block(adv, j));
        }
        return acc;
    }
};

double sup_weighted(const DyadicPartition& P, const ShellTable& table, int weight_exp) {
    double m = 0.0;
    for (int jc = 0; jc < P.shell_count(); ++jc)
        m = std::max(m, std::ldexp(table[jc], weight_exp * (P.j_min() + jc)));
    return m;
}

}  // namespace

std::vector<EstimateReport> term_audit(const PairTrajectory& pair, double t,
                                       const DyadicPartition& partition) {
    const DyadicPartition& P = partition;
    if (pair.times.empty()) throw std::invalid_argument("term_audit: empty pair");
    std::size_t last = 0;
    while (last + 1 < pair.times.size() && pair.times[last + 1] <= t + 1e-12) ++last;
    const std::size_t count = last + 1;
    const int shells = P.shell_count();

    const MainTerms terms = compute_main_terms(pair, P, count);

    // Time-integrate a per-sample shell table with the trapezoid rule.
    auto integrate_table = [&](const std::vector<std::vector<double>>& tbl) {
        ShellTable acc(shells, 0.0);
        for (std::size_t i = 1; i < count; ++i)
            for (int jc = 0; jc < shells; ++jc)
                acc[jc] += trapezoid_step(pair.times[i - 1], pair.times[i], tbl[i - 1][jc],
                                          tbl[i][jc]);
        return acc;
    };

    // Instantaneous norms along the way, for the right-hand sides.
    std::vector<double> u1_b221(count), u2_b221(count), b1_b121(count), b2_b121(count),
        du_neg1(count), db_b0(count), du_b121(count);
    for (std::size_t i = 0; i < count; ++i) {
        u1_b221[i] = b_norm(P, pair.run1.snapshots[i].u, 2.0, 1.0);
        u2_b221[i] = b_norm(P, pair.run2.snapshots[i].u, 2.0, 1.0);
        b1_b121[i] = b_norm(P, pair.run1.snapshots[i].B, 1.0, 1.0);
        b2_b121[i] = b_norm(P, pair.run2.snapshots[i].B, 1.0, 1.0);
        du_neg1[i] = b_norm(P, pair.delta_u[i], -1.0, kInf);
        db_b0[i] = b_norm(P, pair.delta_b[i], 0.0, kInf);
        du_b121[i] = b_norm(P, pair.delta_u[i], 1.0, 1.0);
    }
    auto trapz = [&](const std::vector<double>& v) {
        double acc = 0.0;
        for (std::size_t i = 1; i < count; ++i)
            acc += trapezoid_step(pair.times[i - 1], pair.times[i], v[i - 1], v[i]);
        return acc;
    };
    auto trapz_prod = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t i = 1; i < count; ++i)
            acc += trapezoid_step(pair.times[i - 1], pair.times[i], a[i - 1] * b[i - 1],
                                  a[i] * b[i]);
        return acc;
    };
    const double u1_l1b2 = trapz(u1_b221);
    const double u2_l1b2 = trapz(u2_b221);
    const double du_linf_neg1 = *std::max_element(du_neg1.begin(), du_neg1.end());
    const double rhs_k3 = trapz_prod(b1_b121, db_b0);
    const double rhs_k4 = trapz_prod(b2_b121, db_b0);

    std::vector<EstimateReport> reports;
    auto push = [&](std::string name, double lhs, double rhs) {
        EstimateReport r = make_report(std::move(name), lhs, rhs);
        r.metadata["t"] = pair.times[count - 1];
        r.metadata["n"] = P.grid().size();
        reports.push_back(std::move(r));
    };

    // Top-level terms.
    push("K1", sup_weighted(P, integrate_table(terms.k1), -1), u1_l1b2 * du_linf_neg1);
    push("K2", sup_weighted(P, integrate_table(terms.k2), -1), u2_l1b2 * du_linf_neg1);
    push("K3", sup_weighted(P, integrate_table(terms.k3), -1), rhs_k3);
    push("K4", sup_weighted(P, integrate_table(terms.k4), -1), rhs_k4);

    const std::size_t e = count - 1;
    const double rhs_j1 = u1_b221[e] * db_b0[e];
    const double rhs_j4 = u2_b221[e] * db_b0[e];
    const double rhs_j23 = du_b121[e] * std::max(b1_b121[e], b2_b121[e]);
    push("J1", sup_weighted(P, terms.j1[e], 0), rhs_j1);
    push("J2", sup_weighted(P, terms.j2[e], 0), rhs_j23);
    push("J3", sup_weighted(P, terms.j3[e], 0), rhs_j23);
    push("J2+J3", sup_weighted(P, terms.j2[e], 0) + sup_weighted(P, terms.j3[e], 0), rhs_j23);
    push("J4", sup_weighted(P, terms.j4[e], 0), rhs_j4);

    // Sub-splits. The K families integrate per-sample kernels in time;
    // the J families are read at the final sample only.
    const SplitKernels kern(P);
    auto k_series = [&](auto member, const auto& a_of, const auto& w_of) {
        std::vector<std::vector<double>> tbl(count);
        for (std::size_t i = 0; i < count; ++i) tbl[i] = (kern.*member)(a_of(i), w_of(i));
        return sup_weighted(P, integrate_table(tbl), -1);
    };
    auto u1_of = [&](std::size_t i) -> const VectorField2D& { return pair.run1.snapshots[i].u; };
    auto u2_of = [&](std::size_t i) -> const VectorField2D& { return pair.run2.snapshots[i].u; };
    auto du_of = [&](std::size_t i) -> const VectorField2D& { return pair.delta_u[i]; };

    push("K11", k_series(&SplitKernels::commutator_split, u1_of, du_of),
         u1_l1b2 * du_linf_neg1);
    push("K12", k_series(&SplitKernels::high_low_split, u1_of, du_of), u1_l1b2 * du_linf_neg1);
    push("K13", k_series(&SplitKernels::resonant_free_split, u1_of, du_of),
         u1_l1b2 * du_linf_neg1);
    push("K14", k_series(&SplitKernels::remainder_split, u1_of, du_of), u1_l1b2 * du_linf_neg1);
    push("K21", k_series(&SplitKernels::swapped_high_low, du_of, u2_of),
         u2_l1b2 * du_linf_neg1);
    push("K22", k_series(&SplitKernels::swapped_low_high, du_of, u2_of),
         u2_l1b2 * du_linf_neg1);
    push("K23", k_series(&SplitKernels::swapped_remainder, du_of, u2_of),
         u2_l1b2 * du_linf_neg1);

    const VectorField2D& u1e = pair.run1.snapshots[e].u;
    const VectorField2D& u2e = pair.run2.snapshots[e].u;
    const VectorField2D& dbe = pair.delta_b[e];
    push("J11", sup_weighted(P, kern.commutator_split(u1e, dbe), 0), rhs_j1);
    push("J12", sup_weighted(P, kern.high_low_split(u1e, dbe), 0), rhs_j1);
    push("J13", sup_weighted(P, kern.resonant_free_split(u1e, dbe), 0), rhs_j1);
    push("J14", sup_weighted(P, kern.remainder_split(u1e, dbe), 0), rhs_j1);
    push("J41", sup_weighted(P, kern.swapped_high_low(dbe, u2e), 0), rhs_j4);
    push("J42", sup_weighted(P, kern.swapped_low_high(dbe, u2e), 0), rhs_j4);
    push("J43", sup_weighted(P, kern.swapped_remainder(dbe, u2e), 0), rhs_j4);

    return reports;
}

ClosureReport verify_closure(const PairTrajectory& pair, const DyadicPartition& partition) {
    const DyadicPartition& P = partition;
    const std::size_t count = pair.times.size();
    if (count < 2) throw std::invalid_argument("verify_closure: need at least two samples");
    const int shells = P.shell_count();
    const double nu = pair.run1.snapshots[0].nu;

    std::vector<double> du_neg1(count), db_b0(count), du_b121(count), u_max_b221(count),
        b_max_b121(count);
    std::vector<std::vector<double>> a(count, std::vector<double>(shells));
    for (std::size_t i = 0; i < count; ++i) {
        for (int jc = 0; jc < shells; ++jc)
            a[i][jc] = shell_norm(P, pair.delta_u[i], P.j_min() + jc);
        du_neg1[i] = b_norm(P, pair.delta_u[i], -1.0, kInf);
        db_b0[i] = b_norm(P, pair.delta_b[i], 0.0, kInf);
        du_b121[i] = b_norm(P, pair.delta_u[i], 1.0, 1.0);
        u_max_b221[i] = std::max(b_norm(P, pair.run1.snapshots[i].u, 2.0, 1.0),
                                 b_norm(P, pair.run2.snapshots[i].u, 2.0, 1.0));
        b_max_b121[i] = std::max(b_norm(P, pair.run1.snapshots[i].B, 1.0, 1.0),
                                 b_norm(P, pair.run2.snapshots[i].B, 1.0, 1.0));
    }

    // Running quantities up to sample m (inclusive).
    auto eval_at = [&](std::size_t m) {
        struct Values {
            double du_linf_neg1, du_l1t_b1, db_linf_b0, u_l1_b221, mixed_bdb, b_linf_b121,
                du_l1_b121;
        } v{};
        std::vector<double> I(shells, 0.0);
        double coupling = 0.0, u_int = 0.0, du_int = 0.0;
        v.du_linf_neg1 = du_neg1[0];
        v.db_linf_b0 = db_b0[0];
        v.b_linf_b121 = b_max_b121[0];
        for (std::size_t i = 1; i <= m; ++i) {
            const double t0 = pair.times[i - 1], t1 = pair.times[i];
            for (int jc = 0; jc < shells; ++jc)
                I[jc] += trapezoid_step(t0, t1, a[i - 1][jc], a[i][jc]);
            coupling += trapezoid_step(t0, t1, b_max_b121[i - 1] * db_b0[i - 1],
                                       b_max_b121[i] * db_b0[i]);
            u_int += trapezoid_step(t0, t1, u_max_b221[i - 1], u_max_b221[i]);
            du_int += trapezoid_step(t0, t1, du_b121[i - 1], du_b121[i]);
            v.du_linf_neg1 = std::max(v.du_linf_neg1, du_neg1[i]);
            v.db_linf_b0 = std::max(v.db_linf_b0, db_b0[i]);
            v.b_linf_b121 = std::max(v.b_linf_b121, b_max_b121[i]);
        }
        v.du_l1t_b1 = 0.0;
        for (int jc = 0; jc < shells; ++jc)
            v.du_l1t_b1 = std::max(v.du_l1t_b1, std::ldexp(I[jc], P.j_min() + jc));
        v.u_l1_b221 = u_int;
        v.mixed_bdb = coupling;
        v.du_l1_b121 = du_int;
        return v;
    };

    const auto end_vals = eval_at(count - 1);

    ClosureReport out;
    {
        const double lhs = end_vals.du_linf_neg1 + nu * end_vals.du_l1t_b1;
        const double rhs = end_vals.u_l1_b221 * end_vals.du_linf_neg1 + end_vals.mixed_bdb;
        out.velocity_bound = make_report("velocity-closure", lhs, rhs);
    }
    {
        const double lhs = end_vals.db_linf_b0;
        const double rhs = end_vals.u_l1_b221 * end_vals.db_linf_b0 +
                           end_vals.b_linf_b121 * end_vals.du_l1_b121;
        out.magnetic_bound = make_report("magnetic-closure", lhs, rhs);
    }
    {
        // d/dt ||dB||_{B.^0_{2,inf}} against its instantaneous bound,
        // one finite difference per step; the implied constant is the
        // worst ratio over steps with a growing left side.
        double best_ratio = 0.0, lhs_at = 0.0, rhs_at = 0.0;
        int growth_steps = 0;
        for (std::size_t i = 1; i < count; ++i) {
            const double dt = pair.times[i] - pair.times[i - 1];
            const double deriv = (db_b0[i] - db_b0[i - 1]) / dt;
            if (deriv <= 0.0) continue;
            ++growth_steps;
            const double bound = 0.5 * (u_max_b221[i] * db_b0[i] + u_max_b221[i - 1] * db_b0[i - 1] +
                                        b_max_b121[i] * du_b121[i] + b_max_b121[i - 1] * du_b121[i - 1]);
            if (bound <= 0.0) continue;
            const double ratio = deriv / bound;
            if (ratio > best_ratio) {
                best_ratio = ratio;
                lhs_at = deriv;
                rhs_at = bound;
            }
        }
        out.magnetic_differential = make_report("magnetic-closure-differential", lhs_at, rhs_at);
        out.magnetic_differential.breakdown.emplace_back("growth_steps", growth_steps);
    }

    out.c_est = std::max(out.velocity_bound.implied_constant,
                         out.magnetic_bound.implied_constant);

    // T_bar: largest horizon with int_0^T ||(u1,u2)||_{B.^2_{2,1}} below
    // 1/(4 c_est); bisection on the piecewise-linear integrand.
    auto growth_integral = [&](double T) {
        double acc = 0.0;
        for (std::size_t i = 1; i < count; ++i) {
            const double t0 = pair.times[i - 1], t1 = pair.times[i];
            if (T <= t0) break;
            if (T >= t1) {
                acc += trapezoid_step(t0, t1, u_max_b221[i - 1], u_max_b221[i]);
            } else {
                const double w = (T - t0) / (t1 - t0);
                const double mid = u_max_b221[i - 1] + w * (u_max_b221[i] - u_max_b221[i - 1]);
                acc += trapezoid_step(t0, T, u_max_b221[i - 1], mid);
            }
        }
        return acc;
    };
    const double t_end = pair.times.back();
    if (out.c_est <= 0.0 || growth_integral(t_end) < 0.25 / out.c_est) {
        out.t_bar = t_end;
    } else {
        double lo = pair.times.front(), hi = t_end;
        const double target = 0.999 * 0.25 / out.c_est;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (growth_integral(mid) < target ? lo : hi) = mid;
        }
        out.t_bar = lo;
    }

    std::size_t m_bar = 0;
    while (m_bar + 1 < count && pair.times[m_bar + 1] <= out.t_bar + 1e-12) ++m_bar;
    const auto bar_vals = eval_at(m_bar);
    {
        const double lhs = 0.75 * bar_vals.du_linf_neg1 + nu * bar_vals.du_l1t_b1;
        out.velocity_small_time = make_report("velocity-small-time", lhs, bar_vals.mixed_bdb);
    }
    {
        const double lhs = 0.75 * bar_vals.db_linf_b0;
        out.magnetic_small_time = make_report("magnetic-small-time", lhs,
                                              bar_vals.b_linf_b121 * bar_vals.du_l1_b121);
    }
    for (EstimateReport* r :
         {&out.velocity_bound, &out.magnetic_bound, &out.magnetic_differential,
          &out.velocity_small_time, &out.magnetic_small_time}) {
        r->metadata["t_bar"] = out.t_bar;
        r->metadata["c_est"] = out.c_est;
        r->metadata["n"] = P.grid().size();
        r->metadata["nu"] = nu;
    }
    return out;
}

namespace {

// Piecewise-linear sample interpolation, clamped at the ends.
double interp(const std::vector<double>& ts, const std::vector<double>& vs, double t) {
    if (t <= ts.front()) return vs.front();
    if (t >= ts.back()) return vs.back();
    std::size_t i = 1;
    while (ts[i] < t) ++i;
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return vs[i - 1] + w * (vs[i] - vs[i - 1]);
}

}  // namespace

std::vector<double> osgood_envelope(double x0, double C, const std::vector<double>& v_times,
                                    const std::vector<double>& v_values,
                                    const std::vector<double>& out_times) {
    if (x0 < 0.0 || C < 0.0) throw std::invalid_argument("osgood_envelope: negative inputs");
    for (double v : v_values)
        if (v < 0.0) throw std::invalid_argument("osgood_envelope: negative V sample");
    if (out_times.empty()) return {};
    if (v_times.size() != v_values.size() || v_times.empty())
        throw std::invalid_argument("osgood_envelope: bad V sampling");

    std::vector<double> env(out_times.size(), x0);
    if (x0 == 0.0) {
        std::fill(env.begin(), env.end(), 0.0);
        return env;
    }

    auto f = [&](double t, double rho) {
        if (rho <= 0.0) return 0.0;
        const double V = interp(v_times, v_values, t);
        return C * rho * std::log(std::numbers::e + V / rho);
    };

    // Dormand-Prince 5(4), adaptive, dense enough for our sample grids.
    const double rtol = 1e-10;
    const double atol = 1e-14 * std::max(x0, 1e-30);
    double t = out_times.front();
    double y = x0;
    double h = (out_times.back() - t) / 100.0;
    if (!(h > 0.0)) h = 1e-6;

    for (std::size_t m = 0; m < out_times.size(); ++m) {
        const double target = out_times[m];
        while (t < target - 1e-15 * std::max(1.0, std::abs(target))) {
            h = std::min(h, target - t);
            const double k1 = f(t, y);
            const double k2 = f(t + h / 5.0, y + h * (k1 / 5.0));
            const double k3 = f(t + 3.0 * h / 10.0, y + h * (3.0 * k1 + 9.0 * k2) / 40.0);
            const double k4 =
                f(t + 4.0 * h / 5.0, y + h * (44.0 * k1 / 45.0 - 56.0 * k2 / 15.0 + 32.0 * k3 / 9.0));
            const double k5 = f(t + 8.0 * h / 9.0,
                                y + h * (19372.0 * k1 / 6561.0 - 25360.0 * k2 / 2187.0 +
                                         64448.0 * k3 / 6561.0 - 212.0 * k4 / 729.0));
            const double k6 = f(t + h, y + h * (9017.0 * k1 / 3168.0 - 355.0 * k2 / 33.0 +
                                               46732.0 * k3 / 5247.0 + 49.0 * k4 / 176.0 -
                                               5103.0 * k5 / 18656.0));
            const double y5 = y + h * (35.0 * k1 / 384.0 + 500.0 * k3 / 1113.0 +
                                       125.0 * k4 / 192.0 - 2187.0 * k5 / 6784.0 +
                                       11.0 * k6 / 84.0);
            const double k7 = f(t + h, y5);
            const double y4 = y + h * (5179.0 * k1 / 57600.0 + 7571.0 * k3 / 16695.0 +
                                       393.0 * k4 / 640.0 - 92097.0 * k5 / 339200.0 +
                                       187.0 * k6 / 2100.0 + k7 / 40.0);
            const double err = std::abs(y5 - y4);
            const double tol = atol + rtol * std::max(std::abs(y), std::abs(y5));
            if (err <= tol || h <= 1e-14 * std::max(1.0, std::abs(target))) {
                t += h;
                y = y5;
            }
            const double factor =
                err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
        }
        env[m] = std::max(y, x0);
    }
    return env;
}

std::vector<double> osgood_envelope(double x0, double C, double V,
                                    const std::vector<double>& out_times) {
    if (out_times.empty()) return {};
    return osgood_envelope(x0, C, {out_times.front(), out_times.back()}, {V, V}, out_times);
}

double calibrate_envelope_constant(double c_floor, double x0, const std::vector<double>& times,
                                   const std::vector<double>& x_samples,
                                   const std::vector<double>& v_samples) {
    auto margin = [&](double C) {
        const auto env = osgood_envelope(x0, C, times, v_samples, times);
        double m = 1e300;
        for (std::size_t i = 0; i < times.size(); ++i) m = std::min(m, env[i] - x_samples[i]);
        return m;
    };
    double c = std::max(c_floor, 1e-12);
    if (margin(c) >= 0.0) return c;
    double hi = c;
    for (int it = 0; it < 200 && margin(hi) < 0.0; ++it) hi *= 2.0;
    double lo = hi / 2.0;
    for (int it = 0; it < 60 && (hi - lo) > 1e-3 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) >= 0.0 ? hi : lo) = mid;
    }
    return hi;
}

ConvergenceStudy convergence_study(const MhdState& base, const Perturbation& pert,
                                   const std::vector<double>& eps_list,
                                   const SolverConfig& config) {
    ConvergenceStudy study;
    const DyadicPartition partition(base.u.grid());

    for (double eps : eps_list) {
        ConvergenceRow row;
        row.epsilon = eps;
        Perturbation p = pert;
        p.epsilon = eps;
        const PairTrajectory pair = run_pair(base, p, config);
        row.completed = pair.completed;
        const auto records = stability_norms(pair, partition);

        double sup_x = 0.0, sup_y = 0.0;
        for (const auto& r : records) {
            sup_x = std::max(sup_x, r.X);
            sup_y = std::max(sup_y, r.Y);
        }
        row.sup_x = sup_x;
        row.sup_y = sup_y;

        if (sup_x > 0.0) {
            std::vector<double> ts, xs, vs;
            std::size_t first = 0;
            while (first < records.size() && records[first].X <= 0.0) ++first;
            for (std::size_t i = first; i < records.size(); ++i) {
                ts.push_back(records[i].t);
                xs.push_back(records[i].X);
                vs.push_back(records[i].V);
            }
            const double x0 = xs.front();
            const ClosureReport closure = verify_closure(pair, partition);
            row.c_envelope =
                calibrate_envelope_constant(closure.c_est, x0, ts, xs, vs);
            const auto env = osgood_envelope(x0, row.c_envelope, ts, vs, ts);
            double m = 1e300;
            for (std::size_t i = 0; i < ts.size(); ++i) m = std::min(m, env[i] - xs[i]);
            row.envelope_margin = m;
        }
        study.rows.push_back(row);
    }

    // log-log least squares of sup X against eps over usable rows.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int npts = 0;
    for (const auto& row : study.rows) {
        if (row.epsilon <= 0.0 || row.sup_x <= 0.0) continue;
        const double lx = std::log(row.epsilon), ly = std::log(row.sup_x);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++npts;
    }
    if (npts >= 2) study.slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
    return study;
}

}  // namespace mhdlab
