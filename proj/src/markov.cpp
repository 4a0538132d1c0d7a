#include "odflow/markov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <ostream>

#include "odflow/error.hpp"
#include "odflow/util.hpp"

namespace odflow {

namespace {
constexpr double kElapsedDriftTol = 1e-10;
constexpr double kDenseFillThreshold = 0.25;
}  // namespace

std::size_t StepOperator::nnz() const {
    std::size_t s = 0;
    for (const auto& c : cols) s += c.size();
    return s;
}

const StepOperator::Entry* StepOperator::entry(int row, int col) const {
    const auto& c = cols[col];
    auto it = std::lower_bound(c.begin(), c.end(), row,
                               [](const Entry& e, int r) { return e.row < r; });
    if (it == c.end() || it->row != row) return nullptr;
    return &*it;
}

double StepOperator::prob(int row, int col) const {
    const Entry* e = entry(row, col);
    return e ? e->prob : 0.0;
}

double StepOperator::stochasticity_drift() const {
    double worst = 0.0;
    for (const auto& c : cols) {
        double s = 0.0;
        for (const auto& e : c) s += e.prob;
        worst = std::max(worst, std::fabs(s - 1.0));
    }
    return worst;
}

Matrix StepOperator::dense() const {
    Matrix m(n, n);
    for (int j = 0; j < n; ++j)
        for (const auto& e : cols[j]) m(e.row, j) = e.prob;
    return m;
}

StepOperator build_step_operator(const FlowSlice& slice, const ComponentSpec& component,
                                 GapPolicy gap_policy, CostKind cost_kind) {
    int n = static_cast<int>(component.size());
    StepOperator op;
    op.t = slice.t;
    op.n = n;
    op.cols.resize(n);

    std::vector<double> col_sum(n, 0.0);
    for (const auto& r : slice.records) {
        int col = component.index_of(r.origin);
        int row = component.index_of(r.dest);
        if (col < 0 || row < 0)
            throw DomainError("build_step_operator: slice not restricted to component (cell '" +
                              (col < 0 ? r.origin : r.dest) + "')");
        double cost = kMissingCost;
        if (cost_kind == CostKind::distance) {
            if (r.dist_median) cost = *r.dist_median;
            else if (r.dist_mean) cost = *r.dist_mean;
        } else {
            if (r.dur_median) cost = *r.dur_median;
            else if (r.dur_mean) cost = *r.dur_mean;
        }
        op.cols[col].push_back({row, r.count, cost});
        col_sum[col] += r.count;
    }

    for (int j = 0; j < n; ++j) {
        auto& c = op.cols[j];
        if (col_sum[j] > 0.0) {
            for (auto& e : c) e.prob /= col_sum[j];
            std::sort(c.begin(), c.end(),
                      [](const auto& a, const auto& b) { return a.row < b.row; });
            continue;
        }
        switch (gap_policy) {
            case GapPolicy::self_loop:
                c.push_back({j, 1.0, 0.0});
                break;
            case GapPolicy::uniform:
                for (int i = 0; i < n; ++i)
                    c.push_back({i, 1.0 / n, kMissingCost});
                break;
            case GapPolicy::fail:
                throw DomainError("build_step_operator: zero outflow at cell '" +
                                  component.cells[j] + "', step " + std::to_string(slice.t));
        }
    }
    return op;
}

std::vector<StepOperator> build_step_operators(const std::vector<FlowSlice>& slices,
                                               const ComponentSpec& component,
                                               GapPolicy gap_policy, CostKind cost_kind) {
    std::vector<StepOperator> ops;
    ops.reserve(slices.size());
    for (const auto& s : slices)
        ops.push_back(build_step_operator(s, component, gap_policy, cost_kind));
    return ops;
}

ElapsedOperator::ElapsedOperator(int n) : n_(n) {
    sparse_cols_.resize(n);
    for (int j = 0; j < n; ++j) sparse_cols_[j].push_back({j, 1.0, 0.0});
    nnz_ = static_cast<std::size_t>(n);
}

double ElapsedOperator::at(int row, int col) const {
    if (is_dense_) return dense_(row, col);
    const auto& c = sparse_cols_[col];
    auto it = std::lower_bound(c.begin(), c.end(), row,
                               [](const StepOperator::Entry& e, int r) { return e.row < r; });
    if (it == c.end() || it->row != row) return 0.0;
    return it->prob;
}

Matrix ElapsedOperator::dense() const {
    if (is_dense_) return dense_;
    Matrix m(n_, n_);
    for (int j = 0; j < n_; ++j)
        for (const auto& e : sparse_cols_[j]) m(e.row, j) = e.prob;
    return m;
}

void ElapsedOperator::densify() {
    dense_ = dense();
    sparse_cols_.clear();
    is_dense_ = true;
}

void ElapsedOperator::apply(const StepOperator& op) {
    if (op.n != n_)
        throw DomainError("ElapsedOperator: dimension mismatch (" +
                          std::to_string(op.n) + " vs " + std::to_string(n_) + ")");
    if (!is_dense_ &&
        static_cast<double>(nnz_) > kDenseFillThreshold * n_ * static_cast<double>(n_))
        densify();

    std::vector<double> scratch(n_, 0.0);
    if (is_dense_) {
        Matrix next(n_, n_);
        for (int j = 0; j < n_; ++j) {
            const double* aj = dense_.col(j);
            double* oj = next.col(j);
            for (int k = 0; k < n_; ++k) {
                double a = aj[k];
                if (a == 0.0) continue;
                for (const auto& e : op.cols[k]) oj[e.row] += e.prob * a;
            }
            double s = std::accumulate(oj, oj + n_, 0.0);
            double drift = std::fabs(s - 1.0);
            max_drift_ = std::max(max_drift_, drift);
            if (drift > kElapsedDriftTol && s > 0.0)
                for (int i = 0; i < n_; ++i) oj[i] /= s;
        }
        dense_ = std::move(next);
    } else {
        std::vector<int> touched;
        std::size_t new_nnz = 0;
        std::vector<std::vector<StepOperator::Entry>> next(n_);
        for (int j = 0; j < n_; ++j) {
            touched.clear();
            for (const auto& a : sparse_cols_[j]) {
                for (const auto& e : op.cols[a.row]) {
                    if (scratch[e.row] == 0.0) touched.push_back(e.row);
                    scratch[e.row] += e.prob * a.prob;
                }
            }
            std::sort(touched.begin(), touched.end());
            double s = 0.0;
            for (int r : touched) s += scratch[r];
            double drift = std::fabs(s - 1.0);
            max_drift_ = std::max(max_drift_, drift);
            double scale = (drift > kElapsedDriftTol && s > 0.0) ? 1.0 / s : 1.0;
            auto& c = next[j];
            c.reserve(touched.size());
            for (int r : touched) {
                c.push_back({r, scratch[r] * scale, 0.0});
                scratch[r] = 0.0;
            }
            new_nnz += c.size();
        }
        sparse_cols_ = std::move(next);
        nnz_ = new_nnz;
    }
    ++steps_;
}

ElapsedOperator elapse(const std::vector<StepOperator>& ops, int n) {
    for (std::size_t k = 1; k < ops.size(); ++k)
        if (ops[k].t != ops[k - 1].t + 1)
            throw DomainError("elapse: step operators not consecutive in t");
    ElapsedOperator a(n);
    for (const auto& op : ops) a.apply(op);
    return a;
}

ElapsedOperator elapse(const std::vector<StepOperator>& ops) {
    if (ops.empty())
        throw DomainError("elapse: cannot infer dimension from an empty list");
    return elapse(ops, ops.front().n);
}

// --- approximate stochastic p-th root --------------------------------------

void project_to_simplex(std::vector<double>& v) {
    // Euclidean projection onto {x >= 0, sum x = 1}
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    int rho = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        css += u[k];
        double t = (css - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) {
            rho = static_cast<int>(k + 1);
            theta = t;
        }
    }
    (void)rho;
    for (auto& x : v) x = std::max(0.0, x - theta);
}

namespace {

void check_column_stochastic(const Matrix& m, const char* who) {
    if (m.rows() != m.cols())
        throw DomainError(std::string(who) + ": matrix not square");
    for (int j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (int i = 0; i < m.rows(); ++i) {
            if (m(i, j) < -1e-12)
                throw DomainError(std::string(who) + ": negative entry");
            s += m(i, j);
        }
        if (std::fabs(s - 1.0) > 1e-8)
            throw DomainError(std::string(who) + ": column " + std::to_string(j) +
                              " sums to " + std::to_string(s));
    }
}

double metric_value(const Matrix& M, const Matrix& Hp, RootMetric metric) {
    if (metric == RootMetric::frobenius) return M.frobenius_distance(Hp);
    double kl = 0.0;
    for (int j = 0; j < M.cols(); ++j)
        for (int i = 0; i < M.rows(); ++i) {
            double m = M(i, j);
            if (m <= 0.0) continue;
            double b = std::max(Hp(i, j), 1e-300);
            kl += m * std::log(m / b);
        }
    return kl;
}

// d metric / d B at B = H^p
Matrix metric_grad_wrt_power(const Matrix& M, const Matrix& Hp, RootMetric metric) {
    int n = M.rows();
    Matrix g(n, n);
    if (metric == RootMetric::frobenius) {
        // metric here is the (unsquared) Frobenius distance; descending on
        // the squared distance has the same minimizers and a smooth gradient
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) g(i, j) = -2.0 * (M(i, j) - Hp(i, j));
    } else {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double m = M(i, j);
                if (m <= 0.0) continue;
                g(i, j) = -m / std::max(Hp(i, j), 1e-300);
            }
    }
    return g;
}

// Chain rule through B = H^p: dF/dH = sum_k (H^k)^T dF/dB (H^{p-1-k})^T
Matrix root_gradient(const Matrix& H, int p, const Matrix& dB) {
    int n = H.rows();
    std::vector<Matrix> powers;  // H^0 .. H^{p-1}
    powers.push_back(Matrix::identity(n));
    for (int k = 1; k < p; ++k) powers.push_back(H * powers.back());
    Matrix g(n, n);
    for (int k = 0; k < p; ++k) {
        Matrix term = powers[k].transpose() * dB * powers[p - 1 - k].transpose();
        for (std::size_t i = 0; i < g.data().size(); ++i)
            g.data()[i] += term.data()[i];
    }
    return g;
}

void project_columns(Matrix& H) {
    std::vector<double> col(H.rows());
    for (int j = 0; j < H.cols(); ++j) {
        for (int i = 0; i < H.rows(); ++i) col[i] = H(i, j);
        project_to_simplex(col);
        for (int i = 0; i < H.rows(); ++i) H(i, j) = col[i];
    }
}

// monic characteristic polynomial coefficients c0..cn (Faddeev-LeVerrier)
std::vector<double> char_poly(const Matrix& M) {
    int n = M.rows();
    std::vector<double> c(n + 1, 0.0);
    c[n] = 1.0;
    Matrix A = Matrix::identity(n);
    for (int k = 1; k <= n; ++k) {
        A = M * A;
        double tr = 0.0;
        for (int i = 0; i < n; ++i) tr += A(i, i);
        double ck = -tr / k;
        c[n - k] = ck;
        for (int i = 0; i < n; ++i) A(i, i) += ck;
    }
    return c;
}

// Durand-Kerner: all complex roots of a monic polynomial
std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
    using cd = std::complex<double>;
    int deg = static_cast<int>(c.size()) - 1;
    auto eval = [&](cd x) {
        cd v = c[deg];
        for (int k = deg - 1; k >= 0; --k) v = v * x + c[k];
        return v;
    };
    std::vector<cd> r(deg);
    cd seed(0.4, 0.9);
    r[0] = seed;
    for (int i = 1; i < deg; ++i) r[i] = r[i - 1] * seed;
    for (int it = 0; it < 500; ++it) {
        double moved = 0.0;
        for (int i = 0; i < deg; ++i) {
            cd denom(1.0, 0.0);
            for (int j = 0; j < deg; ++j)
                if (j != i) denom *= r[i] - r[j];
            if (std::abs(denom) < 1e-300) continue;
            cd delta = eval(r[i]) / denom;
            r[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-15) break;
    }
    return r;
}

}  // namespace

RootResult approximate_stochastic_root(const Matrix& M, int p, const RootOptions& opts) {
    if (p < 2)
        throw DomainError("approximate_stochastic_root: p must be >= 2");
    check_column_stochastic(M, "approximate_stochastic_root");
    int n = M.rows();

    int iter = 0;  // shared budget across all phases

    // projected spectral descent (Barzilai-Borwein step, nonmonotone line
    // search) on ||target - H^p||; returns the best value seen and leaves
    // the matching iterate in H
    auto descend = [&](const Matrix& target, Matrix& H, int budget,
                       double stop_tol) {
        double f = metric_value(target, matrix_power(H, p), opts.metric);
        Matrix run_best = H;
        double run_best_f = f;
        double eta = 1.0;
        bool have_prev = false;
        Matrix prev_h, prev_g;
        std::array<double, 8> f_hist;
        f_hist.fill(f);
        for (int used = 0; used < budget && iter < opts.max_iter &&
                           run_best_f > stop_tol;
             ++used) {
            ++iter;
            Matrix Hp = matrix_power(H, p);
            Matrix dB = metric_grad_wrt_power(target, Hp, opts.metric);
            Matrix g = root_gradient(H, p, dB);

            double eta0 = eta;
            if (have_prev) {
                double shsh = 0.0, shsg = 0.0;
                for (std::size_t k = 0; k < g.data().size(); ++k) {
                    double dh = H.data()[k] - prev_h.data()[k];
                    double dg = g.data()[k] - prev_g.data()[k];
                    shsh += dh * dh;
                    shsg += dh * dg;
                }
                if (shsg > 1e-300 && std::isfinite(shsh / shsg))
                    eta0 = std::clamp(shsh / shsg, 1e-12, 1e6);
            }
            prev_h = H;
            prev_g = g;
            have_prev = true;

            // accepting against the recent worst lets the spectral step run
            // at its natural length through ill-conditioned valleys
            double f_ref = f;
            for (double fr : f_hist) f_ref = std::max(f_ref, fr);
            bool accepted = false;
            double step = eta0;
            for (int bt = 0; bt < 60; ++bt) {
                Matrix trial = H;
                for (std::size_t k = 0; k < trial.data().size(); ++k)
                    trial.data()[k] -= step * g.data()[k];
                project_columns(trial);
                double ft =
                    metric_value(target, matrix_power(trial, p), opts.metric);
                if (ft < f_ref) {
                    H = std::move(trial);
                    f = ft;
                    eta = step;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;  // stationary for this start
            f_hist[used % f_hist.size()] = f;
            if (f < run_best_f) {
                run_best_f = f;
                run_best = H;
            }
        }
        H = std::move(run_best);
        return run_best_f;
    };

    auto damped_init = [&](double s) {
        Matrix H(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                H(i, j) = (1.0 - s / p) * (i == j ? 1.0 : 0.0) +
                          (s / p) * M(i, j);
        return H;
    };

    Matrix best = damped_init(1.0);
    double best_f = metric_value(M, matrix_power(best, p), opts.metric);
    auto consider = [&](const Matrix& H, double f) {
        if (f < best_f) {
            best_f = f;
            best = H;
        }
    };

    std::uint64_t rng_state = 0x9e3779b97f4a7c15ull;  // splitmix64
    auto next_unit = [&rng_state] {
        std::uint64_t z = (rng_state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return ((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
    };

    // with distinct eigenvalues every root of M is a polynomial in M, fixed
    // by one p-th-root branch choice per eigenvalue (conjugate pairs take
    // conjugate branches); enumerate those candidates directly
    if (n <= 8) {
        using cd = std::complex<double>;
        auto lam = poly_roots(char_poly(M));
        bool distinct = true;
        for (int i = 0; i < n && distinct; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(lam[i] - lam[j]) < 1e-6) distinct = false;
        if (distinct) {
            // group eigenvalues into reals and conjugate pairs
            std::vector<int> partner(n, -1);
            std::vector<char> used(n, 0);
            std::vector<int> free_idx;
            for (int i = 0; i < n; ++i) {
                if (used[i]) continue;
                used[i] = 1;
                if (std::fabs(lam[i].imag()) < 1e-9) {
                    lam[i] = cd(lam[i].real(), 0.0);
                } else {
                    int mate = -1;
                    double gap = 1e300;
                    for (int j = i + 1; j < n; ++j) {
                        if (used[j]) continue;
                        double d = std::abs(lam[j] - std::conj(lam[i]));
                        if (d < gap) {
                            gap = d;
                            mate = j;
                        }
                    }
                    if (mate < 0) {
                        distinct = false;
                        break;
                    }
                    used[mate] = 1;
                    partner[i] = mate;
                }
                free_idx.push_back(i);
            }
            // Lagrange basis matrices L_i(M) = prod_{j!=i} (M-l_j)/(l_i-l_j)
            std::vector<std::vector<cd>> basis;
            if (distinct) {
                basis.assign(n, std::vector<cd>(n * n));
                for (int e = 0; e < n; ++e) {
                    std::vector<cd> cur(n * n, cd(0.0));
                    for (int i = 0; i < n; ++i) cur[i * n + i] = 1.0;
                    cd denom(1.0);
                    for (int j = 0; j < n; ++j) {
                        if (j == e) continue;
                        denom *= lam[e] - lam[j];
                        std::vector<cd> nxt(n * n, cd(0.0));
                        for (int r = 0; r < n; ++r)
                            for (int k = 0; k < n; ++k) {
                                cd v = cur[r * n + k];
                                if (v == cd(0.0)) continue;
                                for (int col = 0; col < n; ++col)
                                    nxt[r * n + col] +=
                                        v * (cd(M(k, col)) -
                                             (k == col ? lam[j] : cd(0.0)));
                            }
                        cur = std::move(nxt);
                    }
                    for (auto& v : cur) v /= denom;
                    basis[e] = std::move(cur);
                }
            }
            auto branch = [&](cd l, int k) {
                double mag = std::abs(l);
                if (mag < 1e-300) return cd(0.0);
                double ang = (std::arg(l) + 2.0 * std::numbers::pi * k) / p;
                return std::pow(mag, 1.0 / p) * cd(std::cos(ang), std::sin(ang));
            };
            long long combos = 1;
            for (std::size_t s = 0;
                 s < free_idx.size() && combos <= 20000; ++s)
                combos *= p;
            std::vector<int> pick(free_idx.size(), 0);
            for (long long cno = 0;
                 distinct && cno < std::min<long long>(combos, 20000) &&
                 best_f > opts.tol;
                 ++cno) {
                long long rem = cno;
                for (std::size_t s = 0; s < pick.size(); ++s) {
                    pick[s] = static_cast<int>(rem % p);
                    rem /= p;
                }
                std::vector<cd> acc(n * n, cd(0.0));
                for (std::size_t s = 0; s < free_idx.size(); ++s) {
                    int e = free_idx[s];
                    cd w = branch(lam[e], pick[s]);
                    for (int t = 0; t < n * n; ++t) acc[t] += w * basis[e][t];
                    if (partner[e] >= 0) {
                        cd wc = std::conj(w);
                        for (int t = 0; t < n * n; ++t)
                            acc[t] += wc * basis[partner[e]][t];
                    }
                }
                double imag_norm = 0.0;
                for (auto& v : acc)
                    imag_norm = std::max(imag_norm, std::fabs(v.imag()));
                if (imag_norm > 1e-6) continue;
                Matrix H(n, n);
                for (int r = 0; r < n; ++r)
                    for (int col = 0; col < n; ++col)
                        H(r, col) = acc[r * n + col].real();
                project_columns(H);
                consider(H, metric_value(M, matrix_power(H, p), opts.metric));
            }
        }
    }

    // any root of a generic M commutes with M and is therefore a polynomial
    // in M of degree < n; searching the n coefficients first is a tiny
    // problem whose global basin multi-start descent finds reliably
    if (best_f > opts.tol) {
        std::vector<Matrix> mpow;
        mpow.push_back(Matrix::identity(n));
        for (int k = 1; k < n; ++k) mpow.push_back(M * mpow.back());
        auto poly = [&](const std::vector<double>& c) {
            Matrix H(n, n);
            for (int k = 0; k < n; ++k)
                for (std::size_t t = 0; t < H.data().size(); ++t)
                    H.data()[t] += c[k] * mpow[k].data()[t];
            return H;
        };
        auto poly_search = [&](std::vector<double> c, int budget) {
            // keep column sums at 1 by confining steps to sum-zero directions
            double f = metric_value(M, matrix_power(poly(c), p), opts.metric);
            double eta = 1.0;
            bool have_prev = false;
            std::vector<double> pc, pg, g(n);
            for (int used = 0; used < budget && iter < opts.max_iter &&
                               f > opts.tol;
                 ++used) {
                ++iter;
                Matrix H = poly(c);
                Matrix Hp = matrix_power(H, p);
                Matrix dB = metric_grad_wrt_power(M, Hp, opts.metric);
                Matrix dH = root_gradient(H, p, dB);
                double mean = 0.0;
                for (int k = 0; k < n; ++k) {
                    g[k] = 0.0;
                    for (std::size_t t = 0; t < dH.data().size(); ++t)
                        g[k] += dH.data()[t] * mpow[k].data()[t];
                    mean += g[k] / n;
                }
                for (int k = 0; k < n; ++k) g[k] -= mean;
                double eta0 = eta;
                if (have_prev) {
                    double shsh = 0.0, shsg = 0.0;
                    for (int k = 0; k < n; ++k) {
                        shsh += (c[k] - pc[k]) * (c[k] - pc[k]);
                        shsg += (c[k] - pc[k]) * (g[k] - pg[k]);
                    }
                    if (shsg > 1e-300 && std::isfinite(shsh / shsg))
                        eta0 = std::clamp(shsh / shsg, 1e-12, 1e6);
                }
                pc = c;
                pg = g;
                have_prev = true;
                bool accepted = false;
                double step = eta0;
                for (int bt = 0; bt < 60; ++bt) {
                    std::vector<double> trial(n);
                    for (int k = 0; k < n; ++k) trial[k] = c[k] - step * g[k];
                    double ft = metric_value(M, matrix_power(poly(trial), p),
                                             opts.metric);
                    if (ft < f) {
                        c = std::move(trial);
                        f = ft;
                        eta = step;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!accepted) break;
            }
            Matrix H = poly(c);
            project_columns(H);
            consider(H, metric_value(M, matrix_power(H, p), opts.metric));
        };
        std::vector<double> c0(n, 0.0);
        c0[0] = 1.0 - 1.0 / p;
        if (n > 1) c0[1] = 1.0 / p;
        poly_search(c0, 200);
        for (int start = 0; start < 6 * n && best_f > opts.tol; ++start) {
            std::vector<double> c(n);
            double sum = 0.0;
            for (int k = 0; k < n; ++k) sum += c[k] = 2.0 * next_unit() - 1.0;
            for (int k = 0; k < n; ++k) c[k] += (1.0 - sum) / n;
            poly_search(std::move(c), 200);
        }
    }

    // polish the incumbent in full matrix space, then fall back to
    // perturbed restarts with the remaining budget
    Matrix H = best;
    consider(H, descend(M, H, opts.max_iter / 4, opts.tol));
    int restarts = 0;
    while (iter < opts.max_iter && best_f > opts.tol) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                switch (restarts % 3) {
                    case 0:  // jitter around the incumbent
                        H(i, j) = 0.5 * best(i, j) + 0.5 * next_unit();
                        break;
                    case 1:  // fresh random point
                        H(i, j) = next_unit();
                        break;
                    default:  // jitter around the damped-identity init
                        H(i, j) = 0.5 * ((i == j ? 1.0 - 1.0 / p : 0.0) +
                                         M(i, j) / p) +
                                  0.5 * next_unit();
                }
            }
        project_columns(H);
        ++restarts;
        consider(H, descend(M, H, 500, opts.tol));
    }

    RootResult res;
    res.root = std::move(best);
    res.residual = best_f;
    res.iterations = iter;
    res.converged = best_f <= opts.tol;
    return res;
}

void write_operator_csv(std::ostream& out, const StepOperator& op,
                        const ComponentSpec& component) {
    out << "row_cell,col_cell,value\n";
    for (int j = 0; j < op.n; ++j)
        for (const auto& e : op.cols[j])
            out << component.cells[e.row] << ',' << component.cells[j] << ','
                << util::format_double(e.prob) << '\n';
}

}  // namespace odflow
