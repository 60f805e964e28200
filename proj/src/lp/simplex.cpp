#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "basis_factor.hpp"
#include "cfd/kernels/kernels.hpp"
#include "cfd/lp/linear_program.hpp"

namespace cfd::lp {

namespace {

using detail::BasisFactor;
using detail::ColumnStore;
using Eigen::VectorXd;

constexpr std::size_t kStallLimit = 60;

ColumnStore build_columns(const LinearProgram& p) {
    ColumnStore c;
    c.rows = static_cast<int>(p.num_constraints());
    c.structurals = static_cast<int>(p.num_variables());
    std::vector<int> count(static_cast<std::size_t>(c.structurals) + 1, 0);
    c.row_start.assign(static_cast<std::size_t>(c.rows) + 1, 0);
    for (std::size_t i = 0; i < p.num_constraints(); ++i) {
        const auto& row = p.constraint(static_cast<int>(i));
        c.row_start[i + 1] = c.row_start[i] + static_cast<int>(row.terms.size());
        for (const Term& t : row.terms) ++count[static_cast<std::size_t>(t.var) + 1];
    }
    c.start.assign(count.size(), 0);
    for (std::size_t j = 1; j < count.size(); ++j) c.start[j] = c.start[j - 1] + count[j];
    const std::size_t nnz = static_cast<std::size_t>(c.start.back());
    c.index.resize(nnz);
    c.value.resize(nnz);
    c.row_col.resize(nnz);
    c.row_value.resize(nnz);
    std::vector<int> fill(c.start.begin(), c.start.end() - 1);
    for (std::size_t i = 0; i < p.num_constraints(); ++i) {
        const auto& row = p.constraint(static_cast<int>(i));
        std::size_t k = static_cast<std::size_t>(c.row_start[i]);
        for (const Term& t : row.terms) {
            const auto at = static_cast<std::size_t>(fill[static_cast<std::size_t>(t.var)]++);
            c.index[at] = static_cast<int>(i);
            c.value[at] = t.coef;
            c.row_col[k] = t.var;
            c.row_value[k] = t.coef;
            ++k;
        }
    }
    return c;
}

// Deterministic pseudo-random value in [0, 1) for cost perturbation.
double unit_hash(std::uint64_t j) {
    j += 0x9E3779B97F4A7C15ull;
    j = (j ^ (j >> 30)) * 0xBF58476D1CE4E5B9ull;
    j = (j ^ (j >> 27)) * 0x94D049BB133111EBull;
    j ^= j >> 31;
    return static_cast<double>(j >> 11) * 0x1.0p-53;
}

class Simplex {
public:
    Simplex(const LinearProgram& p, const SolverOptions& opt) : p_(p), opt_(opt), cols_(build_columns(p)) {
        m_ = cols_.rows;
        n_ = cols_.structurals;
        const std::size_t total = static_cast<std::size_t>(n_ + m_);
        lo_.resize(total);
        hi_.resize(total);
        cost_.assign(total, 0.0);
        true_cost_.assign(total, 0.0);
        for (int j = 0; j < n_; ++j) {
            const auto& v = p.variable(j);
            lo_[static_cast<std::size_t>(j)] = v.lower;
            hi_[static_cast<std::size_t>(j)] = v.upper;
            true_cost_[static_cast<std::size_t>(j)] = v.cost;
        }
        for (int i = 0; i < m_; ++i) {
            const auto& c = p.constraint(i);
            const std::size_t s = static_cast<std::size_t>(n_ + i);
            lo_[s] = c.sense == Sense::LessEqual ? -kInf : c.rhs;
            hi_[s] = c.sense == Sense::GreaterEqual ? kInf : c.rhs;
        }
        max_iter_ = opt.max_iterations ? opt.max_iterations : 50 * total + 10000;
        row_alpha_.assign(total, 0.0);
        in_row_.assign(total, 0);
        alpha_ = VectorXd::Zero(m_);
        rho_ = VectorXd::Zero(m_);
    }

    LpSolution run() {
        LpSolution sol;
        sol.nodes = 1;
        if (!initial_basis()) {
            sol.status = Status::Infeasible;
            return sol;
        }
        Status st = dual_phase();
        if (st == Status::Optimal) {
            cost_ = true_cost_;
            st = primal_phase();
        }
        sol.status = st;
        sol.iterations = iterations_;
        if (st == Status::Optimal) {
            sol.x.assign(x_.begin(), x_.begin() + n_);
            polish(sol.x);
            sol.objective = p_.objective(sol.x);
        }
        return sol;
    }

private:
    bool is_fixed(std::size_t j) const { return lo_[j] == hi_[j]; }
    bool is_free(std::size_t j) const { return lo_[j] == -kInf && hi_[j] == kInf; }

    bool initial_basis() {
        const std::size_t total = static_cast<std::size_t>(n_ + m_);
        x_.assign(total, 0.0);
        pos_.assign(total, -1);
        head_.resize(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i) {
            head_[static_cast<std::size_t>(i)] = n_ + i;
            pos_[static_cast<std::size_t>(n_ + i)] = i;
        }
        // Place structurals at the bound their cost prefers; where that bound
        // is infinite the cost is zeroed for the dual phase (restored later).
        for (int jj = 0; jj < n_; ++jj) {
            const std::size_t j = static_cast<std::size_t>(jj);
            const double c = true_cost_[j];
            double cj = c;
            if (c > 0.0) {
                if (lo_[j] != -kInf) {
                    x_[j] = lo_[j];
                } else {
                    cj = 0.0;
                    x_[j] = hi_[j] != kInf ? hi_[j] : 0.0;
                }
            } else if (c < 0.0) {
                if (hi_[j] != kInf) {
                    x_[j] = hi_[j];
                } else {
                    cj = 0.0;
                    x_[j] = lo_[j] != -kInf ? lo_[j] : 0.0;
                }
            } else {
                x_[j] = lo_[j] != -kInf ? lo_[j] : (hi_[j] != kInf ? hi_[j] : 0.0);
            }
            // small deterministic perturbation against dual degeneracy
            if (!is_fixed(j) && !is_free(j)) {
                const double eps = 1e-7 * (1.0 + std::abs(cj)) * (0.5 + unit_hash(j));
                if (x_[j] == lo_[j]) cj += eps;
                else if (x_[j] == hi_[j]) cj -= eps;
            }
            cost_[j] = cj;
        }
        return refactor();
    }

    bool refactor() {
        if (!factor_.factorize(cols_, head_)) return false;
        compute_basic_values();
        compute_duals();
        return true;
    }

    void compute_basic_values() {
        VectorXd rhs = VectorXd::Zero(m_);
        for (int j = 0; j < n_ + m_; ++j) {
            if (pos_[static_cast<std::size_t>(j)] >= 0) continue;
            const double v = x_[static_cast<std::size_t>(j)];
            if (v == 0.0) continue;
            cols_.for_column(j, [&](int i, double a) { rhs[i] -= a * v; });
        }
        factor_.ftran(rhs);
        xb_.resize(static_cast<std::size_t>(m_));
        lb_.resize(static_cast<std::size_t>(m_));
        ub_.resize(static_cast<std::size_t>(m_));
        for (int r = 0; r < m_; ++r) {
            const std::size_t j = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
            xb_[static_cast<std::size_t>(r)] = rhs[r];
            x_[j] = rhs[r];
            lb_[static_cast<std::size_t>(r)] = lo_[j];
            ub_[static_cast<std::size_t>(r)] = hi_[j];
        }
        infeasible_.clear();
        listed_.assign(static_cast<std::size_t>(m_), 0);
        for (int r = 0; r < m_; ++r) note_row(r);
    }

    double violation(std::size_t k) const { return std::max(lb_[k] - xb_[k], xb_[k] - ub_[k]); }

    // Adds a basic row to the candidate list of the dual pricing if it is
    // out of bounds; entries back in bounds are dropped lazily.
    void note_row(int r) {
        const std::size_t k = static_cast<std::size_t>(r);
        if (!listed_[k] && violation(k) > opt_.feasibility_tol) {
            listed_[k] = 1;
            infeasible_.push_back(r);
        }
    }

    // Row with the largest bound violation above the tolerance (lowest index
    // on ties), or -1.
    int most_infeasible_row() {
        int best = -1;
        double amount = opt_.feasibility_tol;
        std::size_t keep = 0;
        for (int r : infeasible_) {
            const std::size_t k = static_cast<std::size_t>(r);
            const double v = violation(k);
            if (v <= opt_.feasibility_tol) {
                listed_[k] = 0;
                continue;
            }
            infeasible_[keep++] = r;
            if (v > amount || (v == amount && r < best)) {
                amount = v;
                best = r;
            }
        }
        infeasible_.resize(keep);
        return best;
    }

    void compute_duals() {
        VectorXd y(m_);
        for (int r = 0; r < m_; ++r) y[r] = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])];
        factor_.btran(y);
        d_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
        for (int j = 0; j < n_ + m_; ++j) {
            if (pos_[static_cast<std::size_t>(j)] >= 0) continue;
            double dj = cost_[static_cast<std::size_t>(j)];
            cols_.for_column(j, [&](int i, double a) { dj -= a * y[i]; });
            d_[static_cast<std::size_t>(j)] = dj;
        }
    }

    // alpha_ <- B^-1 a_j, nonzeros listed in alpha_nz_.
    void column(int j) {
        for (int k : alpha_nz_) alpha_[k] = 0.0;
        alpha_nz_.clear();
        cols_.for_column(j, [&](int i, double v) {
            alpha_[i] = v;
            alpha_nz_.push_back(i);
        });
        factor_.ftran(alpha_, alpha_nz_);
    }

    // xb <- xb - t alpha_, keeping x_ in step.
    void shift_basics(double t) {
        if (alpha_nz_.size() > static_cast<std::size_t>(m_) / 4) {
            kernels::axpy(-t, std::span<const double>(alpha_.data(), static_cast<std::size_t>(m_)), xb_);
        } else {
            for (int k : alpha_nz_) xb_[static_cast<std::size_t>(k)] -= t * alpha_[k];
        }
        for (int k : alpha_nz_) {
            x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(k)])] = xb_[static_cast<std::size_t>(k)];
            note_row(k);
        }
    }

    // alpha_j = (row r of B^-1) . a_j over nonbasic columns, sparse.
    void tableau_row(int r) {
        for (int j : row_nz_) {
            row_alpha_[static_cast<std::size_t>(j)] = 0.0;
            in_row_[static_cast<std::size_t>(j)] = 0;
        }
        row_nz_.clear();
        rho_nz_.assign(1, r);
        rho_[r] = 1.0;
        factor_.btran(rho_, rho_nz_);
        for (int i : rho_nz_) {
            const double ri = rho_[i];
            rho_[i] = 0.0;
            if (std::abs(ri) < 1e-13) continue;
            for (int k = cols_.row_start[static_cast<std::size_t>(i)]; k < cols_.row_start[static_cast<std::size_t>(i) + 1]; ++k) {
                const std::size_t j = static_cast<std::size_t>(cols_.row_col[static_cast<std::size_t>(k)]);
                if (!in_row_[j]) {
                    in_row_[j] = 1;
                    row_nz_.push_back(static_cast<int>(j));
                }
                row_alpha_[j] += ri * cols_.row_value[static_cast<std::size_t>(k)];
            }
            const std::size_t s = static_cast<std::size_t>(n_ + i);
            row_alpha_[s] = -ri;
            in_row_[s] = 1;
            row_nz_.push_back(static_cast<int>(s));
        }
    }

    void pivot(int r, int q, double leaving_value) {
        const std::size_t p = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
        x_[p] = leaving_value;
        pos_[p] = -1;
        head_[static_cast<std::size_t>(r)] = q;
        pos_[static_cast<std::size_t>(q)] = r;
        xb_[static_cast<std::size_t>(r)] = x_[static_cast<std::size_t>(q)];
        lb_[static_cast<std::size_t>(r)] = lo_[static_cast<std::size_t>(q)];
        ub_[static_cast<std::size_t>(r)] = hi_[static_cast<std::size_t>(q)];
        factor_.update(r, alpha_, alpha_nz_);
        note_row(r);
    }

    bool maybe_refactor() {
        if (factor_.updates() < opt_.refactor_interval) return true;
        return refactor();
    }

    Status dual_phase() {
        const double ftol = opt_.feasibility_tol;
        const double dtol = opt_.optimality_tol;
        std::size_t stall = 0;
        while (true) {
            if (!maybe_refactor()) return Status::Infeasible;
            if (iterations_ >= max_iter_) return Status::IterationLimit;
            const bool bland = stall > kStallLimit;

            // leaving row
            int r = -1;
            if (!bland) {
                r = most_infeasible_row();
            } else {
                int best_var = n_ + m_;
                for (int k = 0; k < m_; ++k) {
                    const std::size_t kk = static_cast<std::size_t>(k);
                    if (xb_[kk] < lb_[kk] - ftol || xb_[kk] > ub_[kk] + ftol) {
                        if (head_[kk] < best_var) {
                            best_var = head_[kk];
                            r = k;
                        }
                    }
                }
            }
            if (r < 0) {
                // confirm against freshly computed values before declaring optimality
                if (factor_.updates() > 0) {
                    if (!refactor()) return Status::Infeasible;
                    if (kernels::max_bound_violation(xb_, lb_, ub_, ftol).index >= 0) continue;
                }
                return Status::Optimal;
            }
            const std::size_t rr = static_cast<std::size_t>(r);
            const bool to_upper = xb_[rr] > ub_[rr];
            const double bound = to_upper ? ub_[rr] : lb_[rr];
            const double s = to_upper ? 1.0 : -1.0;

            tableau_row(r);

            // Harris ratio test on the dual step
            int q = -1;
            double tmax = kInf;
            for (int j : row_nz_) {
                const std::size_t jj = static_cast<std::size_t>(j);
                if (pos_[jj] >= 0 || is_fixed(jj)) continue;
                const double a = s * row_alpha_[jj];
                if (std::abs(a) <= opt_.pivot_tol) continue;
                double slack;
                if (is_free(jj)) {
                    slack = 0.0;
                } else if (x_[jj] == lo_[jj]) {
                    if (a <= 0.0) continue;
                    slack = d_[jj];
                } else {
                    if (a >= 0.0) continue;
                    slack = -d_[jj];
                }
                slack = std::max(slack, 0.0);
                const double ratio = bland ? slack / std::abs(a) : (slack + dtol) / std::abs(a);
                if (bland) {
                    if (ratio < tmax - 1e-12 || (ratio <= tmax + 1e-12 && (q < 0 || j < q))) {
                        tmax = std::min(tmax, ratio);
                        q = j;
                    }
                } else {
                    tmax = std::min(tmax, ratio);
                }
            }
            if (!bland) {
                double best = 0.0;
                for (int j : row_nz_) {
                    const std::size_t jj = static_cast<std::size_t>(j);
                    if (pos_[jj] >= 0 || is_fixed(jj)) continue;
                    const double a = s * row_alpha_[jj];
                    if (std::abs(a) <= opt_.pivot_tol) continue;
                    double slack;
                    if (is_free(jj)) {
                        slack = 0.0;
                    } else if (x_[jj] == lo_[jj]) {
                        if (a <= 0.0) continue;
                        slack = d_[jj];
                    } else {
                        if (a >= 0.0) continue;
                        slack = -d_[jj];
                    }
                    slack = std::max(slack, 0.0);
                    if (slack / std::abs(a) <= tmax && (std::abs(a) > best || (std::abs(a) == best && j < q))) {
                        best = std::abs(a);
                        q = j;
                    }
                }
            }
            if (q < 0) return Status::Infeasible;
            const std::size_t qq = static_cast<std::size_t>(q);

            column(q);
            const double arq = alpha_[r];
            if (std::abs(arq) <= opt_.pivot_tol) {
                // row and column disagree: refresh the factorization and retry
                if (factor_.updates() == 0) return Status::Infeasible;
                if (!refactor()) return Status::Infeasible;
                continue;
            }

            // dual update
            const double theta_d = d_[qq] / row_alpha_[qq];
            for (int j : row_nz_) {
                const std::size_t jj = static_cast<std::size_t>(j);
                if (pos_[jj] >= 0) continue;
                d_[jj] -= theta_d * row_alpha_[jj];
            }
            const std::size_t leaving = static_cast<std::size_t>(head_[rr]);
            d_[leaving] = -theta_d;
            d_[qq] = 0.0;

            // primal update
            const double theta_p = (xb_[rr] - bound) / arq;
            x_[qq] += theta_p;
            shift_basics(theta_p);
            pivot(r, q, bound);

            stall = std::abs(theta_d) > 1e-12 ? 0 : stall + 1;
            ++iterations_;
        }
    }

    Status primal_phase() {
        compute_duals();
        const double dtol = opt_.optimality_tol;
        const double ftol = opt_.feasibility_tol;
        std::size_t stall = 0;
        while (true) {
            if (!maybe_refactor()) return Status::Infeasible;
            if (iterations_ >= max_iter_) return Status::IterationLimit;
            const bool bland = stall > kStallLimit;

            // entering column
            int q = -1;
            double best = dtol;
            for (int j = 0; j < n_ + m_; ++j) {
                const std::size_t jj = static_cast<std::size_t>(j);
                if (pos_[jj] >= 0 || is_fixed(jj)) continue;
                const double dj = d_[jj];
                double gain = 0.0;
                if (dj < -dtol && x_[jj] < hi_[jj]) gain = -dj;
                else if (dj > dtol && x_[jj] > lo_[jj]) gain = dj;
                if (gain <= 0.0) continue;
                if (bland) {
                    q = j;
                    break;
                }
                if (gain > best) {
                    best = gain;
                    q = j;
                }
            }
            if (q < 0) {
                if (factor_.updates() > 0) {
                    if (!refactor()) return Status::Infeasible;
                    compute_duals();
                    bool again = false;
                    for (int j = 0; j < n_ + m_ && !again; ++j) {
                        const std::size_t jj = static_cast<std::size_t>(j);
                        if (pos_[jj] >= 0 || is_fixed(jj)) continue;
                        again = (d_[jj] < -dtol && x_[jj] < hi_[jj]) || (d_[jj] > dtol && x_[jj] > lo_[jj]);
                    }
                    if (again) continue;
                }
                return Status::Optimal;
            }
            const std::size_t qq = static_cast<std::size_t>(q);
            const double dir = d_[qq] < 0.0 ? 1.0 : -1.0;
            column(q);
            const VectorXd& alpha_q = alpha_;

            // Harris ratio test over basic variables; rate of xb[k] is -dir*alpha_q[k]
            double tmax = hi_[qq] - lo_[qq];
            double relaxed = kInf;
            for (int k : alpha_nz_) {
                const std::size_t kk = static_cast<std::size_t>(k);
                const double g = -dir * alpha_q[k];
                if (g < -opt_.pivot_tol && lb_[kk] != -kInf) {
                    relaxed = std::min(relaxed, (xb_[kk] - lb_[kk] + (bland ? 0.0 : ftol)) / -g);
                } else if (g > opt_.pivot_tol && ub_[kk] != kInf) {
                    relaxed = std::min(relaxed, (ub_[kk] - xb_[kk] + (bland ? 0.0 : ftol)) / g);
                }
            }
            int r = -1;
            double step = kInf;
            double pick = 0.0;
            for (int k : alpha_nz_) {
                const std::size_t kk = static_cast<std::size_t>(k);
                const double g = -dir * alpha_q[k];
                double lim;
                if (g < -opt_.pivot_tol && lb_[kk] != -kInf) {
                    lim = (xb_[kk] - lb_[kk]) / -g;
                } else if (g > opt_.pivot_tol && ub_[kk] != kInf) {
                    lim = (ub_[kk] - xb_[kk]) / g;
                } else {
                    continue;
                }
                if (lim > relaxed) continue;
                const bool better = bland ? (r < 0 || lim < step - 1e-12 ||
                                             (lim <= step + 1e-12 && head_[kk] < head_[static_cast<std::size_t>(r)]))
                                          : std::abs(g) > pick;
                if (better) {
                    pick = std::abs(g);
                    step = lim;
                    r = k;
                }
            }
            step = std::max(step, 0.0);
            if (r < 0 && tmax == kInf) return Status::Unbounded;
            if (r < 0 || tmax <= step) {
                // bound flip of the entering variable
                const double delta = dir * tmax;
                x_[qq] = dir > 0 ? hi_[qq] : lo_[qq];
                shift_basics(delta);
                stall = 0;
                ++iterations_;
                continue;
            }
            const std::size_t rr = static_cast<std::size_t>(r);
            const double g = -dir * alpha_q[r];
            const double leaving_value = g < 0.0 ? lb_[rr] : ub_[rr];
            const double delta = dir * step;

            tableau_row(r);
            const double theta_d = d_[qq] / alpha_q[r];
            for (int j : row_nz_) {
                const std::size_t jj = static_cast<std::size_t>(j);
                if (pos_[jj] >= 0) continue;
                d_[jj] -= theta_d * row_alpha_[jj];
            }
            d_[static_cast<std::size_t>(head_[rr])] = -theta_d;
            d_[qq] = 0.0;

            x_[qq] += delta;
            shift_basics(delta);
            pivot(r, q, leaving_value);
            stall = step > 1e-12 ? 0 : stall + 1;
            ++iterations_;
        }
    }

    // Snap values within tolerance of a bound onto it.
    void polish(std::vector<double>& x) const {
        for (int jj = 0; jj < n_; ++jj) {
            const std::size_t j = static_cast<std::size_t>(jj);
            if (x[j] < lo_[j]) x[j] = lo_[j];
            if (x[j] > hi_[j]) x[j] = hi_[j];
        }
    }

    const LinearProgram& p_;
    SolverOptions opt_;
    ColumnStore cols_;
    int m_ = 0;
    int n_ = 0;
    std::vector<double> lo_, hi_, cost_, true_cost_;
    std::vector<double> x_;   // all variables
    std::vector<double> d_;   // reduced costs of nonbasic variables
    std::vector<int> head_;   // basis position -> variable
    std::vector<int> pos_;    // variable -> basis position or -1
    std::vector<double> xb_, lb_, ub_;
    std::vector<int> infeasible_;  // superset of the out-of-bounds rows
    std::vector<char> listed_;
    std::vector<double> row_alpha_;
    std::vector<char> in_row_;
    std::vector<int> row_nz_;
    VectorXd alpha_;  // B^-1 a_q, zero outside alpha_nz_
    std::vector<int> alpha_nz_;
    VectorXd rho_;    // row of B^-1, zero between uses
    std::vector<int> rho_nz_;
    BasisFactor factor_;
    std::size_t iterations_ = 0;
    std::size_t max_iter_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& p, const SolverOptions& opt) {
    p.validate();
    return Simplex(p, opt).run();
}

}  // namespace cfd::lp
