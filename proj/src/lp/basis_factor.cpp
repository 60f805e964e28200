#include "basis_factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cfd::lp::detail {

namespace {

constexpr double kPivotThreshold = 0.1;
constexpr double kSingular = 1e-11;
constexpr double kDrop = 1e-14;

}  // namespace

void BasisFactor::reset_marks() const {
    std::fill(mark_a_.begin(), mark_a_.end(), 0);
    std::fill(mark_b_.begin(), mark_b_.end(), 0);
    std::fill(mark_pos_.begin(), mark_pos_.end(), 0);
    stamp_ = 1;
}

template <class Next>
void BasisFactor::reach(const std::vector<int>& seeds, std::vector<int>& mark, Next&& next) const {
    const int s = stamp();
    order_.clear();
    for (int root : seeds) {
        if (mark[static_cast<std::size_t>(root)] == s) continue;
        mark[static_cast<std::size_t>(root)] = s;
        stack_.emplace_back(root, -1);
        while (!stack_.empty()) {
            auto& [node, pos] = stack_.back();
            const int child = next(node, pos, mark, s);
            if (child >= 0) {
                mark[static_cast<std::size_t>(child)] = s;
                stack_.emplace_back(child, -1);
            } else {
                order_.push_back(node);
                stack_.pop_back();
            }
        }
    }
}

bool BasisFactor::factorize(const ColumnStore& cols, const std::vector<int>& head) {
    const int m = cols.rows;
    m_ = m;
    etas_.clear();
    const auto um = static_cast<std::size_t>(m);
    q_.resize(um);
    qinv_.resize(um);
    prow_.assign(um, -1);
    pinv_.assign(um, -1);
    l_ = Lists{};
    u_ = Lists{};
    udiag_.assign(um, 0.0);
    work_.assign(um, 0.0);
    mark_a_.assign(um, 0);
    mark_b_.assign(um, 0);
    mark_pos_.assign(um, 0);
    stamp_ = 0;
    if (m == 0) return true;

    // basis columns in CSC form
    std::vector<int> bstart(um + 1, 0), brow;
    std::vector<double> bval;
    std::vector<int> row_count(um, 0);
    for (int r = 0; r < m; ++r) {
        cols.for_column(head[static_cast<std::size_t>(r)], [&](int i, double v) {
            brow.push_back(i);
            bval.push_back(v);
            ++row_count[static_cast<std::size_t>(i)];
        });
        bstart[static_cast<std::size_t>(r) + 1] = static_cast<int>(brow.size());
    }
    // Sparsest columns first (stable counting sort); basis matrices here are
    // close to triangular.
    {
        const auto len = [&](int r) {
            return static_cast<std::size_t>(bstart[static_cast<std::size_t>(r) + 1] - bstart[static_cast<std::size_t>(r)]);
        };
        std::size_t longest = 0;
        for (int r = 0; r < m; ++r) longest = std::max(longest, len(r));
        std::vector<int> first(longest + 2, 0);
        for (int r = 0; r < m; ++r) ++first[len(r) + 1];
        for (std::size_t k = 1; k < first.size(); ++k) first[k] += first[k - 1];
        for (int r = 0; r < m; ++r) q_[static_cast<std::size_t>(first[len(r)]++)] = r;
    }
    for (int k = 0; k < m; ++k) qinv_[static_cast<std::size_t>(q_[static_cast<std::size_t>(k)])] = k;

    std::vector<double>& x = work_;
    // row -> rows it updates through its L column
    const auto next_row = [&](int row, int& pos, std::vector<int>& mark, int s) {
        const int j = pinv_[static_cast<std::size_t>(row)];
        if (j < 0) return -1;
        if (pos < 0) pos = l_.begin(j);
        for (; pos < l_.end(j); ++pos) {
            const int child = l_.index[static_cast<std::size_t>(pos)];
            if (mark[static_cast<std::size_t>(child)] != s) return child;
        }
        return -1;
    };
    for (int k = 0; k < m; ++k) {
        const int col = q_[static_cast<std::size_t>(k)];
        seeds_.clear();
        for (int p = bstart[static_cast<std::size_t>(col)]; p < bstart[static_cast<std::size_t>(col) + 1]; ++p) {
            x[static_cast<std::size_t>(brow[static_cast<std::size_t>(p)])] = bval[static_cast<std::size_t>(p)];
            seeds_.push_back(brow[static_cast<std::size_t>(p)]);
        }
        reach(seeds_, mark_a_, next_row);
        // sparse triangular solve in topological order
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            const int j = pinv_[static_cast<std::size_t>(*it)];
            if (j < 0) continue;
            const double xj = x[static_cast<std::size_t>(*it)];
            if (xj == 0.0) continue;
            for (int p = l_.begin(j); p < l_.end(j); ++p) {
                x[static_cast<std::size_t>(l_.index[static_cast<std::size_t>(p)])] -= l_.value[static_cast<std::size_t>(p)] * xj;
            }
        }
        double big = 0.0;
        for (int row : order_) {
            if (pinv_[static_cast<std::size_t>(row)] < 0) big = std::max(big, std::abs(x[static_cast<std::size_t>(row)]));
        }
        if (big < kSingular) {
            for (int row : order_) x[static_cast<std::size_t>(row)] = 0.0;
            return false;
        }
        // among acceptable pivots prefer the sparsest original row
        int piv = -1;
        for (int row : order_) {
            const auto ur = static_cast<std::size_t>(row);
            if (pinv_[ur] >= 0 || std::abs(x[ur]) < kPivotThreshold * big) continue;
            if (piv < 0 || row_count[ur] < row_count[static_cast<std::size_t>(piv)]) piv = row;
        }
        const double d = x[static_cast<std::size_t>(piv)];
        udiag_[static_cast<std::size_t>(k)] = d;
        for (int row : order_) {
            const auto ur = static_cast<std::size_t>(row);
            const double v = x[ur];
            x[ur] = 0.0;
            if (row == piv || std::abs(v) < kDrop) continue;
            if (pinv_[ur] >= 0) {
                u_.index.push_back(pinv_[ur]);
                u_.value.push_back(v);
            } else {
                l_.index.push_back(row);
                l_.value.push_back(v / d);
            }
        }
        l_.start.push_back(static_cast<int>(l_.index.size()));
        u_.start.push_back(static_cast<int>(u_.index.size()));
        prow_[static_cast<std::size_t>(k)] = piv;
        pinv_[static_cast<std::size_t>(piv)] = k;
    }

    // transposed copies for the push-form solves of btran
    const auto transpose = [&](const Lists& in, bool rows_are_orig) {
        Lists out;
        out.start.assign(um + 1, 0);
        for (int idx : in.index) {
            const int t = rows_are_orig ? pinv_[static_cast<std::size_t>(idx)] : idx;
            ++out.start[static_cast<std::size_t>(t) + 1];
        }
        for (std::size_t k = 0; k < um; ++k) out.start[k + 1] += out.start[k];
        out.index.resize(in.index.size());
        out.value.resize(in.index.size());
        std::vector<int> fill(out.start.begin(), out.start.end() - 1);
        for (int k = 0; k < m; ++k) {
            for (int p = in.begin(k); p < in.end(k); ++p) {
                const int idx = in.index[static_cast<std::size_t>(p)];
                const int t = rows_are_orig ? pinv_[static_cast<std::size_t>(idx)] : idx;
                const auto at = static_cast<std::size_t>(fill[static_cast<std::size_t>(t)]++);
                out.index[at] = k;
                out.value[at] = in.value[static_cast<std::size_t>(p)];
            }
        }
        return out;
    };
    lt_ = transpose(l_, true);
    ut_ = transpose(u_, false);
    return true;
}

void BasisFactor::ftran(Eigen::VectorXd& x, std::vector<int>& nz) const {
    if (m_ == 0) return;
    // L solve over the rows reachable from the nonzeros
    seeds_.clear();
    for (int row : nz) {
        if (x[row] != 0.0) seeds_.push_back(row);
    }
    reach(seeds_, mark_a_, [&](int row, int& pos, std::vector<int>& mark, int s) {
        const int k = pinv_[static_cast<std::size_t>(row)];
        if (pos < 0) pos = l_.begin(k);
        for (; pos < l_.end(k); ++pos) {
            const int child = l_.index[static_cast<std::size_t>(pos)];
            if (mark[static_cast<std::size_t>(child)] != s) return child;
        }
        return -1;
    });
    std::vector<double>& z = work_;
    seeds_.clear();
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        const int row = *it;
        const double v = x[row];
        x[row] = 0.0;
        if (v == 0.0) continue;
        const int k = pinv_[static_cast<std::size_t>(row)];
        z[static_cast<std::size_t>(k)] = v;
        seeds_.push_back(k);
        for (int p = l_.begin(k); p < l_.end(k); ++p) {
            x[l_.index[static_cast<std::size_t>(p)]] -= l_.value[static_cast<std::size_t>(p)] * v;
        }
    }
    // U solve, later steps first
    reach(seeds_, mark_b_, [&](int k, int& pos, std::vector<int>& mark, int s) {
        if (pos < 0) pos = u_.begin(k);
        for (; pos < u_.end(k); ++pos) {
            const int child = u_.index[static_cast<std::size_t>(pos)];
            if (mark[static_cast<std::size_t>(child)] != s) return child;
        }
        return -1;
    });
    nz.clear();
    const int ps = stamp();
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        const auto k = static_cast<std::size_t>(*it);
        const double y = z[k] / udiag_[k];
        z[k] = 0.0;
        if (y == 0.0) continue;
        for (int p = u_.begin(*it); p < u_.end(*it); ++p) {
            z[static_cast<std::size_t>(u_.index[static_cast<std::size_t>(p)])] -= u_.value[static_cast<std::size_t>(p)] * y;
        }
        const int pos = q_[k];
        x[pos] = y;
        nz.push_back(pos);
        mark_pos_[static_cast<std::size_t>(pos)] = ps;
    }
    for (const Eta& e : etas_) {
        double xr = x[e.r];
        if (xr == 0.0) continue;
        xr /= e.pivot;
        x[e.r] = xr;
        for (std::size_t k = 0; k < e.index.size(); ++k) {
            const int i = e.index[k];
            if (mark_pos_[static_cast<std::size_t>(i)] != ps) {
                mark_pos_[static_cast<std::size_t>(i)] = ps;
                nz.push_back(i);
            }
            x[i] -= e.value[k] * xr;
        }
    }
}

void BasisFactor::btran(Eigen::VectorXd& y, std::vector<int>& nz) const {
    if (m_ == 0) return;
    const int ps = stamp();
    for (int p : nz) mark_pos_[static_cast<std::size_t>(p)] = ps;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double acc = y[it->r];
        for (std::size_t k = 0; k < it->index.size(); ++k) acc -= y[it->index[k]] * it->value[k];
        acc /= it->pivot;
        y[it->r] = acc;
        if (acc != 0.0 && mark_pos_[static_cast<std::size_t>(it->r)] != ps) {
            mark_pos_[static_cast<std::size_t>(it->r)] = ps;
            nz.push_back(it->r);
        }
    }
    std::vector<double>& w = work_;
    seeds_.clear();
    for (int p : nz) {
        const double v = y[p];
        y[p] = 0.0;
        if (v == 0.0) continue;
        const int k = qinv_[static_cast<std::size_t>(p)];
        w[static_cast<std::size_t>(k)] = v;
        seeds_.push_back(k);
    }
    // U^T solve, earlier steps first
    reach(seeds_, mark_a_, [&](int j, int& pos, std::vector<int>& mark, int s) {
        if (pos < 0) pos = ut_.begin(j);
        for (; pos < ut_.end(j); ++pos) {
            const int child = ut_.index[static_cast<std::size_t>(pos)];
            if (mark[static_cast<std::size_t>(child)] != s) return child;
        }
        return -1;
    });
    seeds_.clear();
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        const auto j = static_cast<std::size_t>(*it);
        const double v = w[j] / udiag_[j];
        w[j] = v;
        if (v == 0.0) continue;
        seeds_.push_back(*it);
        for (int p = ut_.begin(*it); p < ut_.end(*it); ++p) {
            w[static_cast<std::size_t>(ut_.index[static_cast<std::size_t>(p)])] -= ut_.value[static_cast<std::size_t>(p)] * v;
        }
    }
    // L^T solve, later steps first
    reach(seeds_, mark_b_, [&](int k, int& pos, std::vector<int>& mark, int s) {
        if (pos < 0) pos = lt_.begin(k);
        for (; pos < lt_.end(k); ++pos) {
            const int child = lt_.index[static_cast<std::size_t>(pos)];
            if (mark[static_cast<std::size_t>(child)] != s) return child;
        }
        return -1;
    });
    nz.clear();
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        const auto k = static_cast<std::size_t>(*it);
        const double t = w[k];
        w[k] = 0.0;
        if (t == 0.0) continue;
        for (int p = lt_.begin(*it); p < lt_.end(*it); ++p) {
            w[static_cast<std::size_t>(lt_.index[static_cast<std::size_t>(p)])] -= lt_.value[static_cast<std::size_t>(p)] * t;
        }
        const int row = prow_[k];
        y[row] = t;
        nz.push_back(row);
    }
}

void BasisFactor::ftran(Eigen::VectorXd& x) const {
    std::vector<int> nz(static_cast<std::size_t>(x.size()));
    std::iota(nz.begin(), nz.end(), 0);
    ftran(x, nz);
}

void BasisFactor::btran(Eigen::VectorXd& y) const {
    std::vector<int> nz(static_cast<std::size_t>(y.size()));
    std::iota(nz.begin(), nz.end(), 0);
    btran(y, nz);
}

void BasisFactor::update(int r, const Eigen::VectorXd& alpha, const std::vector<int>& nz) {
    Eta e;
    e.r = r;
    e.pivot = alpha[r];
    for (int i : nz) {
        if (i != r && std::abs(alpha[i]) > kDrop) {
            e.index.push_back(i);
            e.value.push_back(alpha[i]);
        }
    }
    etas_.push_back(std::move(e));
}

}  // namespace cfd::lp::detail
