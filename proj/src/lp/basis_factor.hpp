#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace cfd::lp::detail {

/// Sparse column store for [A | -I].
struct ColumnStore {
    int rows = 0;
    int structurals = 0;
    std::vector<int> start;  // CSC over structural columns
    std::vector<int> index;
    std::vector<double> value;
    // CSR copy for pricing rows of the tableau
    std::vector<int> row_start;
    std::vector<int> row_col;
    std::vector<double> row_value;

    bool is_logical(int j) const { return j >= structurals; }

    template <class F>
    void for_column(int j, F&& f) const {
        if (j >= structurals) {
            f(j - structurals, -1.0);
            return;
        }
        for (int k = start[static_cast<std::size_t>(j)]; k < start[static_cast<std::size_t>(j) + 1]; ++k) {
            f(index[static_cast<std::size_t>(k)], value[static_cast<std::size_t>(k)]);
        }
    }
};

/// LU of the basis matrix plus a product-form eta file of column updates.
/// The sparse solves take a dense vector that is zero outside `nz` and
/// return the positions that may be nonzero in `nz`.
class BasisFactor {
public:
    /// False if the basis is numerically singular.
    bool factorize(const ColumnStore& cols, const std::vector<int>& head);

    void ftran(Eigen::VectorXd& x, std::vector<int>& nz) const;  // x <- B^-1 x
    void btran(Eigen::VectorXd& y, std::vector<int>& nz) const;  // y <- B^-T y
    void ftran(Eigen::VectorXd& x) const;
    void btran(Eigen::VectorXd& y) const;

    /// Replace basis column r; `alpha` is B^-1 times the entering column.
    void update(int r, const Eigen::VectorXd& alpha, const std::vector<int>& nz);

    std::size_t updates() const { return etas_.size(); }

private:
    struct Eta {
        int r = 0;
        double pivot = 1.0;
        std::vector<int> index;
        std::vector<double> value;
    };

    // Compressed adjacency with values, one list per step or row.
    struct Lists {
        std::vector<int> start{0};
        std::vector<int> index;
        std::vector<double> value;
        int begin(int k) const { return start[static_cast<std::size_t>(k)]; }
        int end(int k) const { return start[static_cast<std::size_t>(k) + 1]; }
    };

    // Depth-first reach from the seeds over `next`; fills order_ in post-order.
    template <class Next>
    void reach(const std::vector<int>& seeds, std::vector<int>& mark, Next&& next) const;
    int stamp() const {
        if (++stamp_ == std::numeric_limits<int>::max()) reset_marks();
        return stamp_;
    }
    void reset_marks() const;

    // Left-looking LU with threshold partial pivoting: B(prow, q) = L U.
    // L columns hold original row indices below a unit diagonal, U columns
    // hold earlier step indices above the stored diagonal.
    int m_ = 0;
    std::vector<int> q_;     // step -> basis position
    std::vector<int> qinv_;  // basis position -> step
    std::vector<int> prow_;  // step -> row
    std::vector<int> pinv_;  // row -> step
    Lists l_;                // per step: (row, multiplier)
    Lists u_;                // per step: (earlier step, value)
    Lists lt_;               // per step k: (earlier step j, L(prow k, j))
    Lists ut_;               // per step j: (later step k, U(j, k))
    std::vector<double> udiag_;
    std::vector<Eta> etas_;

    mutable std::vector<double> work_;
    mutable std::vector<int> mark_a_, mark_b_, mark_pos_;
    mutable int stamp_ = 0;
    mutable std::vector<int> order_, seeds_, touched_;
    mutable std::vector<std::pair<int, int>> stack_;
};

}  // namespace cfd::lp::detail
