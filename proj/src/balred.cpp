#include "thermred/balred.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <exception>
#include <vector>

namespace thermred::balred {

namespace {

constexpr double kMinimalityCut = 1e-12;  // hsv below cut * hsv(0): not balanceable
constexpr double kClusterGap = 1e-10;     // near-equal hsv cluster at a split point

bool is_diagonal(const Matrix& a) {
    const Index n = a.rows();
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            if (i != j && a(i, j) != 0.0) {
                return false;
            }
        }
    }
    return true;
}

// Start indices of the 1x1/2x2 diagonal blocks of an upper quasi-triangular
// real Schur factor.
std::vector<Index> schur_block_starts(const Matrix& t) {
    std::vector<Index> starts;
    const Index n = t.rows();
    Index i = 0;
    while (i < n) {
        starts.push_back(i);
        i += (i + 1 < n && t(i + 1, i) != 0.0) ? 2 : 1;
    }
    return starts;
}

// Solves T_ii X + X T_jjᵀ = R for blocks of size <= 2 via the Kronecker form
// (I ⊗ T_ii + T_jj ⊗ I) vec(X) = vec(R).
Matrix solve_block_sylvester(const Eigen::Ref<const Matrix>& tii,
                             const Eigen::Ref<const Matrix>& tjj,
                             const Matrix& rhs) {
    const Index p = tii.rows();
    const Index q = tjj.rows();
    Matrix k = Matrix::Zero(p * q, p * q);
    for (Index b = 0; b < q; ++b) {
        k.block(b * p, b * p, p, p) = tii;
    }
    for (Index r = 0; r < q; ++r) {
        for (Index c = 0; c < q; ++c) {
            k.block(r * p, c * p, p, p) += tjj(r, c) * Matrix::Identity(p, p);
        }
    }
    const Eigen::Map<const Vector> rv(rhs.data(), p * q);
    const Vector xv = k.partialPivLu().solve(rv);
    return Eigen::Map<const Matrix>(xv.data(), p, q);
}

// Solves T W + W Tᵀ = -Q for upper quasi-triangular T and symmetric Q,
// by block back-substitution from the trailing corner.
Matrix lyap_upper(const Matrix& t, const Matrix& q) {
    const Index n = t.rows();
    Matrix w = Matrix::Zero(n, n);
    const std::vector<Index> starts = schur_block_starts(t);
    const Index nb = std::ssize(starts);
    const auto block_size = [&](Index b) {
        return (b + 1 < nb ? starts[b + 1] : n) - starts[b];
    };

    for (Index bi = nb - 1; bi >= 0; --bi) {
        const Index i0 = starts[bi];
        const Index p = block_size(bi);
        const Index iend = i0 + p;
        for (Index bj = nb - 1; bj >= bi; --bj) {
            const Index j0 = starts[bj];
            const Index s = block_size(bj);
            const Index jend = j0 + s;

            Matrix rhs = -q.block(i0, j0, p, s);
            if (iend < n) {
                rhs.noalias() -=
                    t.block(i0, iend, p, n - iend) * w.block(iend, j0, n - iend, s);
            }
            if (jend < n) {
                rhs.noalias() -= w.block(i0, jend, p, n - jend) *
                                 t.block(j0, jend, s, n - jend).transpose();
            }
            const Matrix x = solve_block_sylvester(
                t.block(i0, i0, p, p), t.block(j0, j0, s, s), rhs);
            w.block(i0, j0, p, s) = x;
            if (bj != bi) {
                w.block(j0, i0, s, p) = x.transpose();
            }
        }
    }
    return w;
}

// One Schur decomposition serving both Gramian equations. The adjoint
// equation Aᵀ W + W A = -Q maps onto the upper solver through the
// order-reversing permutation: reverse(Tᵀ) is upper quasi-triangular again.
class SchurLyapunov {
  public:
    explicit SchurLyapunov(const Matrix& a) {
        const Eigen::RealSchur<Matrix> schur(a);
        u_ = schur.matrixU();
        t_ = schur.matrixT();
    }

    // A W + W Aᵀ + Q = 0
    Matrix solve(const Matrix& q) const {
        const Matrix qt = u_.transpose() * q * u_;
        const Matrix wt = lyap_upper(t_, qt);
        return symmetrize(u_ * wt * u_.transpose());
    }

    // Aᵀ W + W A + Q = 0
    Matrix solve_adjoint(const Matrix& q) const {
        const Matrix qt = u_.transpose() * q * u_;
        const Matrix st = t_.transpose().reverse().eval();
        const Matrix wrev = lyap_upper(st, qt.reverse().eval());
        const Matrix wt = wrev.reverse();
        return symmetrize(u_ * wt * u_.transpose());
    }

  private:
    static Matrix symmetrize(const Matrix& w) { return 0.5 * (w + w.transpose()); }

    Matrix u_;
    Matrix t_;
};

void require_symmetric(const Matrix& q) {
    const double asym = (q - q.transpose()).norm();
    if (asym > 1e-10 * std::max(1.0, q.norm())) {
        throw ValueError("Lyapunov right-hand side must be symmetric");
    }
}

Matrix gramian_factor(const Matrix& w) {
    // W = Z Zᵀ with eigenvalues clamped at zero; robust for singular Gramians
    // where a Cholesky factorization would fail.
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(w);
    const Vector lam = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

}  // namespace

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows()) {
        throw DimensionError("Lyapunov solve needs square A and Q of equal size");
    }
    require_symmetric(q);
    if (!is_stable(a)) {
        throw StabilityError("Lyapunov equation has no unique PSD solution for unstable A");
    }
    const Matrix qs = 0.5 * (q + q.transpose());

    if (is_diagonal(a)) {
        const Index n = a.rows();
        Matrix w(n, n);
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i < n; ++i) {
                w(i, j) = qs(i, j) / (-a(i, i) - a(j, j));
            }
        }
        return w;
    }
    return SchurLyapunov(a).solve(qs);
}

GramianPair gramians(const StateSpaceModel& model) {
    validate(model);
    if (!is_stable(model.A)) {
        throw StabilityError("Gramians are defined for stable systems only");
    }
    if (is_diagonal(model.A)) {
        return {solve_lyapunov(model.A, model.B * model.B.transpose()),
                solve_lyapunov(model.A.transpose(), model.C.transpose() * model.C)};
    }
    const SchurLyapunov lyap(model.A);
    return {lyap.solve(model.B * model.B.transpose()),
            lyap.solve_adjoint(model.C.transpose() * model.C)};
}

BalancedRealization balance(const StateSpaceModel& model) {
    const GramianPair g = gramians(model);
    const Matrix zc = gramian_factor(g.controllability);
    const Matrix zo = gramian_factor(g.observability);

    Eigen::BDCSVD<Matrix> svd(zo.transpose() * zc,
                              Eigen::ComputeThinU | Eigen::ComputeThinV);
    BalancedRealization bal;
    bal.hsv = svd.singularValues();
    if (!(bal.hsv(0) > 0.0)) {
        throw ValueError("Hankel spectrum is identically zero; nothing to balance");
    }

    const Index n = model.order();
    Index r = 0;
    while (r < n && bal.hsv(r) > kMinimalityCut * bal.hsv(0)) {
        ++r;
    }
    bal.minimal_order = r;
    bal.minimality_warning = r < n;

    const Matrix scale =
        bal.hsv.head(r).cwiseSqrt().cwiseInverse().asDiagonal();
    bal.transform = zc * svd.matrixV().leftCols(r) * scale;
    bal.inverse_transform =
        scale * svd.matrixU().leftCols(r).transpose() * zo.transpose();

    bal.balanced = StateSpaceModel(
        bal.inverse_transform * model.A * bal.transform,
        bal.inverse_transform * model.B, model.C * bal.transform, model.D, {},
        model.input_labels);
    return bal;
}

Index select_order(const Vector& hsv, double eps) {
    if (hsv.size() == 0) {
        throw ValueError("order selection needs a non-empty singular value list");
    }
    if (!(eps >= 0.0)) {
        throw ValueError("order selection tolerance must be >= 0");
    }
    Index nr = 0;
    for (Index i = 0; i < hsv.size(); ++i) {
        if (hsv(i) > eps) {
            nr = i + 1;
        }
    }
    return std::max<Index>(nr, 1);
}

double error_bound(const Vector& hsv, Index nr) {
    if (nr < 1 || nr > hsv.size()) {
        throw ValueError("reduced order out of range for error bound");
    }
    return 2.0 * hsv.tail(hsv.size() - nr).sum();
}

ReducedModel truncate(const BalancedRealization& bal,
                      const StateSpaceModel& original, Index nr) {
    const Index r = bal.balanced.order();
    if (nr < 1 || nr > r) {
        throw ValueError("reduced order out of range for truncation");
    }
    // Residualize the discarded balanced states instead of dropping them:
    // the tail block is set to equilibrium and folded into the kept block.
    // This keeps the static gain exact and stays within the Hankel tail
    // error bound; plain truncation with a feedthrough patch cannot do both
    // (the patch alone shifts the response by up to the bound again).
    Matrix ar = bal.balanced.A.topLeftCorner(nr, nr);
    Matrix br = bal.balanced.B.topRows(nr);
    Matrix cr = bal.balanced.C.leftCols(nr);
    Matrix dr = original.D;
    if (nr < r) {
        const Matrix a22 = bal.balanced.A.bottomRightCorner(r - nr, r - nr);
        const Eigen::PartialPivLU<Matrix> lu(a22);
        const Matrix x = lu.solve(bal.balanced.A.bottomLeftCorner(r - nr, nr));
        const Matrix y = lu.solve(bal.balanced.B.bottomRows(r - nr));
        const Matrix a12 = bal.balanced.A.topRightCorner(nr, r - nr);
        const Matrix c2 = bal.balanced.C.rightCols(r - nr);
        ar -= a12 * x;
        br -= a12 * y;
        cr -= c2 * x;
        dr -= c2 * y;
    }
    if (!is_stable(ar)) {
        throw SplitError(
            "reduced block is unstable at this order; choose an order "
            "outside the singular-value cluster");
    }

    ReducedModel red;
    red.sys = StateSpaceModel(std::move(ar), std::move(br), std::move(cr),
                              std::move(dr), {}, original.input_labels);
    red.order = nr;
    red.bound = error_bound(bal.hsv, nr);
    return red;
}

Reduction reduce_analysis(const StateSpaceModel& model, double eps) {
    const BalancedRealization bal = balance(model);
    Index nr = select_order(bal.hsv, eps);
    const Index n = bal.hsv.size();
    while (nr < n && bal.hsv(nr - 1) - bal.hsv(nr) < kClusterGap * bal.hsv(0)) {
        ++nr;
    }
    nr = std::min(nr, bal.minimal_order);

    Reduction result;
    result.reduced = truncate(bal, model, nr);
    result.hsv = bal.hsv;
    result.selected_order = nr;
    result.minimality_warning = bal.minimality_warning;
    return result;
}

ReducedModel reduce(const StateSpaceModel& model, double eps) {
    return reduce_analysis(model, eps).reduced;
}

std::vector<Reduction> reduce_batch_serial(
    const std::vector<StateSpaceModel>& models, double eps) {
    std::vector<Reduction> out(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        out[i] = reduce_analysis(models[i], eps);
    }
    return out;
}

std::vector<Reduction> reduce_batch(const std::vector<StateSpaceModel>& models,
                                    double eps) {
    std::vector<Reduction> out(models.size());
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < std::ssize(models); ++i) {
        try {
            out[i] = reduce_analysis(models[i], eps);
        } catch (...) {
#pragma omp critical
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

}  // namespace thermred::balred
