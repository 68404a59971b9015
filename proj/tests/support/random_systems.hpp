#pragma once

#include <Eigen/Eigenvalues>
#include <random>

#include "thermred/statespace.hpp"

namespace thermred::testsupport {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = gauss(rng);
        }
    }
    return m;
}

/// Generic (non-normal) stable matrix: spectrum shifted left of the origin.
inline Matrix random_stable_matrix(std::mt19937_64& rng, Index n) {
    Matrix a = random_matrix(rng, n, n);
    const Eigen::EigenSolver<Matrix> eig(a, false);
    std::uniform_real_distribution<double> margin(0.5, 2.0);
    a.diagonal().array() -= eig.eigenvalues().real().maxCoeff() + margin(rng);
    return a;
}

inline StateSpaceModel random_stable_system(std::mt19937_64& rng, Index n,
                                            Index m, Index p) {
    return StateSpaceModel(random_stable_matrix(rng, n), random_matrix(rng, n, m),
                           random_matrix(rng, p, n), Matrix::Zero(p, m));
}

/// Symmetric negative-definite matrix (dissipative test systems).
inline Matrix random_symmetric_nd(std::mt19937_64& rng, Index n) {
    const Matrix m = random_matrix(rng, n, n);
    return -(m * m.transpose() + 0.1 * Matrix::Identity(n, n));
}

/// Single-input RC-cascade-like system with fast-decaying Hankel spectrum.
inline StateSpaceModel rc_ladder_system(std::mt19937_64& rng, Index n) {
    std::uniform_real_distribution<double> g(0.5, 2.0);
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i + 1 < n; ++i) {
        const double k = g(rng);
        a(i, i + 1) += k;
        a(i + 1, i) += k;
        a(i, i) -= k;
        a(i + 1, i + 1) -= k;
    }
    a(0, 0) -= g(rng);
    Matrix b = Matrix::Zero(n, 1);
    b(0, 0) = g(rng);
    Matrix c = Matrix::Zero(1, n);
    c(0, n - 1) = 1.0;
    return StateSpaceModel(std::move(a), std::move(b), std::move(c),
                           Matrix::Zero(1, 1));
}

}  // namespace thermred::testsupport
