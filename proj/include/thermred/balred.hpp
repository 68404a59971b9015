#pragma once

#include <vector>

#include "thermred/statespace.hpp"

namespace thermred::balred {

/// Solves the continuous Lyapunov equation  A W + W Aᵀ + Q = 0  for symmetric
/// Q, via real Schur decomposition and block back-substitution. A diagonal A
/// takes the elementwise fast path w_ij = q_ij / (-a_ii - a_jj).
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

struct GramianPair {
    Matrix controllability;  // A Wc + Wc Aᵀ + B Bᵀ = 0
    Matrix observability;    // Aᵀ Wo + Wo A + Cᵀ C = 0
};

/// Both Gramians from a single Schur decomposition of A.
GramianPair gramians(const StateSpaceModel& model);

/// System in balanced coordinates: both Gramians equal diag(hsv).
///
/// `hsv` always has the full original length n, sorted non-increasing.
/// Directions with hsv below 1e-12 * hsv(0) cannot be balanced reliably
/// (non-minimal realization); the balanced system is restricted to the
/// leading `minimal_order` directions and `minimality_warning` is set.
struct BalancedRealization {
    StateSpaceModel balanced;  // order r = minimal_order
    Matrix transform;          // n x r, states = transform * balanced states
    Matrix inverse_transform;  // r x n, left inverse of transform
    Vector hsv;                // n Hankel singular values, descending
    Index minimal_order = 0;
    bool minimality_warning = false;
};

/// Square-root balancing: Gramian factors Zc, Zo, SVD of Zoᵀ Zc. Never forms
/// the product Wc Wo explicitly.
BalancedRealization balance(const StateSpaceModel& model);

/// Largest index i (1-based count) with hsv(i) > eps, clamped to >= 1;
/// returns n when every value exceeds eps.
Index select_order(const Vector& hsv, double eps);

/// A-priori peak frequency-response error bound 2 * (hsv(nr+1) + ... + hsv(n)).
double error_bound(const Vector& hsv, Index nr);

struct ReducedModel {
    StateSpaceModel sys;
    Index order = 0;
    double bound = 0.0;  // error_bound at this order
};

/// Order-nr subsystem of the balanced realization with the discarded
/// directions residualized (set to equilibrium and folded into the kept
/// block). The static gain of the original model is preserved exactly and
/// the response error stays within error_bound(hsv, nr).
ReducedModel truncate(const BalancedRealization& bal,
                      const StateSpaceModel& original, Index nr);

struct Reduction {
    ReducedModel reduced;
    Vector hsv;
    Index selected_order = 0;
    bool minimality_warning = false;
};

/// balance -> select_order -> truncate. The selected order is widened to
/// include any near-equal singular-value cluster at the split point
/// (|σ_nr - σ_nr+1| < 1e-10 σ_1) and capped at the minimal order.
Reduction reduce_analysis(const StateSpaceModel& model, double eps);
ReducedModel reduce(const StateSpaceModel& model, double eps);

/// Batch reduction of independent models. `reduce_batch` distributes models
/// across OpenMP threads; `reduce_batch_serial` is the reference loop kept
/// for testing and benchmarking. Results are positionally identical.
std::vector<Reduction> reduce_batch(const std::vector<StateSpaceModel>& models,
                                    double eps);
std::vector<Reduction> reduce_batch_serial(
    const std::vector<StateSpaceModel>& models, double eps);

}  // namespace thermred::balred
