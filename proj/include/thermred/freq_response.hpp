#pragma once

#include "thermred/statespace.hpp"

namespace thermred::freq {

/// Log-spaced angular frequencies in [w_lo, w_hi] (rad/s).
Vector log_grid(double w_lo, double w_hi, int points);

/// Grid spanning three decades below the slowest pole to three decades above
/// the spectral radius of A. Default 200 points.
Vector default_grid(const StateSpaceModel& model, int points = 200);

/// Transfer matrix G(jw) = C (jw I - A)^-1 B + D.
Eigen::MatrixXcd response_at(const StateSpaceModel& model, double omega);

/// Largest singular value of G_a(jw) - G_b(jw) at each grid frequency.
/// `error_profile` splits the grid across OpenMP threads;
/// `error_profile_serial` is the reference loop kept for testing and
/// benchmarking. Outputs are positionally identical.
Vector error_profile(const StateSpaceModel& a, const StateSpaceModel& b,
                     const Vector& grid);
Vector error_profile_serial(const StateSpaceModel& a, const StateSpaceModel& b,
                            const Vector& grid);

/// max over the grid of the error profile.
double peak_error(const StateSpaceModel& a, const StateSpaceModel& b,
                  const Vector& grid);
double peak_error_serial(const StateSpaceModel& a, const StateSpaceModel& b,
                         const Vector& grid);

}  // namespace thermred::freq
