#include "thermred/freq_response.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <exception>

namespace thermred::freq {

Vector log_grid(double w_lo, double w_hi, int points) {
    if (!(w_lo > 0.0) || !(w_hi > w_lo)) {
        throw ValueError("frequency grid needs 0 < w_lo < w_hi");
    }
    if (points < 2) {
        throw ValueError("frequency grid needs at least 2 points");
    }
    Vector grid(points);
    const double ratio = std::log(w_hi / w_lo);
    for (int i = 0; i < points; ++i) {
        grid(i) = w_lo * std::exp(ratio * i / (points - 1));
    }
    return grid;
}

Vector default_grid(const StateSpaceModel& model, int points) {
    const Eigen::EigenSolver<Matrix> eig(model.A, false);
    double slow = std::numeric_limits<double>::infinity();
    double fast = 0.0;
    for (Index i = 0; i < model.order(); ++i) {
        const double mag = std::abs(eig.eigenvalues()(i));
        if (mag > 1e-14) {
            slow = std::min(slow, mag);
        }
        fast = std::max(fast, mag);
    }
    if (!(fast > 0.0) || !std::isfinite(slow)) {
        return log_grid(1e-3, 1e3, points);
    }
    return log_grid(slow * 1e-3, fast * 1e3, points);
}

Eigen::MatrixXcd response_at(const StateSpaceModel& model, double omega) {
    using Complex = std::complex<double>;
    Eigen::MatrixXcd shifted = -model.A.cast<Complex>();
    shifted.diagonal().array() += Complex(0.0, omega);
    return model.C.cast<Complex>() * shifted.partialPivLu().solve(model.B.cast<Complex>()) +
           model.D.cast<Complex>();
}

namespace {

double gap_at(const StateSpaceModel& a, const StateSpaceModel& b, double omega) {
    const Eigen::MatrixXcd diff = response_at(a, omega) - response_at(b, omega);
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(diff).singularValues()(0);
}

void check_io_shapes(const StateSpaceModel& a, const StateSpaceModel& b) {
    if (a.outputs() != b.outputs() || a.inputs() != b.inputs()) {
        throw DimensionError("frequency-response comparison needs matching I/O counts");
    }
}

}  // namespace

Vector error_profile_serial(const StateSpaceModel& a, const StateSpaceModel& b,
                            const Vector& grid) {
    check_io_shapes(a, b);
    Vector profile(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
        profile(i) = gap_at(a, b, grid(i));
    }
    return profile;
}

Vector error_profile(const StateSpaceModel& a, const StateSpaceModel& b,
                     const Vector& grid) {
    check_io_shapes(a, b);
    Vector profile(grid.size());
    std::exception_ptr failure;

#pragma omp parallel for schedule(static)
    for (Index i = 0; i < grid.size(); ++i) {
        try {
            profile(i) = gap_at(a, b, grid(i));
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
    return profile;
}

double peak_error(const StateSpaceModel& a, const StateSpaceModel& b,
                  const Vector& grid) {
    return error_profile(a, b, grid).maxCoeff();
}

double peak_error_serial(const StateSpaceModel& a, const StateSpaceModel& b,
                         const Vector& grid) {
    return error_profile_serial(a, b, grid).maxCoeff();
}

}  // namespace thermred::freq
