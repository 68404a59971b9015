#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "thermred/errors.hpp"

namespace thermred {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Continuous-time linear system  ẋ = A x + B u,  y = C x + D u.
///
/// Thermal zone models use x = nodal temperatures, C = I and D = 0, with u
/// holding the solicitation frame (weather, short-wave flux, air terms,
/// inter-zone coupling temperatures).
struct StateSpaceModel {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;
    std::vector<std::string> state_labels;  // size n, or empty
    std::vector<std::string> input_labels;  // size m, or empty

    StateSpaceModel() = default;
    StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix d,
                    std::vector<std::string> states = {},
                    std::vector<std::string> inputs = {});

    /// A-square model with C = I, D = 0 (all states observed).
    static StateSpaceModel full_observation(Matrix a, Matrix b,
                                            std::vector<std::string> states = {},
                                            std::vector<std::string> inputs = {});

    Index order() const { return A.rows(); }
    Index inputs() const { return B.cols(); }
    Index outputs() const { return C.rows(); }
};

/// Throws DimensionError/ValueError if shapes or label sizes are inconsistent
/// or entries are non-finite.
void validate(const StateSpaceModel& model);

/// True iff every eigenvalue of A has real part < -1e-12 * ||A||.
bool is_stable(const Matrix& a);

/// Static gain G(0) = -C A^-1 B + D. Requires a stable A.
Matrix dc_gain(const StateSpaceModel& model);

struct StepResult {
    Vector state;
    Vector output;
};

/// One implicit-Euler step:  (I - dt A) x_now = x_prev + dt B u_now,
/// y_now = C x_now + D u_now.
///
/// The factorization of (I - dt A) is the expensive part; StepSolver caches
/// it for a fixed (model, dt) pair so repeated stepping costs O(n^2). Any
/// change of A means building a new solver.
class StepSolver {
  public:
    StepSolver(StateSpaceModel model, double dt);

    StepResult step(const Vector& x_prev, const Vector& u_now) const;

    const StateSpaceModel& model() const { return model_; }
    double dt() const { return dt_; }

  private:
    StateSpaceModel model_;
    double dt_ = 0.0;
    Eigen::PartialPivLU<Matrix> lu_;
};

/// One-shot step (factors on every call; use StepSolver inside loops).
StepResult step(const StateSpaceModel& model, const Vector& x_prev,
                const Vector& u_now, double dt);

/// Fixed-step simulation record. Row j holds the state/output/input after
/// step j+1, at times(j) = t0 + (j+1) dt.
struct Trajectory {
    Vector times;    // k, strictly increasing
    Matrix states;   // k x n
    Matrix outputs;  // k x p
    Matrix inputs;   // k x m

    Index length() const { return times.size(); }
};

/// Folds `step` over the rows of `inputs` (k x m), starting from x0.
Trajectory simulate(const StateSpaceModel& model, const Matrix& inputs,
                    const Vector& x0, double dt, double t0 = 0.0);

}  // namespace thermred
