#include "thermred/statespace.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace thermred {

StateSpaceModel::StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix d,
                                 std::vector<std::string> states,
                                 std::vector<std::string> inputs)
    : A(std::move(a)),
      B(std::move(b)),
      C(std::move(c)),
      D(std::move(d)),
      state_labels(std::move(states)),
      input_labels(std::move(inputs)) {
    validate(*this);
}

StateSpaceModel StateSpaceModel::full_observation(Matrix a, Matrix b,
                                                  std::vector<std::string> states,
                                                  std::vector<std::string> inputs) {
    const Index n = a.rows();
    const Index m = b.cols();
    return StateSpaceModel(std::move(a), std::move(b), Matrix::Identity(n, n),
                           Matrix::Zero(n, m), std::move(states), std::move(inputs));
}

void validate(const StateSpaceModel& model) {
    const Index n = model.A.rows();
    if (model.A.cols() != n) {
        throw DimensionError("state matrix A must be square");
    }
    if (model.B.rows() != n) {
        throw DimensionError("B row count must match the state order");
    }
    if (model.C.cols() != n) {
        throw DimensionError("C column count must match the state order");
    }
    if (model.D.rows() != model.C.rows() || model.D.cols() != model.B.cols()) {
        throw DimensionError("D must be (outputs x inputs)");
    }
    if (!model.state_labels.empty() &&
        std::ssize(model.state_labels) != n) {
        throw DimensionError("state label count must match the state order");
    }
    if (!model.input_labels.empty() &&
        std::ssize(model.input_labels) != model.B.cols()) {
        throw DimensionError("input label count must match the input count");
    }
    if (!model.A.allFinite() || !model.B.allFinite() || !model.C.allFinite() ||
        !model.D.allFinite()) {
        throw ValueError("model matrices must be finite");
    }
}

bool is_stable(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw DimensionError("stability check requires a square matrix");
    }
    if (!a.allFinite()) {
        throw ValueError("stability check requires finite entries");
    }
    if (a.rows() == 0) {
        return true;
    }
    const Eigen::EigenSolver<Matrix> eig(a, /*computeEigenvectors=*/false);
    const double margin = -1e-12 * a.norm();
    return (eig.eigenvalues().real().array() < margin).all();
}

Matrix dc_gain(const StateSpaceModel& model) {
    validate(model);
    if (!is_stable(model.A)) {
        throw StabilityError("static gain is defined for stable systems only");
    }
    return -model.C * model.A.partialPivLu().solve(model.B) + model.D;
}

StepSolver::StepSolver(StateSpaceModel model, double dt)
    : model_(std::move(model)), dt_(dt) {
    validate(model_);
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValueError("time step must be positive and finite");
    }
    const Index n = model_.order();
    lu_.compute(Matrix::Identity(n, n) - dt * model_.A);
    if (lu_.rcond() < 1e-14) {
        throw ValueError("time step matrix (I - dt A) is numerically singular");
    }
}

StepResult StepSolver::step(const Vector& x_prev, const Vector& u_now) const {
    if (x_prev.size() != model_.order()) {
        throw DimensionError("state vector size mismatch in step");
    }
    if (u_now.size() != model_.inputs()) {
        throw DimensionError("input vector size mismatch in step");
    }
    StepResult r;
    r.state = lu_.solve(x_prev + dt_ * (model_.B * u_now));
    r.output = model_.C * r.state + model_.D * u_now;
    return r;
}

StepResult step(const StateSpaceModel& model, const Vector& x_prev,
                const Vector& u_now, double dt) {
    return StepSolver(model, dt).step(x_prev, u_now);
}

Trajectory simulate(const StateSpaceModel& model, const Matrix& inputs,
                    const Vector& x0, double dt, double t0) {
    if (inputs.rows() < 1) {
        throw ValueError("simulation needs at least one input row");
    }
    if (inputs.cols() != model.inputs()) {
        throw DimensionError("input column count must match the model inputs");
    }
    const StepSolver solver(model, dt);
    const Index k = inputs.rows();

    Trajectory traj;
    traj.times.resize(k);
    traj.states.resize(k, model.order());
    traj.outputs.resize(k, model.outputs());
    traj.inputs = inputs;

    Vector x = x0;
    for (Index j = 0; j < k; ++j) {
        const StepResult r = solver.step(x, inputs.row(j).transpose());
        x = r.state;
        traj.times(j) = t0 + static_cast<double>(j + 1) * dt;
        traj.states.row(j) = r.state.transpose();
        traj.outputs.row(j) = r.output.transpose();
    }
    return traj;
}

}  // namespace thermred
