#include "thermred/tvreduction.hpp"

#include <cmath>
#include <limits>

namespace thermred::tvred {

RecoveredState recover_reduced_state(const Matrix& cr, const Matrix& dr,
                                     const Vector& t_prev, const Vector& u_prev) {
    if (cr.rows() != t_prev.size() || dr.rows() != cr.rows() ||
        dr.cols() != u_prev.size()) {
        throw DimensionError("inconsistent shapes in reduced-state recovery");
    }
    if (cr.rows() < cr.cols()) {
        throw DimensionError(
            "reduced-state recovery needs at least as many outputs as reduced states");
    }
    const Vector rhs = t_prev - dr * u_prev;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(cr);

    RecoveredState rec;
    rec.state = cod.solve(rhs);
    rec.residual = (cr * rec.state - rhs).norm();
    rec.rank = cod.rank();
    rec.rank_deficient = rec.rank < cr.cols();
    return rec;
}

StateSpaceModel PartitionedModel::assemble_full(double t) const {
    const Index n1 = envelope_order();
    const Index n2 = air_order();
    const Index m = input_count();

    Matrix a(n1 + n2, n1 + n2);
    a.topLeftCorner(n1, n1) = A11;
    a.topRightCorner(n1, n2) = A12;
    a.bottomLeftCorner(n2, n1) = a21(t);
    a.bottomRightCorner(n2, n2) = a22(t);

    Matrix b(n1 + n2, m);
    b.topRows(n1) = B1;
    b.bottomRows(n2) = b2(t);
    return StateSpaceModel::full_observation(std::move(a), std::move(b));
}

void validate(const PartitionedModel& pm) {
    if (pm.A11.rows() != pm.A11.cols()) {
        throw DimensionError("envelope block A11 must be square");
    }
    if (pm.A12.rows() != pm.A11.rows() || pm.B1.rows() != pm.A11.rows()) {
        throw DimensionError("A12/B1 row counts must match the envelope order");
    }
    if (!pm.a21 || !pm.a22 || !pm.b2) {
        throw ValueError("partitioned model needs a21/a22/b2 providers");
    }
    const Index n1 = pm.envelope_order();
    const Index n2 = pm.air_order();
    const Matrix a21 = pm.a21(0.0);
    const Matrix a22 = pm.a22(0.0);
    const Matrix b2 = pm.b2(0.0);
    if (a21.rows() != n2 || a21.cols() != n1 || a22.rows() != n2 ||
        a22.cols() != n2 || b2.rows() != n2 || b2.cols() != pm.input_count()) {
        throw DimensionError("provider output shapes do not match the partition");
    }
}

ConditionalReducer::ConditionalReducer(const StateSpaceModel& model0,
                                       Vector flows0, const Vector& t0_outputs,
                                       const Vector& u0, double eps,
                                       double flow_tolerance, double dt)
    : eps_(eps), flow_tolerance_(flow_tolerance), dt_(dt) {
    if (!(flow_tolerance >= 0.0)) {
        throw ValueError("flow tolerance must be >= 0");
    }
    rebuild(model0, std::move(flows0), t0_outputs, u0);
}

void ConditionalReducer::rebuild(const StateSpaceModel& model, const Vector& flows,
                                 const Vector& t_prev, const Vector& u_prev) {
    current_ = balred::reduce(model, eps_);
    solver_.emplace(current_.sys, dt_);
    reference_flows_ = flows;
    x_r_ = recover_reduced_state(current_.sys.C, current_.sys.D, t_prev, u_prev).state;
    ++reductions_;
}

bool ConditionalReducer::maybe_update(const StateSpaceModel& full_now,
                                      const Vector& flows_now, const Vector& t_prev,
                                      const Vector& u_prev) {
    if (flows_now.size() != reference_flows_.size()) {
        throw DimensionError("flow vector size changed between steps");
    }
    const double drift =
        flows_now.size() == 0
            ? 0.0
            : (flows_now - reference_flows_).cwiseAbs().maxCoeff();
    if (drift > flow_tolerance_) {
        rebuild(full_now, flows_now, t_prev, u_prev);
        return true;
    }
    return false;
}

StepResult ConditionalReducer::propose(const Vector& u_now) const {
    return solver_->step(x_r_, u_now);
}

void ConditionalReducer::commit(const Vector& x_next) { x_r_ = x_next; }

ConditionalReducer::Step ConditionalReducer::conditional_step(
    const StateSpaceModel& full_now, const Vector& flows_now, const Vector& u_now,
    const Vector& t_prev, const Vector& u_prev) {
    Step s;
    s.did_rereduce = maybe_update(full_now, flows_now, t_prev, u_prev);
    StepResult r = propose(u_now);
    commit(r.state);
    s.output = std::move(r.output);
    return s;
}

StateSpaceModel envelope_system(const PartitionedModel& pm) {
    validate(pm);
    const Index n1 = pm.envelope_order();
    const Index n2 = pm.air_order();
    Matrix b_ext(n1, pm.input_count() + n2);
    b_ext.leftCols(pm.input_count()) = pm.B1;
    b_ext.rightCols(n2) = pm.A12;
    return StateSpaceModel::full_observation(pm.A11, std::move(b_ext));
}

CoupledReducedModel separate_reduce(const PartitionedModel& pm, double eps,
                                    double iteration_eps, int max_iterations) {
    if (!(iteration_eps > 0.0)) {
        throw ValueError("coupling tolerance must be > 0");
    }
    if (max_iterations < 1) {
        throw ValueError("coupling iteration cap must be >= 1");
    }
    CoupledReducedModel crm;
    crm.envelope = balred::reduce(envelope_system(pm), eps);
    crm.iteration_eps = iteration_eps;
    crm.max_iterations = max_iterations;
    return crm;
}

namespace {

CoupledStep run_coupled_step(const CoupledReducedModel& crm,
                             const StepSolver& envelope_solver,
                             const PartitionedModel& pm, double t,
                             const Vector& u_now, const CoupledState& prev,
                             double dt) {
    const Index n2 = pm.air_order();
    const Index m = pm.input_count();
    if (u_now.size() != m) {
        throw DimensionError("input vector size mismatch in coupled step");
    }
    if (prev.air_state.size() != n2) {
        throw DimensionError("air state size mismatch in coupled step");
    }

    const Matrix a21 = pm.a21(t);
    const Matrix a22 = pm.a22(t);
    const Matrix b2 = pm.b2(t);
    const Eigen::PartialPivLU<Matrix> air_lu(Matrix::Identity(n2, n2) - dt * a22);

    Vector x2_hat = prev.air_state;  // warm start from the previous step
    Vector u_ext(m + n2);
    u_ext.head(m) = u_now;

    CoupledStep out;
    for (int it = 1; it <= crm.max_iterations; ++it) {
        u_ext.tail(n2) = x2_hat;
        const StepResult env = envelope_solver.step(prev.envelope_state, u_ext);
        const Vector x2 =
            air_lu.solve(prev.air_state + dt * (b2 * u_now + a21 * env.output));

        out.iterations = it;
        out.residual = (x2_hat - x2).lpNorm<Eigen::Infinity>();
        out.envelope_state = env.state;
        out.envelope_outputs = env.output;
        out.air_state = x2;
        if (out.residual < crm.iteration_eps) {
            return out;
        }
        x2_hat = x2;
    }
    throw ConvergenceError("coupled air/envelope iteration did not converge; "
                           "coupling too strong for this time step",
                           out.residual);
}

}  // namespace

CoupledStepper::CoupledStepper(CoupledReducedModel crm, double dt)
    : crm_(std::move(crm)), dt_(dt), envelope_solver_(crm_.envelope.sys, dt) {}

CoupledStep CoupledStepper::step(const PartitionedModel& pm, double t,
                                 const Vector& u_now, const CoupledState& prev) const {
    return run_coupled_step(crm_, envelope_solver_, pm, t, u_now, prev, dt_);
}

CoupledStep coupled_step(const CoupledReducedModel& crm, const PartitionedModel& pm,
                         double t, const Vector& u_now, const CoupledState& prev,
                         double dt) {
    const StepSolver solver(crm.envelope.sys, dt);
    return run_coupled_step(crm, solver, pm, t, u_now, prev, dt);
}

}  // namespace thermred::tvred
