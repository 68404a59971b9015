#pragma once

#include <functional>
#include <optional>

#include "thermred/balred.hpp"
#include "thermred/statespace.hpp"

namespace thermred::tvred {

/// Least-squares reconstruction of a reduced state from known outputs:
/// minimizes ||Cr x - (T - Dr u)||_2 via a complete orthogonal
/// decomposition (minimum-norm solution when Cr is rank deficient).
struct RecoveredState {
    Vector state;
    double residual = 0.0;
    Index rank = 0;
    bool rank_deficient = false;
};

RecoveredState recover_reduced_state(const Matrix& cr, const Matrix& dr,
                                     const Vector& t_prev, const Vector& u_prev);

/// Two-block split of a time-varying thermal system: constant envelope rows
/// (wall/glazing nodes) over a small time-varying air block,
///
///   [x1'; x2'] = [A11, A12; a21(t), a22(t)] [x1; x2] + [B1; b2(t)] u.
///
/// The providers must return fixed-size matrices for every t.
struct PartitionedModel {
    Matrix A11;  // n1 x n1, constant
    Matrix A12;  // n1 x n2, constant
    Matrix B1;   // n1 x m, constant
    std::function<Matrix(double)> a21;  // n2 x n1
    std::function<Matrix(double)> a22;  // n2 x n2
    std::function<Matrix(double)> b2;   // n2 x m

    Index envelope_order() const { return A11.rows(); }
    Index air_order() const { return A12.cols(); }
    Index input_count() const { return B1.cols(); }

    /// Full model at time t: C = I, D = 0, states ordered [x1; x2].
    StateSpaceModel assemble_full(double t) const;
};

void validate(const PartitionedModel& pm);

/// Reduced model that is re-computed only when the driving flows drift by
/// more than `flow_tolerance` from the flows at the last reduction; after an
/// update the reduced state is re-initialized by least squares from the
/// previous outputs.
class ConditionalReducer {
  public:
    ConditionalReducer(const StateSpaceModel& model0, Vector flows0,
                       const Vector& t0_outputs, const Vector& u0, double eps,
                       double flow_tolerance, double dt);

    struct Step {
        Vector output;
        bool did_rereduce = false;
    };

    /// Criterion check (+ possible re-reduction and state recovery), then one
    /// implicit-Euler step on the current reduced model. Commits the state.
    Step conditional_step(const StateSpaceModel& full_now, const Vector& flows_now,
                          const Vector& u_now, const Vector& t_prev,
                          const Vector& u_prev);

    // Split API for orchestrators that revise inputs within a timestep:
    // the criterion is consulted once, proposals are pure, commit is explicit.
    bool maybe_update(const StateSpaceModel& full_now, const Vector& flows_now,
                      const Vector& t_prev, const Vector& u_prev);
    StepResult propose(const Vector& u_now) const;
    void commit(const Vector& x_next);

    const balred::ReducedModel& current() const { return current_; }
    const Vector& reference_flows() const { return reference_flows_; }
    const Vector& reduced_state() const { return x_r_; }
    int reduction_count() const { return reductions_; }
    double flow_tolerance() const { return flow_tolerance_; }

  private:
    void rebuild(const StateSpaceModel& model, const Vector& flows,
                 const Vector& t_prev, const Vector& u_prev);

    balred::ReducedModel current_;
    std::optional<StepSolver> solver_;
    Vector reference_flows_;
    Vector x_r_;
    double eps_;
    double flow_tolerance_;
    double dt_;
    int reductions_ = 0;
};

/// Envelope subsystem reduced once (it is time-invariant), air block kept at
/// full (small) order; the two are advanced together by fixed-point
/// substitution on the estimated air temperatures.
struct CoupledReducedModel {
    balred::ReducedModel envelope;  // inputs (u; x2_hat)
    double iteration_eps = 1e-3;    // infinity norm on x2, same units as x2
    int max_iterations = 50;
};

/// Envelope block as a time-invariant system with extended input (u; x2):
/// system matrix A11, input matrix [B1 | A12], all envelope states observed.
StateSpaceModel envelope_system(const PartitionedModel& pm);

/// Reduces `envelope_system(pm)` once via balanced truncation.
CoupledReducedModel separate_reduce(const PartitionedModel& pm, double eps,
                                    double iteration_eps = 1e-3,
                                    int max_iterations = 50);

struct CoupledState {
    Vector envelope_state;  // reduced coordinates
    Vector air_state;
};

struct CoupledStep {
    Vector envelope_state;    // reduced coordinates after the step
    Vector envelope_outputs;  // reconstructed x1
    Vector air_state;         // x2 after the step
    int iterations = 0;
    double residual = 0.0;    // final ||x2_hat - x2||_inf
};

/// Caches the envelope factorization for a fixed dt; the air factorization is
/// rebuilt every step because a22 is time-varying.
class CoupledStepper {
  public:
    CoupledStepper(CoupledReducedModel crm, double dt);

    CoupledStep step(const PartitionedModel& pm, double t, const Vector& u_now,
                     const CoupledState& prev) const;

    const CoupledReducedModel& model() const { return crm_; }
    double dt() const { return dt_; }

  private:
    CoupledReducedModel crm_;
    double dt_;
    StepSolver envelope_solver_;
};

/// One-shot variant (factors the envelope on every call).
CoupledStep coupled_step(const CoupledReducedModel& crm, const PartitionedModel& pm,
                         double t, const Vector& u_now, const CoupledState& prev,
                         double dt);

}  // namespace thermred::tvred
