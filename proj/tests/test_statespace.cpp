#include "thermred/statespace.hpp"

#include <random>

#include "doctest.h"
#include "support/random_systems.hpp"

using namespace thermred;

TEST_SUITE_BEGIN("statespace");

namespace {

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST_CASE("model validation rejects inconsistent shapes") {
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 3), Matrix::Zero(2, 1),
                                    Matrix::Zero(1, 2), Matrix::Zero(1, 1)),
                    DimensionError);
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 2), Matrix::Zero(3, 1),
                                    Matrix::Zero(1, 2), Matrix::Zero(1, 1)),
                    DimensionError);
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 2), Matrix::Zero(2, 1),
                                    Matrix::Zero(1, 3), Matrix::Zero(1, 1)),
                    DimensionError);
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 2), Matrix::Zero(2, 1),
                                    Matrix::Zero(1, 2), Matrix::Zero(2, 2)),
                    DimensionError);
    Matrix bad = m1(std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(StateSpaceModel(bad, m1(0), m1(0), m1(0)), ValueError);
}

TEST_CASE("stability check") {
    CHECK(is_stable(m1(-1.0)));
    CHECK_FALSE(is_stable(m1(0.0)));

    // triangular: eigenvalues on the diagonal regardless of the big coupling
    Matrix tri(2, 2);
    tri << -1.0, 1000.0, 0.0, -2.0;
    CHECK(is_stable(tri));

    CHECK_THROWS_AS(is_stable(Matrix::Zero(2, 3)), DimensionError);
    Matrix nan = m1(std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(is_stable(nan), ValueError);
}

TEST_CASE("static gain") {
    SUBCASE("scalar -cb/a") {
        const StateSpaceModel model(m1(-1), m1(1), m1(1), m1(0));
        CHECK(dc_gain(model)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero state contribution leaves D") {
        const StateSpaceModel model(Matrix::Identity(2, 2) * -1.0,
                                    Matrix::Zero(2, 2), Matrix::Identity(2, 2),
                                    Matrix::Identity(2, 2));
        CHECK(dc_gain(model).isApprox(Matrix::Identity(2, 2), 1e-14));
    }
    SUBCASE("parallel branches: 1/2 + 1/4") {
        Matrix a = Matrix::Zero(2, 2);
        a(0, 0) = -2.0;
        a(1, 1) = -4.0;
        Matrix b(2, 1);
        b << 1.0, 1.0;
        Matrix c(1, 2);
        c << 1.0, 1.0;
        const StateSpaceModel model(a, b, c, Matrix::Zero(1, 1));
        CHECK(dc_gain(model)(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("unstable A refused") {
        const StateSpaceModel model(m1(1.0), m1(1), m1(1), m1(0));
        CHECK_THROWS_AS(dc_gain(model), StabilityError);
    }
}

TEST_CASE("implicit Euler step") {
    SUBCASE("pure integrator accumulates dt * u") {
        const StateSpaceModel model(m1(0.0), m1(1.0), m1(1.0), m1(0.0));
        const StepResult r = step(model, Vector::Zero(1), Vector::Ones(1), 3600.0);
        CHECK(r.state(0) == doctest::Approx(3600.0));
    }
    SUBCASE("decay: (1 + dt)^-1") {
        const StateSpaceModel model(m1(-1.0), m1(0.0), m1(1.0), m1(0.0));
        const StepResult r = step(model, Vector::Ones(1), Vector::Zero(1), 1.0);
        CHECK(r.state(0) == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("steady states are fixed points") {
        std::mt19937_64 rng(7);
        const StateSpaceModel model = testsupport::random_stable_system(rng, 4, 2, 4);
        const Vector u = Vector::Ones(2);
        const Vector x_star = -model.A.partialPivLu().solve(model.B * u);
        const StepResult r = step(model, x_star, u, 900.0);
        CHECK((r.state - x_star).norm() <= 1e-12 * (1.0 + x_star.norm()));
    }
    SUBCASE("bad arguments") {
        const StateSpaceModel model(m1(-1.0), m1(1.0), m1(1.0), m1(0.0));
        CHECK_THROWS_AS(step(model, Vector::Zero(1), Vector::Zero(1), 0.0), ValueError);
        CHECK_THROWS_AS(step(model, Vector::Zero(2), Vector::Zero(1), 1.0),
                        DimensionError);
        CHECK_THROWS_AS(step(model, Vector::Zero(1), Vector::Zero(2), 1.0),
                        DimensionError);
    }
}

TEST_CASE("cached step solver matches one-shot stepping") {
    std::mt19937_64 rng(11);
    const StateSpaceModel model = testsupport::random_stable_system(rng, 6, 2, 3);
    const StepSolver solver(model, 1800.0);
    Vector x = Vector::Ones(6);
    const Vector u = Vector::Constant(2, 0.5);
    for (int i = 0; i < 4; ++i) {
        const StepResult cached = solver.step(x, u);
        const StepResult oneshot = step(model, x, u, 1800.0);
        CHECK(cached.state == oneshot.state);   // same factorization, same solve
        CHECK(cached.output == oneshot.output);
        x = cached.state;
    }
}

TEST_CASE("simulate") {
    SUBCASE("single row equals one step") {
        const StateSpaceModel model(m1(-0.5), m1(1.0), m1(2.0), m1(0.0));
        const Matrix inputs = Matrix::Constant(1, 1, 3.0);
        const Trajectory traj = simulate(model, inputs, Vector::Zero(1), 60.0);
        const StepResult r = step(model, Vector::Zero(1), Vector::Constant(1, 3.0), 60.0);
        CHECK(traj.length() == 1);
        CHECK(traj.states(0, 0) == r.state(0));
        CHECK(traj.outputs(0, 0) == r.output(0));
    }
    SUBCASE("constant input settles at the static gain") {
        std::mt19937_64 rng(23);
        const StateSpaceModel model = testsupport::random_stable_system(rng, 5, 2, 2);
        const Vector u = Vector::Constant(2, 0.7);
        // long horizon: far beyond the slowest time constant
        const Index k = 4000;
        const Matrix inputs = u.transpose().replicate(k, 1);
        const Trajectory traj = simulate(model, inputs, Vector::Zero(5), 5.0);
        const Vector expected = dc_gain(model) * u;
        CHECK((traj.outputs.row(k - 1).transpose() - expected).norm() <=
              1e-6 * expected.norm());
    }
    SUBCASE("zero-input norm never grows for symmetric negative-definite A") {
        std::mt19937_64 rng(31);
        for (int trial = 0; trial < 20; ++trial) {
            const Index n = 3 + static_cast<Index>(trial % 4);
            const Matrix a = testsupport::random_symmetric_nd(rng, n);
            const StateSpaceModel model = StateSpaceModel::full_observation(
                a, Matrix::Zero(n, 1));
            const Matrix inputs = Matrix::Zero(50, 1);
            const Vector x0 = testsupport::random_matrix(rng, n, 1);
            const Trajectory traj = simulate(model, inputs, x0, 200.0);
            double prev = x0.norm();
            for (Index j = 0; j < traj.length(); ++j) {
                const double now = traj.states.row(j).norm();
                CHECK(now <= prev * (1.0 + 1e-12));
                prev = now;
            }
        }
    }
    SUBCASE("timestamps strictly increasing") {
        const StateSpaceModel model(m1(-1.0), m1(1.0), m1(1.0), m1(0.0));
        const Trajectory traj =
            simulate(model, Matrix::Ones(5, 1), Vector::Zero(1), 10.0, 100.0);
        for (Index j = 1; j < traj.length(); ++j) {
            CHECK(traj.times(j) > traj.times(j - 1));
        }
        CHECK(traj.times(0) == doctest::Approx(110.0));
    }
}

TEST_SUITE_END();
