#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "advkit/attacks.hpp"
#include "advkit/mlp.hpp"
#include "advkit/rng.hpp"
#include "advkit/schedule.hpp"
#include "advkit/tensor.hpp"
#include "advkit/threat.hpp"
#include "support/test_support.hpp"

using namespace advkit;

namespace {

Tensor toy_input() { return Tensor({2}, {0.5, 0.5}); }

Tensor random_pixels(std::size_t n, Rng& rng) {
    Tensor t({n});
    for (auto& v : t.data) v = rng.next_unit();
    return t;
}

void require_feasible(const Tensor& adv, const Tensor& orig, double eps) {
    REQUIRE(perturbation_linf(adv, orig) <= eps + 1e-12);
    for (double v : adv.data) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

} // namespace

TEST_CASE("attack config validation") {
    AttackConfig cfg;
    REQUIRE_NOTHROW(cfg.validate());

    SECTION("epsilon") {
        cfg.epsilon = -0.1;
        REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SECTION("steps") {
        cfg.steps = 0;
        REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SECTION("step size") {
        cfg.step_size = 0.0;
        REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SECTION("momentum") {
        cfg.momentum = -1.0;
        REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SECTION("restart schedule is required for warm restarts") {
        cfg.schedule.reset();
        MlpClassifier toy = testsupport::make_logistic_toy();
        REQUIRE_THROWS_AS(rwr_nm_pgd(toy, toy_input(), 0, cfg), std::invalid_argument);
    }
}

TEST_CASE("attack names round trip") {
    for (AttackKind k : all_attacks()) {
        auto back = attack_from_name(attack_name(k));
        REQUIRE(back.has_value());
        REQUIRE(*back == k);
    }
    REQUIRE_FALSE(attack_from_name("cw").has_value());
    REQUIRE(all_attacks().size() == 6);
}

TEST_CASE("fgsm takes one signed step of size epsilon") {
    MlpClassifier toy = testsupport::make_logistic_toy();
    Tensor x = toy_input();
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.steps = 7;          // ignored
    cfg.step_size = 0.02;   // ignored
    AttackResult r = fgsm(toy, x, 0, cfg);

    // Class-0 loss gradient at (0.5, 0.5) is exactly (1, -1).
    REQUIRE(testsupport::bitwise_equal(r.x_adv[0], 0.5 + 0.1));
    REQUIRE(testsupport::bitwise_equal(r.x_adv[1], 0.5 - 0.1));
    REQUIRE(r.grad_calls == 1);
    REQUIRE(r.predict_calls == 1);
    REQUIRE(r.iterations_used == 1);
    REQUIRE(r.perturbation_linf <= cfg.epsilon + 1e-12);
}

TEST_CASE("fgsm with epsilon zero returns the input bitwise") {
    MlpClassifier toy = testsupport::make_logistic_toy();
    Tensor x = toy_input();
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    AttackResult r = fgsm(toy, x, 0, cfg);
    REQUIRE(testsupport::bitwise_equal(r.x_adv, x));
    REQUIRE(r.perturbation_linf == 0.0);
}

TEST_CASE("iterated sign steps hit the ball boundary on the logistic toy") {
    MlpClassifier toy = testsupport::make_logistic_toy();
    Tensor x = toy_input();
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.steps = 2;
    cfg.step_size = 0.05;

    AttackTrace trace;
    AttackResult r = i_fgsm(toy, x, 0, cfg, &trace);

    // Both steps push along sign (1, -1); the second lands on the boundary,
    // and the projection computes it as orig +- epsilon exactly.
    REQUIRE(testsupport::bitwise_equal(r.x_adv[0], 0.5 + 0.1));
    REQUIRE(testsupport::bitwise_equal(r.x_adv[1], 0.5 - 0.1));
    REQUIRE(r.x_adv[0] == Catch::Approx(0.6).margin(1e-12));
    REQUIRE(r.x_adv[1] == Catch::Approx(0.4).margin(1e-12));
    REQUIRE(r.grad_calls == 2);

    // Trace: start plus one point per step.
    REQUIRE(trace.iterates.size() == 3);
    REQUIRE(testsupport::bitwise_equal(trace.iterates[0], x));
    REQUIRE(trace.iterates[1][0] == Catch::Approx(0.55).margin(1e-12));
}

TEST_CASE("default step size is epsilon over steps") {
    // Constant gradient (1, -1, 1, -1): every step moves every coordinate by
    // exactly alpha until the ball binds.
    testsupport::LinearLossOracle oracle(Tensor({4}, {1.0, -1.0, 1.0, -1.0}));
    Tensor x({4}, {0.5, 0.5, 0.5, 0.5});
    AttackConfig cfg;
    cfg.epsilon = 0.2;
    cfg.steps = 4;

    AttackTrace trace;
    i_fgsm(oracle, x, 0, cfg, &trace);
    double alpha = cfg.epsilon / 4.0;
    REQUIRE(trace.iterates[1][0] == Catch::Approx(0.5 + alpha).margin(1e-15));
    REQUIRE(trace.iterates[2][0] == Catch::Approx(0.5 + 2 * alpha).margin(1e-15));
}

TEST_CASE("pgd without random start reduces to iterated sign steps bitwise") {
    MlpClassifier mlp = MlpClassifier::random_init({5, 8, 3}, 42);
    Rng rng(7);
    Tensor x = random_pixels(5, rng);
    AttackConfig cfg;
    cfg.epsilon = 0.15;
    cfg.steps = 6;
    cfg.random_start = false;

    AttackResult a = i_fgsm(mlp, x, 1, cfg);
    AttackResult b = pgd(mlp, x, 1, cfg);
    REQUIRE(testsupport::bitwise_equal(a.x_adv, b.x_adv));
    REQUIRE(a.final_loss == b.final_loss);
}

TEST_CASE("pgd with epsilon zero is the identity even with random start") {
    MlpClassifier toy = testsupport::make_logistic_toy();
    Tensor x = toy_input();
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    cfg.steps = 3;
    cfg.random_start = true;
    AttackResult r = pgd(toy, x, 0, cfg);
    REQUIRE(testsupport::bitwise_equal(r.x_adv, x));
}

TEST_CASE("pgd random start is seed-deterministic") {
    MlpClassifier mlp = MlpClassifier::random_init({5, 8, 3}, 4);
    Rng rng(12);
    Tensor x = random_pixels(5, rng);
    AttackConfig cfg;
    cfg.epsilon = 0.2;
    cfg.steps = 4;
    cfg.random_start = true;
    cfg.seed = 99;

    AttackResult a = pgd(mlp, x, 0, cfg);
    AttackResult b = pgd(mlp, x, 0, cfg);
    REQUIRE(testsupport::bitwise_equal(a.x_adv, b.x_adv));

    cfg.seed = 100;
    AttackResult c = pgd(mlp, x, 0, cfg);
    REQUIRE_FALSE(testsupport::bitwise_equal(a.x_adv, c.x_adv));
}

TEST_CASE("momentum attack accumulates normalized gradients") {
    MlpClassifier toy = testsupport::make_logistic_toy();
    Tensor x = toy_input();
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.steps = 3;
    cfg.momentum = 0.9;

    AttackResult r = mi_fgsm(toy, x, 0, cfg);
    // The gradient keeps the same signs along this path, so the accumulator
    // never flips and the attack marches to the ball boundary.
    REQUIRE(testsupport::bitwise_equal(r.x_adv[0], 0.5 + 0.1));
    REQUIRE(testsupport::bitwise_equal(r.x_adv[1], 0.5 - 0.1));
    REQUIRE(r.grad_calls == 3);
}

TEST_CASE("momentum zero reduces the momentum attack to iterated sign steps bitwise") {
    MlpClassifier mlp = MlpClassifier::random_init({6, 10, 4}, 17);
    Rng rng(3);
    AttackConfig cfg;
    cfg.epsilon = 0.12;
    cfg.steps = 5;
    cfg.momentum = 0.0;

    for (int trial = 0; trial < 5; ++trial) {
        Tensor x = random_pixels(6, rng);
        int label = trial % 4;

        // The reduction needs a non-degenerate fixture: the L1 guard must
        // never fire, otherwise the two attacks legitimately diverge.
        AttackTrace trace;
        AttackResult a = i_fgsm(mlp, x, label, cfg, &trace);
        for (const Tensor& it : trace.iterates) {
            REQUIRE(l1_norm(mlp.loss_gradient(it, label).second) >= 1e-9);
        }

        AttackResult b = mi_fgsm(mlp, x, label, cfg);
        REQUIRE(testsupport::bitwise_equal(a.x_adv, b.x_adv));
        REQUIRE(a.success == b.success);
        REQUIRE(a.final_loss == b.final_loss);
    }
}

TEST_CASE("zero gradients leave every attack at its start point") {
    testsupport::ConstantLossOracle oracle({3}, 1.5);
    Tensor x({3}, {0.2, 0.5, 0.8});
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.steps = 4;
    cfg.random_start = false;

    // sign(0) = 0: the sign step executes but moves nowhere, and the L1
    // guard keeps the momentum accumulator at zero instead of dividing by
    // a vanishing norm.
    for (AttackKind k : {AttackKind::fgsm, AttackKind::i_fgsm, AttackKind::mi_fgsm,
                         AttackKind::pgd, AttackKind::nm_pgd}) {
        AttackResult r = run_attack(k, oracle, x, 0, cfg);
        INFO(attack_name(k));
        REQUIRE(testsupport::bitwise_equal(r.x_adv, x));
        REQUIRE(std::isfinite(r.final_loss));
    }
}

TEST_CASE("improved momentum attack follows the documented two-step trace") {
    MlpClassifier toy = testsupport::make_logistic_toy();
    Tensor x = toy_input();
    AttackConfig cfg;
    cfg.epsilon = 0.2;
    cfg.steps = 2;
    cfg.momentum = 1.0;
    cfg.random_start = false;

    AttackTrace trace;
    AttackResult r = nm_pgd(toy, x, 0, cfg, &trace);

    // Independent replay of the update rule on this specific toy:
    //   cand  = cur + (mu^2 * g_acc + (1 + mu) * lr * sign(g))
    //   g_acc = mu * g_acc + g / ||g||_1
    // with the class-0 gradient of logits (0, 2*x0 - 2*x1) computed from the
    // sigmoid directly rather than through the network code.
    double lr = cfg.epsilon / 2.0;
    double mu = 1.0;
    std::array<double, 2> cur{0.5, 0.5};
    std::array<double, 2> gacc{0.0, 0.0};
    std::vector<std::array<double, 2>> sim_points;
    sim_points.push_back(cur);
    for (int t = 0; t < 2; ++t) {
        double z = 2.0 * cur[0] - 2.0 * cur[1];
        double p1 = 1.0 / (1.0 + std::exp(-z));
        std::array<double, 2> g{2.0 * p1, -2.0 * p1};
        double carry = mu * mu;
        double step = (1.0 + mu) * lr;
        std::array<double, 2> cand;
        for (int i = 0; i < 2; ++i) {
            double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
            cand[i] = cur[i] + (carry * gacc[i] + step * s);
        }
        for (int i = 0; i < 2; ++i) {
            double v = std::min(std::max(cand[i], 0.5 - cfg.epsilon), 0.5 + cfg.epsilon);
            cur[i] = std::min(std::max(v, 0.0), 1.0);
        }
        double n1 = std::abs(g[0]) + std::abs(g[1]);
        double inv = 1.0 / n1;
        for (int i = 0; i < 2; ++i) gacc[i] = mu * gacc[i] + g[i] * inv;
        sim_points.push_back(cur);
    }

    REQUIRE(trace.iterates.size() == sim_points.size());
    for (std::size_t p = 0; p < sim_points.size(); ++p) {
        REQUIRE(testsupport::bitwise_equal(trace.iterates[p][0], sim_points[p][0]));
        REQUIRE(testsupport::bitwise_equal(trace.iterates[p][1], sim_points[p][1]));
    }

    // Frozen endpoint: both coordinates pinned to the ball boundary.
    REQUIRE(r.x_adv[0] == Catch::Approx(0.7).margin(1e-12));
    REQUIRE(r.x_adv[1] == Catch::Approx(0.3).margin(1e-12));
    REQUIRE(testsupport::bitwise_equal(r.x_adv[0], 0.5 + 0.2));
    REQUIRE(testsupport::bitwise_equal(r.x_adv[1], 0.5 - 0.2));
    REQUIRE(r.grad_calls == 2);
}

TEST_CASE("improved momentum attack with momentum zero reduces to pgd bitwise") {
    MlpClassifier mlp = MlpClassifier::random_init({6, 10, 4}, 23);
    Rng rng(31);
    AttackConfig cfg;
    cfg.epsilon = 0.15;
    cfg.steps = 6;
    cfg.momentum = 0.0;

    for (bool rs : {false, true}) {
        cfg.random_start = rs;
        cfg.seed = 77;
        for (int trial = 0; trial < 4; ++trial) {
            Tensor x = random_pixels(6, rng);
            AttackResult a = pgd(mlp, x, trial % 4, cfg);
            AttackResult b = nm_pgd(mlp, x, trial % 4, cfg);
            INFO("random_start=" << rs << " trial=" << trial);
            REQUIRE(testsupport::bitwise_equal(a.x_adv, b.x_adv));
            REQUIRE(a.final_loss == b.final_loss);
        }
    }
}

TEST_CASE("one-step improved momentum attack without momentum matches the one-shot attack") {
    MlpClassifier mlp = MlpClassifier::random_init({5, 7, 3}, 8);
    Rng rng(2);
    Tensor x = random_pixels(5, rng);
    AttackConfig cfg;
    cfg.epsilon = 0.25;
    cfg.steps = 1;
    cfg.momentum = 0.0;
    cfg.random_start = false;

    AttackResult a = fgsm(mlp, x, 2, cfg);
    AttackResult b = nm_pgd(mlp, x, 2, cfg);
    REQUIRE(testsupport::bitwise_equal(a.x_adv, b.x_adv));
}

TEST_CASE("scaling the momentum carry by the step size changes the trajectory") {
    // Tiny explicit step size keeps the sign steps interior, so the carry
    // term's magnitude is what decides where the iterates land.
    testsupport::QuadraticLossOracle oracle(Tensor({2}, {0.5, 0.5}));
    Tensor x({2}, {0.45, 0.55});
    AttackConfig cfg;
    cfg.epsilon = 0.5;
    cfg.steps = 3;
    cfg.step_size = 0.01;
    cfg.momentum = 1.0;
    cfg.random_start = false;

    AttackResult unscaled = nm_pgd(oracle, x, 0, cfg);
    cfg.scale_carry_by_lr = true;
    AttackResult scaled = nm_pgd(oracle, x, 0, cfg);

    REQUIRE_FALSE(testsupport::bitwise_equal(unscaled.x_adv, scaled.x_adv));
    require_feasible(unscaled.x_adv, x, cfg.epsilon);
    require_feasible(scaled.x_adv, x, cfg.epsilon);
    REQUIRE(unscaled.grad_calls == scaled.grad_calls);
}

TEST_CASE("warm restarts run exactly epoch_max gradient calls") {
    MlpClassifier mlp = MlpClassifier::random_init({4, 6, 3}, 5);
    Rng rng(1);
    Tensor x = random_pixels(4, rng);

    for (int t0 : {1, 2, 3}) {
        for (double t_mul : {1.0, 2.0, 1.5}) {
            for (int epoch_max : {1, 2, 5, 9}) {
                AttackConfig cfg;
                cfg.epsilon = 0.1;
                cfg.momentum = 1.0;
                cfg.seed = 3;
                RestartSchedule sched;
                sched.t0 = t0;
                sched.t_mul = t_mul;
                sched.epoch_max = epoch_max;
                cfg.schedule = sched;

                std::uint64_t g0 = mlp.grad_calls();
                std::uint64_t p0 = mlp.predict_calls();
                AttackResult r = rwr_nm_pgd(mlp, x, 0, cfg);
                INFO("t0=" << t0 << " t_mul=" << t_mul << " epoch_max=" << epoch_max);
                REQUIRE(r.grad_calls == static_cast<std::uint64_t>(epoch_max));
                REQUIRE(r.iterations_used == epoch_max);
                REQUIRE(mlp.grad_calls() - g0 == r.grad_calls);
                REQUIRE(mlp.predict_calls() - p0 == 1);
                REQUIRE(r.predict_calls == 1);
                require_feasible(r.x_adv, x, cfg.epsilon);
            }
        }
    }
}

TEST_CASE("warm restarts ignore cfg.steps in favor of the schedule") {
    MlpClassifier toy = testsupport::make_logistic_toy();
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.steps = 3; // must be ignored
    RestartSchedule sched;
    sched.t0 = 2;
    sched.t_mul = 2.0;
    sched.epoch_max = 5;
    cfg.schedule = sched;

    AttackResult r = rwr_nm_pgd(toy, toy_input(), 0, cfg);
    REQUIRE(r.grad_calls == 5);
}

TEST_CASE("warm restarts re-noise at every restart boundary") {
    MlpClassifier toy = testsupport::make_logistic_toy();
    Tensor x = toy_input();
    AttackConfig cfg;
    cfg.epsilon = 0.2;
    cfg.momentum = 1.0;
    cfg.seed = 11;
    RestartSchedule sched;
    sched.t0 = 2;
    sched.t_mul = 2.0;
    sched.epoch_max = 6;
    cfg.schedule = sched;

    AttackTrace trace;
    rwr_nm_pgd(toy, x, 0, cfg, &trace);

    // Periods 2 then 4: restart entries before iterations 1 and 3, so the
    // trace holds 2 entry points + 6 step points. A third restart would have
    // begun after iteration 6, but the run ends there (done wins).
    REQUIRE(trace.iterates.size() == 8);

    // The second entry point (index 3) must differ from the point before it:
    // fresh noise was applied.
    REQUIRE_FALSE(testsupport::bitwise_equal(trace.iterates[3], trace.iterates[2]));
    for (const Tensor& it : trace.iterates) {
        require_feasible(it, x, cfg.epsilon);
    }
}

TEST_CASE("warm restarts with epsilon zero return the input bitwise") {
    MlpClassifier toy = testsupport::make_logistic_toy();
    Tensor x = toy_input();
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    RestartSchedule sched;
    sched.t0 = 2;
    sched.t_mul = 2.0;
    sched.epoch_max = 4;
    cfg.schedule = sched;

    AttackResult r = rwr_nm_pgd(toy, x, 0, cfg);
    REQUIRE(testsupport::bitwise_equal(r.x_adv, x));
    REQUIRE(r.perturbation_linf == 0.0);
}

TEST_CASE("warm restarts are seed-deterministic") {
    MlpClassifier mlp = MlpClassifier::random_init({4, 6, 3}, 9);
    Rng rng(8);
    Tensor x = random_pixels(4, rng);
    AttackConfig cfg;
    cfg.epsilon = 0.15;
    cfg.seed = 21;
    RestartSchedule sched;
    sched.t0 = 2;
    sched.t_mul = 2.0;
    sched.epoch_max = 6;
    cfg.schedule = sched;

    AttackTrace ta;
    AttackResult a = rwr_nm_pgd(mlp, x, 0, cfg, &ta);
    AttackTrace tb;
    AttackResult b = rwr_nm_pgd(mlp, x, 0, cfg, &tb);
    REQUIRE(testsupport::bitwise_equal(a.x_adv, b.x_adv));
    REQUIRE(ta.iterates.size() == tb.iterates.size());
    for (std::size_t i = 0; i < ta.iterates.size(); ++i) {
        REQUIRE(testsupport::bitwise_equal(ta.iterates[i], tb.iterates[i]));
    }

    // A different seed draws different restart noise. The endpoints may
    // still coincide (strong momentum drives both runs into the same ball
    // corner), but the first noisy entry point cannot.
    cfg.seed = 22;
    AttackTrace tc;
    rwr_nm_pgd(mlp, x, 0, cfg, &tc);
    REQUIRE_FALSE(testsupport::bitwise_equal(ta.iterates[0], tc.iterates[0]));
}

TEST_CASE("attacks ascend the loss they are given") {
    // Quadratic bowl centered far outside the pixel box: ascending the loss
    // means running away from the center, and there is always room to do so.
    Tensor c({3}, {2.0, 2.0, 2.0});
    testsupport::QuadraticLossOracle oracle(c);
    Tensor x({3}, {0.5, 0.4, 0.6});
    double initial_loss = oracle.loss_gradient(x, 0).first;

    AttackConfig cfg;
    cfg.epsilon = 0.2;
    cfg.steps = 8;
    cfg.momentum = 1.0;
    cfg.random_start = false;
    RestartSchedule sched;
    sched.t0 = 2;
    sched.t_mul = 2.0;
    sched.epoch_max = 8;
    cfg.schedule = sched;

    for (AttackKind k : all_attacks()) {
        AttackResult r = run_attack(k, oracle, x, 0, cfg);
        INFO(attack_name(k));
        REQUIRE(r.final_loss > initial_loss);
        require_feasible(r.x_adv, x, cfg.epsilon);
    }
}

TEST_CASE("attack results count oracle queries exactly") {
    MlpClassifier mlp = MlpClassifier::random_init({4, 5, 3}, 77);
    Rng rng(5);
    Tensor x = random_pixels(4, rng);
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.steps = 5;
    cfg.random_start = true;
    RestartSchedule sched;
    sched.t0 = 2;
    sched.t_mul = 2.0;
    sched.epoch_max = 7;
    cfg.schedule = sched;

    for (AttackKind k : all_attacks()) {
        std::uint64_t g0 = mlp.grad_calls();
        std::uint64_t p0 = mlp.predict_calls();
        AttackResult r = run_attack(k, mlp, x, 1, cfg);
        INFO(attack_name(k));
        REQUIRE(mlp.grad_calls() - g0 == r.grad_calls);
        REQUIRE(mlp.predict_calls() - p0 == r.predict_calls);
        REQUIRE(r.predict_calls == 1);
        std::uint64_t expected = k == AttackKind::fgsm ? 1
                                 : k == AttackKind::rwr_nm_pgd ? 7
                                                               : 5;
        REQUIRE(r.grad_calls == expected);
    }
}

TEST_CASE("clean misclassification counts as success without any perturbation") {
    testsupport::ThresholdOracle oracle({2});

    AttackConfig cfg;
    cfg.epsilon = 0.05;
    cfg.steps = 2;

    // Label agrees with the oracle: zero gradient, no movement, no success.
    Tensor agree({2}, {0.4, 0.5});
    AttackResult r1 = i_fgsm(oracle, agree, 0, cfg);
    REQUIRE_FALSE(r1.success);
    REQUIRE(r1.predicted_label == 0);

    // Oracle already disagrees with the label: counts as success even though
    // the attack could not move the input.
    Tensor disagree({2}, {0.7, 0.5});
    AttackResult r2 = i_fgsm(oracle, disagree, 0, cfg);
    REQUIRE(r2.success);
    REQUIRE(r2.predicted_label == 1);
    REQUIRE(testsupport::bitwise_equal(r2.x_adv, disagree));
}

TEST_CASE("every attack stays inside the threat model under fuzzing") {
    MlpClassifier mlp = MlpClassifier::random_init({6, 9, 4}, 13);
    Rng rng(0xfeed);
    const double eps_grid[] = {0.0, 0.03, 0.1, 0.37, 1.0};

    int cases = 0;
    for (int trial = 0; trial < 7; ++trial) {
        Tensor x = random_pixels(6, rng);
        int label = static_cast<int>(rng.next_u64() % 4);
        for (double eps : eps_grid) {
            AttackConfig cfg;
            cfg.epsilon = eps;
            cfg.steps = 4;
            cfg.momentum = 1.0;
            cfg.random_start = (trial % 2) == 0;
            cfg.seed = rng.next_u64();
            RestartSchedule sched;
            sched.t0 = 2;
            sched.t_mul = 2.0;
            sched.epoch_max = 5;
            cfg.schedule = sched;

            for (AttackKind k : all_attacks()) {
                AttackTrace trace;
                AttackResult r = run_attack(k, mlp, x, label, cfg, &trace);
                INFO(attack_name(k) << " eps=" << eps << " trial=" << trial);
                require_feasible(r.x_adv, x, eps);
                for (const Tensor& it : trace.iterates) {
                    require_feasible(it, x, eps);
                }
                REQUIRE(r.perturbation_linf <= eps + 1e-12);
                ++cases;
            }
        }
    }
    REQUIRE(cases == 7 * 5 * 6);
}
