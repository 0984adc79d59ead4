#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oracle.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "tensor.hpp"
#include "threat.hpp"

namespace advkit {

enum class AttackKind { fgsm, i_fgsm, mi_fgsm, pgd, nm_pgd, rwr_nm_pgd };

inline const char* attack_name(AttackKind k) {
    switch (k) {
        case AttackKind::fgsm: return "fgsm";
        case AttackKind::i_fgsm: return "i-fgsm";
        case AttackKind::mi_fgsm: return "mi-fgsm";
        case AttackKind::pgd: return "pgd";
        case AttackKind::nm_pgd: return "nm-pgd";
        case AttackKind::rwr_nm_pgd: return "rwr-nm-pgd";
    }
    return "?";
}

inline std::optional<AttackKind> attack_from_name(std::string_view name) {
    for (AttackKind k : {AttackKind::fgsm, AttackKind::i_fgsm, AttackKind::mi_fgsm,
                         AttackKind::pgd, AttackKind::nm_pgd, AttackKind::rwr_nm_pgd}) {
        if (name == attack_name(k)) return k;
    }
    return std::nullopt;
}

inline std::vector<AttackKind> all_attacks() {
    return {AttackKind::fgsm, AttackKind::i_fgsm, AttackKind::mi_fgsm,
            AttackKind::pgd,  AttackKind::nm_pgd, AttackKind::rwr_nm_pgd};
}

// Gradients with L1 norm below this are treated as zero by the momentum
// normalizations (the accumulator update is skipped); the sign step still
// executes with whatever sign pattern the raw gradient has.
inline constexpr double kZeroGradL1 = 1e-12;

struct AttackConfig {
    double epsilon = 0.1;
    int steps = 10;                        // T for the iterative attacks
    std::optional<double> step_size{};     // alpha; unset means epsilon / steps
    double momentum = 1.0;                 // mu
    bool random_start = false;             // honored by pgd and nm_pgd
    std::optional<RestartSchedule> schedule{}; // required by rwr_nm_pgd
    // When set, the momentum carry term in nm_pgd/rwr_nm_pgd is scaled by
    // the step size (mu^2 * lr * g_acc instead of mu^2 * g_acc). Off by
    // default: the unscaled carry is the documented update, and projection
    // bounds its effect.
    bool scale_carry_by_lr = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(epsilon >= 0.0)) {
            throw std::invalid_argument("attack: epsilon must be >= 0");
        }
        if (steps < 1) {
            throw std::invalid_argument("attack: steps must be >= 1");
        }
        if (step_size && !(*step_size > 0.0)) {
            throw std::invalid_argument("attack: step_size must be > 0");
        }
        if (!(momentum >= 0.0)) {
            throw std::invalid_argument("attack: momentum must be >= 0");
        }
        if (schedule) schedule->validate();
    }
};

struct AttackResult {
    Tensor x_adv;
    bool success = false;        // argmax(predict(x_adv)) != true label
    int predicted_label = -1;
    int iterations_used = 0;
    std::uint64_t grad_calls = 0;
    std::uint64_t predict_calls = 0;
    double final_loss = 0.0;     // loss at x_adv, from the final predict
    double perturbation_linf = 0.0;
};

// Optional iterate capture for tests and debugging: every point the attack
// visits after a projection, in order (random start included).
struct AttackTrace {
    std::vector<Tensor> iterates;
};

namespace detail {

inline double auto_step(const AttackConfig& cfg) {
    return cfg.step_size ? *cfg.step_size
                         : cfg.epsilon / static_cast<double>(cfg.steps);
}

inline void record(AttackTrace* trace, const Tensor& x) {
    if (trace) trace->iterates.push_back(x);
}

// Final bookkeeping shared by every attack: one predict call decides
// success, supplies the loss, and fills the counters.
inline AttackResult finish(const GradientOracle& oracle, const Tensor& x_orig,
                           Tensor x_adv, int label, int iterations,
                           std::uint64_t grads_used) {
    AttackResult r;
    Tensor logits = oracle.predict(x_adv);
    r.predicted_label = argmax_class(logits);
    r.success = r.predicted_label != label;
    r.final_loss = oracle.loss_from_logits(logits, label);
    r.perturbation_linf = perturbation_linf(x_adv, x_orig);
    r.x_adv = std::move(x_adv);
    r.iterations_used = iterations;
    r.grad_calls = grads_used;
    r.predict_calls = 1; // exactly the one above
    return r;
}

// Plain iterated sign steps with projection. fgsm, i_fgsm, and pgd are all
// this loop with different settings, which is what makes their reduction
// identities hold bit for bit.
inline AttackResult sign_step_attack(const GradientOracle& oracle, const Tensor& x,
                                     int label, const AttackConfig& cfg,
                                     bool use_random_start, AttackTrace* trace) {
    cfg.validate();
    ThreatModel tm{cfg.epsilon};
    Rng rng(cfg.seed);
    double alpha = auto_step(cfg);

    Tensor cur = use_random_start ? random_start(x, tm, rng) : x;
    record(trace, cur);
    std::uint64_t grads = 0;
    Tensor cand(x.shape);
    for (int t = 0; t < cfg.steps; ++t) {
        Tensor g = oracle.loss_gradient(cur, label).second;
        ++grads;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
            cand[i] = cur[i] + alpha * s;
        }
        cur = project(cand, x, tm);
        record(trace, cur);
    }
    return finish(oracle, x, std::move(cur), label, cfg.steps, grads);
}

// One improved-Nesterov-momentum step:
//   x      <- project(x + mu^2 * carry_scale * g_acc + (1 + mu) * lr * sign(g))
//   g_acc  <- mu * g_acc + g / ||g||_1     (skipped below the L1 guard)
// where g is the loss gradient at the incoming x. Ascent on the loss.
inline void nm_step(const GradientOracle& oracle, Tensor& cur, Tensor& g_acc,
                    const Tensor& x_orig, const ThreatModel& tm, int label,
                    double mu, double lr, bool scale_carry, Tensor& cand) {
    Tensor g = oracle.loss_gradient(cur, label).second;
    double carry = mu * mu * (scale_carry ? lr : 1.0);
    double step = (1.0 + mu) * lr;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
        cand[i] = cur[i] + (carry * g_acc[i] + step * s);
    }
    cur = project(cand, x_orig, tm);
    double n1 = l1_norm(g);
    if (n1 >= kZeroGradL1) {
        double inv = 1.0 / n1;
        for (std::size_t i = 0; i < g_acc.size(); ++i) {
            g_acc[i] = mu * g_acc[i] + g[i] * inv;
        }
    } else {
        for (std::size_t i = 0; i < g_acc.size(); ++i) {
            g_acc[i] = mu * g_acc[i];
        }
    }
}

} // namespace detail

// Single sign step of size epsilon. Ignores steps/step_size/random_start.
inline AttackResult fgsm(const GradientOracle& oracle, const Tensor& x, int label,
                         const AttackConfig& cfg, AttackTrace* trace = nullptr) {
    AttackConfig c = cfg;
    c.steps = 1;
    // With epsilon == 0 the attack must stay the identity, and validation
    // rejects an explicit zero step size, so that case rides the automatic
    // step (epsilon / steps == 0).
    c.step_size.reset();
    if (cfg.epsilon > 0.0) c.step_size = cfg.epsilon;
    return detail::sign_step_attack(oracle, x, label, c, false, trace);
}

// T sign steps of size alpha from the clean input; no random start.
inline AttackResult i_fgsm(const GradientOracle& oracle, const Tensor& x, int label,
                           const AttackConfig& cfg, AttackTrace* trace = nullptr) {
    return detail::sign_step_attack(oracle, x, label, cfg, false, trace);
}

// i_fgsm plus an optional uniform random start inside the feasible set.
inline AttackResult pgd(const GradientOracle& oracle, const Tensor& x, int label,
                        const AttackConfig& cfg, AttackTrace* trace = nullptr) {
    return detail::sign_step_attack(oracle, x, label, cfg, cfg.random_start, trace);
}

// Momentum attack: the step direction is the sign of an L1-normalized
// gradient accumulator g <- mu*g + grad/||grad||_1. No random start.
inline AttackResult mi_fgsm(const GradientOracle& oracle, const Tensor& x, int label,
                            const AttackConfig& cfg, AttackTrace* trace = nullptr) {
    cfg.validate();
    ThreatModel tm{cfg.epsilon};
    double alpha = detail::auto_step(cfg);
    double mu = cfg.momentum;

    Tensor cur = x;
    detail::record(trace, cur);
    Tensor g_acc(x.shape);
    Tensor cand(x.shape);
    std::uint64_t grads = 0;
    for (int t = 0; t < cfg.steps; ++t) {
        Tensor g = oracle.loss_gradient(cur, label).second;
        ++grads;
        double n1 = l1_norm(g);
        if (n1 >= kZeroGradL1) {
            double inv = 1.0 / n1;
            for (std::size_t i = 0; i < g_acc.size(); ++i) {
                g_acc[i] = mu * g_acc[i] + g[i] * inv;
            }
        } else {
            for (std::size_t i = 0; i < g_acc.size(); ++i) {
                g_acc[i] = mu * g_acc[i];
            }
        }
        for (std::size_t i = 0; i < cur.size(); ++i) {
            double s = g_acc[i] > 0.0 ? 1.0 : (g_acc[i] < 0.0 ? -1.0 : 0.0);
            cand[i] = cur[i] + alpha * s;
        }
        cur = project(cand, x, tm);
        detail::record(trace, cur);
    }
    return detail::finish(oracle, x, std::move(cur), label, cfg.steps, grads);
}

// Improved Nesterov momentum attack: fixed step size epsilon / T, a momentum
// carry term mu^2 * g_acc ahead of each sign step, and the L1-normalized
// accumulator of mi_fgsm. Honors cfg.random_start.
inline AttackResult nm_pgd(const GradientOracle& oracle, const Tensor& x, int label,
                           const AttackConfig& cfg, AttackTrace* trace = nullptr) {
    cfg.validate();
    ThreatModel tm{cfg.epsilon};
    Rng rng(cfg.seed);
    double lr = detail::auto_step(cfg);

    Tensor cur = cfg.random_start ? random_start(x, tm, rng) : x;
    detail::record(trace, cur);
    Tensor g_acc(x.shape);
    Tensor cand(x.shape);
    std::uint64_t grads = 0;
    for (int t = 0; t < cfg.steps; ++t) {
        detail::nm_step(oracle, cur, g_acc, x, tm, label, cfg.momentum, lr,
                        cfg.scale_carry_by_lr, cand);
        ++grads;
        detail::record(trace, cur);
    }
    return detail::finish(oracle, x, std::move(cur), label, cfg.steps, grads);
}

// nm_pgd under a warm-restart schedule. Every restart (the first included)
// adds fresh uniform noise to the incoming point and projects it back into
// the feasible set around the original input; the gradient accumulator
// resets; the step size follows the cosine curve over the restart's period.
// Runs exactly schedule.epoch_max iterations, one gradient call each.
// cfg.steps and cfg.step_size are ignored; the schedule drives everything.
inline AttackResult rwr_nm_pgd(const GradientOracle& oracle, const Tensor& x, int label,
                               const AttackConfig& cfg, AttackTrace* trace = nullptr) {
    cfg.validate();
    if (!cfg.schedule) {
        throw std::invalid_argument("rwr_nm_pgd: restart schedule required");
    }
    const RestartSchedule& sched = *cfg.schedule;
    ThreatModel tm{cfg.epsilon};
    Rng rng(cfg.seed);
    ScheduleState st = make_schedule_state(sched);

    Tensor cur = x;
    Tensor cand(x.shape);
    std::uint64_t grads = 0;
    int iterations = 0;
    for (;;) {
        // Restart entry: fresh noise around the incoming point, projected
        // to the ball around the original input.
        Tensor noise = uniform_noise(x.shape, -cfg.epsilon, cfg.epsilon, rng);
        for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = cur[i] + noise[i];
        cur = project(cand, x, tm);
        detail::record(trace, cur);

        Tensor g_acc(x.shape);
        double lr_max = sched.lr_max
                            ? *sched.lr_max
                            : std::max(2.0 * cfg.epsilon / static_cast<double>(st.period),
                                       sched.lr_min);
        bool restart = false;
        while (!restart) {
            double lr = cosine_step(sched.lr_min, lr_max, st.t_cur, st.period);
            detail::nm_step(oracle, cur, g_acc, x, tm, label, cfg.momentum, lr,
                            cfg.scale_carry_by_lr, cand);
            ++grads;
            ++iterations;
            detail::record(trace, cur);
            AdvanceResult adv = advance(st, sched);
            if (adv.done) {
                return detail::finish(oracle, x, std::move(cur), label, iterations, grads);
            }
            restart = adv.restarted;
        }
    }
}

inline AttackResult run_attack(AttackKind kind, const GradientOracle& oracle,
                               const Tensor& x, int label, const AttackConfig& cfg,
                               AttackTrace* trace = nullptr) {
    switch (kind) {
        case AttackKind::fgsm: return fgsm(oracle, x, label, cfg, trace);
        case AttackKind::i_fgsm: return i_fgsm(oracle, x, label, cfg, trace);
        case AttackKind::mi_fgsm: return mi_fgsm(oracle, x, label, cfg, trace);
        case AttackKind::pgd: return pgd(oracle, x, label, cfg, trace);
        case AttackKind::nm_pgd: return nm_pgd(oracle, x, label, cfg, trace);
        case AttackKind::rwr_nm_pgd: return rwr_nm_pgd(oracle, x, label, cfg, trace);
    }
    throw std::invalid_argument("run_attack: unknown attack kind");
}

} // namespace advkit
