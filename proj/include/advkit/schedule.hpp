#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

namespace advkit {

// Warm-restart plan: restart periods grow geometrically (T0, then
// round(T_prev * t_mul) with a floor of 1) and the step size follows a
// cosine curve inside each period. epoch_max caps the total iteration
// count across all restarts.
struct RestartSchedule {
    double lr_min = 0.0;
    // Unset means "derive per restart from the attack epsilon":
    // lr_max_i = max(2 * eps / T_i, lr_min). An explicit value is used
    // unchanged for every restart.
    std::optional<double> lr_max{};
    int t0 = 2;
    double t_mul = 2.0;
    int epoch_max = 1;

    void validate() const {
        if (!(lr_min >= 0.0)) {
            throw std::invalid_argument("schedule: lr_min must be >= 0");
        }
        if (lr_max && !(*lr_max >= lr_min)) {
            throw std::invalid_argument("schedule: lr_max must be >= lr_min");
        }
        if (t0 < 1) {
            throw std::invalid_argument("schedule: t0 must be a positive integer");
        }
        if (!(t_mul >= 1.0)) {
            throw std::invalid_argument("schedule: t_mul must be >= 1");
        }
        if (epoch_max < 1) {
            throw std::invalid_argument("schedule: epoch_max must be a positive integer");
        }
    }
};

struct ScheduleState {
    int restart_index = 0;
    int period = 1;   // T_i: length of the current restart
    int t_cur = 0;    // iterations completed inside the current restart
    int epoch = 0;    // iterations completed overall
};

inline ScheduleState make_schedule_state(const RestartSchedule& s) {
    s.validate();
    ScheduleState st;
    st.period = s.t0;
    return st;
}

// Cosine annealing: lr_min + (lr_max - lr_min) * (1 + cos(pi*t_cur/t_i)) / 2.
// The endpoints are pinned so lr(0) == lr_max and lr(t_i) == lr_min exactly,
// with no floating-point residue.
inline double cosine_step(double lr_min, double lr_max, int t_cur, int t_i) {
    if (t_i < 1) {
        throw std::invalid_argument("cosine_step: t_i must be >= 1");
    }
    if (t_cur < 0 || t_cur > t_i) {
        throw std::invalid_argument("cosine_step: t_cur outside [0, t_i]");
    }
    if (!(lr_min <= lr_max)) {
        throw std::invalid_argument("cosine_step: lr_min > lr_max");
    }
    if (t_cur == 0) return lr_max;
    if (t_cur == t_i) return lr_min;
    double frac = static_cast<double>(t_cur) / static_cast<double>(t_i);
    double c = std::cos(3.141592653589793238462643383279502884 * frac);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + c);
}

struct AdvanceResult {
    bool restarted = false; // the iteration just counted closed a period
    bool done = false;      // epoch_max reached; callers stop before any new restart work
};

// Counts one completed iteration. When the period fills up, resets t_cur,
// grows the period (round to nearest, floor 1), and reports the restart.
// `done` can fire together with `restarted`; done wins for callers.
inline AdvanceResult advance(ScheduleState& st, const RestartSchedule& sched) {
    sched.validate();
    st.t_cur += 1;
    st.epoch += 1;
    AdvanceResult r;
    if (st.t_cur >= st.period) {
        r.restarted = true;
        st.t_cur = 0;
        st.restart_index += 1;
        long long next = std::llround(static_cast<double>(st.period) * sched.t_mul);
        st.period = next < 1 ? 1 : static_cast<int>(next);
    }
    if (st.epoch >= sched.epoch_max) {
        r.done = true;
    }
    return r;
}

} // namespace advkit
