#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "attacks.hpp"
#include "dataset.hpp"
#include "oracle.hpp"
#include "rng.hpp"

namespace advkit {

struct csv_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Forwarding oracle with its own counters, wrapped around a shared model so
// each attacked example gets exact per-example query counts even when cells
// run on worker threads.
class CountingOracle final : public GradientOracle {
public:
    explicit CountingOracle(const GradientOracle& inner) : inner_(inner) {}

    std::size_t num_classes() const override { return inner_.num_classes(); }
    std::vector<std::size_t> input_shape() const override { return inner_.input_shape(); }

    Tensor predict(const Tensor& x) const override {
        Tensor out = inner_.predict(x);
        std::size_t d = Tensor::numel(inner_.input_shape());
        std::size_t n = (x.size() == d || x.shape.empty()) ? 1 : x.shape[0];
        predicts_ += n;
        return out;
    }

    std::pair<double, Tensor> loss_gradient(const Tensor& x, int label) const override {
        auto r = inner_.loss_gradient(x, label);
        grads_ += 1;
        return r;
    }

    double loss_from_logits(const Tensor& logits, int label) const override {
        return inner_.loss_from_logits(logits, label);
    }

    std::uint64_t grad_calls() const override { return grads_; }
    std::uint64_t predict_calls() const override { return predicts_; }

private:
    const GradientOracle& inner_;
    mutable std::uint64_t grads_ = 0;
    mutable std::uint64_t predicts_ = 0;
};

struct BudgetCaps {
    std::uint64_t max_grad_calls = 100;
    std::uint64_t max_predict_calls = 200;
};

struct NamedModel {
    std::string name;
    const GradientOracle* model = nullptr;
};

inline AttackConfig default_sweep_config() {
    AttackConfig c;
    c.steps = 20;
    c.momentum = 1.0;
    c.random_start = true;
    return c;
}

inline std::vector<double> default_epsilon_grid() {
    return {0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
}

struct SweepSpec {
    std::vector<AttackKind> attacks = all_attacks();
    std::vector<double> epsilons = default_epsilon_grid();
    std::vector<NamedModel> models;
    const Dataset* dataset = nullptr;
    BudgetCaps budget{};
    AttackConfig base_config = default_sweep_config();
    std::uint64_t seed = 1;
    bool parallel = true;
    std::size_t limit = static_cast<std::size_t>(-1); // attack only the first examples
};

struct ExampleOutcome {
    AttackKind attack = AttackKind::fgsm;
    std::string model;
    double epsilon = 0.0;
    std::size_t example_index = 0;
    int true_label = 0;
    int predicted_label = 0;
    bool success = false;
    double linf = 0.0;
    std::uint64_t grad_calls = 0;
    std::uint64_t predict_calls = 0;
    bool budget_ok = true;
};

struct ReportRow {
    AttackKind attack = AttackKind::fgsm;
    std::string model;
    double epsilon = 0.0;
    double success_rate = 0.0;
    double runtime_s = 0.0;
    double grad_calls_mean = 0.0;
    double predict_calls_mean = 0.0;
    std::size_t n_examples = 0;
    // Supplementary metric for the stdout table only (not part of the CSV
    // contract): accuracy on initially-correct examples after the attack.
    double robust_accuracy = 0.0;
    std::size_t initially_correct = 0;
};

struct EvaluationReport {
    std::vector<ReportRow> rows;
    std::vector<ExampleOutcome> outcomes;
};

// Per-cell attack settings: the base config with the cell epsilon, plus a
// default restart schedule for rwr-nm-pgd whose epoch budget equals the
// iteration budget of the other attacks.
inline AttackConfig cell_config(const SweepSpec& spec, AttackKind kind, double eps) {
    AttackConfig c = spec.base_config;
    c.epsilon = eps;
    if (kind == AttackKind::rwr_nm_pgd && !c.schedule) {
        RestartSchedule s;
        s.epoch_max = c.steps;
        c.schedule = s;
    }
    // Random-start pgd needs T * alpha to cover the ball diameter (2 eps),
    // or an unlucky start can never reach the far corners; the customary
    // 2.5 eps / T budget provides that slack. Outside sweeps the attack
    // keeps its eps / T default, and an explicit step size always wins.
    if (kind == AttackKind::pgd && c.random_start && !c.step_size && eps > 0.0) {
        c.step_size = 2.5 * eps / static_cast<double>(c.steps);
    }
    return c;
}

namespace detail {

// Deterministic per-cell seed from the sweep seed and the cell coordinates,
// so results never depend on scheduling order. Per-example seeds then follow
// the cell seed XOR example index rule.
inline std::uint64_t cell_seed(std::uint64_t base, std::size_t attack_idx,
                               std::size_t model_idx, std::size_t eps_idx) {
    std::uint64_t s = Rng::mix(base ^ (static_cast<std::uint64_t>(attack_idx) + 1));
    s = Rng::mix(s ^ (static_cast<std::uint64_t>(model_idx) + 1));
    s = Rng::mix(s ^ (static_cast<std::uint64_t>(eps_idx) + 1));
    return s;
}

struct CellResult {
    ReportRow row;
    std::vector<ExampleOutcome> outcomes;
};

inline CellResult run_cell(const SweepSpec& spec, std::size_t attack_idx,
                           std::size_t model_idx, std::size_t eps_idx,
                           const std::vector<int>* clean_predictions) {
    AttackKind kind = spec.attacks[attack_idx];
    const NamedModel& nm = spec.models[model_idx];
    double eps = spec.epsilons[eps_idx];
    const Dataset& ds = *spec.dataset;
    std::size_t n = std::min(spec.limit, ds.size());

    CellResult res;
    res.row.attack = kind;
    res.row.model = nm.name;
    res.row.epsilon = eps;
    res.row.n_examples = n;
    res.outcomes.reserve(n);

    AttackConfig base = cell_config(spec, kind, eps);
    std::uint64_t cseed = cell_seed(spec.seed, attack_idx, model_idx, eps_idx);

    std::size_t successes = 0;
    std::uint64_t grad_total = 0, predict_total = 0;
    std::size_t still_correct = 0, initially_correct = 0;

    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t j = 0; j < n; ++j) {
        const LabeledExample& e = ds.examples[j];
        CountingOracle counted(*nm.model);
        AttackConfig cfg = base;
        cfg.seed = Rng::derive(cseed, j);
        AttackResult r = run_attack(kind, counted, e.image, e.label, cfg);

        ExampleOutcome o;
        o.attack = kind;
        o.model = nm.name;
        o.epsilon = eps;
        o.example_index = j;
        o.true_label = e.label;
        o.predicted_label = r.predicted_label;
        o.success = r.success;
        o.linf = r.perturbation_linf;
        o.grad_calls = counted.grad_calls();
        o.predict_calls = counted.predict_calls();
        o.budget_ok = o.grad_calls <= spec.budget.max_grad_calls &&
                      o.predict_calls <= spec.budget.max_predict_calls;
        res.outcomes.push_back(o);

        successes += r.success ? 1 : 0;
        grad_total += o.grad_calls;
        predict_total += o.predict_calls;
        if (clean_predictions && (*clean_predictions)[j] == e.label) {
            ++initially_correct;
            if (r.predicted_label == e.label) ++still_correct;
        }
    }
    auto t1 = std::chrono::steady_clock::now();

    res.row.runtime_s = std::chrono::duration<double>(t1 - t0).count();
    if (n > 0) {
        res.row.success_rate = static_cast<double>(successes) / static_cast<double>(n);
        res.row.grad_calls_mean = static_cast<double>(grad_total) / static_cast<double>(n);
        res.row.predict_calls_mean = static_cast<double>(predict_total) / static_cast<double>(n);
    }
    res.row.initially_correct = initially_correct;
    res.row.robust_accuracy = initially_correct > 0
        ? static_cast<double>(still_correct) / static_cast<double>(initially_correct)
        : 0.0;
    return res;
}

inline void validate_spec(const SweepSpec& spec) {
    if (spec.attacks.empty()) {
        throw std::invalid_argument("sweep: no attacks");
    }
    if (spec.models.empty()) {
        throw std::invalid_argument("sweep: no models");
    }
    for (const NamedModel& m : spec.models) {
        if (m.model == nullptr) {
            throw std::invalid_argument("sweep: null model");
        }
    }
    if (spec.dataset == nullptr) {
        throw std::invalid_argument("sweep: no dataset");
    }
    for (double e : spec.epsilons) {
        if (!(e >= 0.0)) {
            throw std::invalid_argument("sweep: epsilon must be >= 0");
        }
    }
    if (spec.epsilons.empty()) {
        throw std::invalid_argument("sweep: no epsilons");
    }
}

// Clean-prediction pass for the supplementary robust-accuracy metric. Runs
// outside attack timing and outside per-example attack counters.
inline std::vector<std::vector<int>> clean_prediction_table(const SweepSpec& spec) {
    std::size_t n = std::min(spec.limit, spec.dataset->size());
    std::vector<std::vector<int>> table(spec.models.size());
    for (std::size_t m = 0; m < spec.models.size(); ++m) {
        table[m].resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            table[m][j] = argmax_class(spec.models[m].model->predict(spec.dataset->examples[j].image));
        }
    }
    return table;
}

} // namespace detail

// Mean attack success rate over models: for each model the fraction of
// examples whose post-attack prediction differs from the true label
// (clean misclassifications count), averaged over models with equal weight.
inline double attack_success_rate(const std::vector<NamedModel>& models,
                                  const Dataset& dataset, AttackKind kind,
                                  const AttackConfig& cfg) {
    if (models.empty() || dataset.size() == 0) {
        throw std::invalid_argument("attack_success_rate: models and dataset must be non-empty");
    }
    double sum = 0.0;
    for (const NamedModel& nm : models) {
        if (nm.model == nullptr) {
            throw std::invalid_argument("attack_success_rate: null model");
        }
        std::size_t successes = 0;
        for (std::size_t j = 0; j < dataset.size(); ++j) {
            AttackConfig c = cfg;
            c.seed = Rng::derive(cfg.seed, j);
            AttackResult r = run_attack(kind, *nm.model, dataset.examples[j].image,
                                        dataset.examples[j].label, c);
            successes += r.success ? 1 : 0;
        }
        sum += static_cast<double>(successes) / static_cast<double>(dataset.size());
    }
    return sum / static_cast<double>(models.size());
}

// Full grid: every attack x model x epsilon cell over the first
// min(limit, |dataset|) examples. Cell work items are independent; with
// spec.parallel they run on a small thread pool, and results are identical
// to the serial order because all randomness derives from cell coordinates.
inline EvaluationReport run_sweep(const SweepSpec& spec) {
    detail::validate_spec(spec);
    std::vector<std::vector<int>> clean = detail::clean_prediction_table(spec);

    std::size_t cells = spec.attacks.size() * spec.models.size() * spec.epsilons.size();
    std::vector<detail::CellResult> results(cells);

    // A throwing cell must not take the process down from inside a worker
    // thread; the first error drains the queue and is rethrown on the
    // calling thread once the pool has joined.
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker_body = [&](std::atomic<std::size_t>& next) {
        for (;;) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= cells) return;
            std::size_t a = idx / (spec.models.size() * spec.epsilons.size());
            std::size_t rem = idx % (spec.models.size() * spec.epsilons.size());
            std::size_t m = rem / spec.epsilons.size();
            std::size_t e = rem % spec.epsilons.size();
            try {
                results[idx] = detail::run_cell(spec, a, m, e, &clean[m]);
            } catch (...) {
                {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                }
                next.store(cells);
                return;
            }
        }
    };

    if (spec.parallel) {
        unsigned hw = std::thread::hardware_concurrency();
        std::size_t workers = std::min<std::size_t>(std::max(1u, hw), cells > 0 ? cells : 1);
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] { worker_body(next); });
        }
        for (std::thread& t : pool) t.join();
    } else {
        std::atomic<std::size_t> next{0};
        worker_body(next);
    }
    if (first_error) std::rethrow_exception(first_error);

    EvaluationReport rep;
    rep.rows.reserve(cells);
    for (detail::CellResult& c : results) {
        rep.rows.push_back(std::move(c.row));
        for (ExampleOutcome& o : c.outcomes) rep.outcomes.push_back(std::move(o));
    }
    return rep;
}

// Runtime benchmark: same grid, always single-threaded, each cell repeated
// `repeats` times with identical results; the reported runtime is the median
// across repeats. Success rates and counters come from the last repeat.
inline EvaluationReport run_timing(const SweepSpec& spec, int repeats = 3) {
    detail::validate_spec(spec);
    if (repeats < 1) {
        throw std::invalid_argument("run_timing: repeats must be >= 1");
    }
    std::vector<std::vector<int>> clean = detail::clean_prediction_table(spec);

    EvaluationReport rep;
    for (std::size_t a = 0; a < spec.attacks.size(); ++a) {
        for (std::size_t m = 0; m < spec.models.size(); ++m) {
            for (std::size_t e = 0; e < spec.epsilons.size(); ++e) {
                std::vector<double> times;
                times.reserve(static_cast<std::size_t>(repeats));
                detail::CellResult last;
                for (int r = 0; r < repeats; ++r) {
                    last = detail::run_cell(spec, a, m, e, &clean[m]);
                    times.push_back(last.row.runtime_s);
                }
                std::sort(times.begin(), times.end());
                last.row.runtime_s = times[times.size() / 2];
                rep.rows.push_back(std::move(last.row));
                for (ExampleOutcome& o : last.outcomes) rep.outcomes.push_back(std::move(o));
            }
        }
    }
    return rep;
}

namespace detail {

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string fmt_linf(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

inline constexpr const char* kReportCsvHeader =
    "attack,model,epsilon,success_rate,runtime_s,grad_calls_mean,predict_calls_mean,n_examples";

inline constexpr const char* kOutcomeCsvHeader =
    "attack,model,epsilon,example_index,true_label,predicted_label,success,linf,"
    "grad_calls,predict_calls,budget_ok";

inline void write_report_csv(const EvaluationReport& rep, std::ostream& out) {
    out << kReportCsvHeader << "\n";
    for (const ReportRow& r : rep.rows) {
        out << attack_name(r.attack) << ',' << r.model << ','
            << detail::fmt6(r.epsilon) << ',' << detail::fmt6(r.success_rate) << ','
            << detail::fmt6(r.runtime_s) << ',' << detail::fmt6(r.grad_calls_mean) << ','
            << detail::fmt6(r.predict_calls_mean) << ',' << r.n_examples << "\n";
    }
}

inline void write_outcomes_csv(const std::vector<ExampleOutcome>& outcomes, std::ostream& out) {
    out << kOutcomeCsvHeader << "\n";
    for (const ExampleOutcome& o : outcomes) {
        out << attack_name(o.attack) << ',' << o.model << ','
            << detail::fmt6(o.epsilon) << ',' << o.example_index << ','
            << o.true_label << ',' << o.predicted_label << ','
            << (o.success ? 1 : 0) << ',' << detail::fmt_linf(o.linf) << ','
            << o.grad_calls << ',' << o.predict_calls << ','
            << (o.budget_ok ? 1 : 0) << "\n";
    }
}

inline std::vector<ExampleOutcome> read_outcomes_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kOutcomeCsvHeader) {
        throw csv_error("outcome csv: missing or wrong header");
    }
    std::vector<ExampleOutcome> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f = detail::split_csv_line(line);
        if (f.size() != 11) {
            throw csv_error("outcome csv: wrong field count on line " + std::to_string(lineno));
        }
        ExampleOutcome o;
        std::optional<AttackKind> k = attack_from_name(f[0]);
        if (!k) {
            throw csv_error("outcome csv: unknown attack '" + f[0] + "' on line " +
                            std::to_string(lineno));
        }
        try {
            o.attack = *k;
            o.model = f[1];
            o.epsilon = std::stod(f[2]);
            o.example_index = static_cast<std::size_t>(std::stoull(f[3]));
            o.true_label = std::stoi(f[4]);
            o.predicted_label = std::stoi(f[5]);
            o.success = std::stoi(f[6]) != 0;
            o.linf = std::stod(f[7]);
            o.grad_calls = std::stoull(f[8]);
            o.predict_calls = std::stoull(f[9]);
            o.budget_ok = std::stoi(f[10]) != 0;
        } catch (const std::exception&) {
            throw csv_error("outcome csv: malformed value on line " + std::to_string(lineno));
        }
        out.push_back(std::move(o));
    }
    return out;
}

// Generic CSV reader for comparisons: rows of raw cells, header included.
inline std::vector<std::vector<std::string>> read_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(detail::split_csv_line(line));
    }
    return rows;
}

struct RecountedRate {
    AttackKind attack = AttackKind::fgsm;
    std::string model;
    std::string epsilon_key; // epsilon as printed with 6 decimals
    std::size_t successes = 0;
    std::size_t n = 0;
    double rate = 0.0;
};

// Independent per-cell recount from an outcome log: group rows by
// (attack, model, epsilon) in first-seen order and divide success counts by
// group sizes. Matches ReportRow.success_rate bit for bit because both are
// the same integer division successes / n.
inline std::vector<RecountedRate> recount_success_rates(const std::vector<ExampleOutcome>& outcomes) {
    std::vector<RecountedRate> groups;
    for (const ExampleOutcome& o : outcomes) {
        std::string eps_key = detail::fmt6(o.epsilon);
        RecountedRate* g = nullptr;
        for (RecountedRate& cand : groups) {
            if (cand.attack == o.attack && cand.model == o.model && cand.epsilon_key == eps_key) {
                g = &cand;
                break;
            }
        }
        if (!g) {
            groups.push_back({o.attack, o.model, eps_key, 0, 0, 0.0});
            g = &groups.back();
        }
        g->n += 1;
        g->successes += o.success ? 1 : 0;
    }
    for (RecountedRate& g : groups) {
        g.rate = g.n > 0 ? static_cast<double>(g.successes) / static_cast<double>(g.n) : 0.0;
    }
    return groups;
}

struct AggregatedRate {
    AttackKind attack = AttackKind::fgsm;
    std::string epsilon_key;
    double rate = 0.0; // mean of per-model rates, equal model weights
    std::size_t models = 0;
};

inline std::vector<AggregatedRate> recount_mean_rates(const std::vector<ExampleOutcome>& outcomes) {
    std::vector<RecountedRate> per_cell = recount_success_rates(outcomes);
    std::vector<AggregatedRate> agg;
    for (const RecountedRate& c : per_cell) {
        AggregatedRate* g = nullptr;
        for (AggregatedRate& cand : agg) {
            if (cand.attack == c.attack && cand.epsilon_key == c.epsilon_key) {
                g = &cand;
                break;
            }
        }
        if (!g) {
            agg.push_back({c.attack, c.epsilon_key, 0.0, 0});
            g = &agg.back();
        }
        g->rate += c.rate;
        g->models += 1;
    }
    for (AggregatedRate& g : agg) {
        if (g.models > 0) g.rate /= static_cast<double>(g.models);
    }
    return agg;
}

// Aligned human-readable table. The robust_acc column is the supplementary
// accuracy on initially-correct examples; it is not part of the CSV format.
inline void print_report_table(const EvaluationReport& rep, std::ostream& out) {
    const char* hdr[9] = {"attack", "model", "epsilon", "success_rate", "runtime_s",
                          "grad_mean", "predict_mean", "n", "robust_acc"};
    std::vector<std::vector<std::string>> cells;
    cells.emplace_back(hdr, hdr + 9);
    for (const ReportRow& r : rep.rows) {
        cells.push_back({attack_name(r.attack), r.model, detail::fmt6(r.epsilon),
                         detail::fmt6(r.success_rate), detail::fmt6(r.runtime_s),
                         detail::fmt6(r.grad_calls_mean), detail::fmt6(r.predict_calls_mean),
                         std::to_string(r.n_examples), detail::fmt6(r.robust_accuracy)});
    }
    std::vector<std::size_t> width(9, 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < 9; ++i) width[i] = std::max(width[i], row[i].size());
    }
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < 9; ++i) {
            out << row[i];
            if (i + 1 < 9) out << std::string(width[i] - row[i].size() + 2, ' ');
        }
        out << "\n";
    }
    out << "(robust_acc: post-attack accuracy on initially-correct examples;"
           " supplementary, not in the CSV)\n";
}

} // namespace advkit
