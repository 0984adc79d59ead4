// Command-line front end: train small classifiers, run single attacks,
// sweep attack grids, benchmark runtimes, and check gradients.
//
// Exit codes: 0 success, 2 usage error, 3 I/O or file-format error,
// 4 check failure (grad-check above tolerance), 1 internal error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <advkit/advkit.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitCheckFailed = 4;

struct DatasetOpts {
    std::string synthetic = "digits"; // "digits" or "blobs"
    std::size_t n = 1000;
    std::uint64_t data_seed = 7;
    std::size_t dims = 2;
    std::size_t classes = 3;
    double separation = 6.0;
    std::string images;
    std::string labels;
    std::size_t limit = static_cast<std::size_t>(-1);
};

void add_dataset_flags(CLI::App* cmd, DatasetOpts& o) {
    cmd->add_option("--images", o.images, "IDX image file (optionally gzip)");
    cmd->add_option("--labels", o.labels, "IDX label file (optionally gzip)");
    cmd->add_option("--synthetic", o.synthetic,
                    "Synthetic dataset when no IDX files are given: digits|blobs")
        ->check(CLI::IsMember({"digits", "blobs"}));
    cmd->add_option("--n", o.n, "Synthetic dataset size");
    cmd->add_option("--data-seed", o.data_seed, "Synthetic dataset seed");
    cmd->add_option("--dims", o.dims, "blobs: dimensions");
    cmd->add_option("--classes", o.classes, "blobs: class count");
    cmd->add_option("--separation", o.separation, "blobs: center separation in sigma units");
    cmd->add_option("--limit", o.limit, "Use only the first examples");
}

advkit::Dataset build_dataset(const DatasetOpts& o) {
    if (!o.images.empty() || !o.labels.empty()) {
        if (o.images.empty() || o.labels.empty()) {
            throw std::invalid_argument("--images and --labels must be given together");
        }
        return advkit::load_mnist_idx(o.images, o.labels, o.limit);
    }
    advkit::Dataset ds = o.synthetic == "blobs"
        ? advkit::synthetic_blobs(o.n, o.dims, o.classes, o.separation, o.data_seed)
        : advkit::synthetic_digits(o.n, o.data_seed);
    if (o.limit < ds.size()) ds = ds.take(o.limit);
    return ds;
}

// Epsilon grids: a single value, a comma list, or start:stop:step inclusive.
std::vector<double> parse_eps_grid(const std::string& text) {
    std::vector<double> out;
    auto parse_one = [](const std::string& s) {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument("--eps: bad number '" + s + "'");
        }
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(p);
        if (parts.size() != 3) {
            throw std::invalid_argument("--eps: expected start:stop:step");
        }
        double start = parse_one(parts[0]);
        double stop = parse_one(parts[1]);
        double step = parse_one(parts[2]);
        if (!(step > 0.0)) {
            throw std::invalid_argument("--eps: step must be > 0");
        }
        for (double v = start; v <= stop + 1e-12; v += step) out.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string p;
        while (std::getline(ss, p, ',')) {
            if (!p.empty()) out.push_back(parse_one(p));
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("--eps: empty grid");
    }
    for (double v : out) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("--eps: epsilon must be >= 0");
        }
    }
    return out;
}

std::vector<advkit::AttackKind> parse_attacks(const std::string& text) {
    std::vector<advkit::AttackKind> out;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ',')) {
        if (p.empty()) continue;
        std::optional<advkit::AttackKind> k = advkit::attack_from_name(p);
        if (!k) {
            std::string valid;
            for (advkit::AttackKind a : advkit::all_attacks()) {
                if (!valid.empty()) valid += ", ";
                valid += advkit::attack_name(a);
            }
            throw std::invalid_argument("unknown attack '" + p + "' (valid: " + valid + ")");
        }
        out.push_back(*k);
    }
    if (out.empty()) {
        throw std::invalid_argument("--attacks: empty list");
    }
    return out;
}

std::vector<std::size_t> parse_hidden(const std::string& text) {
    std::vector<std::size_t> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ',')) {
        if (p.empty()) continue;
        long v = std::stol(p);
        if (v < 1) {
            throw std::invalid_argument("--hidden: widths must be >= 1");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

advkit::OptimizerKind parse_optimizer(const std::string& name) {
    if (name == "sgd") return advkit::OptimizerKind::sgd;
    if (name == "momentum") return advkit::OptimizerKind::momentum;
    if (name == "nesterov") return advkit::OptimizerKind::nesterov_standard;
    if (name == "nesterov-equiv") return advkit::OptimizerKind::nesterov_equivalent;
    throw std::invalid_argument("unknown optimizer '" + name + "'");
}

struct AttackFlags {
    int steps = 20;
    double mu = 1.0;
    std::optional<double> alpha;
    bool no_random_start = false;
    int t0 = 2;
    double t_mul = 2.0;
    std::optional<int> epoch_max;
    double lr_min = 0.0;
    std::optional<double> lr_max;
    bool scale_carry = false;
    std::uint64_t seed = 1;
};

void add_attack_flags(CLI::App* cmd, AttackFlags& f) {
    cmd->add_option("--steps", f.steps, "Iteration budget T (default 20)");
    cmd->add_option("--mu", f.mu, "Momentum coefficient (default 1.0)");
    cmd->add_option("--alpha", f.alpha, "Step size (default epsilon / steps)");
    cmd->add_flag("--no-random-start", f.no_random_start,
                  "Disable the uniform random start for pgd/nm-pgd");
    cmd->add_option("--t0", f.t0, "rwr-nm-pgd: first restart period (default 2)");
    cmd->add_option("--t-mul", f.t_mul, "rwr-nm-pgd: period multiplier (default 2)");
    cmd->add_option("--epoch-max", f.epoch_max,
                    "rwr-nm-pgd: total iteration budget (default --steps)");
    cmd->add_option("--lr-min", f.lr_min, "rwr-nm-pgd: cosine floor (default 0)");
    cmd->add_option("--lr-max", f.lr_max,
                    "rwr-nm-pgd: cosine ceiling (default 2*eps/period per restart)");
    cmd->add_flag("--scale-carry", f.scale_carry,
                  "Scale the nm-pgd momentum carry term by the step size");
    cmd->add_option("--seed", f.seed, "Base seed (per-example seed = seed XOR index)");
}

advkit::AttackConfig make_config(const AttackFlags& f, double eps) {
    advkit::AttackConfig c;
    c.epsilon = eps;
    c.steps = f.steps;
    c.step_size = f.alpha;
    c.momentum = f.mu;
    c.random_start = !f.no_random_start;
    c.scale_carry_by_lr = f.scale_carry;
    c.seed = f.seed;
    advkit::RestartSchedule s;
    s.lr_min = f.lr_min;
    s.lr_max = f.lr_max;
    s.t0 = f.t0;
    s.t_mul = f.t_mul;
    s.epoch_max = f.epoch_max ? *f.epoch_max : f.steps;
    c.schedule = s;
    return c;
}

void write_file_or_throw(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw advkit::io_error("cannot open " + path + " for writing");
    }
    out << content;
    if (!out) {
        throw advkit::io_error("write failed for " + path);
    }
}

int cmd_train(const DatasetOpts& data, const DatasetOpts& test_data, bool have_test,
              const std::string& hidden, const std::string& optimizer, double lr,
              double decay, std::size_t epochs, std::size_t batch, std::uint64_t seed,
              const std::string& out_path) {
    advkit::Dataset train_set = build_dataset(data);
    train_set.validate();
    if (train_set.size() == 0) {
        throw std::invalid_argument("training set is empty");
    }

    advkit::Dataset test_set;
    if (have_test) {
        // A synthetic test set follows the training set's family and shape
        // parameters; only its size and seed are independent.
        DatasetOpts t = test_data;
        if (t.images.empty()) {
            t.synthetic = data.synthetic;
            t.dims = data.dims;
            t.classes = data.classes;
            t.separation = data.separation;
        }
        test_set = build_dataset(t);
        test_set.validate();
    }

    std::vector<std::size_t> widths;
    widths.push_back(advkit::Tensor::numel(train_set.input_shape));
    for (std::size_t w : parse_hidden(hidden)) widths.push_back(w);
    widths.push_back(train_set.num_classes);

    advkit::MlpClassifier model = advkit::MlpClassifier::random_init(widths, seed);
    advkit::OptimizerConfig cfg;
    cfg.kind = parse_optimizer(optimizer);
    cfg.learning_rate = lr;
    cfg.decay = decay;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.seed = seed;

    advkit::TrainReport rep = advkit::train(model, train_set, have_test ? &test_set : nullptr, cfg);

    advkit::CheckpointMeta meta;
    meta.seed = seed;
    meta.epochs = static_cast<std::uint32_t>(epochs);
    meta.train_accuracy = rep.train_accuracy;
    meta.test_accuracy = rep.test_accuracy;
    advkit::save_checkpoint(model, meta, out_path);

    std::cout << "dataset=" << train_set.name << " n=" << train_set.size()
              << " train_accuracy=" << advkit::detail::fmt6(rep.train_accuracy);
    if (have_test) {
        std::cout << " test_accuracy=" << advkit::detail::fmt6(rep.test_accuracy);
    }
    std::cout << " final_loss=" << advkit::detail::fmt6(rep.final_loss)
              << " checkpoint=" << out_path << "\n";
    return kExitOk;
}

int cmd_attack(const std::string& ckpt_path, const DatasetOpts& data,
               const std::string& attack, double eps, const AttackFlags& flags,
               std::size_t limit, const std::string& outcomes_path) {
    advkit::AttackKind kind = parse_attacks(attack).front();
    advkit::LoadedCheckpoint ck = advkit::load_checkpoint(ckpt_path);
    advkit::Dataset ds = build_dataset(data);
    ds.validate();
    if (advkit::Tensor::numel(ds.input_shape) != ck.model.input_dim() ||
        ds.num_classes != ck.model.num_classes()) {
        throw std::invalid_argument("dataset does not match checkpoint dimensions");
    }

    std::size_t n = std::min(limit, ds.size());
    advkit::AttackConfig base = make_config(flags, eps);

    std::vector<advkit::ExampleOutcome> outcomes;
    std::size_t successes = 0;
    std::uint64_t grad_total = 0, predict_total = 0;
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t j = 0; j < n; ++j) {
        const advkit::LabeledExample& e = ds.examples[j];
        advkit::CountingOracle counted(ck.model);
        advkit::AttackConfig c = base;
        c.seed = advkit::Rng::derive(flags.seed, j);
        advkit::AttackResult r = advkit::run_attack(kind, counted, e.image, e.label, c);

        advkit::ExampleOutcome o;
        o.attack = kind;
        o.model = "mlp";
        o.epsilon = eps;
        o.example_index = j;
        o.true_label = e.label;
        o.predicted_label = r.predicted_label;
        o.success = r.success;
        o.linf = r.perturbation_linf;
        o.grad_calls = counted.grad_calls();
        o.predict_calls = counted.predict_calls();
        o.budget_ok = o.grad_calls <= 100 && o.predict_calls <= 200;
        outcomes.push_back(o);
        successes += r.success ? 1 : 0;
        grad_total += o.grad_calls;
        predict_total += o.predict_calls;
    }
    auto t1 = std::chrono::steady_clock::now();
    double runtime = std::chrono::duration<double>(t1 - t0).count();

    if (!outcomes_path.empty()) {
        std::ostringstream buf;
        advkit::write_outcomes_csv(outcomes, buf);
        write_file_or_throw(outcomes_path, buf.str());
    }

    double rate = n > 0 ? static_cast<double>(successes) / static_cast<double>(n) : 0.0;
    std::cout << "attack=" << advkit::attack_name(kind)
              << " epsilon=" << advkit::detail::fmt6(eps)
              << " n=" << n
              << " success_rate=" << advkit::detail::fmt6(rate)
              << " grad_calls_mean="
              << advkit::detail::fmt6(n ? double(grad_total) / double(n) : 0.0)
              << " predict_calls_mean="
              << advkit::detail::fmt6(n ? double(predict_total) / double(n) : 0.0)
              << " runtime_s=" << advkit::detail::fmt6(runtime) << "\n";
    if (!outcomes_path.empty()) {
        std::cout << "outcomes=" << outcomes_path << "\n";
    }
    return kExitOk;
}

int cmd_sweep_or_bench(bool bench, const std::string& ckpt_path, const DatasetOpts& data,
                       const std::string& attacks, const std::string& eps_text,
                       const AttackFlags& flags, std::size_t limit, bool no_parallel,
                       std::uint64_t max_grad, std::uint64_t max_predict, int repeats,
                       const std::string& out_path, const std::string& outcomes_path) {
    advkit::LoadedCheckpoint ck = advkit::load_checkpoint(ckpt_path);
    advkit::Dataset ds = build_dataset(data);
    ds.validate();
    if (advkit::Tensor::numel(ds.input_shape) != ck.model.input_dim() ||
        ds.num_classes != ck.model.num_classes()) {
        throw std::invalid_argument("dataset does not match checkpoint dimensions");
    }

    advkit::SweepSpec spec;
    spec.attacks = parse_attacks(attacks);
    spec.epsilons = parse_eps_grid(eps_text);
    spec.models = {{"mlp", &ck.model}};
    spec.dataset = &ds;
    spec.budget = {max_grad, max_predict};
    spec.base_config = make_config(flags, 0.0);
    spec.seed = flags.seed;
    spec.parallel = !no_parallel && !bench;
    spec.limit = limit;

    advkit::EvaluationReport rep =
        bench ? advkit::run_timing(spec, repeats) : advkit::run_sweep(spec);

    advkit::print_report_table(rep, std::cout);
    if (!out_path.empty()) {
        std::ostringstream buf;
        advkit::write_report_csv(rep, buf);
        write_file_or_throw(out_path, buf.str());
        std::cout << "report=" << out_path << "\n";
    }
    if (!outcomes_path.empty()) {
        std::ostringstream buf;
        advkit::write_outcomes_csv(rep.outcomes, buf);
        write_file_or_throw(outcomes_path, buf.str());
        std::cout << "outcomes=" << outcomes_path << "\n";
    }
    return kExitOk;
}

int cmd_grad_check(const std::string& ckpt_path, int num_checks, double fd_step,
                   double tolerance, std::uint64_t seed) {
    if (num_checks < 1) {
        throw std::invalid_argument("--num-checks must be >= 1");
    }
    advkit::LoadedCheckpoint ck = advkit::load_checkpoint(ckpt_path);

    advkit::Rng rng(seed);
    std::vector<advkit::Tensor> xs;
    std::vector<int> labels;
    for (int k = 0; k < num_checks; ++k) {
        xs.push_back(advkit::uniform_noise({ck.model.input_dim()}, 0.0, 1.0, rng));
        labels.push_back(static_cast<int>(rng.next_u64() % ck.model.num_classes()));
    }
    advkit::GradCheckReport rep =
        advkit::gradient_check(ck.model, xs, labels, fd_step, tolerance);

    std::cout << "checks=" << num_checks
              << " coordinates=" << rep.checked
              << " excluded_near_kink=" << rep.excluded
              << " max_rel_error=" << rep.max_rel_error
              << " tolerance=" << tolerance
              << " result=" << (rep.pass ? "pass" : "FAIL") << "\n";
    return rep.pass ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"L-infinity adversarial example toolkit"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Train an MLP classifier and save a checkpoint");
    DatasetOpts train_data;
    add_dataset_flags(train, train_data);
    DatasetOpts test_data;
    test_data.data_seed = 8;
    train->add_option("--test-images", test_data.images, "IDX test image file");
    train->add_option("--test-labels", test_data.labels, "IDX test label file");
    train->add_option("--test-n", test_data.n, "Synthetic test set size");
    train->add_option("--test-seed", test_data.data_seed, "Synthetic test set seed");
    bool no_test = false;
    train->add_flag("--no-test", no_test, "Skip the held-out evaluation set");
    std::string hidden = "128,64";
    train->add_option("--hidden", hidden, "Hidden layer widths, comma separated");
    std::string optimizer = "momentum";
    train->add_option("--optimizer", optimizer, "sgd|momentum|nesterov|nesterov-equiv");
    double lr = 0.05, decay = 0.9;
    std::size_t epochs = 15, batch = 32;
    std::uint64_t train_seed = 1;
    train->add_option("--lr", lr, "Learning rate");
    train->add_option("--decay", decay, "Momentum coefficient");
    train->add_option("--epochs", epochs, "Training epochs");
    train->add_option("--batch", batch, "Minibatch size");
    train->add_option("--seed", train_seed, "Init/shuffle seed");
    std::string train_out = "model.ckpt";
    train->add_option("--out", train_out, "Checkpoint output path");

    // attack
    auto* attack = app.add_subcommand("attack", "Run one attack at one epsilon");
    DatasetOpts attack_data;
    add_dataset_flags(attack, attack_data);
    std::string attack_ckpt;
    attack->add_option("--checkpoint", attack_ckpt, "Model checkpoint")->required();
    std::string attack_name_opt;
    attack->add_option("--attack", attack_name_opt, "Attack name")->required();
    double attack_eps = 0.1;
    attack->add_option("--eps", attack_eps, "Perturbation bound");
    AttackFlags attack_flags;
    add_attack_flags(attack, attack_flags);
    std::string attack_outcomes;
    attack->add_option("--outcomes", attack_outcomes, "Write the per-example outcome CSV here");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Grid of attacks x epsilons with CSV reports");
    DatasetOpts sweep_data;
    add_dataset_flags(sweep, sweep_data);
    std::string sweep_ckpt;
    sweep->add_option("--checkpoint", sweep_ckpt, "Model checkpoint")->required();
    std::string sweep_attacks = "fgsm,i-fgsm,mi-fgsm,pgd,nm-pgd,rwr-nm-pgd";
    sweep->add_option("--attacks", sweep_attacks, "Comma-separated attack names");
    std::string sweep_eps = "0.05:0.30:0.05";
    sweep->add_option("--eps", sweep_eps, "Epsilon grid: value, comma list, or start:stop:step");
    AttackFlags sweep_flags;
    add_attack_flags(sweep, sweep_flags);
    bool sweep_no_parallel = false;
    sweep->add_flag("--no-parallel", sweep_no_parallel, "Run cells on one thread");
    std::uint64_t sweep_max_grad = 100, sweep_max_predict = 200;
    sweep->add_option("--max-grad-calls", sweep_max_grad, "Per-example gradient budget");
    sweep->add_option("--max-predict-calls", sweep_max_predict, "Per-example predict budget");
    std::string sweep_out, sweep_outcomes;
    sweep->add_option("--out", sweep_out, "Write the report CSV here");
    sweep->add_option("--outcomes", sweep_outcomes, "Write the per-example outcome CSV here");

    // bench
    auto* bench = app.add_subcommand("bench", "Runtime benchmark (single-threaded, median of repeats)");
    DatasetOpts bench_data;
    add_dataset_flags(bench, bench_data);
    std::string bench_ckpt;
    bench->add_option("--checkpoint", bench_ckpt, "Model checkpoint")->required();
    std::string bench_attacks = "pgd,rwr-nm-pgd";
    bench->add_option("--attacks", bench_attacks, "Comma-separated attack names");
    std::string bench_eps = "0.30";
    bench->add_option("--eps", bench_eps, "Epsilon grid");
    AttackFlags bench_flags;
    add_attack_flags(bench, bench_flags);
    int bench_repeats = 3;
    bench->add_option("--repeats", bench_repeats, "Repeats per cell (median reported)")
        ->check(CLI::PositiveNumber);
    std::string bench_out, bench_outcomes;
    bench->add_option("--out", bench_out, "Write the report CSV here");
    bench->add_option("--outcomes", bench_outcomes, "Write the per-example outcome CSV here");

    // grad-check
    auto* gc = app.add_subcommand("grad-check", "Finite-difference gradient verification");
    std::string gc_ckpt;
    gc->add_option("--checkpoint", gc_ckpt, "Model checkpoint")->required();
    int gc_num = 20;
    gc->add_option("--num-checks", gc_num, "Number of random inputs");
    double gc_h = 1e-5, gc_tol = 1e-4;
    gc->add_option("--fd-step", gc_h, "Central-difference step");
    gc->add_option("--tolerance", gc_tol, "Max allowed relative error");
    std::uint64_t gc_seed = 1;
    gc->add_option("--seed", gc_seed, "Seed for the random inputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (train->parsed()) {
            bool have_test = !no_test;
            return cmd_train(train_data, test_data, have_test, hidden, optimizer, lr,
                             decay, epochs, batch, train_seed, train_out);
        }
        if (attack->parsed()) {
            return cmd_attack(attack_ckpt, attack_data, attack_name_opt, attack_eps,
                              attack_flags, attack_data.limit, attack_outcomes);
        }
        if (sweep->parsed()) {
            return cmd_sweep_or_bench(false, sweep_ckpt, sweep_data, sweep_attacks, sweep_eps,
                                      sweep_flags, sweep_data.limit, sweep_no_parallel,
                                      sweep_max_grad, sweep_max_predict, 1, sweep_out,
                                      sweep_outcomes);
        }
        if (bench->parsed()) {
            return cmd_sweep_or_bench(true, bench_ckpt, bench_data, bench_attacks, bench_eps,
                                      bench_flags, bench_data.limit, true, 100, 200,
                                      bench_repeats, bench_out, bench_outcomes);
        }
        if (gc->parsed()) {
            return cmd_grad_check(gc_ckpt, gc_num, gc_h, gc_tol, gc_seed);
        }
    } catch (const advkit::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const advkit::checkpoint_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const advkit::idx_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const advkit::csv_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
