// End-to-end walkthrough of the library API: train a small classifier on
// synthetic blobs, perturb one correctly-classified test point with pgd and
// rwr-nm-pgd, then sweep both attacks over a few epsilons and print the
// report table. Everything is seeded, so the output is identical on every
// run.

#include <cstdio>
#include <iostream>

#include <advkit/advkit.hpp>

using namespace advkit;

namespace {

void describe(const char* tag, const MlpClassifier& model, const Tensor& x, int label,
              const Tensor& ref) {
    Tensor logits = model.predict(x);
    std::vector<double> p = softmax(logits);
    int pred = argmax_class(logits);
    std::printf("%-10s x=(%.4f, %.4f)  pred=%d  p[true]=%.4f  loss=%.4f  linf=%.4f\n",
                tag, x[0], x[1], pred, p[static_cast<std::size_t>(label)],
                softmax_cross_entropy(logits, label), perturbation_linf(x, ref));
}

} // namespace

int main() {
    // Three well-separated Gaussian blobs in the unit square; 600 points to
    // train on, 200 held out.
    Dataset all = synthetic_blobs(800, 2, 3, 6.0, 7);
    Dataset train_set = all.take(600);
    Dataset test_set;
    test_set.name = all.name;
    test_set.num_classes = all.num_classes;
    test_set.input_shape = all.input_shape;
    test_set.examples.assign(all.examples.begin() + 600, all.examples.end());

    MlpClassifier model = MlpClassifier::random_init({2, 16, 3}, 1);
    OptimizerConfig ocfg;
    ocfg.kind = OptimizerKind::momentum;
    ocfg.learning_rate = 0.1;
    ocfg.decay = 0.9;
    ocfg.epochs = 20;
    ocfg.batch_size = 32;
    ocfg.seed = 1;
    TrainReport rep = train(model, train_set, &test_set, ocfg);
    std::printf("trained 2-16-3 mlp: train_acc=%.3f test_acc=%.3f final_loss=%.4f\n\n",
                rep.train_accuracy, rep.test_accuracy, rep.final_loss);

    // First test point the model gets right.
    const LabeledExample* target = nullptr;
    for (const LabeledExample& e : test_set.examples) {
        if (argmax_class(model.predict(e.image)) == e.label) {
            target = &e;
            break;
        }
    }
    if (!target) {
        std::printf("model got every test point wrong; nothing to attack\n");
        return 1;
    }
    std::printf("attacking a class-%d point within an L-inf ball of 0.08\n", target->label);
    describe("clean", model, target->image, target->label, target->image);

    AttackConfig cfg;
    cfg.epsilon = 0.08;
    cfg.steps = 20;
    cfg.random_start = true;
    cfg.seed = 42;
    AttackResult by_pgd = pgd(model, target->image, target->label, cfg);
    describe("pgd", model, by_pgd.x_adv, target->label, target->image);

    RestartSchedule sched;
    sched.t0 = 2;
    sched.t_mul = 2.0;
    sched.epoch_max = 20;
    cfg.schedule = sched;
    AttackResult by_rwr = rwr_nm_pgd(model, target->image, target->label, cfg);
    describe("rwr-nm-pgd", model, by_rwr.x_adv, target->label, target->image);

    std::printf("\npgd: success=%d grads=%llu   rwr-nm-pgd: success=%d grads=%llu\n\n",
                by_pgd.success ? 1 : 0, static_cast<unsigned long long>(by_pgd.grad_calls),
                by_rwr.success ? 1 : 0, static_cast<unsigned long long>(by_rwr.grad_calls));

    // Same comparison over the whole test slice and a few epsilons.
    SweepSpec spec;
    spec.attacks = {AttackKind::pgd, AttackKind::rwr_nm_pgd};
    spec.epsilons = {0.02, 0.05, 0.08};
    spec.models = {{"blobs-mlp", &model}};
    spec.dataset = &test_set;
    spec.limit = 100;
    spec.seed = 9;
    EvaluationReport sweep = run_sweep(spec);
    print_report_table(sweep, std::cout);
    return 0;
}
