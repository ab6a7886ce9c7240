// Command-line front end: train, score, eval, synth, ablate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "couta/couta.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TrainOptions {
    couta::TrainConfig cfg;
    std::string data;
    std::string out = "out";
    std::string config_file;
    CLI::App* cmd = nullptr;
};

void add_train_flags(CLI::App* cmd, TrainOptions& opt) {
    cmd->add_option("--config", opt.config_file, "JSON config file; flags override its keys");
    cmd->add_option("--window-len,-l", opt.cfg.window_len, "sliding window length")
        ->envname("COUTA_WINDOW_LEN");
    cmd->add_option("--stride,-r", opt.cfg.stride, "training window stride")
        ->envname("COUTA_STRIDE");
    cmd->add_option("--hidden", opt.cfg.hidden, "encoder/head hidden width")
        ->envname("COUTA_HIDDEN");
    cmd->add_option("--feature-dims,-H", opt.cfg.feature_dims, "feature space dimension")
        ->envname("COUTA_FEATURE_DIMS");
    cmd->add_option("--alpha", opt.cfg.alpha, "weight of the classification branch")
        ->envname("COUTA_ALPHA");
    cmd->add_option("--beta", opt.cfg.beta, "generated anomaly ratio")->envname("COUTA_BETA");
    cmd->add_option("--lr", opt.cfg.lr, "learning rate")->envname("COUTA_LR");
    cmd->add_option("--batch-size", opt.cfg.batch_size, "mini-batch size")
        ->envname("COUTA_BATCH_SIZE");
    cmd->add_option("--epochs", opt.cfg.epochs, "training epochs")->envname("COUTA_EPOCHS");
    cmd->add_option("--seed", opt.cfg.seed, "RNG seed")->envname("COUTA_SEED");
    cmd->add_option("--pool", opt.cfg.pool,
                    "perturbation pool: full|point|contextual|collective")
        ->envname("COUTA_POOL");
    cmd->add_flag("--regen-per-epoch", opt.cfg.regenerate_per_epoch,
                  "regenerate native anomalies every epoch");
    cmd->add_flag("!--no-umc", opt.cfg.use_umc, "ablation: canonical one-class loss");
    cmd->add_flag("!--no-nac", opt.cfg.use_nac, "ablation: drop the classification branch");
}

void load_config_file(TrainOptions& opt) {
    if (opt.config_file.empty()) return;
    std::ifstream in(opt.config_file);
    if (!in) throw std::runtime_error("cannot open config file " + opt.config_file);
    json j;
    in >> j;
    static const std::vector<std::string> known = {
        "window_len", "stride", "hidden", "feature_dims", "alpha", "beta", "lr",
        "batch_size", "epochs", "seed", "pool", "regenerate_per_epoch", "use_umc", "use_nac"};
    for (auto& [key, val] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::runtime_error("unknown config key '" + key + "'");
        (void)val;
    }

    // command-line flags take precedence over config file keys
    auto given = [&](const std::string& flag) {
        return opt.cmd != nullptr && opt.cmd->count(flag) > 0;
    };
    auto& c = opt.cfg;
    if (!given("--window-len")) c.window_len = j.value("window_len", c.window_len);
    if (!given("--stride")) c.stride = j.value("stride", c.stride);
    if (!given("--hidden")) c.hidden = j.value("hidden", c.hidden);
    if (!given("--feature-dims")) c.feature_dims = j.value("feature_dims", c.feature_dims);
    if (!given("--alpha")) c.alpha = j.value("alpha", c.alpha);
    if (!given("--beta")) c.beta = j.value("beta", c.beta);
    if (!given("--lr")) c.lr = j.value("lr", c.lr);
    if (!given("--batch-size")) c.batch_size = j.value("batch_size", c.batch_size);
    if (!given("--epochs")) c.epochs = j.value("epochs", c.epochs);
    if (!given("--seed")) c.seed = j.value("seed", c.seed);
    if (!given("--pool")) c.pool = j.value("pool", c.pool);
    if (!given("--regen-per-epoch"))
        c.regenerate_per_epoch = j.value("regenerate_per_epoch", c.regenerate_per_epoch);
    if (!given("--no-umc")) c.use_umc = j.value("use_umc", c.use_umc);
    if (!given("--no-nac")) c.use_nac = j.value("use_nac", c.use_nac);
}

json config_to_json(const couta::TrainConfig& c) {
    return {{"window_len", c.window_len},
            {"stride", c.stride},
            {"hidden", c.hidden},
            {"feature_dims", c.feature_dims},
            {"alpha", c.alpha},
            {"beta", c.beta},
            {"lr", c.lr},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"seed", c.seed},
            {"pool", c.pool},
            {"regenerate_per_epoch", c.regenerate_per_epoch},
            {"use_umc", c.use_umc},
            {"use_nac", c.use_nac}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

// every run leaves a resolved-config snapshot next to its outputs
void snapshot(const fs::path& dir, const json& resolved) {
    fs::create_directories(dir);
    write_json(dir / "config.json", resolved);
}

int run_train(TrainOptions& opt) {
    load_config_file(opt);
    const fs::path out(opt.out);
    json resolved = config_to_json(opt.cfg);
    resolved["command"] = "train";
    resolved["data"] = opt.data;
    snapshot(out, resolved);

    couta::TimeSeriesDataset ds = couta::load_csv(opt.data);
    couta::TrainResult res = couta::train(ds, opt.cfg);
    couta::save_model(res.model, res.stats, (out / "model.json").string());
    write_json(out / "train_report.json", couta::report_to_json(res.report));
    std::cout << "trained " << res.report.epoch_losses.size() << " epochs in "
              << res.report.wall_seconds << " s; model at " << (out / "model.json") << "\n";
    return 0;
}

struct ScoreOptions {
    std::string model;
    std::string data;
    std::string out = "out";
    bool want_labels = false;
};

int run_score(const ScoreOptions& opt, bool evaluate_metrics) {
    const fs::path out(opt.out);
    json resolved = {{"command", evaluate_metrics ? "eval" : "score"},
                     {"model", opt.model},
                     {"data", opt.data}};
    snapshot(out, resolved);

    auto [model, stats] = couta::load_model(opt.model);
    couta::TimeSeriesDataset raw =
        couta::load_csv(opt.data, evaluate_metrics || opt.want_labels, couta::Split::Test);
    couta::TimeSeriesDataset test = couta::apply_normalizer(raw, stats, /*is_test=*/true);

    couta::AnomalyScoreSeries series = couta::score_series(model, test);
    std::vector<double> adjusted = raw.has_labels()
                                       ? couta::point_adjust(series.scores, raw.labels)
                                       : series.scores;
    couta::write_scores_csv((out / "scores.csv").string(), series.scores, adjusted);

    if (evaluate_metrics) {
        couta::EvalReport rep = couta::evaluate(adjusted, raw.labels);
        write_json(out / "eval.json", couta::eval_to_json(rep));
        std::cout << "f1=" << rep.f1 << " precision=" << rep.precision
                  << " recall=" << rep.recall << " auc_pr=" << rep.auc_pr
                  << " threshold=" << rep.threshold << "\n";
    } else {
        std::cout << "scores written to " << (out / "scores.csv") << "\n";
    }
    return 0;
}

struct SynthOptions {
    std::string kind = "point";
    std::string out = "out";
    std::size_t n = 1000;
    std::size_t dims = 2;
    std::uint64_t seed = 0;
    double contamination = 0.0;
};

int run_synth(const SynthOptions& opt) {
    const fs::path out(opt.out);
    json resolved = {{"command", "synth"}, {"kind", opt.kind},   {"n", opt.n},
                     {"dims", opt.dims},   {"seed", opt.seed},   {"out", opt.out},
                     {"contamination", opt.contamination}};
    snapshot(out, resolved);

    couta::SynthSpec spec = couta::benchmark_spec(opt.kind, opt.n, opt.dims);
    couta::Rng rng(opt.seed);
    couta::SynthResult res = couta::generate(spec, rng);
    std::vector<int> mask(res.train.n, 0);
    if (opt.contamination > 0.0) mask = couta::contaminate_train(res.train, opt.contamination, rng);

    couta::write_dataset_csv((out / "train.csv").string(), res.train);
    couta::write_dataset_csv((out / "test.csv").string(), res.test);

    json plan = json::array();
    for (const auto& a : spec.plan) {
        const char* names[] = {"global", "contextual", "seasonal", "shapelet"};
        plan.push_back({{"type", names[static_cast<int>(a.type)]},
                        {"position", a.position},
                        {"length", a.length}});
    }
    write_json(out / "plan.json",
               {{"kind", opt.kind}, {"plan", plan}, {"train_contamination_mask", mask}});
    std::cout << "synthetic dataset written to " << out << "\n";
    return 0;
}

struct AblateOptions {
    TrainOptions train;
    std::string test_data;
    std::size_t seeds = 3;
};

int run_ablate(AblateOptions& opt) {
    load_config_file(opt.train);
    const fs::path out(opt.train.out);
    json resolved = config_to_json(opt.train.cfg);
    resolved["command"] = "ablate";
    resolved["data"] = opt.train.data;
    resolved["test_data"] = opt.test_data;
    resolved["seeds"] = opt.seeds;
    snapshot(out, resolved);

    couta::TimeSeriesDataset train_ds = couta::load_csv(opt.train.data);
    couta::TimeSeriesDataset test_raw = couta::load_csv(opt.test_data, /*want_labels=*/true,
                                                        couta::Split::Test);

    struct Variant {
        const char* name;
        bool umc, nac;
    };
    const Variant variants[] = {{"full", true, true},
                                {"no-UMC", false, true},
                                {"no-NAC", true, false},
                                {"no-UMC&NAC", false, false}};

    json table = json::array();
    std::cout << "variant        mean_F1   mean_AUC_PR\n";
    for (const auto& v : variants) {
        double f1_sum = 0.0, ap_sum = 0.0;
        for (std::size_t s = 0; s < opt.seeds; ++s) {
            couta::TrainConfig cfg = opt.train.cfg;
            cfg.use_umc = v.umc;
            cfg.use_nac = v.nac;
            cfg.seed = opt.train.cfg.seed + s;
            couta::TrainResult res = couta::train(train_ds, cfg);
            couta::TimeSeriesDataset test =
                couta::apply_normalizer(test_raw, res.stats, /*is_test=*/true);
            couta::AnomalyScoreSeries series =
                couta::score_series(res.model, test, /*canonical=*/!v.umc);
            couta::EvalReport rep =
                couta::evaluate(couta::point_adjust(series.scores, test_raw.labels),
                                test_raw.labels);
            f1_sum += rep.f1;
            ap_sum += rep.auc_pr;
        }
        const double f1 = f1_sum / static_cast<double>(opt.seeds);
        const double ap = ap_sum / static_cast<double>(opt.seeds);
        std::printf("%-14s %.4f    %.4f\n", v.name, f1, ap);
        table.push_back({{"variant", v.name}, {"f1", f1}, {"auc_pr", ap}});
    }
    write_json(out / "ablation.json", table);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"COUTA: calibrated one-class time series anomaly detection"};
    app.require_subcommand(1);

    TrainOptions train_opt;
    auto* train_cmd = app.add_subcommand("train", "train a model on a CSV time series");
    train_cmd->add_option("--data", train_opt.data, "training CSV")->required();
    train_cmd->add_option("--out,-o", train_opt.out, "output directory");
    add_train_flags(train_cmd, train_opt);
    train_opt.cmd = train_cmd;

    ScoreOptions score_opt;
    auto* score_cmd = app.add_subcommand("score", "score a test CSV with a trained model");
    score_cmd->add_option("--model", score_opt.model, "model file")->required();
    score_cmd->add_option("--data", score_opt.data, "test CSV")->required();
    score_cmd->add_option("--out,-o", score_opt.out, "output directory");
    score_cmd->add_flag("--labels", score_opt.want_labels,
                        "require a label column and point-adjust the scores");

    ScoreOptions eval_opt;
    auto* eval_cmd = app.add_subcommand("eval", "score and evaluate against labels");
    eval_cmd->add_option("--model", eval_opt.model, "model file")->required();
    eval_cmd->add_option("--data", eval_opt.data, "labeled test CSV")->required();
    eval_cmd->add_option("--out,-o", eval_opt.out, "output directory");

    SynthOptions synth_opt;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
    synth_cmd->add_option("--kind", synth_opt.kind, "point|pattern|pattern-varlen");
    synth_cmd->add_option("--out,-o", synth_opt.out, "output directory");
    synth_cmd->add_option("--n", synth_opt.n, "series length");
    synth_cmd->add_option("--dims", synth_opt.dims, "dimensionality");
    synth_cmd->add_option("--seed", synth_opt.seed, "RNG seed");
    synth_cmd->add_option("--contamination", synth_opt.contamination,
                          "training contamination ratio in [0, 0.5)");

    AblateOptions ablate_opt;
    auto* ablate_cmd = app.add_subcommand("ablate", "run the four-variant ablation table");
    ablate_cmd->add_option("--data", ablate_opt.train.data, "training CSV")->required();
    ablate_cmd->add_option("--test-data", ablate_opt.test_data, "labeled test CSV")->required();
    ablate_cmd->add_option("--out,-o", ablate_opt.train.out, "output directory");
    ablate_cmd->add_option("--seeds", ablate_opt.seeds, "number of seeds to average");
    add_train_flags(ablate_cmd, ablate_opt.train);
    ablate_opt.train.cmd = ablate_cmd;

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return run_train(train_opt);
        if (score_cmd->parsed()) return run_score(score_opt, false);
        if (eval_cmd->parsed()) return run_score(eval_opt, true);
        if (synth_cmd->parsed()) return run_synth(synth_opt);
        if (ablate_cmd->parsed()) return run_ablate(ablate_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
