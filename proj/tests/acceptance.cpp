// Acceptance gate: one self-contained binary that checks the eight release
// criteria and prints one PASS/FAIL line per criterion. Exit code is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "couta/couta.hpp"
#include "fd_util.hpp"

using namespace couta;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& what, double seconds) {
    std::printf("criterion %d: %s  %s  (%.1f s)\n", criterion, ok ? "PASS" : "FAIL",
                what.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

WindowSet random_windows(std::size_t count, std::size_t l, std::size_t d, Rng& rng) {
    WindowSet ws;
    ws.length = l;
    ws.dims = d;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> w(l * d);
        for (auto& v : w) v = uniform_real(rng);
        ws.windows.push_back(std::move(w));
        ws.origins.push_back(l - 1 + i);
        ws.provenance.push_back(PerturbKind::None);
    }
    return ws;
}

// ---- criterion 1: loss values and gradients -------------------------------

bool loss_correctness(std::string& what) {
    const double grid[] = {0.0, 0.5, 1.0, 2.0, 5.0};
    for (double d : grid)
        for (double dt : grid) {
            const double u = (d - dt) * (d - dt);
            const double expected = 0.5 * std::exp(-u) * (d + dt) + 0.5 * u;
            if (std::abs(umc_term(d, dt) - expected) > 1e-12) {
                what = "grid value mismatch at d=" + std::to_string(d);
                return false;
            }
        }

    Rng rng(101);
    std::size_t checked = 0;
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        CoutaModel model(2, 6, 3, 3, rng);
        WindowSet ws = random_windows(3, 6, 2, rng);
        model.init_center(ws);
        Tensor orig = model.make_batch(ws, {0, 1});
        Tensor pert = model.make_batch(ws, {2});

        ad::Graph g;
        CoutaModel::Bound bound = model.bind(g);
        LossBreakdown bd;
        ad::Var loss = total_loss(g, bound, orig, &pert, 0.1, bd);
        g.backward(loss);

        auto numeric = testutil::fd_param_grads(model, [&] {
            ad::Graph gg;
            LossBreakdown b2;
            return gg.value(total_loss(gg, model.bind(gg), orig, &pert, 0.1, b2))[0];
        });
        for (std::size_t pi = 0; pi < model.parameters().size(); ++pi) {
            const auto& analytic = g.grad(bound.leaves()[pi]);
            for (std::size_t i = 0; i < analytic.size(); ++i) {
                ++checked;
                worst = std::max(worst, std::abs(analytic[i] - numeric[pi][i]));
                if (!testutil::close(analytic[i], numeric[pi][i], 1e-6, 1e-4)) {
                    what = "gradient mismatch in " + model.parameters()[pi].name;
                    return false;
                }
            }
        }
    }
    std::ostringstream ss;
    ss << "25-point grid exact; " << checked << " partials vs finite differences, worst abs err "
       << worst;
    what = ss.str();
    return true;
}

// ---- criterion 2: loss shape in the disagreement --------------------------

bool loss_shape(std::string& what) {
    for (double T : {2.0, 4.0, 8.0}) {
        // walk u = (d - d~)^2 with d + d~ = T held fixed
        auto term_at = [T](double u) {
            const double s = std::sqrt(u);
            return umc_term((T + s) / 2.0, (T - s) / 2.0);
        };
        double best_u = 0.0, best = term_at(0.0);
        const double u_max = (T / 2.0) * (T / 2.0);  // keep d~ >= 0
        for (double u = 0.0; u <= u_max; u += 1e-4) {
            const double v = term_at(u);
            if (v < best) {
                best = v;
                best_u = u;
            }
        }
        if (!(term_at(1e-3) < term_at(0.0))) {
            what = "no initial decrease at T=" + std::to_string(T);
            return false;
        }
        if (!(best_u > 0.0) || !(term_at(std::min(best_u + 0.5, u_max)) > best)) {
            what = "no interior minimum at T=" + std::to_string(T);
            return false;
        }
    }
    what = "decrease-then-increase with interior minimum for d+d~ in {2,4,8}";
    return true;
}

// ---- criterion 3: metric oracles -------------------------------------------

double brute_best_f1(const std::vector<double>& scores, const std::vector<int>& labels,
                     double& best_thr) {
    double best = -1.0;
    for (double thr : scores) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const bool pred = scores[i] >= thr;
            if (pred && labels[i]) ++tp;
            if (pred && !labels[i]) ++fp;
            if (!pred && labels[i]) ++fn;
        }
        const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
        const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
        const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        if (f1 > best || (f1 == best && thr > best_thr)) {
            best = f1;
            best_thr = thr;
        }
    }
    return best;
}

double brute_ap(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
    std::size_t pos = 0;
    for (int v : labels) pos += std::size_t(v);
    double ap = 0.0, prev_r = 0.0;
    for (double thr : thresholds) {
        std::size_t tp = 0, predicted = 0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i] >= thr) {
                ++predicted;
                tp += std::size_t(labels[i]);
            }
        const double p = double(tp) / double(predicted);
        const double r = double(tp) / double(pos);
        ap += (r - prev_r) * p;
        prev_r = r;
    }
    return ap;
}

bool metric_oracles(std::string& what) {
    Rng rng(301);
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t n = 2 + uniform_index(rng, 49);
        std::vector<double> scores(n);
        std::vector<int> labels(n, 0);
        for (auto& s : scores) {
            s = uniform_real(rng);
            if (uniform_index(rng, 4) == 0) s = std::round(s * 4.0) / 4.0;
        }
        bool any = false;
        for (auto& l : labels) {
            l = uniform_index(rng, 3) == 0 ? 1 : 0;
            any |= (l == 1);
        }
        if (!any) labels[uniform_index(rng, n)] = 1;

        EvalReport rep = best_f1(scores, labels);
        double ref_thr = -1.0;
        const double ref_f1 = brute_best_f1(scores, labels, ref_thr);
        if (std::abs(rep.f1 - ref_f1) > 1e-12 || rep.threshold != ref_thr) {
            what = "best_f1 disagrees with brute force at instance " + std::to_string(iter);
            return false;
        }
        if (std::abs(auc_pr(scores, labels) - brute_ap(scores, labels)) > 1e-12) {
            what = "auc_pr disagrees with brute force at instance " + std::to_string(iter);
            return false;
        }

        auto adj = point_adjust(scores, labels);
        if (point_adjust(adj, labels) != adj) {
            what = "point_adjust not idempotent at instance " + std::to_string(iter);
            return false;
        }
        for (std::size_t i = 0; i < n; ++i)
            if (labels[i] == 0 && adj[i] != scores[i]) {
                what = "point_adjust touched a label-0 score at instance " + std::to_string(iter);
                return false;
            }
    }
    what = "best_f1/auc_pr match brute force on 200 instances; point_adjust idempotent";
    return true;
}

// ---- criteria 4-6: synthetic benchmark runs --------------------------------

double benchmark_f1(const TimeSeriesDataset& train_set, const TimeSeriesDataset& test_set,
                    TrainConfig cfg) {
    TrainResult res = train(train_set, cfg);
    TimeSeriesDataset test = apply_normalizer(test_set, res.stats, /*is_test=*/true);
    AnomalyScoreSeries series = score_series(res.model, test, /*canonical=*/!cfg.use_umc);
    auto adjusted = point_adjust(series.scores, test_set.labels);
    return best_f1(adjusted, test_set.labels).f1;
}

TrainConfig benchmark_config() {
    TrainConfig cfg;
    cfg.window_len = 50;
    cfg.epochs = 40;
    return cfg;  // everything else stays at the documented defaults
}

bool generalization(std::string& what) {
    std::ostringstream ss;
    bool ok = true;
    for (const char* kind : {"point", "pattern", "pattern-varlen"}) {
        Rng data_rng(1234);
        SynthResult data = generate(benchmark_spec(kind), data_rng);
        std::vector<double> f1s;
        for (std::uint64_t seed : {0, 1, 2}) {
            TrainConfig cfg = benchmark_config();
            cfg.seed = seed;
            f1s.push_back(benchmark_f1(data.train, data.test, cfg));
        }
        std::sort(f1s.begin(), f1s.end());
        const double median = f1s[1];
        ss << kind << " median F1 " << median << "; ";
        if (median < 0.90) ok = false;
    }
    what = ss.str() + (ok ? "all >= 0.90" : "below the 0.90 bar");
    return ok;
}

struct SweepResult {
    // mean F1 per contamination level, per variant
    std::vector<double> full, no_umc;
    double no_nac_16 = 0.0, none_16 = 0.0, full_16 = 0.0, no_umc_16 = 0.0;
};

SweepResult contamination_sweep() {
    const std::vector<double> levels = {0.0, 0.08, 0.16, 0.24};
    Rng data_rng(4321);
    SynthResult clean = generate(benchmark_spec("point"), data_rng);

    auto mean_f1 = [&](const TimeSeriesDataset& train_set, bool use_umc, bool use_nac) {
        double sum = 0.0;
        for (std::uint64_t seed : {0, 1, 2}) {
            TrainConfig cfg = benchmark_config();
            cfg.epochs = 20;
            cfg.seed = seed;
            cfg.use_umc = use_umc;
            cfg.use_nac = use_nac;
            sum += benchmark_f1(train_set, clean.test, cfg);
        }
        return sum / 3.0;
    };

    SweepResult res;
    for (double level : levels) {
        TimeSeriesDataset train_set = clean.train;
        if (level > 0.0) {
            Rng crng(777);
            contaminate_train(train_set, level, crng);
        }
        res.full.push_back(mean_f1(train_set, true, true));
        res.no_umc.push_back(mean_f1(train_set, false, true));
        if (level == 0.16) {
            res.full_16 = res.full.back();
            res.no_umc_16 = res.no_umc.back();
            res.no_nac_16 = mean_f1(train_set, true, false);
            res.none_16 = mean_f1(train_set, false, false);
        }
    }
    return res;
}

bool robustness(const SweepResult& sweep, std::string& what) {
    const double deg_full = sweep.full.front() - sweep.full.back();
    const double deg_no_umc = sweep.no_umc.front() - sweep.no_umc.back();
    std::ostringstream ss;
    ss << "mean F1 over {0,8,16,24}% contamination: full {";
    for (double v : sweep.full) ss << " " << v;
    ss << " }, no-UMC {";
    for (double v : sweep.no_umc) ss << " " << v;
    ss << " }; degradation " << deg_full << " vs " << deg_no_umc;
    what = ss.str();
    return deg_full <= deg_no_umc + 1e-12;
}

bool ablation(const SweepResult& sweep, std::string& what) {
    std::ostringstream ss;
    ss << "mean F1 at 16% contamination: full " << sweep.full_16 << ", no-UMC "
       << sweep.no_umc_16 << ", no-NAC " << sweep.no_nac_16 << " (reported), no-UMC&NAC "
       << sweep.none_16;
    what = ss.str();
    return sweep.full_16 >= sweep.none_16 - 1e-12;
}

// ---- criterion 7: determinism and persistence ------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool determinism(std::string& what) {
    Rng data_rng(555);
    SynthResult data = generate(benchmark_spec("point"), data_rng);
    TrainConfig cfg = benchmark_config();
    cfg.epochs = 2;
    cfg.hidden = 8;
    cfg.feature_dims = 8;

    const fs::path dir = fs::temp_directory_path() / "couta_acceptance";
    fs::create_directories(dir);
    const fs::path pa = dir / "a.json", pb = dir / "b.json";

    TrainResult r1 = train(data.train, cfg);
    TrainResult r2 = train(data.train, cfg);
    save_model(r1.model, r1.stats, pa.string());
    save_model(r2.model, r2.stats, pb.string());
    const bool identical = slurp(pa) == slurp(pb);

    auto [loaded, stats] = load_model(pa.string());
    TimeSeriesDataset test = apply_normalizer(data.test, r1.stats, true);
    auto s1 = score_series(r1.model, test);
    auto s2 = score_series(loaded, test);
    double worst = 0.0;
    for (std::size_t i = 0; i < s1.scores.size(); ++i)
        worst = std::max(worst, std::abs(s1.scores[i] - s2.scores[i]));

    fs::remove_all(dir);
    std::ostringstream ss;
    ss << (identical ? "identical model bytes across reruns" : "model bytes differ")
       << "; round-trip worst score deviation " << worst;
    what = ss.str();
    return identical && worst <= 1e-12;
}

// ---- criterion 8: perturbation properties -----------------------------------

bool perturbation_properties(std::string& what) {
    Rng rng(808);
    auto pool = default_pool();
    const std::size_t l = 16, d = 4;
    for (int iter = 0; iter < 1000; ++iter) {
        std::vector<double> w(l * d);
        for (auto& v : w) v = uniform_real(rng);
        const auto& op = pool[uniform_index(rng, pool.size())];
        auto out = perturb(w, l, d, op, rng);
        if (out.size() != w.size()) {
            what = "shape changed";
            return false;
        }
        if (out == w) {
            what = "trivial perturbation at iteration " + std::to_string(iter);
            return false;
        }
        std::size_t first_changed = l;
        for (std::size_t t = 0; t < l && first_changed == l; ++t)
            for (std::size_t j = 0; j < d; ++j)
                if (out[t * d + j] != w[t * d + j]) {
                    first_changed = t;
                    break;
                }
        const bool local = op.kind == PerturbKind::Collective
                               ? (l - first_changed <= l / 2)
                               : (first_changed == l - 1);
        if (!local) {
            what = "locality violated by " + op.name();
            return false;
        }
        for (std::size_t t = 0; t < first_changed; ++t)
            for (std::size_t j = 0; j < d; ++j)
                if (out[t * d + j] != w[t * d + j]) {
                    what = "prefix modified by " + op.name();
                    return false;
                }
    }

    // dimension-selection uniformity
    std::vector<int> counts(d, 0);
    const int trials = 4000;
    for (int iter = 0; iter < trials; ++iter) {
        std::vector<double> w(l * d);
        for (auto& v : w) v = uniform_real(rng);
        auto out = perturb(w, l, d, {PerturbKind::Point, 2.0}, rng);
        for (std::size_t j = 0; j < d; ++j)
            if (out[(l - 1) * d + j] != w[(l - 1) * d + j]) ++counts[j];
    }
    double total = 0.0;
    for (int c : counts) total += c;
    const double expected = total / double(d);
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    if (chi2 >= 16.266) {  // 3 dof, p = 0.001
        what = "dimension selection non-uniform, chi2 = " + std::to_string(chi2);
        return false;
    }
    std::ostringstream ss;
    ss << "1000 ops: shape/locality/non-triviality hold; chi2 " << chi2 << " < 16.266";
    what = ss.str();
    return true;
}

}  // namespace

int main() {
    std::string what;

    {
        Timer t;
        bool ok = loss_correctness(what);
        report(1, ok, what, t.elapsed());
    }
    {
        Timer t;
        bool ok = loss_shape(what);
        report(2, ok, what, t.elapsed());
    }
    {
        Timer t;
        bool ok = metric_oracles(what);
        report(3, ok, what, t.elapsed());
    }
    {
        Timer t;
        bool ok = generalization(what);
        report(4, ok, what, t.elapsed());
    }
    {
        Timer t;
        SweepResult sweep = contamination_sweep();
        const double setup = t.elapsed();
        bool ok5 = robustness(sweep, what);
        report(5, ok5, what, setup);
        Timer t6;
        bool ok6 = ablation(sweep, what);
        report(6, ok6, what, t6.elapsed());
    }
    {
        Timer t;
        bool ok = determinism(what);
        report(7, ok, what, t.elapsed());
    }
    {
        Timer t;
        bool ok = perturbation_properties(what);
        report(8, ok, what, t.elapsed());
    }

    std::printf("%s\n", failures == 0 ? "all criteria passed" : "ACCEPTANCE FAILURES PRESENT");
    return failures;
}
