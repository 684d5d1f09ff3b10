#include "hsi/boosting.hpp"
#include "hsi/certificates.hpp"
#include "hsi/direction.hpp"
#include "hsi/errors.hpp"
#include "hsi/experiments.hpp"
#include "hsi/io.hpp"
#include "hsi/moments.hpp"
#include "hsi/parallel.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

using namespace hsi;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Stopwatch {
public:
    void lap(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        laps_[stage] = std::chrono::duration<double>(now - last_).count();
        last_ = now;
    }
    json to_json() const {
        json j = laps_;
        j["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        j["threads"] = thread_count();
        return j;
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
    std::chrono::steady_clock::time_point last_ = start_;
    std::map<std::string, double> laps_;
};

// Replaces non-finite floats by null so every report parses as strict JSON.
void scrub(json& j) {
    if (j.is_number_float() && !std::isfinite(j.get<double>())) j = nullptr;
    else if (j.is_structured())
        for (auto& v : j) scrub(v);
}

std::string key_of(const CLI::Option* o) {
    std::string k = o->get_single_name();
    for (char& ch : k)
        if (ch == '-') ch = '_';
    return k;
}

// Effective option values per subcommand, read back from the bound variables.
std::map<const CLI::App*, std::vector<std::pair<std::string, std::function<json()>>>> echo_registry;

template <class T>
CLI::Option* flag(CLI::App* a, const std::string& name, T& var, const std::string& desc) {
    CLI::Option* o = a->add_option(name, var, desc);
    echo_registry[a].emplace_back(key_of(o), [&var] { return json(var); });
    return o;
}

json echo_options(const CLI::App* sub) {
    json j = json::object();
    for (const auto& [k, get] : echo_registry[sub]) j[k] = get();
    return j;
}

// Scalar and list entries of the config file fill options not given on the command line.
void apply_config(CLI::App* sub, const json& cfg) {
    for (CLI::Option* o : sub->get_options()) {
        if (o->count() > 0 || o->get_lnames().empty()) continue;
        const std::string k = key_of(o);
        if (!cfg.contains(k) || cfg[k].is_object()) continue;
        std::vector<std::string> vals;
        auto str = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (cfg[k].is_array())
            for (const auto& v : cfg[k]) vals.push_back(str(v));
        else
            vals.push_back(str(cfg[k]));
        o->add_result(vals);
        o->run_callback();
    }
}

void require(const CLI::App* sub, const std::string& flag) {
    if (sub->get_option(flag)->count() == 0) throw UsageError(flag + " is required");
}

bool given(const CLI::App* sub, const std::string& flag) { return sub->get_option(flag)->count() > 0; }

std::string concept_path_for(const std::string& out) {
    const std::string ext = ".jsonl";
    if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
        return out.substr(0, out.size() - ext.size()) + ".concept.json";
    return out + ".concept.json";
}

struct Shared {
    std::uint64_t seed = 0;
    std::string out;
    std::string config_path;
    json config = json::object();
};

struct InstanceFlags {
    InstanceParams p;
    std::string dw = "gaussian-truncated";
    void add(CLI::App* a) {
        flag(a, "--family", p.family, "planted or matched")->check(CLI::IsMember({"planted", "matched"}));
        flag(a, "--theta", p.theta, "half-angle of the wedge");
        flag(a, "--t", p.t, "offset scale");
        flag(a, "--sigma", p.sigma, "offset asymmetry");
        flag(a, "--mean-gap", p.mean_gap, "class-mean gap (planted)");
        flag(a, "--blob-radius", p.blob_radius, "blob radius (planted)");
        flag(a, "--prior", p.prior, "positive-class mixture weight");
        flag(a, "--grid-step", p.grid_step, "support grid step (matched)");
        flag(a, "--match-slack", p.match_slack, "tolerance over the best mismatch (matched)");
        flag(a, "--dw", dw, "distribution on the complement")
            ->check(CLI::IsMember({"gaussian-truncated", "uniform-ball", "product-rademacher-scaled"}));
    }
    InstanceParams get() const {
        InstanceParams q = p;
        q.dw = dw_kind_from_string(dw);
        return q;
    }
};

struct ConceptFlags {
    std::string path;
    double theta = std::numbers::pi / 3, t = 0.3, sigma = 0.5, gamma = 0.0;
    int d = 2;
    void add(CLI::App* a) {
        flag(a, "--concept", path, "concept JSON (overrides the inline parameters)");
        flag(a, "--theta", theta, "half-angle of the wedge");
        flag(a, "--t", t, "offset scale");
        flag(a, "--sigma", sigma, "offset asymmetry");
        flag(a, "--gamma", gamma, "margin");
        flag(a, "--d", d, "dimension");
    }
    TargetConcept get(const CLI::App* sub, std::uint64_t seed) const {
        if (!path.empty()) return load_concept(path);
        if (!given(sub, "--gamma")) throw UsageError("--gamma or --concept is required");
        return make_concept(theta, t, sigma, gamma, d, seed);
    }
};

json base_report(const std::string& command, const Shared& sh, const CLI::App* sub) {
    json r;
    r["schema"] = "hsi.run_report/1";
    r["command"] = command;
    r["seed"] = sh.seed;
    r["config"] = echo_options(sub);
    return r;
}

int emit(json report, bool pass, const Shared& sh, const Stopwatch& sw) {
    report["pass"] = pass;
    report["timings"] = sw.to_json();
    scrub(report);
    if (sh.out.empty()) {
        std::cout << report.dump(2) << '\n';
    } else {
        write_json_file(sh.out, report);
        std::cout << report["command"].get<std::string>() << ": " << (pass ? "pass" : "FAIL") << " -> " << sh.out
                  << '\n';
    }
    return pass ? 0 : 1;
}

RowMat balanced_class(const LabeledDataset& ds, int target, std::size_t& per_class) {
    if (per_class == 0) {
        std::size_t pos = 0;
        for (int y : ds.y) pos += y > 0;
        per_class = std::min(pos, ds.size() - pos);
        if (per_class == 0) throw ClassMissingError("the dataset holds a single class");
    }
    return rejection_split(ds, target, per_class).X;
}

MomentTensor gap_tensor(const LabeledDataset& ds, int m) {
    std::size_t k = 0;
    const RowMat P = balanced_class(ds, 1, k), N = balanced_class(ds, -1, k);
    const MomentTensor a = empirical_moment(P, m), b = empirical_moment(N, m);
    if (m == 1) return MomentTensor(Vec(a.vec() - b.vec()));
    if (m == 2) return MomentTensor(Mat(a.mat() - b.mat()));
    return MomentTensor(a.ten() - b.ten());
}

Tensor3 unconditional_third(const LabeledDataset& ds) {
    const std::size_t half = ds.size() / 2;
    if (half == 0) throw InsufficientDataError("centered third moment", ds.size(), 2);
    const Vec mu = ds.X.topRows(static_cast<Eigen::Index>(half)).colwise().mean().transpose();
    return centered_third(ds.X.bottomRows(static_cast<Eigen::Index>(ds.size() - half)), mu);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learning intersections of two margin halfspaces: instances, learning and certificates"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    Shared sh;
    app.add_option("--seed", sh.seed, "master seed");
    app.add_option("--out", sh.out, "output path (report, or dataset for generate)");
    app.add_option("--config", sh.config_path, "JSON file whose keys fill unspecified options");

    // generate
    auto* gen = app.add_subcommand("generate", "sample a synthetic instance");
    InstanceFlags gen_inst;
    gen_inst.add(gen);
    std::size_t gen_n = 1000;
    std::size_t gen_test_n = 0;
    std::string gen_concept_out, gen_test_out;
    flag(gen, "--d", gen_inst.p.d, "dimension");
    flag(gen, "--gamma", gen_inst.p.gamma, "margin (required)");
    flag(gen, "--n", gen_n, "number of samples");
    flag(gen, "--concept-out", gen_concept_out, "concept JSON path (default derived from --out)");
    flag(gen, "--test-n", gen_test_n, "size of an independent test set from the same instance");
    flag(gen, "--test-out", gen_test_out, "test set path (required with --test-n)");

    // moments
    auto* mom = app.add_subcommand("moments", "class-conditional moment summary");
    std::string mom_data, mom_concept;
    double mom_gamma = 0.0;
    flag(mom, "--data", mom_data, "JSONL dataset (required)");
    flag(mom, "--gamma", mom_gamma, "margin recorded with the dataset");
    flag(mom, "--concept", mom_concept, "concept JSON for plane projections");

    // extract
    auto* ext = app.add_subcommand("extract", "candidate directions from moment tensors");
    std::string ext_data, ext_concept, ext_method = "gradient";
    double ext_gamma = 0.0, ext_alpha = 0.0, ext_target = 0.2;
    int ext_order = 1, ext_trials = 20;
    flag(ext, "--data", ext_data, "JSONL dataset (required)");
    flag(ext, "--gamma", ext_gamma, "margin (required)");
    flag(ext, "--method", ext_method, "tensor, gradient or sqlist")
        ->check(CLI::IsMember({"tensor", "gradient", "sqlist"}));
    flag(ext, "--order", ext_order, "moment order for gradient")->check(CLI::Range(1, 3));
    flag(ext, "--alpha", ext_alpha, "objective threshold (<= 0 uses the calibrated tau_m / d)");
    flag(ext, "--trials", ext_trials, "random restarts");
    flag(ext, "--concept", ext_concept, "ground-truth concept for |proj_W w|");
    flag(ext, "--target", ext_target, "pass when the best |proj_W w| is at most this");

    // learn
    auto* lrn = app.add_subcommand("learn", "run the full learner");
    std::string lrn_data, lrn_test, lrn_model_out, lrn_concept;
    double lrn_gamma = 0.0, lrn_eps = 0.1, lrn_delta = 0.1;
    flag(lrn, "--data", lrn_data, "JSONL training dataset (required)");
    flag(lrn, "--gamma", lrn_gamma, "margin (required)");
    flag(lrn, "--epsilon", lrn_eps, "target error");
    flag(lrn, "--delta", lrn_delta, "failure probability");
    flag(lrn, "--test", lrn_test, "independent JSONL test set");
    flag(lrn, "--model-out", lrn_model_out, "write the selected ensemble as JSON");
    flag(lrn, "--concept", lrn_concept, "ground-truth concept for |proj_W w|");

    // certify
    auto* cert = app.add_subcommand("certify", "numerical checks of the structural moment results");
    ConceptFlags cert_c;
    cert_c.add(cert);
    std::string cert_check, cert_data;
    std::size_t cert_points = 1000000, cert_support = 2000;
    double cert_tol = 1e-10, cert_step = 0.02, cert_b = 0.0, cert_slack = 0.02, cert_tau = 0.05;
    double gap_tol = 0.25, mean_tol = 0.25, kappa1 = 1.0, floor3 = 1e-4;
    int cert_trials = 1000, cert_refine = 1;
    flag(cert, "--check", cert_check, "lemma3, lemma4, lp, lemma1, thm22 or exclusion (required)")
        ->check(CLI::IsMember({"lemma3", "lemma4", "lp", "lemma1", "thm22", "exclusion"}));
    flag(cert, "--points", cert_points, "region samples for the sign checks");
    flag(cert, "--tol", cert_tol, "allowed sign violation");
    flag(cert, "--grid-step", cert_step, "LP grid step");
    flag(cert, "--refine", cert_refine, "LP grid refinement near boundaries");
    flag(cert, "--b", cert_b, "LP moment perturbation");
    flag(cert, "--slack", cert_slack, "allowed gap between LP optimum and closed form");
    flag(cert, "--data", cert_data, "JSONL dataset (lemma1, thm22)");
    flag(cert, "--gap-tol", gap_tol, "moment-gap precondition");
    flag(cert, "--mean-tol", mean_tol, "class-mean precondition");
    flag(cert, "--kappa1", kappa1, "second-moment floor constant (lemma1)");
    flag(cert, "--floor", floor3, "third-moment floor (thm22)");
    flag(cert, "--trials", cert_trials, "random cubics (exclusion)");
    flag(cert, "--support", cert_support, "support points (exclusion)");
    flag(cert, "--tau", cert_tau, "moment tolerance (exclusion)");

    // bench
    auto* bench = app.add_subcommand("bench", "seeded sweeps with an aggregate success count");
    InstanceFlags bench_inst;
    bench_inst.add(bench);
    std::string sweep;
    std::vector<int> b_d{10};
    std::vector<double> b_gamma{0.1};
    std::vector<std::size_t> b_n;
    int b_seeds = 10;
    double b_frac = 0.8, b_eps = 0.1, b_target = -1.0;
    flag(bench, "--sweep", sweep, "recovery, weak or learn (required)")
        ->check(CLI::IsMember({"recovery", "weak", "learn"}));
    flag(bench, "--d", b_d, "dimensions")->delimiter(',');
    flag(bench, "--gamma", b_gamma, "margins")->delimiter(',');
    flag(bench, "--n", b_n, "sample sizes (default per sweep)")->delimiter(',');
    flag(bench, "--seeds", b_seeds, "seeds per cell group, counting up from --seed");
    flag(bench, "--min-success", b_frac, "required fraction of successful cells");
    flag(bench, "--epsilon", b_eps, "target error (learn)");
    flag(bench, "--target", b_target, "success threshold (<= 0 keeps the sweep default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Stopwatch sw;
        CLI::App* sub = app.get_subcommands().front();
        if (!sh.config_path.empty()) {
            sh.config = read_json_file(sh.config_path);
            if (!sh.config.is_object()) throw UsageError("--config must hold a JSON object");
            apply_config(sub, sh.config);
        }
        const json pipeline_overrides = sh.config.value("pipeline", json::object());

        if (sub == gen) {
            require(gen, "--gamma");
            if (sh.out.empty()) throw UsageError("--out is required for generate");
            const InstanceParams ip = gen_inst.get();
            const Instance inst = make_instance(ip, sh.seed);
            const LabeledDataset ds = draw_train(inst, gen_n, sh.seed);
            save_dataset(sh.out, ds);
            if (gen_test_n > 0) {
                if (gen_test_out.empty()) throw UsageError("--test-out is required with --test-n");
                save_dataset(gen_test_out, draw_test(inst, gen_test_n, sh.seed));
            }
            const std::string cpath = gen_concept_out.empty() ? concept_path_for(sh.out) : gen_concept_out;
            write_json_file(cpath, concept_to_json(inst.target));
            std::size_t pos = 0;
            for (int y : ds.y) pos += y > 0;
            std::cout << "generated family=" << ip.family << " n=" << ds.size() << " d=" << ip.d
                      << " gamma=" << ip.gamma << " positives=" << pos << " dataset=" << sh.out
                      << " concept=" << cpath << '\n';
            return 0;
        }

        if (sub == mom) {
            require(mom, "--data");
            const LabeledDataset ds = load_dataset(mom_data, mom_gamma);
            sw.lap("load");
            json report = base_report("moments", sh, mom);
            const MomentSummary s = summarize_moments(ds);
            json metrics = moment_summary_to_json(s);
            if (!mom_concept.empty()) {
                const TargetConcept c = load_concept(mom_concept);
                const Vec gap = s.mean_pos - s.mean_neg;
                metrics["mean_gap_plane"] = to_json(Vec(c.frame.transpose() * gap));
                metrics["mean_gap_proj_w"] = gap.norm() > 0.0 ? proj_w_norm(c, gap / gap.norm()) : 0.0;
            }
            sw.lap("compute");
            report["metrics"] = metrics;
            return emit(report, true, sh, sw);
        }

        if (sub == ext) {
            require(ext, "--data");
            require(ext, "--gamma");
            const LabeledDataset ds = load_dataset(ext_data, ext_gamma);
            sw.lap("load");
            const int d = ds.dim();
            const PipelineConfig pc = pipeline_config_from_json(pipeline_overrides, calibrated_pipeline(ext_gamma, sh.seed));
            std::vector<DirectionCandidate> cands;
            int accepted = 0;
            if (ext_method == "gradient") {
                const double alpha = ext_alpha > 0.0 ? ext_alpha : pc.threshold(ext_order) / d;
                GradientConfig gc = pc.grad;
                if (gc.eps_t <= 0.0) gc.eps_t = alpha * alpha / d;
                const MomentTensor T = gap_tensor(ds, ext_order);
                for (int k = 0; k < ext_trials; ++k) {
                    GradientResult g = gradient_direction(T, ext_order, alpha, gc,
                                                          derive_seed(sh.seed, 0x6A0000 + static_cast<std::uint64_t>(k)));
                    g.candidate.diagnostics["accepted"] = g.success ? 1.0 : 0.0;
                    accepted += g.success;
                    cands.push_back(std::move(g.candidate));
                }
            } else if (ext_method == "tensor") {
                const Tensor3 T = unconditional_third(ds);
                for (int k = 0; k < ext_trials; ++k)
                    for (auto& c : tensor_pca_directions(T, derive_seed(sh.seed, 0x7E0000 + static_cast<std::uint64_t>(k))))
                        cands.push_back(std::move(c));
                accepted = static_cast<int>(cands.size());
            } else {
                SqListConfig sc;
                sc.grad = pc.grad;
                if (ext_alpha > 0.0) sc.alpha = ext_alpha;
                cands = sq_list_directions(unconditional_third(ds), ext_gamma, sc, sh.seed);
                accepted = static_cast<int>(cands.size());
            }
            sw.lap("compute");
            json report = base_report("extract", sh, ext);
            json metrics;
            json list = json::array();
            double best = 1.0;
            std::optional<TargetConcept> c;
            if (!ext_concept.empty()) c = load_concept(ext_concept);
            for (const auto& cand : cands) {
                json cj = candidate_to_json(cand);
                if (c) {
                    const double pw = proj_w_norm(*c, cand.w);
                    cj["proj_w"] = pw;
                    best = std::min(best, pw);
                }
                list.push_back(cj);
            }
            metrics["method"] = ext_method;
            metrics["candidates"] = list;
            metrics["accepted"] = accepted;
            if (c) metrics["best_proj_w"] = best;
            report["metrics"] = metrics;
            const bool pass = c ? best <= ext_target : accepted > 0;
            return emit(report, pass, sh, sw);
        }

        if (sub == lrn) {
            require(lrn, "--data");
            require(lrn, "--gamma");
            const LabeledDataset ds = load_dataset(lrn_data, lrn_gamma);
            std::optional<LabeledDataset> test;
            if (!lrn_test.empty()) test = load_dataset(lrn_test, lrn_gamma);
            sw.lap("load");
            PipelineConfig pc = pipeline_config_from_json(pipeline_overrides, calibrated_pipeline(lrn_gamma, sh.seed));
            pc.gamma = lrn_gamma;
            pc.seed = sh.seed;
            pc.epsilon = lrn_eps;
            pc.delta = lrn_delta;
            const LearnResult res = learn(ds, pc);
            sw.lap("learn");
            json report = base_report("learn", sh, lrn);
            report["config"]["pipeline"] = pipeline_config_to_json(pc);
            json metrics = learn_result_to_json(res);
            bool pass = res.heldout_error <= lrn_eps;
            if (test) {
                const double te = res.model.error(*test);
                metrics["test_error"] = te;
                pass = pass && te <= lrn_eps;
            }
            if (!lrn_concept.empty()) {
                const TargetConcept c = load_concept(lrn_concept);
                for (std::size_t k = 0; k < res.candidates.size(); ++k)
                    metrics["candidates"][k]["proj_w"] = proj_w_norm(c, res.candidates[k].candidate.w);
            }
            sw.lap("evaluate");
            if (!lrn_model_out.empty()) write_json_file(lrn_model_out, ensemble_to_json(res.model));
            report["metrics"] = metrics;
            return emit(report, pass, sh, sw);
        }

        if (sub == cert) {
            require(cert, "--check");
            json report = base_report("certify", sh, cert);
            json metrics;
            bool pass = false;
            if (cert_check == "lemma1" || cert_check == "thm22") {
                require(cert, "--data");
                std::optional<TargetConcept> c;
                if (!cert_c.path.empty()) c = load_concept(cert_c.path);
                const LabeledDataset ds = load_dataset(cert_data, c ? c->gamma : cert_c.gamma);
                sw.lap("load");
                if (cert_check == "lemma1") {
                    const Lemma1Report r = lemma1_empirical(ds, c ? &*c : nullptr, {gap_tol, mean_tol, kappa1});
                    metrics = {{"skipped", r.skipped}, {"reason", r.reason}, {"lambda_min_pos", r.lambda_min_pos},
                               {"lambda_min_neg", r.lambda_min_neg}, {"floor", r.floor}, {"holds", r.pass}};
                    pass = r.skipped || r.pass;
                } else {
                    const Theorem22Report r = theorem22_empirical(ds, c ? &*c : nullptr, {gap_tol, mean_tol, floor3});
                    metrics = {{"skipped", r.skipped}, {"reason", r.reason}, {"third_pos", r.third_pos},
                               {"third_neg", r.third_neg}, {"floor", r.floor}, {"holds", r.pass}};
                    pass = r.skipped || r.pass;
                }
            } else {
                const TargetConcept c = cert_c.get(cert, sh.seed);
                metrics["concept"] = {{"theta", c.theta}, {"t", c.t}, {"sigma", c.sigma}, {"gamma", c.gamma}};
                if (cert_check == "lemma3" || cert_check == "lemma4") {
                    const bool l3 = cert_check == "lemma3";
                    const auto pts = sample_region(c, l3 ? RegionSide::Positive : RegionSide::Negative, cert_points, sh.seed);
                    sw.lap("sample");
                    const OneSidedPoly p = l3 ? lemma3_poly(c) : lemma4_poly(c);
                    const OneSidedReport r =
                        one_sided_verify(p, pts, l3 ? SignSide::NonNegative : SignSide::NonPositive, cert_tol);
                    metrics["n_points"] = r.n_points;
                    metrics["max_violation"] = r.max_violation;
                    metrics["worst_point"] = r.worst_point ? to_json(Vec(*r.worst_point)) : json(nullptr);
                    metrics["coefficients"] = p.monomial_coeffs();
                    metrics["a0"] = p.a0;
                    pass = r.pass;
                } else if (cert_check == "lp") {
                    const GridSpec g{cert_step, cert_refine};
                    const auto pos = variance_bound_lp(c, RegionSide::Positive, cert_b, g);
                    const auto neg = variance_bound_lp(c, RegionSide::Negative, cert_b, g);
                    auto side = [](const VarianceBoundReport& r) {
                        return json{{"status", to_string(r.status)}, {"value", r.value}, {"closed_form", r.closed_form},
                                    {"dual_value", r.dual_value}, {"n_points", r.points.size()},
                                    {"max_residual", r.max_residual}};
                    };
                    metrics["positive"] = side(pos);
                    metrics["negative"] = side(neg);
                    const bool pos_ok = pos.status == LpStatus::Optimal && pos.value <= pos.closed_form + cert_slack;
                    const bool neg_ok = neg.status == LpStatus::Infeasible ||
                                        (neg.status == LpStatus::Optimal && neg.value >= neg.closed_form - cert_slack);
                    pass = pos_ok && neg_ok;
                } else {
                    const auto pts = sample_region(c, RegionSide::Positive, cert_support, sh.seed);
                    const std::vector<double> w(pts.size(), 1.0 / static_cast<double>(pts.size()));
                    const ExclusionFuzzReport r = exclusion_fuzz(pts, w, cert_tau, cert_trials, sh.seed);
                    metrics = {{"trials", r.trials}, {"failures", r.failures}, {"min_margin", r.min_margin}};
                    pass = r.pass();
                }
            }
            sw.lap("compute");
            report["metrics"] = metrics;
            return emit(report, pass, sh, sw);
        }

        if (sub == bench) {
            require(bench, "--sweep");
            struct Cell {
                int d;
                double gamma;
                std::size_t n;
                std::uint64_t seed;
            };
            std::vector<std::size_t> ns = b_n;
            if (ns.empty()) ns = {sweep == "recovery" ? RecoveryParams{}.n : sweep == "weak" ? WeakParams{}.n : LearnParams{}.n};
            std::vector<Cell> cells;
            for (int d : b_d)
                for (double g : b_gamma)
                    for (std::size_t n : ns)
                        for (int s = 0; s < b_seeds; ++s) cells.push_back({d, g, n, sh.seed + static_cast<std::uint64_t>(s)});
            const PipelineConfig base = pipeline_config_from_json(pipeline_overrides, calibrated_pipeline(0.1, sh.seed));
            std::vector<json> rows(cells.size());
            std::vector<char> ok(cells.size(), 0);
            parallel_for(cells.size(), [&](std::size_t i) {
                const Cell& cell = cells[i];
                InstanceParams ip = bench_inst.get();
                ip.d = cell.d;
                ip.gamma = cell.gamma;
                json row = {{"index", i}, {"d", cell.d}, {"gamma", cell.gamma}, {"n", cell.n}, {"seed", cell.seed}};
                try {
                    if (sweep == "recovery") {
                        RecoveryParams rp;
                        rp.n = cell.n;
                        if (b_target > 0.0) rp.target = b_target;
                        const RecoveryCell r = recovery_cell(ip, rp, cell.seed);
                        row["mean_gap"] = r.mean_gap;
                        row["proj_w"] = r.proj_w;
                        row["accepted"] = r.accepted;
                        ok[i] = r.success;
                    } else if (sweep == "weak") {
                        WeakParams wp;
                        wp.n = cell.n;
                        if (b_target > 0.0) wp.edge = b_target;
                        const WeakCell r = weak_cell(ip, wp, cell.seed);
                        row["test_error"] = r.test_error;
                        row["band_index"] = r.band_index;
                        row["band_mass"] = r.band_mass;
                        ok[i] = r.success;
                    } else {
                        LearnParams lp;
                        lp.n = cell.n;
                        lp.target = b_target > 0.0 ? b_target : b_eps;
                        PipelineConfig pc = base;
                        pc.epsilon = b_eps;
                        const LearnCell r = learn_cell(ip, pc, lp, cell.seed);
                        row["branch"] = r.result.branch;
                        row["gradient_order"] = r.result.gradient_order;
                        row["gaps"] = r.result.gaps;
                        row["heldout_error"] = r.result.heldout_error;
                        row["test_error"] = r.test_error;
                        row["best_proj_w"] = r.best_proj_w;
                        ok[i] = r.success;
                    }
                } catch (const std::exception& e) {
                    row["error"] = e.what();
                }
                row["success"] = ok[i] != 0;
                rows[i] = std::move(row);
            });
            sw.lap("sweep");
            std::size_t successes = 0;
            for (char o : ok) successes += o != 0;
            const auto need = static_cast<std::size_t>(std::ceil(b_frac * static_cast<double>(cells.size()) - 1e-9));
            json report = base_report("bench", sh, bench);
            if (sweep == "learn") report["config"]["pipeline"] = pipeline_config_to_json(base);
            report["metrics"] = {{"sweep", sweep}, {"cells", rows}, {"success_count", successes},
                                 {"cell_count", cells.size()}, {"required", need}};
            return emit(report, successes >= need, sh, sw);
        }
        throw UsageError("unknown subcommand");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
