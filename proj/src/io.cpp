#include "hsi/io.hpp"

#include "hsi/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hsi {

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

}  // namespace

void write_dataset_jsonl(std::ostream& os, const LabeledDataset& ds) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
        json rec;
        rec["x"] = to_json(Vec(ds.X.row(static_cast<Eigen::Index>(i)).transpose()));
        rec["y"] = ds.y[i];
        os << rec.dump() << '\n';
    }
}

LabeledDataset read_dataset_jsonl(std::istream& is, double gamma) {
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
            xs.push_back(rec.at("x").get<std::vector<double>>());
            ys.push_back(rec.at("y").get<int>());
        } catch (const json::exception& e) {
            throw ParameterError("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
        if (ys.back() != 1 && ys.back() != -1)
            throw ParameterError("dataset line " + std::to_string(lineno) + ": label must be 1 or -1");
        if (xs.back().size() != xs.front().size())
            throw ParameterError("dataset line " + std::to_string(lineno) + ": dimension mismatch");
    }
    LabeledDataset ds;
    ds.gamma = gamma;
    const Eigen::Index d = xs.empty() ? 0 : static_cast<Eigen::Index>(xs.front().size());
    ds.X.resize(static_cast<Eigen::Index>(xs.size()), d);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (Eigen::Index k = 0; k < d; ++k) ds.X(static_cast<Eigen::Index>(i), k) = xs[i][static_cast<std::size_t>(k)];
    ds.y = std::move(ys);
    return ds;
}

LabeledDataset load_dataset(const std::string& path, double gamma) {
    auto f = open_in(path);
    return read_dataset_jsonl(f, gamma);
}

void save_dataset(const std::string& path, const LabeledDataset& ds) {
    auto f = open_out(path);
    write_dataset_jsonl(f, ds);
}

json to_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vec(m.row(i).transpose())));
    return rows;
}

json to_json(const Tensor3& t) {
    json out = json::array();
    for (int i = 0; i < t.dim(); ++i) {
        json slab = json::array();
        for (int j = 0; j < t.dim(); ++j) {
            json row = json::array();
            for (int k = 0; k < t.dim(); ++k) row.push_back(t(i, j, k));
            slab.push_back(row);
        }
        out.push_back(slab);
    }
    return out;
}

Vec vec_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json concept_to_json(const TargetConcept& c) {
    json j;
    j["theta"] = c.theta;
    j["t"] = c.t;
    j["sigma"] = c.sigma;
    j["gamma"] = c.gamma;
    j["d"] = c.d;
    j["frame"] = to_json(Mat(c.frame.transpose()));
    j["seed"] = c.seed;
    return j;
}

TargetConcept concept_from_json(const json& j) {
    TargetConcept c;
    try {
        c.theta = j.at("theta").get<double>();
        c.t = j.at("t").get<double>();
        c.sigma = j.at("sigma").get<double>();
        c.gamma = j.at("gamma").get<double>();
        c.d = j.at("d").get<int>();
        c.seed = j.value("seed", std::uint64_t{0});
        const auto rows = j.at("frame");
        if (rows.size() != 2) throw ParameterError("concept frame must have two rows");
        c.frame.resize(c.d, 2);
        for (int r = 0; r < 2; ++r) {
            const Vec v = vec_from_json(rows[static_cast<std::size_t>(r)]);
            if (v.size() != c.d) throw ParameterError("concept frame row has the wrong length");
            c.frame.col(r) = v;
        }
    } catch (const json::exception& e) {
        throw ParameterError(std::string("concept file: ") + e.what());
    }
    validate_concept(c.theta, c.t, c.sigma, c.gamma, c.d);
    if ((c.frame.transpose() * c.frame - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > 1e-10)
        throw ParameterError("concept frame is not orthonormal");
    return c;
}

TargetConcept load_concept(const std::string& path) { return concept_from_json(read_json_file(path)); }

json hypothesis_to_json(const BandPTFHypothesis& h) {
    json j;
    j["band"] = {{"w", to_json(h.band.w)}, {"lo", h.band.lo}, {"hi", h.band.hi}};
    j["weight"] = to_json(h.inside.weight);
    j["outside_const"] = h.outside_const;
    return j;
}

BandPTFHypothesis hypothesis_from_json(const json& j) {
    BandPTFHypothesis h;
    h.band.w = vec_from_json(j.at("band").at("w"));
    h.band.lo = j.at("band").at("lo").get<double>();
    h.band.hi = j.at("band").at("hi").get<double>();
    h.inside.weight = vec_from_json(j.at("weight"));
    h.outside_const = j.at("outside_const").get<int>();
    const Eigen::Index e = h.band.w.size() + 1;
    if (h.inside.weight.size() != e * e) throw ParameterError("lifted weight must have (d + 1)^2 entries");
    if (h.outside_const != 1 && h.outside_const != -1) throw ParameterError("outside_const must be 1 or -1");
    return h;
}

json ensemble_to_json(const EnsembleHypothesis& e) {
    json members = json::array();
    for (const auto& m : e.members()) members.push_back({{"alpha", m.weight}, {"hypothesis", hypothesis_to_json(m.h)}});
    return {{"members", members}};
}

EnsembleHypothesis ensemble_from_json(const json& j) {
    EnsembleHypothesis e;
    for (const auto& m : j.at("members")) e.add(hypothesis_from_json(m.at("hypothesis")), m.at("alpha").get<double>());
    return e;
}

json moment_summary_to_json(const MomentSummary& s) {
    json j;
    j["n_pos"] = s.n_pos;
    j["n_neg"] = s.n_neg;
    j["mean_pos"] = to_json(s.mean_pos);
    j["mean_neg"] = to_json(s.mean_neg);
    j["mean_all"] = to_json(s.mean_all);
    j["second_pos"] = to_json(s.cov_pos);
    j["second_neg"] = to_json(s.cov_neg);
    j["third_pos"] = to_json(s.third_pos);
    j["third_neg"] = to_json(s.third_neg);
    j["third_centered_all"] = to_json(s.third_centered_all);
    j["gaps"] = s.gaps;
    return j;
}

json candidate_to_json(const DirectionCandidate& c) {
    json j;
    j["w"] = to_json(c.w);
    j["source"] = to_string(c.source);
    j["score"] = c.score;
    j["diagnostics"] = c.diagnostics;
    return j;
}

json boost_record_to_json(const BoostRecord& r) {
    json edges = json::array(), errs = json::array();
    for (const auto& round : r.rounds) {
        edges.push_back(round.edge);
        errs.push_back(round.training_error);
    }
    json j;
    j["rounds"] = r.rounds.size();
    j["edges"] = edges;
    j["training_error"] = errs;
    j["final_bound"] = r.rounds.empty() ? 1.0 : r.rounds.back().bound;
    j["bound_holds"] = r.bound_holds;
    j["stopped_on_zero_error"] = r.stopped_on_zero_error;
    j["stopped_on_weak_failure"] = r.stopped_on_weak_failure;
    return j;
}

json learn_result_to_json(const LearnResult& r) {
    json j;
    j["branch"] = r.branch;
    j["gradient_order"] = r.gradient_order;
    j["prior_estimate"] = r.prior_estimate;
    j["gaps"] = r.gaps;
    j["thresholds"] = r.thresholds;
    json cands = json::array();
    for (const auto& c : r.candidates) {
        json cj = candidate_to_json(c.candidate);
        cj["boosting"] = boost_record_to_json(c.boost);
        cj["validation_error"] = c.validation_error;
        cands.push_back(cj);
    }
    j["candidates"] = cands;
    j["selected"] = r.selected;
    j["heldout_error"] = r.heldout_error;
    j["samples_consumed"] = r.samples_consumed;
    return j;
}

json pipeline_config_to_json(const PipelineConfig& c) {
    json j;
    j["epsilon"] = c.epsilon;
    j["delta"] = c.delta;
    j["gamma"] = c.gamma;
    j["tau"] = c.tau;
    j["tau_alpha"] = c.tau_alpha;
    j["tau_exponent"] = c.tau_exponent;
    j["poly_divisor"] = c.poly_divisor;
    j["boost_rounds"] = c.boost_rounds;
    j["tensor_trials"] = c.tensor_trials;
    j["gradient_trials"] = c.gradient_trials;
    j["max_candidates"] = c.max_candidates;
    j["dedup_cos"] = c.dedup_cos;
    j["moment_fraction"] = c.moment_fraction;
    j["boost_fraction"] = c.boost_fraction;
    j["boost_max_samples"] = c.boost_max_samples;
    j["sample_budget"] = c.sample_budget;
    j["weak"] = {{"c1", c.weak.c1},
                 {"c2", c.weak.c2},
                 {"min_band_mass", c.weak.min_band_mass},
                 {"mass_fraction", c.weak.mass_fraction},
                 {"mistake_cap", c.weak.mistake_cap},
                 {"max_band_error", c.weak.max_band_error},
                 {"order", c.weak.order == BandOrder::Mass ? "mass" : "center"}};
    j["gradient"] = {{"step_const", c.grad.step_const},
                     {"max_iters", c.grad.max_iters},
                     {"max_restarts", c.grad.max_restarts},
                     {"init_floor", c.grad.init_floor},
                     {"kappa", c.grad.kappa},
                     {"eps_t", c.grad.eps_t},
                     {"leak_cap", c.grad.leak_cap},
                     {"max_halvings", c.grad.max_halvings}};
    j["seed"] = c.seed;
    return j;
}

PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig c) {
    try {
        take(j, "epsilon", c.epsilon);
        take(j, "delta", c.delta);
        take(j, "gamma", c.gamma);
        take(j, "tau", c.tau);
        take(j, "tau_alpha", c.tau_alpha);
        take(j, "tau_exponent", c.tau_exponent);
        take(j, "poly_divisor", c.poly_divisor);
        take(j, "boost_rounds", c.boost_rounds);
        take(j, "tensor_trials", c.tensor_trials);
        take(j, "gradient_trials", c.gradient_trials);
        take(j, "max_candidates", c.max_candidates);
        take(j, "dedup_cos", c.dedup_cos);
        take(j, "moment_fraction", c.moment_fraction);
        take(j, "boost_fraction", c.boost_fraction);
        take(j, "boost_max_samples", c.boost_max_samples);
        take(j, "sample_budget", c.sample_budget);
        take(j, "seed", c.seed);
        if (j.contains("weak")) {
            const json& w = j.at("weak");
            take(w, "c1", c.weak.c1);
            take(w, "c2", c.weak.c2);
            take(w, "min_band_mass", c.weak.min_band_mass);
            take(w, "mass_fraction", c.weak.mass_fraction);
            take(w, "mistake_cap", c.weak.mistake_cap);
            take(w, "max_band_error", c.weak.max_band_error);
            if (w.contains("order")) {
                const auto o = w.at("order").get<std::string>();
                if (o == "mass") c.weak.order = BandOrder::Mass;
                else if (o == "center") c.weak.order = BandOrder::Center;
                else throw ParameterError("weak.order must be \"mass\" or \"center\"");
            }
        }
        if (j.contains("gradient")) {
            const json& g = j.at("gradient");
            take(g, "step_const", c.grad.step_const);
            take(g, "max_iters", c.grad.max_iters);
            take(g, "max_restarts", c.grad.max_restarts);
            take(g, "init_floor", c.grad.init_floor);
            take(g, "kappa", c.grad.kappa);
            take(g, "eps_t", c.grad.eps_t);
            take(g, "leak_cap", c.grad.leak_cap);
            take(g, "max_halvings", c.grad.max_halvings);
        }
    } catch (const json::exception& e) {
        throw ParameterError(std::string("config: ") + e.what());
    }
    return c;
}

json read_json_file(const std::string& path) {
    auto f = open_in(path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ParameterError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

}  // namespace hsi
