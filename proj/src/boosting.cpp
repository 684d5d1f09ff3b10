#include "hsi/boosting.hpp"

#include "hsi/errors.hpp"
#include "hsi/moments.hpp"
#include "hsi/parallel.hpp"
#include "hsi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace hsi {

void EnsembleHypothesis::add(BandPTFHypothesis h, double weight) {
    members_.push_back(Member{std::move(h), weight});
    indexed_ = false;
}

void EnsembleHypothesis::index() const {
    if (indexed_) return;
    shared_direction_ = !members_.empty();
    for (const auto& m : members_)
        if (m.h.band.w.size() != members_.front().h.band.w.size() || m.h.band.w != members_.front().h.band.w) {
            shared_direction_ = false;
            break;
        }
    const_sum_ = 0.0;
    group_range_.clear();
    group_members_.clear();
    if (shared_direction_) {
        std::map<std::pair<double, double>, std::size_t> slot;
        for (std::size_t j = 0; j < members_.size(); ++j) {
            const auto& m = members_[j];
            const_sum_ += m.weight * m.h.outside_const;
            const auto key = std::make_pair(m.h.band.lo, m.h.band.hi);
            auto it = slot.find(key);
            if (it == slot.end()) {
                it = slot.emplace(key, group_range_.size()).first;
                group_range_.push_back(key);
                group_members_.emplace_back();
            }
            group_members_[it->second].push_back(j);
        }
    }
    indexed_ = true;
}

double EnsembleHypothesis::decision(const Vec& x) const {
    index();
    if (!shared_direction_) {
        double f = 0.0;
        for (const auto& m : members_) f += m.weight * m.h.predict(x);
        return f;
    }
    const double s = x.dot(members_.front().h.band.w);
    double f = const_sum_;
    for (std::size_t g = 0; g < group_range_.size(); ++g) {
        if (s < group_range_[g].first || s > group_range_[g].second) continue;
        for (std::size_t j : group_members_[g]) {
            const auto& m = members_[j];
            f += m.weight * (m.h.predict(x, s) - m.h.outside_const);
        }
    }
    return f;
}

double EnsembleHypothesis::error(const LabeledDataset& ds) const {
    if (ds.size() == 0) return 0.0;
    std::size_t err = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        err += predict(ds.X.row(static_cast<Eigen::Index>(i)).transpose()) != ds.y[i];
    return static_cast<double>(err) / static_cast<double>(ds.size());
}

std::vector<std::size_t> resample(const std::vector<double>& weights, std::size_t n, Rng& rng) {
    const std::size_t m = weights.size();
    if (m == 0) throw ParameterError("resample: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ParameterError("resample: weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw ParameterError("resample: weights sum to zero");

    // Sorted uniforms from normalized exponential spacings, then one walk over the CDF.
    std::vector<double> u(n);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += -std::log(1.0 - uniform01(rng));
        u[k] = acc;
    }
    acc += -std::log(1.0 - uniform01(rng));
    std::vector<std::size_t> out(n);
    std::size_t j = 0;
    double cdf = weights[0];
    for (std::size_t k = 0; k < n; ++k) {
        const double target = u[k] / acc * total;
        while (target >= cdf && j + 1 < m) cdf += weights[++j];
        // Zero-weight tail entries are never selected.
        while (weights[j] == 0.0 && j > 0) --j;
        out[k] = j;
    }
    for (std::size_t i = n; i > 1; --i) std::swap(out[i - 1], out[rng() % i]);
    return out;
}

EnsembleHypothesis adaboost(const LabeledDataset& S, const WeakLearnerFn& weak, int rounds,
                            double gamma_edge, std::uint64_t seed, BoostRecord* record) {
    const std::size_t n = S.size();
    if (n == 0) throw InsufficientDataError("adaboost needs a non-empty sample", 0, 1);
    if (rounds < 1) throw ParameterError("adaboost needs at least one round");
    BoostRecord rec;
    EnsembleHypothesis H;
    std::vector<double> D(n, 1.0 / static_cast<double>(n));
    std::vector<double> F(n, 0.0);
    std::vector<int> pred(n);
    Rng rng(derive_seed(seed, 0xADA));
    double bound = 1.0;

    for (int t = 0; t < rounds; ++t) {
        const std::vector<std::size_t> idx = resample(D, n, rng);
        BandPTFHypothesis h = weak(idx);
        double eps = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = h.predict(S.X.row(static_cast<Eigen::Index>(i)).transpose());
            if (pred[i] != S.y[i]) eps += D[i];
        }
        if (eps >= 0.5) {
            rec.stopped_on_weak_failure = true;
            break;
        }
        const double edge = 0.5 - eps;
        const double eps_c = std::max(eps, 1e-12);
        const double a = 0.5 * std::log((1.0 - eps_c) / eps_c);
        H.add(std::move(h), a);

        double z = 0.0;
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < n; ++i) {
            F[i] += a * pred[i];
            D[i] *= std::exp(-a * S.y[i] * pred[i]);
            z += D[i];
            wrong += (F[i] >= 0.0 ? 1 : -1) != S.y[i];
        }
        for (double& v : D) v /= z;

        bound *= std::sqrt(std::max(0.0, 1.0 - 4.0 * edge * edge));
        BoostRound r;
        r.weighted_error = eps;
        r.edge = edge;
        r.member_weight = a;
        r.training_error = static_cast<double>(wrong) / static_cast<double>(n);
        r.bound = bound;
        if (r.training_error > bound + 1e-12) rec.bound_holds = false;
        if (edge < gamma_edge) rec.all_edges_above = false;
        rec.rounds.push_back(r);
        if (wrong == 0) {
            rec.stopped_on_zero_error = true;
            break;
        }
    }
    rec.exp_bound = std::exp(-2.0 * gamma_edge * gamma_edge * static_cast<double>(rec.rounds.size()));
    if (record) *record = std::move(rec);
    return H;
}

std::size_t select_hypothesis(const std::vector<EnsembleHypothesis>& candidates,
                              const LabeledDataset& validation, std::vector<double>* errors) {
    if (candidates.empty()) throw ParameterError("select_hypothesis: no candidates");
    std::vector<double> errs(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) errs[k] = candidates[k].error(validation);
    const std::size_t best = static_cast<std::size_t>(std::min_element(errs.begin(), errs.end()) - errs.begin());
    if (errors) *errors = std::move(errs);
    return best;
}

int rounds_for(double eps, double edge) {
    if (!(eps > 0.0 && eps < 1.0) || !(edge > 0.0)) throw ParameterError("rounds_for: need 0 < eps < 1 and edge > 0");
    return static_cast<int>(std::ceil(std::log(1.0 / eps) / (2.0 * edge * edge)));
}

double PipelineConfig::threshold(int m) const {
    if (m < 1 || m > 3) throw ParameterError("threshold order must be 1, 2 or 3");
    const std::size_t k = static_cast<std::size_t>(m - 1);
    if (tau[k] > 0.0) return tau[k];
    return tau_alpha[k] * std::pow(gamma, tau_exponent[k]);
}

int PipelineConfig::rounds_cap() const {
    if (boost_rounds > 0) return boost_rounds;
    return rounds_for(epsilon / 2.0, gamma / 8.0);
}

namespace {

void validate(const PipelineConfig& c) {
    if (!(c.epsilon > 0.0 && c.epsilon < 0.5)) throw ParameterError("epsilon must lie in (0, 1/2)");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
    if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
    if (!(c.moment_fraction > 0.0 && c.boost_fraction > 0.0 && c.moment_fraction + c.boost_fraction < 1.0))
        throw ParameterError("moment and boosting fractions must be positive and leave room for validation");
    if (c.max_candidates < 1) throw ParameterError("max_candidates must be at least 1");
}

// Highest score first; drops near-duplicates (|cos| >= dedup_cos) and keeps at most `cap`.
std::vector<DirectionCandidate> shortlist(std::vector<DirectionCandidate> all, double dedup_cos, int cap) {
    std::stable_sort(all.begin(), all.end(),
                     [](const DirectionCandidate& a, const DirectionCandidate& b) { return a.score > b.score; });
    std::vector<DirectionCandidate> kept;
    for (auto& c : all) {
        bool dup = false;
        for (const auto& k : kept)
            if (std::abs(k.w.dot(c.w)) >= dedup_cos) {
                dup = true;
                break;
            }
        if (dup) continue;
        kept.push_back(std::move(c));
        if (static_cast<int>(kept.size()) >= cap) break;
    }
    return kept;
}

Tensor3 gap_tensor3(const RowMat& pos, const RowMat& neg) {
    return empirical_moment(pos, 3).ten() - empirical_moment(neg, 3).ten();
}

}  // namespace

LearnResult learn(const LabeledDataset& ds_all, const PipelineConfig& cfg) {
    validate(cfg);
    const std::size_t n = cfg.sample_budget > 0 ? std::min(cfg.sample_budget, ds_all.size()) : ds_all.size();
    const int d = ds_all.dim();
    const std::size_t n_prior =
        static_cast<std::size_t>(std::ceil(8.0 / cfg.epsilon * std::log(2.0 / cfg.delta)));
    if (n_prior >= n) throw InsufficientDataError("too few samples for the prior estimate", n, n_prior + 1);

    LearnResult res;
    for (int m = 1; m <= 3; ++m) res.thresholds[static_cast<std::size_t>(m - 1)] = cfg.threshold(m);

    std::size_t pos_count = 0;
    for (std::size_t i = 0; i < n_prior; ++i) pos_count += ds_all.y[i] > 0;
    res.prior_estimate = static_cast<double>(pos_count) / static_cast<double>(n_prior);

    const LabeledDataset rest = ds_all.slice(n_prior, n);
    if (res.prior_estimate < cfg.epsilon || res.prior_estimate > 1.0 - cfg.epsilon) {
        const int c = res.prior_estimate < cfg.epsilon ? -1 : 1;
        res.branch = "constant";
        res.model.add(constant_hypothesis(Vec::Unit(d, 0), c), 1.0);
        res.heldout_error = res.model.error(rest);
        res.samples_consumed = n;
        return res;
    }

    const std::size_t r = rest.size();
    const std::size_t n_mom = static_cast<std::size_t>(cfg.moment_fraction * static_cast<double>(r));
    std::size_t n_boost = static_cast<std::size_t>(cfg.boost_fraction * static_cast<double>(r));
    const LabeledDataset mom = rest.slice(0, n_mom);
    std::size_t mom_pos = 0;
    for (int y : mom.y) mom_pos += y > 0;
    const std::size_t per_class = std::min(mom_pos, n_mom - mom_pos);
    const std::size_t min_class = static_cast<std::size_t>(4 * d);
    if (per_class < min_class)
        throw InsufficientDataError("moment segment holds too few samples of one class", per_class, min_class);
    const RowMat Xp = rejection_split(mom, 1, per_class).X;
    const RowMat Xn = rejection_split(mom, -1, per_class).X;
    for (int m = 1; m <= 3; ++m) {
        const MomentTensor a = empirical_moment(Xp, m), b = empirical_moment(Xn, m);
        double g = 0.0;
        if (m == 1) g = (a.vec() - b.vec()).norm();
        else if (m == 2) g = (a.mat() - b.mat()).norm();
        else g = frob_norm(a.ten() - b.ten());
        res.gaps[static_cast<std::size_t>(m - 1)] = g;
    }

    const double divisor = cfg.poly_divisor > 0.0 ? cfg.poly_divisor : static_cast<double>(d);
    bool all_small = true;
    for (int m = 1; m <= 3; ++m)
        if (res.gaps[static_cast<std::size_t>(m - 1)] > res.thresholds[static_cast<std::size_t>(m - 1)]) all_small = false;

    std::vector<DirectionCandidate> pool;
    if (all_small) {
        res.branch = "tensor";
        // Centered third moment of the unconditional moment segment, mean from its first half.
        const std::size_t half = n_mom / 2;
        const RowMat& Xm = mom.X;
        const Vec mu = Xm.topRows(static_cast<Eigen::Index>(half)).colwise().mean().transpose();
        const RowMat tail = Xm.bottomRows(static_cast<Eigen::Index>(n_mom - half));
        const Tensor3 T = centered_third(tail, mu);
        const int trials = cfg.tensor_trials > 0
                               ? cfg.tensor_trials
                               : static_cast<int>(std::min(50.0 * std::ceil(d / cfg.gamma), 5000.0));
        for (int k = 0; k < trials; ++k) {
            auto c = tensor_pca_directions(T, derive_seed(cfg.seed, 0x7E0000 + static_cast<std::uint64_t>(k)));
            for (auto& x : c) pool.push_back(std::move(x));
        }
    } else {
        res.branch = "gradient";
        int m = 1;
        while (m < 3 && res.gaps[static_cast<std::size_t>(m - 1)] <= res.thresholds[static_cast<std::size_t>(m - 1)] / divisor) ++m;
        res.gradient_order = m;
        const double alpha = res.thresholds[static_cast<std::size_t>(m - 1)] / divisor;
        MomentTensor T;
        if (m == 1) T = MomentTensor(Vec(empirical_moment(Xp, 1).vec() - empirical_moment(Xn, 1).vec()));
        else if (m == 2) T = MomentTensor(Mat(empirical_moment(Xp, 2).mat() - empirical_moment(Xn, 2).mat()));
        else T = MomentTensor(gap_tensor3(Xp, Xn));
        GradientConfig gc = cfg.grad;
        if (gc.eps_t <= 0.0) gc.eps_t = alpha * alpha / d;
        std::vector<DirectionCandidate> fallback;
        for (int k = 0; k < cfg.gradient_trials; ++k) {
            GradientResult g = gradient_direction(T, m, alpha, gc, derive_seed(cfg.seed, 0x6A0000 + static_cast<std::uint64_t>(k)));
            (g.success ? pool : fallback).push_back(std::move(g.candidate));
        }
        if (pool.empty()) pool = std::move(fallback);
    }
    std::vector<DirectionCandidate> shortlisted = shortlist(std::move(pool), cfg.dedup_cos, cfg.max_candidates);
    if (shortlisted.empty()) shortlisted.push_back(DirectionCandidate{Vec::Unit(d, 0), DirectionSource::TensorPca, 0.0, {}});

    if (cfg.boost_max_samples > 0) n_boost = std::min(n_boost, cfg.boost_max_samples);
    const LabeledDataset S = rest.slice(n_mom, n_mom + n_boost);
    const LabeledDataset V = rest.slice(n_mom + n_boost, r);
    const int rounds = cfg.rounds_cap();

    std::vector<EnsembleHypothesis> models(shortlisted.size());
    std::vector<BoostRecord> records(shortlisted.size());
    parallel_for(shortlisted.size(), [&](std::size_t k) {
        WeakLearner wl(S.X, S.y, shortlisted[k].w, cfg.gamma, cfg.weak);
        models[k] = adaboost(S, [&](const std::vector<std::size_t>& idx) { return wl.learn(idx); }, rounds,
                             cfg.gamma / 8.0, derive_seed(cfg.seed, 0xB0000 + k), &records[k]);
    });
    std::vector<double> errs;
    res.selected = select_hypothesis(models, V, &errs);
    for (std::size_t k = 0; k < shortlisted.size(); ++k)
        res.candidates.push_back(CandidateReport{std::move(shortlisted[k]), std::move(records[k]), errs[k]});
    res.heldout_error = errs[res.selected];
    res.model = std::move(models[res.selected]);
    res.samples_consumed = n;
    return res;
}

}  // namespace hsi
