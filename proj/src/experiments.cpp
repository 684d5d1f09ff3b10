#include "hsi/experiments.hpp"

#include "hsi/direction.hpp"
#include "hsi/errors.hpp"
#include "hsi/moments.hpp"
#include "hsi/weak_learner.hpp"

#include <algorithm>

namespace hsi {

Instance make_instance(const InstanceParams& p, std::uint64_t seed) {
    Instance inst;
    inst.target = make_concept(p.theta, p.t, p.sigma, p.gamma, p.d, seed);
    inst.dw = p.dw;
    if (p.family == "planted") {
        inst.dist = planted_mismatched(inst.target, p.mean_gap, p.blob_radius, p.prior, seed);
    } else if (p.family == "matched") {
        const GridSpec g{p.grid_step, 1};
        const MatchedInstance probe = build_matched_instance(inst.target, 3, 1e9, g, seed);
        const MatchedInstance mi = build_matched_instance(inst.target, 3, p.match_slack * probe.min_mismatch, g, seed);
        if (!mi.feasible) throw GenerationError("moment matching failed at the requested slack");
        inst.min_mismatch = probe.min_mismatch;
        inst.dist = DistSpec2D::mixture(mi.positive, mi.negative, p.prior);
    } else {
        throw ParameterError("unknown instance family '" + p.family + "'");
    }
    return inst;
}

LabeledDataset draw_train(const Instance& inst, std::size_t n, std::uint64_t seed) {
    return sample_dataset(inst.target, inst.dist, inst.dw, n, seed + 100);
}

LabeledDataset draw_test(const Instance& inst, std::size_t n, std::uint64_t seed) {
    return sample_dataset(inst.target, inst.dist, inst.dw, n, seed + 999);
}

double proj_w_norm(const TargetConcept& c, const Vec& w) {
    const Vec in_plane = c.frame * (c.frame.transpose() * w);
    return (w - in_plane).norm();
}

PipelineConfig calibrated_pipeline(double gamma, std::uint64_t seed) {
    PipelineConfig cfg;
    cfg.gamma = gamma;
    cfg.seed = seed;
    cfg.tau = {0.2, 0.4, 0.4};
    cfg.boost_max_samples = 20000;
    cfg.weak.mistake_cap = 20000;
    return cfg;
}

RecoveryCell recovery_cell(const InstanceParams& ip, const RecoveryParams& rp, std::uint64_t seed) {
    const Instance inst = make_instance(ip, seed);
    const LabeledDataset ds = draw_train(inst, rp.n, seed);
    std::size_t pos = 0;
    for (int y : ds.y) pos += y > 0;
    const std::size_t per_class = std::min(pos, ds.size() - pos);
    if (per_class == 0) throw ClassMissingError("recovery sample lacks a class");
    const Vec gap = empirical_moment(rejection_split(ds, 1, per_class).X, 1).vec() -
                    empirical_moment(rejection_split(ds, -1, per_class).X, 1).vec();
    const double alpha = rp.tau1 / ip.d;
    GradientConfig gc;
    gc.eps_t = alpha * alpha / ip.d;
    const GradientResult g = gradient_direction(MomentTensor(gap), 1, alpha, gc, derive_seed(seed, 0x6A0000));
    RecoveryCell cell;
    cell.mean_gap = gap.norm();
    cell.accepted = g.success;
    cell.proj_w = proj_w_norm(inst.target, g.candidate.w);
    cell.success = cell.proj_w <= rp.target;
    return cell;
}

WeakCell weak_cell(const InstanceParams& ip, const WeakParams& wp, std::uint64_t seed) {
    const Instance inst = make_instance(ip, seed);
    const LabeledDataset ds = draw_train(inst, wp.n, seed);
    const LabeledDataset test = draw_test(inst, wp.n_test, seed);
    WeakLearnerConfig cfg;
    cfg.c1 = wp.c1;
    cfg.mistake_cap = wp.mistake_cap;
    WeakLearnerReport rep;
    const BandPTFHypothesis h = weak_hypothesis(ds, inst.target.u(), ip.gamma, cfg, seed, &rep);
    WeakCell cell;
    cell.test_error = empirical_error(h, test);
    cell.band_index = rep.band_index;
    cell.band_mass = rep.band_mass;
    cell.success = cell.test_error <= 0.5 - wp.edge;
    return cell;
}

LearnCell learn_cell(const InstanceParams& ip, const PipelineConfig& base, const LearnParams& lp,
                     std::uint64_t seed) {
    const Instance inst = make_instance(ip, seed);
    const LabeledDataset ds = draw_train(inst, lp.n, seed);
    const LabeledDataset test = draw_test(inst, lp.n_test, seed);
    PipelineConfig cfg = base;
    cfg.gamma = ip.gamma;
    cfg.seed = seed;
    LearnCell cell;
    cell.result = learn(ds, cfg);
    cell.test_error = cell.result.model.error(test);
    for (const auto& c : cell.result.candidates)
        cell.best_proj_w = std::min(cell.best_proj_w, proj_w_norm(inst.target, c.candidate.w));
    cell.success = cell.test_error <= lp.target;
    return cell;
}

}  // namespace hsi
