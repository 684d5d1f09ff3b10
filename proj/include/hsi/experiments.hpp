#pragma once

#include "hsi/boosting.hpp"
#include "hsi/instance.hpp"

#include <cstdint>
#include <numbers>
#include <string>

namespace hsi {

// Synthetic instance recipe. "planted" has mismatched class means; "matched" is the
// moment-matched LP construction of build_matched_instance.
struct InstanceParams {
    std::string family = "planted";
    int d = 10;
    double gamma = 0.1;
    double theta = std::numbers::pi / 3;
    double t = 0.3;
    double sigma = 0.5;
    double mean_gap = 0.3;
    double blob_radius = 0.05;
    double prior = 0.5;
    double grid_step = 0.02;   // matched family only
    double match_slack = 1.2;  // tolerance as a multiple of the smallest achievable mismatch
    DwKind dw = DwKind::GaussianTruncated;
};

struct Instance {
    TargetConcept target;
    DistSpec2D dist;
    DwKind dw = DwKind::GaussianTruncated;
    double min_mismatch = 0.0;
};

Instance make_instance(const InstanceParams& p, std::uint64_t seed);

// Training and test draws use fixed offsets of the cell seed so they never share a stream.
LabeledDataset draw_train(const Instance& inst, std::size_t n, std::uint64_t seed);
LabeledDataset draw_test(const Instance& inst, std::size_t n, std::uint64_t seed);

// |proj_W w| for unit w.
double proj_w_norm(const TargetConcept& c, const Vec& w);

// The calibrated pipeline used by the end-to-end runs.
PipelineConfig calibrated_pipeline(double gamma, std::uint64_t seed);

struct RecoveryParams {
    std::size_t n = 20000;
    double tau1 = 0.2;     // alpha = tau1 / d
    double target = 0.2;   // success when |proj_W u| <= target
};

struct RecoveryCell {
    double mean_gap = 0.0;
    double proj_w = 1.0;
    bool accepted = false;
    bool success = false;
};

// Gradient ascent (m = 1) on the empirical class-mean difference of a planted instance.
RecoveryCell recovery_cell(const InstanceParams& ip, const RecoveryParams& rp, std::uint64_t seed);

struct WeakParams {
    std::size_t n = 100000;
    std::size_t n_test = 100000;
    double c1 = 0.1;
    long mistake_cap = 20000;
    double edge = 0.02;   // success when test error <= 1/2 - edge
};

struct WeakCell {
    double test_error = 0.5;
    int band_index = -1;
    double band_mass = 0.0;
    bool success = false;
};

// Weak learner fed the true direction u of the concept.
WeakCell weak_cell(const InstanceParams& ip, const WeakParams& wp, std::uint64_t seed);

struct LearnParams {
    std::size_t n = 200000;
    std::size_t n_test = 50000;
    double target = 0.1;
};

struct LearnCell {
    LearnResult result;
    double test_error = 1.0;
    double best_proj_w = 1.0;   // over the boosted candidates
    bool success = false;
};

LearnCell learn_cell(const InstanceParams& ip, const PipelineConfig& cfg, const LearnParams& lp,
                     std::uint64_t seed);

}  // namespace hsi
