#pragma once

#include "hsi/direction.hpp"
#include "hsi/instance.hpp"
#include "hsi/rng.hpp"
#include "hsi/weak_learner.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hsi {

class EnsembleHypothesis {
public:
    struct Member {
        BandPTFHypothesis h;
        double weight = 0.0;
    };

    void add(BandPTFHypothesis h, double weight);
    const std::vector<Member>& members() const { return members_; }
    bool empty() const { return members_.empty(); }

    double decision(const Vec& x) const;
    // Empty ensembles and ties predict +1.
    int predict(const Vec& x) const { return decision(x) >= 0.0 ? 1 : -1; }
    double error(const LabeledDataset& ds) const;

private:
    void index() const;
    std::vector<Member> members_;
    // Lookup structure for ensembles whose members share one direction.
    mutable bool indexed_ = false;
    mutable bool shared_direction_ = false;
    mutable double const_sum_ = 0.0;
    mutable std::vector<std::pair<double, double>> group_range_;
    mutable std::vector<std::vector<std::size_t>> group_members_;
};

struct BoostRound {
    double weighted_error = 0.0;
    double edge = 0.0;          // 1/2 - weighted_error
    double member_weight = 0.0;
    double training_error = 0.0;
    double bound = 1.0;         // prod sqrt(1 - 4 edge^2) up to this round
};

struct BoostRecord {
    std::vector<BoostRound> rounds;
    bool bound_holds = true;
    bool stopped_on_zero_error = false;
    bool stopped_on_weak_failure = false;
    double exp_bound = 1.0;     // exp(-2 gamma_edge^2 T) when all edges >= gamma_edge
    bool all_edges_above = true;
};

using WeakLearnerFn = std::function<BandPTFHypothesis(const std::vector<std::size_t>&)>;

// AdaBoost over the samples of S. Each round the weak learner sees |S| indices drawn
// i.i.d. from the current boosting distribution, in random order.
EnsembleHypothesis adaboost(const LabeledDataset& S, const WeakLearnerFn& weak, int rounds,
                            double gamma_edge, std::uint64_t seed, BoostRecord* record = nullptr);

// Draws n indices i.i.d. from the (unnormalized) weights, shuffled.
std::vector<std::size_t> resample(const std::vector<double>& weights, std::size_t n, Rng& rng);

std::size_t select_hypothesis(const std::vector<EnsembleHypothesis>& candidates,
                              const LabeledDataset& validation, std::vector<double>* errors = nullptr);

// Rounds needed by the exponential bound exp(-2 edge^2 T) <= eps.
int rounds_for(double eps, double edge);

struct PipelineConfig {
    double epsilon = 0.1;
    double delta = 0.1;
    double gamma = 0.1;
    std::array<double, 3> tau{0.0, 0.0, 0.0};        // <= 0 selects alpha_t gamma^e_t
    std::array<double, 3> tau_alpha{1.0 / 64, 1.0 / 16, 0.5};
    std::array<double, 3> tau_exponent{2.0, 2.0, 2.0};
    double poly_divisor = 0.0;                       // <= 0 selects d
    int boost_rounds = 0;                            // <= 0 selects ceil(ln(2/eps) / (2 (gamma/8)^2))
    int tensor_trials = 0;                           // <= 0 selects min(50 ceil(d/gamma), 5000)
    int gradient_trials = 20;
    int max_candidates = 4;
    double dedup_cos = 0.99;
    double moment_fraction = 0.3;
    double boost_fraction = 0.5;
    std::size_t boost_max_samples = 0;               // 0 keeps the whole boosting split
    std::size_t sample_budget = 0;                   // 0 means the dataset size
    WeakLearnerConfig weak;
    GradientConfig grad;
    std::uint64_t seed = 0;

    double threshold(int m) const;
    int rounds_cap() const;
};

struct CandidateReport {
    DirectionCandidate candidate;
    BoostRecord boost;
    double validation_error = 0.0;
};

struct LearnResult {
    EnsembleHypothesis model;
    std::string branch;              // "constant", "tensor" or "gradient"
    int gradient_order = 0;
    double prior_estimate = 0.0;
    std::array<double, 3> gaps{};
    std::array<double, 3> thresholds{};
    std::vector<CandidateReport> candidates;
    std::size_t selected = 0;
    double heldout_error = 0.0;
    std::size_t samples_consumed = 0;
};

LearnResult learn(const LabeledDataset& ds, const PipelineConfig& cfg);

}  // namespace hsi
