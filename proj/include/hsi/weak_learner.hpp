#pragma once

#include "hsi/instance.hpp"
#include "hsi/linalg.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hsi {

std::vector<double> band_grid(double gamma, double c1);

// [x, 1] (x) [x, 1], flattened row-major; length (d + 1)^2.
Vec veronese2(const Vec& x);

struct Band {
    Vec w;
    double lo = 0.0;
    double hi = 0.0;
    bool contains(const Vec& x) const {
        const double s = x.dot(w);
        return s >= lo && s <= hi;
    }
};

struct LiftedLTF {
    Vec weight;  // length (d + 1)^2
    // weight . veronese2(x), computed without materializing the lift.
    double score(const Vec& x) const;
};

struct BandPTFHypothesis {
    Band band;
    LiftedLTF inside;
    int outside_const = 1;
    int predict(const Vec& x) const;
    // Prediction given a precomputed projection s = x . band.w.
    int predict(const Vec& x, double s) const;
};

// A hypothesis that predicts c everywhere, expressed in band form.
BandPTFHypothesis constant_hypothesis(const Vec& w, int c);

struct PerceptronResult {
    bool success = false;
    LiftedLTF ltf;
    long mistakes = 0;
    int passes = 0;
};

// Standard perceptron (update on y w.z <= 0), cycling over the data until a clean pass
// or until the mistake budget is spent. `init` warm-starts the weights.
PerceptronResult margin_perceptron(const RowMat& Z, const std::vector<int>& y, double margin_target,
                                   long max_mistakes, const Vec* init = nullptr);

// Mistake budget ceil((R / margin)^2) for lifted data with radius R.
long perceptron_budget(double radius, double margin_target);

enum class BandOrder { Center, Mass };

struct WeakLearnerConfig {
    double c1 = 0.1;
    double c2 = 0.05;
    double min_band_mass = 0.0;  // <= 0 selects 1 / (2 |T|)
    double mass_fraction = 0.5;  // share of the sample used only for band masses
    long mistake_cap = 0;        // > 0 caps the theoretical mistake budget
    double max_band_error = 0.25;      // an unfinished perceptron is accepted below this in-band error
    BandOrder order = BandOrder::Mass; // Center scans by |center|; Mass by estimated mass, heaviest first
};

struct WeakLearnerReport {
    int band_index = -1;        // index into centers(), -1 for the constant fallback
    int bands_tried = 0;
    long mistakes = 0;
    double band_mass = 0.0;
    double band_error = 0.0;    // in-band training error of the accepted LTF
};

// Weak learner over a fixed pool of samples; each call sees a multiset of pool indices.
// Per-band perceptron weights from earlier calls are reused as warm starts.
class WeakLearner {
public:
    WeakLearner(const RowMat& X, const std::vector<int>& y, const Vec& w, double gamma,
                const WeakLearnerConfig& cfg);

    // `mass_idx` estimates band masses; `fit_idx` trains the perceptron and the constant.
    BandPTFHypothesis learn(const std::vector<std::size_t>& mass_idx,
                            const std::vector<std::size_t>& fit_idx, WeakLearnerReport* report = nullptr);
    // Splits `sample` by position: the leading mass_fraction share estimates masses.
    BandPTFHypothesis learn(const std::vector<std::size_t>& sample, WeakLearnerReport* report = nullptr);

    const std::vector<double>& projections() const { return proj_; }
    const std::vector<double>& centers() const { return centers_; }

private:
    const RowMat& X_;
    const std::vector<int>& y_;
    Vec w_;
    double gamma_;
    WeakLearnerConfig cfg_;
    std::vector<double> centers_;   // in scan order
    std::vector<double> proj_;
    std::vector<std::optional<Vec>> warm_;
};

// One-shot weak learner on a dataset; splits it into a mass part and a fit part.
BandPTFHypothesis weak_hypothesis(const LabeledDataset& ds, const Vec& w, double gamma,
                                  const WeakLearnerConfig& cfg, std::uint64_t seed,
                                  WeakLearnerReport* report = nullptr);

double empirical_error(const BandPTFHypothesis& h, const LabeledDataset& ds);

}  // namespace hsi
