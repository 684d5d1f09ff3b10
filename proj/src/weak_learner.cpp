#include "hsi/weak_learner.hpp"

#include "hsi/errors.hpp"
#include "hsi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hsi {

std::vector<double> band_grid(double gamma, double c1) {
    const double h = c1 * gamma;
    if (!(h > 0.0 && h < 1.0)) throw ParameterError("band_grid requires 0 < c1 * gamma < 1");
    const long k = static_cast<long>(std::ceil(2.0 / h - 1e-9));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k + 1));
    for (long i = 0; i <= k; ++i) out.push_back(std::min(1.0, -1.0 + static_cast<double>(i) * h));
    return out;
}

Vec veronese2(const Vec& x) {
    const int d = static_cast<int>(x.size());
    Vec a(d + 1);
    a.head(d) = x;
    a[d] = 1.0;
    Vec out((d + 1) * (d + 1));
    for (int i = 0; i <= d; ++i)
        for (int j = 0; j <= d; ++j) out[i * (d + 1) + j] = a[i] * a[j];
    return out;
}

double LiftedLTF::score(const Vec& x) const {
    const int d = static_cast<int>(x.size());
    const int e = d + 1;
    double s = 0.0;
    for (int i = 0; i <= d; ++i) {
        const double ai = i < d ? x[i] : 1.0;
        const double* row = weight.data() + static_cast<std::ptrdiff_t>(i) * e;
        double r = row[d];
        for (int j = 0; j < d; ++j) r += row[j] * x[j];
        s += ai * r;
    }
    return s;
}

int BandPTFHypothesis::predict(const Vec& x, double s) const {
    if (s >= band.lo && s <= band.hi) return inside.score(x) >= 0.0 ? 1 : -1;
    return outside_const;
}

int BandPTFHypothesis::predict(const Vec& x) const { return predict(x, x.dot(band.w)); }

BandPTFHypothesis constant_hypothesis(const Vec& w, int c) {
    const int d = static_cast<int>(w.size());
    BandPTFHypothesis h;
    h.band = Band{w, -1.0, 1.0};
    h.inside.weight = Vec::Zero((d + 1) * (d + 1));
    h.inside.weight[(d + 1) * (d + 1) - 1] = c;
    h.outside_const = c;
    return h;
}

long perceptron_budget(double radius, double margin_target) {
    const double r = radius / margin_target;
    return static_cast<long>(std::ceil(r * r));
}

PerceptronResult margin_perceptron(const RowMat& Z, const std::vector<int>& y, double margin_target,
                                   long max_mistakes, const Vec* init) {
    if (!(margin_target > 0.0)) throw ParameterError("margin target must be positive");
    PerceptronResult res;
    const Eigen::Index n = Z.rows();
    Vec w = init ? *init : Vec::Zero(Z.cols());
    if (n == 0) {
        res.success = true;
        res.ltf.weight = w;
        return res;
    }
    for (;;) {
        ++res.passes;
        bool clean = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double yi = y[static_cast<std::size_t>(i)];
            if (yi * Z.row(i).dot(w) <= 0.0) {
                clean = false;
                if (res.mistakes >= max_mistakes) {
                    res.ltf.weight = w;
                    return res;
                }
                w += yi * Z.row(i).transpose();
                ++res.mistakes;
            }
        }
        if (clean) break;
    }
    res.success = true;
    res.ltf.weight = w;
    return res;
}

WeakLearner::WeakLearner(const RowMat& X, const std::vector<int>& y, const Vec& w, double gamma,
                         const WeakLearnerConfig& cfg)
    : X_(X), y_(y), w_(w), gamma_(gamma), cfg_(cfg) {
    centers_ = band_grid(gamma, cfg.c1);
    std::stable_sort(centers_.begin(), centers_.end(),
                     [](double a, double b) { return std::abs(a) < std::abs(b); });
    proj_.resize(static_cast<std::size_t>(X.rows()));
    const Vec p = X * w;
    for (Eigen::Index i = 0; i < X.rows(); ++i) proj_[static_cast<std::size_t>(i)] = p[i];
    warm_.resize(centers_.size());
}

BandPTFHypothesis WeakLearner::learn(const std::vector<std::size_t>& mass_idx,
                                     const std::vector<std::size_t>& fit_idx,
                                     WeakLearnerReport* report) {
    if (mass_idx.empty()) throw CoverageError("weak learner received no samples for band masses");
    const int d = static_cast<int>(X_.cols());
    const double half = cfg_.c1 * gamma_;
    const std::size_t nb = centers_.size();
    const double thr = cfg_.min_band_mass > 0.0 ? cfg_.min_band_mass : 1.0 / (2.0 * static_cast<double>(nb));
    const double margin = cfg_.c2 * gamma_ * gamma_;
    long budget = perceptron_budget(2.0, margin);
    if (cfg_.mistake_cap > 0) budget = std::min(budget, cfg_.mistake_cap);

    // Band masses on the grid in ascending order of center, then mapped to scan order.
    std::vector<double> sorted_centers = centers_;
    std::sort(sorted_centers.begin(), sorted_centers.end());
    std::vector<std::size_t> grid_to_scan(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        const auto it = std::find(centers_.begin(), centers_.end(), sorted_centers[k]);
        grid_to_scan[k] = static_cast<std::size_t>(it - centers_.begin());
    }
    std::vector<double> count(nb, 0.0);
    for (std::size_t i : mass_idx) {
        const double s = proj_[i];
        auto lo = std::lower_bound(sorted_centers.begin(), sorted_centers.end(), s - half - 1e-15);
        for (auto it = lo; it != sorted_centers.end() && *it <= s + half + 1e-15; ++it)
            if (s >= *it - half && s <= *it + half)
                count[grid_to_scan[static_cast<std::size_t>(it - sorted_centers.begin())]] += 1.0;
    }
    const double inv_n = 1.0 / static_cast<double>(mass_idx.size());

    auto best_outside = [&](double lo, double hi) {
        long pos = 0, neg = 0;
        for (std::size_t i : fit_idx) {
            const double s = proj_[i];
            if (s >= lo && s <= hi) continue;
            (y_[i] > 0 ? pos : neg) += 1;
        }
        return pos >= neg ? 1 : -1;
    };

    std::vector<std::size_t> scan(nb);
    std::iota(scan.begin(), scan.end(), 0);
    if (cfg_.order == BandOrder::Mass)
        std::stable_sort(scan.begin(), scan.end(), [&](std::size_t a, std::size_t b) { return count[a] > count[b]; });

    WeakLearnerReport rep;
    bool any_band = false;
    for (std::size_t b : scan) {
        const double mass = count[b] * inv_n;
        if (mass < thr) continue;
        any_band = true;
        ++rep.bands_tried;
        const double lo = centers_[b] - half, hi = centers_[b] + half;
        std::vector<std::size_t> in;
        for (std::size_t i : fit_idx)
            if (proj_[i] >= lo && proj_[i] <= hi) in.push_back(i);
        if (in.empty()) continue;
        RowMat Z(static_cast<Eigen::Index>(in.size()), (d + 1) * (d + 1));
        std::vector<int> yb(in.size());
        for (std::size_t r = 0; r < in.size(); ++r) {
            Z.row(static_cast<Eigen::Index>(r)) = veronese2(X_.row(static_cast<Eigen::Index>(in[r])).transpose()).transpose();
            yb[r] = y_[in[r]];
        }
        const Vec* init = warm_[b] ? &*warm_[b] : nullptr;
        PerceptronResult pr = margin_perceptron(Z, yb, margin, budget, init);
        rep.mistakes += pr.mistakes;
        std::size_t wrong = 0;
        if (!pr.success) {
            const Vec sc = Z * pr.ltf.weight;
            for (std::size_t r = 0; r < in.size(); ++r) wrong += (sc[static_cast<Eigen::Index>(r)] >= 0.0 ? 1 : -1) != yb[r];
            if (static_cast<double>(wrong) > cfg_.max_band_error * static_cast<double>(in.size())) continue;
        }
        warm_[b] = pr.ltf.weight;
        rep.band_error = static_cast<double>(wrong) / static_cast<double>(in.size());
        BandPTFHypothesis h;
        h.band = Band{w_, lo, hi};
        h.inside = pr.ltf;
        h.outside_const = best_outside(lo, hi);
        rep.band_index = static_cast<int>(b);
        rep.band_mass = mass;
        if (report) *report = rep;
        return h;
    }
    if (!any_band) throw CoverageError("no band reached the minimum mass");
    if (report) *report = rep;
    return constant_hypothesis(w_, best_outside(1.0, -1.0));
}

BandPTFHypothesis WeakLearner::learn(const std::vector<std::size_t>& sample, WeakLearnerReport* report) {
    const std::size_t n = sample.size();
    const std::size_t cut = std::min(n, std::max<std::size_t>(1, static_cast<std::size_t>(cfg_.mass_fraction * static_cast<double>(n))));
    std::vector<std::size_t> mass(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<std::size_t> fit(sample.begin() + static_cast<std::ptrdiff_t>(cut), sample.end());
    if (fit.empty()) fit = mass;
    return learn(mass, fit, report);
}

BandPTFHypothesis weak_hypothesis(const LabeledDataset& ds, const Vec& w, double gamma,
                                  const WeakLearnerConfig& cfg, std::uint64_t seed,
                                  WeakLearnerReport* report) {
    if (std::abs(w.norm() - 1.0) > 1e-9) throw ParameterError("weak_hypothesis: w must be a unit vector");
    const std::size_t n = ds.size();
    const std::size_t n_mass = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.mass_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0xB4D));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    const std::size_t cut = std::min(n_mass, n);
    std::vector<std::size_t> mass(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<std::size_t> fit(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
    std::sort(mass.begin(), mass.end());
    std::sort(fit.begin(), fit.end());
    if (fit.empty()) fit = mass;
    WeakLearner wl(ds.X, ds.y, w, gamma, cfg);
    return wl.learn(mass, fit, report);
}

double empirical_error(const BandPTFHypothesis& h, const LabeledDataset& ds) {
    if (ds.size() == 0) return 0.0;
    std::size_t err = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        err += h.predict(ds.X.row(static_cast<Eigen::Index>(i)).transpose()) != ds.y[i];
    return static_cast<double>(err) / static_cast<double>(ds.size());
}

}  // namespace hsi
