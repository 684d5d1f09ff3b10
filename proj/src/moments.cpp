#include "hsi/moments.hpp"

#include "hsi/errors.hpp"

#include <vector>

namespace hsi {

namespace {

constexpr Eigen::Index kChunk = 512;

// Block sums feed a Neumaier accumulator per entry; the block shape is fixed so the
// result does not depend on anything but the input order.
class CompensatedSum {
public:
    explicit CompensatedSum(std::size_t n) : sum_(n, 0.0), comp_(n, 0.0) {}
    void add(const std::vector<double>& block) {
        for (std::size_t i = 0; i < sum_.size(); ++i) {
            const double x = block[i];
            const double t = sum_[i] + x;
            if (std::abs(sum_[i]) >= std::abs(x)) comp_[i] += (sum_[i] - t) + x;
            else comp_[i] += (x - t) + sum_[i];
            sum_[i] = t;
        }
    }
    double value(std::size_t i) const { return sum_[i] + comp_[i]; }

private:
    std::vector<double> sum_, comp_;
};

// Accumulates sum over rows of (x - shift)^{(x)m} on the upper simplex of indices.
std::vector<double> accumulate_power(const RowMat& X, const Vec& shift, int m, std::size_t& count) {
    const int d = static_cast<int>(X.cols());
    std::size_t entries = 0;
    if (m == 1) entries = static_cast<std::size_t>(d);
    else if (m == 2) entries = static_cast<std::size_t>(d) * (d + 1) / 2;
    else entries = static_cast<std::size_t>(d) * (d + 1) * (d + 2) / 6;
    CompensatedSum acc(entries);
    std::vector<double> block(entries);
    Vec x(d);
    for (Eigen::Index b0 = 0; b0 < X.rows(); b0 += kChunk) {
        std::fill(block.begin(), block.end(), 0.0);
        const Eigen::Index b1 = std::min<Eigen::Index>(X.rows(), b0 + kChunk);
        for (Eigen::Index r = b0; r < b1; ++r) {
            x = X.row(r).transpose() - shift;
            std::size_t e = 0;
            if (m == 1) {
                for (int i = 0; i < d; ++i) block[e++] += x[i];
            } else if (m == 2) {
                for (int i = 0; i < d; ++i)
                    for (int j = i; j < d; ++j) block[e++] += x[i] * x[j];
            } else {
                for (int i = 0; i < d; ++i)
                    for (int j = i; j < d; ++j) {
                        const double xij = x[i] * x[j];
                        for (int k = j; k < d; ++k) block[e++] += xij * x[k];
                    }
            }
        }
        acc.add(block);
    }
    count = static_cast<std::size_t>(X.rows());
    std::vector<double> out(entries);
    for (std::size_t i = 0; i < entries; ++i) out[i] = acc.value(i);
    return out;
}

MomentTensor unpack(const std::vector<double>& s, int d, int m, double scale) {
    std::size_t e = 0;
    if (m == 1) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = s[e++] * scale;
        return MomentTensor(std::move(v));
    }
    if (m == 2) {
        Mat a(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) a(i, j) = a(j, i) = s[e++] * scale;
        return MomentTensor(std::move(a));
    }
    Tensor3 t(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            for (int k = j; k < d; ++k) {
                const double v = s[e++] * scale;
                t(i, j, k) = t(i, k, j) = t(j, i, k) = t(j, k, i) = t(k, i, j) = t(k, j, i) = v;
            }
    t.set_symmetric(true);
    return MomentTensor(std::move(t));
}

MomentTensor difference(const MomentTensor& a, const MomentTensor& b) {
    switch (a.order()) {
        case 1: return MomentTensor(Vec(a.vec() - b.vec()));
        case 2: return MomentTensor(Mat(a.mat() - b.mat()));
        default: return MomentTensor(a.ten() - b.ten());
    }
}

}  // namespace

MomentTensor empirical_moment(const RowMat& X, int m) {
    if (m < 1 || m > 3) throw std::invalid_argument("moment order must be 1, 2 or 3");
    if (X.rows() == 0) throw std::invalid_argument("empirical_moment: empty sample set");
    std::size_t n = 0;
    const int d = static_cast<int>(X.cols());
    const auto s = accumulate_power(X, Vec::Zero(d), m, n);
    return unpack(s, d, m, 1.0 / static_cast<double>(n));
}

Tensor3 centered_third(const RowMat& X, const Vec& mu) {
    if (X.rows() == 0) throw std::invalid_argument("centered_third: empty sample set");
    if (mu.size() != X.cols()) throw std::invalid_argument("centered_third: dimension mismatch");
    std::size_t n = 0;
    const int d = static_cast<int>(X.cols());
    const auto s = accumulate_power(X, mu, 3, n);
    return unpack(s, d, 3, 1.0 / static_cast<double>(n)).ten();
}

RowMat class_rows(const LabeledDataset& ds, int target) {
    std::size_t cnt = 0;
    for (int y : ds.y) cnt += (y == target);
    RowMat out(static_cast<Eigen::Index>(cnt), ds.X.cols());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.y[i] == target) out.row(r++) = ds.X.row(static_cast<Eigen::Index>(i));
    return out;
}

double matching_gap(const LabeledDataset& ds, int m) {
    const RowMat pos = class_rows(ds, 1), neg = class_rows(ds, -1);
    if (pos.rows() == 0 || neg.rows() == 0)
        throw ClassMissingError("matching_gap: dataset must contain both labels");
    return frob_norm(difference(empirical_moment(pos, m), empirical_moment(neg, m)));
}

SplitResult rejection_split(const LabeledDataset& ds, int target, std::size_t n_target,
                            std::size_t start) {
    SplitResult out;
    out.X.resize(static_cast<Eigen::Index>(n_target), ds.X.cols());
    std::size_t got = 0, i = start;
    for (; i < ds.size() && got < n_target; ++i)
        if (ds.y[i] == target) out.X.row(static_cast<Eigen::Index>(got++)) = ds.X.row(static_cast<Eigen::Index>(i));
    if (got < n_target)
        throw InsufficientDataError("rejection_split: stream exhausted for label " +
                                        std::to_string(target),
                                    got, n_target);
    out.next = i;
    return out;
}

MomentSummary summarize_moments(const LabeledDataset& ds) {
    const RowMat pos = class_rows(ds, 1), neg = class_rows(ds, -1);
    if (pos.rows() == 0 || neg.rows() == 0)
        throw ClassMissingError("summarize_moments: dataset must contain both labels");
    if (ds.size() < 2) throw std::invalid_argument("summarize_moments: need at least two samples");
    MomentSummary s;
    s.n_pos = static_cast<std::size_t>(pos.rows());
    s.n_neg = static_cast<std::size_t>(neg.rows());
    MomentTensor mp[3], mn[3];
    for (int m = 1; m <= 3; ++m) {
        mp[m - 1] = empirical_moment(pos, m);
        mn[m - 1] = empirical_moment(neg, m);
        s.gaps[static_cast<std::size_t>(m - 1)] = frob_norm(difference(mp[m - 1], mn[m - 1]));
    }
    s.mean_pos = mp[0].vec();
    s.mean_neg = mn[0].vec();
    s.mean_all = empirical_moment(ds.X, 1).vec();
    s.cov_pos = mp[1].mat();
    s.cov_neg = mn[1].mat();
    s.third_pos = mp[2].ten();
    s.third_neg = mn[2].ten();
    const Eigen::Index half = ds.X.rows() / 2;
    const Vec mu = empirical_moment(RowMat(ds.X.topRows(half)), 1).vec();
    s.third_centered_all = centered_third(ds.X.bottomRows(ds.X.rows() - half), mu);
    return s;
}

}  // namespace hsi
