#pragma once

#include "hsi/instance.hpp"
#include "hsi/linalg.hpp"

#include <array>
#include <cstdint>

namespace hsi {

// Sample average of x^{(x)m} over the rows of X, m in {1, 2, 3}.
MomentTensor empirical_moment(const RowMat& X, int m);

// Sample average of (x - mu)^{(x)3}.
Tensor3 centered_third(const RowMat& X, const Vec& mu);

// Frobenius norm of the difference of class-conditional m-th moments.
double matching_gap(const LabeledDataset& ds, int m);

// Rows of X whose label equals `target`.
RowMat class_rows(const LabeledDataset& ds, int target);

struct SplitResult {
    RowMat X;
    std::size_t next = 0;  // index just past the last consumed sample
};

// The first n_target samples with label `target`, scanning from `start` in stream order.
SplitResult rejection_split(const LabeledDataset& ds, int target, std::size_t n_target,
                            std::size_t start = 0);

struct MomentSummary {
    std::size_t n_pos = 0, n_neg = 0;
    Vec mean_pos, mean_neg, mean_all;
    Mat cov_pos, cov_neg;  // uncentered second moments E[x x^T] per class
    Tensor3 third_pos, third_neg, third_centered_all;
    std::array<double, 3> gaps{};  // gaps[m - 1]
};

// Class moments over the whole dataset; the centered third moment uses the mean of
// the first half and averages over the second half.
MomentSummary summarize_moments(const LabeledDataset& ds);

}  // namespace hsi
