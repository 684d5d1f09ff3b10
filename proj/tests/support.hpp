#pragma once

// Brute-force reference computations shared by the unit tests. They loop over
// indices directly and never call into the library routines they are compared with.

#include "hsi/linalg.hpp"
#include "hsi/rng.hpp"

#include <cmath>
#include <vector>

namespace oracle {

using hsi::Mat;
using hsi::Tensor3;
using hsi::Vec;

inline Tensor3 random_tensor(int d, hsi::Rng& rng) {
    Tensor3 t(d);
    for (double& x : t.data()) x = hsi::std_normal(rng);
    return t;
}

// Average over the six index permutations, written out by hand.
inline Tensor3 symmetric_random_tensor(int d, hsi::Rng& rng) {
    const Tensor3 r = random_tensor(d, rng);
    Tensor3 s(d);
    const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                const int idx[3] = {i, j, k};
                double acc = 0.0;
                for (const auto& p : perm) acc += r(idx[p[0]], idx[p[1]], idx[p[2]]);
                s(i, j, k) = acc / 6.0;
            }
    return s;
}

inline Mat contract(const Tensor3& t, const Vec& v) {
    const int d = t.dim();
    Mat m = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) m(i, j) += t(i, j, k) * v[k];
    return m;
}

inline double cubic_form(const Tensor3& t, const Vec& u) {
    double s = 0.0;
    const int d = t.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) s += t(i, j, k) * u[i] * u[j] * u[k];
    return s;
}

inline double frob(const Tensor3& t) {
    double s = 0.0;
    for (double x : t.data()) s += x * x;
    return std::sqrt(s);
}

// Sample average of x^{(x)3} over rows, one sample at a time.
template <class RowMatT>
Tensor3 third_moment(const RowMatT& X) {
    const int d = static_cast<int>(X.cols());
    Tensor3 t(d);
    for (Eigen::Index n = 0; n < X.rows(); ++n)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) t(i, j, k) += X(n, i) * X(n, j) * X(n, k);
    for (double& x : t.data()) x /= static_cast<double>(X.rows());
    return t;
}

}  // namespace oracle
