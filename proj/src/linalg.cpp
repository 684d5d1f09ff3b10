#include "hsi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hsi {

namespace {

void require_same_dim(int a, int b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string("dimension mismatch in ") + what);
}

}  // namespace

Tensor3& Tensor3::operator+=(const Tensor3& o) {
    require_same_dim(d_, o.d_, "Tensor3::+=");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    symmetric_ = symmetric_ && o.symmetric_;
    return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& o) {
    require_same_dim(d_, o.d_, "Tensor3::-=");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    symmetric_ = symmetric_ && o.symmetric_;
    return *this;
}

Tensor3& Tensor3::operator*=(double s) {
    for (double& x : a_) x *= s;
    return *this;
}

Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

Tensor3 Tensor3::outer(const Vec& a, const Vec& b, const Vec& c) {
    const int d = static_cast<int>(a.size());
    require_same_dim(d, static_cast<int>(b.size()), "Tensor3::outer");
    require_same_dim(d, static_cast<int>(c.size()), "Tensor3::outer");
    Tensor3 t(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) t(i, j, k) = a[i] * b[j] * c[k];
    t.symmetric_ = (&a == &b && &b == &c) || (a == b && b == c);
    return t;
}

MomentTensor::MomentTensor(Vec v) : order_(1), dim_(static_cast<int>(v.size())), v_(std::move(v)) {}

MomentTensor::MomentTensor(Mat m) : order_(2), dim_(static_cast<int>(m.rows())), m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("order-2 moment tensor must be square");
}

MomentTensor::MomentTensor(Tensor3 t) : order_(3), dim_(t.dim()), t_(std::move(t)) {}

const Vec& MomentTensor::vec() const {
    if (order_ != 1) throw std::invalid_argument("tensor is not of order 1");
    return v_;
}

const Mat& MomentTensor::mat() const {
    if (order_ != 2) throw std::invalid_argument("tensor is not of order 2");
    return m_;
}

const Tensor3& MomentTensor::ten() const {
    if (order_ != 3) throw std::invalid_argument("tensor is not of order 3");
    return t_;
}

Tensor3 symmetrize3(const Tensor3& t) {
    const int d = t.dim();
    Tensor3 s(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                s(i, j, k) = (t(i, j, k) + t(i, k, j) + t(j, i, k) + t(j, k, i) + t(k, i, j) +
                              t(k, j, i)) /
                             6.0;
    s.set_symmetric(true);
    return s;
}

Mat contract_vec(const Tensor3& t, const Vec& v) {
    const int d = t.dim();
    require_same_dim(d, static_cast<int>(v.size()), "contract_vec");
    Mat m(d, d);
    const double* a = t.data().data();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double* row = a + (static_cast<std::size_t>(i) * d + j) * d;
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += row[k] * v[k];
            m(i, j) = s;
        }
    return m;
}

double apply_power(const Vec& t, const Vec& u, int m) {
    if (m != 1) throw std::invalid_argument("order mismatch: vector requires m = 1");
    require_same_dim(static_cast<int>(t.size()), static_cast<int>(u.size()), "apply_power");
    return t.dot(u);
}

double apply_power(const Mat& t, const Vec& u, int m) {
    if (m != 2) throw std::invalid_argument("order mismatch: matrix requires m = 2");
    require_same_dim(static_cast<int>(t.rows()), static_cast<int>(u.size()), "apply_power");
    return u.dot(t * u);
}

double apply_power(const Tensor3& t, const Vec& u, int m) {
    if (m != 3) throw std::invalid_argument("order mismatch: order-3 tensor requires m = 3");
    return u.dot(contract_vec(t, u) * u);
}

double apply_power(const MomentTensor& t, const Vec& u, int m) {
    switch (t.order()) {
        case 1: return apply_power(t.vec(), u, m);
        case 2: return apply_power(t.mat(), u, m);
        case 3: return apply_power(t.ten(), u, m);
        default: throw std::invalid_argument("empty moment tensor");
    }
}

Vec power_gradient(const MomentTensor& t, const Vec& u) {
    switch (t.order()) {
        case 1: return t.vec();
        case 2: return 2.0 * (t.mat() * u);
        case 3: return 3.0 * (contract_vec(t.ten(), u) * u);
        default: throw std::invalid_argument("empty moment tensor");
    }
}

Vec tangent_project(const Vec& g, const Vec& u) { return g - g.dot(u) * u; }

EigenDecomp sym_eigen(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("sym_eigen: matrix is not square");
    const double tol = 1e-9 * std::max(1.0, m.norm());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("sym_eigen: matrix is not symmetric");
    const Mat sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("sym_eigen: solver did not converge");
    const int d = static_cast<int>(m.rows());
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    const Vec& ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double aa = std::abs(ev[a]), ab = std::abs(ev[b]);
        if (aa != ab) return aa > ab;
        return ev[a] > ev[b];
    });
    EigenDecomp out{Vec(d), Mat(d, d)};
    for (int i = 0; i < d; ++i) {
        out.values[i] = ev[order[i]];
        out.vectors.col(i) = es.eigenvectors().col(order[i]);
    }
    return out;
}

double frob_norm(const Vec& v) { return v.norm(); }
double frob_norm(const Mat& m) { return m.norm(); }

double frob_norm(const Tensor3& t) {
    double s = 0.0;
    for (double x : t.data()) s += x * x;
    return std::sqrt(s);
}

double frob_norm(const MomentTensor& t) {
    switch (t.order()) {
        case 1: return frob_norm(t.vec());
        case 2: return frob_norm(t.mat());
        case 3: return frob_norm(t.ten());
        default: return 0.0;
    }
}

}  // namespace hsi
