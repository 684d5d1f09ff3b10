#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hsi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dense order-3 tensor over R^d, row-major (i, j, k) with k fastest.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int d) : d_(d), a_(static_cast<std::size_t>(d) * d * d, 0.0) {}

    int dim() const { return d_; }
    bool symmetric() const { return symmetric_; }
    void set_symmetric(bool s) { symmetric_ = s; }

    double& operator()(int i, int j, int k) { return a_[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return a_[idx(i, j, k)]; }

    std::vector<double>& data() { return a_; }
    const std::vector<double>& data() const { return a_; }

    Tensor3& operator+=(const Tensor3& o);
    Tensor3& operator-=(const Tensor3& o);
    Tensor3& operator*=(double s);

    static Tensor3 outer(const Vec& a, const Vec& b, const Vec& c);
    static Tensor3 cube(const Vec& v) { return outer(v, v, v); }

private:
    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * d_ + j) * d_ + k;
    }
    int d_ = 0;
    std::vector<double> a_;
    bool symmetric_ = false;
};

Tensor3 operator+(Tensor3 a, const Tensor3& b);
Tensor3 operator-(Tensor3 a, const Tensor3& b);
Tensor3 operator*(double s, Tensor3 a);

// Tensor of order 1, 2 or 3 sharing a single interface for the sphere objective
// f(u) = T . u^{(x)m}.
class MomentTensor {
public:
    MomentTensor() = default;
    MomentTensor(Vec v);
    MomentTensor(Mat m);
    MomentTensor(Tensor3 t);

    int order() const { return order_; }
    int dim() const { return dim_; }
    const Vec& vec() const;
    const Mat& mat() const;
    const Tensor3& ten() const;

private:
    int order_ = 0;
    int dim_ = 0;
    Vec v_;
    Mat m_;
    Tensor3 t_;
};

Tensor3 symmetrize3(const Tensor3& t);

// M[i][j] = sum_k T[i][j][k] v[k].
Mat contract_vec(const Tensor3& t, const Vec& v);

double apply_power(const Vec& t, const Vec& u, int m);
double apply_power(const Mat& t, const Vec& u, int m);
double apply_power(const Tensor3& t, const Vec& u, int m);
double apply_power(const MomentTensor& t, const Vec& u, int m);

// Euclidean gradient of u -> apply_power(T, u, m) for symmetric T: m T.u^{m-1}.
Vec power_gradient(const MomentTensor& t, const Vec& u);

Vec tangent_project(const Vec& g, const Vec& u);

struct EigenDecomp {
    Vec values;   // sorted by descending |lambda|, ties by descending lambda
    Mat vectors;  // column i pairs with values[i]
};

EigenDecomp sym_eigen(const Mat& m);

double frob_norm(const Vec& v);
double frob_norm(const Mat& m);
double frob_norm(const Tensor3& t);
double frob_norm(const MomentTensor& t);

}  // namespace hsi
