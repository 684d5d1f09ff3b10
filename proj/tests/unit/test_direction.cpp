#include "doctest.h"

#include "../support.hpp"
#include "hsi/direction.hpp"
#include "hsi/experiments.hpp"
#include "hsi/rng.hpp"

#include <cmath>

using namespace hsi;

namespace {

Vec e(int d, int i) { return Vec::Unit(d, i); }

// Random 2-dim frame in R^d and a random symmetric cubic supported on it.
struct Planted {
    Mat F;
    Tensor3 T;
};

Planted planted_cubic(int d, Rng& rng) {
    Planted p;
    p.F = Eigen::HouseholderQR<Mat>(Mat::NullaryExpr(d, 2, [&] { return std_normal(rng); }))
              .householderQ() * Mat::Identity(d, 2);
    const Tensor3 small = oracle::symmetric_random_tensor(2, rng);
    p.T = Tensor3(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                double s = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        for (int c = 0; c < 2; ++c) s += small(a, b, c) * p.F(i, a) * p.F(j, b) * p.F(k, c);
                p.T(i, j, k) = s;
            }
    p.T.set_symmetric(true);
    return p;
}

double off_plane(const Mat& F, const Vec& u) { return (u - F * (F.transpose() * u)).norm(); }

// Tangent gradient of u -> T.u^3 by explicit index loops.
Vec tangent_grad_oracle(const Tensor3& t, const Vec& u) {
    const int d = t.dim();
    Vec g = Vec::Zero(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) g[i] += 3.0 * t(i, j, k) * u[j] * u[k];
    return g - g.dot(u) * u;
}

}  // namespace

TEST_CASE("tensor_pca on a zero tensor") {
    const auto c = tensor_pca_directions(Tensor3(5), 1);
    REQUIRE(c.size() == 5);
    Mat B(5, 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(c[i].score == 0.0);
        B.col(i) = c[i].w;
    }
    CHECK((B.transpose() * B - Mat::Identity(5, 5)).norm() < 1e-12);
}

TEST_CASE("tensor_pca on a rank-one cube recovers the axis") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto c = tensor_pca_directions(Tensor3::cube(e(5, 0)), seed);
        REQUIRE(c.size() == 5);
        // The contraction vector is internal; the nonzero eigenvalue equals v_1.
        CHECK(c[0].w.isApprox(e(5, 0), 1e-12));
        CHECK(c[0].score == doctest::Approx(std::abs(c[0].diagnostics.at("eigenvalue"))));
        CHECK(c[0].score > 0.0);
        for (int i = 1; i < 5; ++i) CHECK(c[i].score < 1e-14);
    }
}

TEST_CASE("tensor_pca candidates are orthonormal and deterministic") {
    Rng rng(3);
    const Tensor3 t = oracle::symmetric_random_tensor(6, rng);
    const auto a = tensor_pca_directions(t, 42), b = tensor_pca_directions(t, 42);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].w == b[i].w);
        CHECK(a[i].w.norm() == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(a[i].w.dot(a[j].w)) < 1e-10);
        Eigen::Index k;
        a[i].w.cwiseAbs().maxCoeff(&k);
        CHECK(a[i].w[k] > 0.0);
    }
}

TEST_CASE("tensor_pca on the analytic third moment of a matched instance") {
    // Centered third moment of the plane mixture, lifted through the frame. The W part
    // is symmetric and independent of V, so it contributes nothing at order three.
    InstanceParams ip;
    ip.family = "matched";
    ip.d = 10;
    ip.gamma = 0.1;
    const Instance inst = make_instance(ip, 2);
    const DistSpec2D& dv = inst.dist;
    Vec2 mu = Vec2::Zero();
    for (std::size_t i = 0; i < dv.points.size(); ++i) mu += dv.weights[i] * dv.points[i];
    double small[2][2][2] = {};
    for (std::size_t i = 0; i < dv.points.size(); ++i) {
        const Vec2 z = dv.points[i] - mu;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c) small[a][b][c] += dv.weights[i] * z[a] * z[b] * z[c];
    }
    const Mat& F = inst.target.frame;
    Tensor3 T(10);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            for (int k = 0; k < 10; ++k)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        for (int c = 0; c < 2; ++c) T(i, j, k) += small[a][b][c] * F(i, a) * F(j, b) * F(k, c);
    T.set_symmetric(true);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        double best = 1.0;
        for (const auto& c : tensor_pca_directions(T, seed)) best = std::min(best, proj_w_norm(inst.target, c.w));
        hits += best <= 0.2;
    }
    CHECK(hits >= 10);
}

TEST_CASE("is_approx_solution examples") {
    const MomentTensor t(Tensor3::cube(e(5, 0)));
    CHECK(is_approx_solution(t, 3, e(5, 0), {0.9, 1e-6}));
    CHECK_FALSE(is_approx_solution(t, 3, e(5, 1), {0.9, 1e-6}));
    const Vec u = (e(5, 0) + e(5, 1)).normalized();
    const double eta = tangent_grad_oracle(t.ten(), u).norm();
    CHECK(eta == doctest::Approx(1.5 * std::sqrt(0.5)));
    CHECK(eta > 0.01);
    CHECK_FALSE(is_approx_solution(t, 3, u, {0.3, 0.01}));
    CHECK(is_approx_solution(t, 3, u, {0.3, 1.1}));
}

TEST_CASE("gradient_direction: linear objective") {
    // The stop rule fixes the precision; tighten it to watch the ascent converge.
    GradientConfig cfg;
    cfg.leak_cap = 1e-6;
    const GradientResult r = gradient_direction(MomentTensor(Vec(0.3 * e(4, 0))), 1, 0.3, cfg, 1);
    REQUIRE(r.success);
    CHECK((r.candidate.w - e(4, 0)).norm() < 1e-3);
    CHECK(r.candidate.score == doctest::Approx(0.3).epsilon(1e-5));
}

TEST_CASE("gradient_direction: quadratic objective") {
    Vec diag = Vec::Constant(5, 0.5);
    diag[0] = 1.0;
    const MomentTensor t(Mat(diag.asDiagonal()));
    GradientConfig cfg;
    cfg.leak_cap = 1e-3;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GradientResult r = gradient_direction(t, 2, 0.5, cfg, seed);
        REQUIRE(r.success);
        CHECK((r.candidate.w - e(5, 0)).norm() <= 0.01);
    }
}

TEST_CASE("gradient_direction: cubic objective") {
    const MomentTensor t(Tensor3::cube(e(5, 0)));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GradientResult r = gradient_direction(t, 3, 0.5, {}, seed);
        REQUIRE(r.success);
        CHECK(std::abs(r.candidate.w[0]) >= 0.99);
        CHECK(r.candidate.w.norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Dense grid over S^2 in the d = 3 variant puts the maximizer at e1.
    const MomentTensor t3(Tensor3::cube(e(3, 0)));
    double best = -1.0;
    Vec arg;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j < 400; ++j) {
            const double th = M_PI * i / 200, ph = 2 * M_PI * j / 400;
            const Vec u = (Vec(3) << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)).finished();
            const double f = apply_power(t3, u, 3);
            if (f > best) best = f, arg = u;
        }
    const GradientResult r3 = gradient_direction(t3, 3, 0.5, {}, 9);
    REQUIRE(r3.success);
    CHECK(r3.candidate.w.dot(arg) >= 0.99);
}

TEST_CASE("gradient_direction: every accepted step is monotone") {
    Rng rng(12);
    GradientConfig cfg;
    cfg.max_iters = 300;
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor3 t = oracle::symmetric_random_tensor(6, rng);
        const GradientResult r = gradient_direction(MomentTensor(t), 3, 0.1, cfg, static_cast<std::uint64_t>(trial));
        CHECK(r.candidate.w.norm() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.candidate.diagnostics.at("halvings") <= cfg.max_halvings + 1);
        // The returned iterate is at least as good as any it started from.
        CHECK(r.candidate.score >= 0.1 * 0.1 / 6 - 1e-12);
    }
}

TEST_CASE("gradient_direction: zero tensor fails cleanly") {
    const GradientResult r = gradient_direction(MomentTensor(Tensor3(4)), 3, 0.1, {}, 0);
    CHECK_FALSE(r.success);
    CHECK(!r.reason.empty());
    CHECK(r.candidate.w.norm() == doctest::Approx(1.0));
    CHECK_THROWS(gradient_direction(MomentTensor(Tensor3(4)), 2, 0.1, {}, 0));
    CHECK_THROWS(gradient_direction(MomentTensor(Tensor3(4)), 3, 0.0, {}, 0));
}

TEST_CASE("gradient_direction is deterministic for a fixed seed") {
    Rng rng(5);
    const Tensor3 t = oracle::symmetric_random_tensor(5, rng);
    const GradientResult a = gradient_direction(MomentTensor(t), 3, 0.2, {}, 77);
    const GradientResult b = gradient_direction(MomentTensor(t), 3, 0.2, {}, 77);
    CHECK(a.candidate.w == b.candidate.w);
    CHECK(a.success == b.success);
}

TEST_CASE("off-plane mass of a V-supported objective is bounded by eta / (m alpha)") {
    // Holds at every point of the sphere: the W part of the tangent gradient is
    // -m f(u) u_W because the Euclidean gradient lies in V.
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const Planted p = planted_cubic(7, rng);
        const Vec u = random_unit(7, rng);
        const double f = apply_power(p.T, u, 3);
        const double eta = tangent_grad_oracle(p.T, u).norm();
        if (std::abs(f) < 1e-8) continue;
        CHECK(off_plane(p.F, u) <= eta / (3.0 * std::abs(f)) + 1e-10);
    }
    // And for the iterates the ascent actually returns.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Planted p = planted_cubic(7, rng);
        const GradientResult r = gradient_direction(MomentTensor(p.T), 3, 0.05, {}, seed);
        if (!r.success) continue;
        const auto& dg = r.candidate.diagnostics;
        CHECK(is_approx_solution(MomentTensor(p.T), 3, r.candidate.w, {dg.at("alpha_prime") - 1e-12, dg.at("eta") + 1e-12}));
        CHECK(off_plane(p.F, r.candidate.w) <= dg.at("eta") / (3.0 * dg.at("alpha_prime")) + 1e-10);
        CHECK(off_plane(p.F, r.candidate.w) <= 0.01 + 1e-10);
    }
}

TEST_CASE("perturbed objective: off-plane mass is bounded by (eta + m eps) / (m (alpha - eps))") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const Planted p = planted_cubic(6, rng);
        Tensor3 E = oracle::symmetric_random_tensor(6, rng);
        const double eps = 0.02 * uniform01(rng);
        E *= eps / oracle::frob(E);
        const Tensor3 th = p.T + E;
        const Vec u = random_unit(6, rng);
        const double f = apply_power(th, u, 3);
        if (std::abs(f) <= eps) continue;
        const double eta = tangent_grad_oracle(th, u).norm();
        CHECK(off_plane(p.F, u) <= (eta + 3.0 * eps) / (3.0 * (std::abs(f) - eps)) + 1e-10);
    }
}

TEST_CASE("perturbed objective: the (eta + eps) numerator is too small for m >= 2") {
    // T_hat = a (x) a with a tilted out of V = span(e1, e2) by angle b; a is a
    // stationary point of T_hat, so eta = 0. T* is the restriction to V.
    const double b = 0.1;
    const Vec a = std::cos(b) * e(3, 0) + std::sin(b) * e(3, 2);
    const Mat th = a * a.transpose();
    Mat P = Mat::Zero(3, 3);
    P(0, 0) = P(1, 1) = 1.0;
    const double eps = (th - P * th * P).norm();
    const double eta = tangent_project(power_gradient(MomentTensor(th), a), a).norm();
    const double f = apply_power(th, a, 2);
    CHECK(eta < 1e-15);
    CHECK(f == doctest::Approx(1.0));
    const double mass = off_plane(Mat(P.leftCols(2)), a);
    CHECK(mass > (eta + eps) / (2.0 * (f - eps)));
    CHECK(mass <= (eta + 2.0 * eps) / (2.0 * (f - eps)));
}

TEST_CASE("sq_list on two planted cubes") {
    const Tensor3 t = Tensor3::cube(e(5, 0)) + Tensor3::cube(e(5, 1));
    SqListConfig cfg;
    const auto list = sq_list_directions(t, 0.1, cfg, 4);
    REQUIRE(list.size() == 2);
    bool has1 = false, has2 = false;
    for (const auto& c : list) {
        CHECK(c.source == DirectionSource::SqList);
        has1 |= (c.w - e(5, 0)).norm() <= 0.05;
        has2 |= (c.w - e(5, 1)).norm() <= 0.05;
    }
    CHECK(has1);
    CHECK(has2);
    CHECK(std::abs(list[0].w.dot(list[1].w)) <= cfg.ortho_tol);
}

TEST_CASE("sq_list on a zero tensor is empty and lists respect the cap") {
    CHECK(sq_list_directions(Tensor3(4), 0.1, {}, 0).empty());
    Rng rng(8);
    const Tensor3 t = oracle::symmetric_random_tensor(6, rng);
    SqListConfig cfg;
    cfg.max_list = 2;
    CHECK(sq_list_directions(t, 0.1, cfg, 1).size() <= 2);
    for (const auto& c : sq_list_directions(t, 0.1, {}, 1)) CHECK(c.w.norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("leading eigenvector under perturbation: random gapped matrices") {
    // Top-2 eigenvalues in [1, 1.5], the rest at most 1 - delta, perturbations of norm
    // delta / 10 or delta / 3. The off-block mass stays below |H| / delta.
    Rng rng(41);
    for (int trial = 0; trial < 400; ++trial) {
        const double delta = trial % 2 ? 0.1 : 0.5;
        const double h = (trial / 2) % 2 ? delta / 10 : delta / 3;
        const Mat Q = Eigen::HouseholderQR<Mat>(Mat::NullaryExpr(6, 6, [&] { return std_normal(rng); })).householderQ();
        Vec lam(6);
        lam << 1 + 0.5 * uniform01(rng), 1 + 0.5 * uniform01(rng), 1 - delta, 1 - delta - uniform01(rng),
            -uniform01(rng), -1 + uniform01(rng);
        Mat G = Mat::NullaryExpr(6, 6, [&] { return std_normal(rng); });
        G = (G + G.transpose()).eval();
        G *= h / Eigen::SelfAdjointEigenSolver<Mat>(G).eigenvalues().cwiseAbs().maxCoeff();
        const EigenDecomp ed = sym_eigen(Mat(Q * lam.asDiagonal() * Q.transpose() + G));
        Eigen::Index top;
        ed.values.maxCoeff(&top);
        const Vec lead = ed.vectors.col(top);
        CHECK((Q.rightCols(4).transpose() * lead).norm() <= h / delta + 1e-7);
    }
}

TEST_CASE("leading eigenvector under perturbation: adversarial 2x2") {
    // M = diag(1, 1 - delta); H a reflection of norm h. Scanning the reflection axis,
    // the rotation reaches past h / delta for h = delta / 3 but never past h / (delta - h).
    const double delta = 0.3;
    for (double h : {delta / 10, delta / 3}) {
        double worst = 0.0;
        for (int k = 0; k < 2000; ++k) {
            const double beta = M_PI * k / 2000;
            Mat H(2, 2);
            H << -std::cos(beta), std::sin(beta), std::sin(beta), std::cos(beta);
            H *= h;
            Mat M = Mat::Zero(2, 2);
            M(0, 0) = 1.0;
            M(1, 1) = 1.0 - delta;
            const EigenDecomp ed = sym_eigen(Mat(M + H));
            Eigen::Index top;
            ed.values.maxCoeff(&top);
            worst = std::max(worst, std::abs(ed.vectors(1, top)));
        }
        CHECK(worst <= h / (delta - h) + 1e-12);
        if (h == delta / 3) CHECK(worst > h / delta);
    }
}
