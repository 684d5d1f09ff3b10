#include "doctest.h"

#include "hsi/certificates.hpp"
#include "hsi/errors.hpp"
#include "hsi/experiments.hpp"

#include <cmath>
#include <numbers>

using namespace hsi;

namespace {

constexpr double kPi = std::numbers::pi;

TargetConcept plane_concept(double theta, double t, double sigma, double gamma) {
    return make_concept(theta, t, sigma, gamma, 2, 0);
}

// Third-moment Frobenius norm of weighted plane atoms restricted to one label.
double atom_third_norm(const TargetConcept& c, const DistSpec2D& dv, int label) {
    double m[2][2][2] = {};
    double mass = 0.0;
    for (std::size_t i = 0; i < dv.points.size(); ++i) {
        if (label_plane(c, dv.points[i]) != label) continue;
        const Vec2& z = dv.points[i];
        mass += dv.weights[i];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int e = 0; e < 2; ++e) m[a][b][e] += dv.weights[i] * z[a] * z[b] * z[e];
    }
    double s = 0.0;
    for (auto& p : m)
        for (auto& q : p)
            for (double v : q) s += (v / mass) * (v / mass);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("lemma3 polynomial") {
    const TargetConcept c = plane_concept(kPi / 3, 0.3, 0.5, 0.05);
    const OneSidedPoly p = lemma3_poly(c);
    const double ts = c.t * std::sin(c.theta);
    CHECK(p.eval(Vec2::Zero()) == doctest::Approx(ts * ts));
    const Vec2 u = c.u2(), perp(-u[1], u[0]);
    for (double s : {-0.5, 0.0, 0.3}) CHECK(std::abs(p.eval(ts * u + s * perp)) < 1e-14);
    CHECK(p.A2.trace() == doctest::Approx(-1.0));
    // Expanded coefficients agree with the factored form at random points.
    Rng rng(3);
    for (int i = 0; i < 10; ++i) {
        const Vec2 z(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1);
        const double s = u.dot(z);
        CHECK(p.eval(z) == doctest::Approx((s - ts) * (s - ts) * (s + ts) / ts).epsilon(1e-12));
    }
    // Monomial round trip.
    const OneSidedPoly q = OneSidedPoly::from_monomials(p.a0, p.monomial_coeffs());
    for (int i = 0; i < 10; ++i) {
        const Vec2 z(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1);
        CHECK(q.eval(z) == doctest::Approx(p.eval(z)).epsilon(1e-12));
    }
}

TEST_CASE("lemma4 polynomial") {
    const TargetConcept c = plane_concept(kPi / 3, 0.3, 0.5, 0.05);
    const OneSidedPoly p = lemma4_poly(c);
    const double tn = std::tan(c.theta);
    CHECK(p.eval(Vec2::Zero()) == doctest::Approx((1 + c.sigma) * tn * tn * c.t * c.t));
    CHECK(p.eval(Vec2::Zero()) > 0.0);
    // On the boundary of the second halfspace the polynomial equals -tan^2 x1^2.
    const Vec2 v = c.v2(), perp(-v[1], v[0]);
    for (double s : {-0.4, -0.1, 0.0, 0.2, 0.5}) {
        const Vec2 z = -c.t2() * v + s * perp;
        CHECK(p.eval(z) == doctest::Approx(-tn * tn * z[0] * z[0]).epsilon(1e-12));
    }
    const OneSidedPoly p0 = lemma4_poly(plane_concept(kPi / 3, 0.3, 0.0, 0.05));
    CHECK(p0.A1[1] == 0.0);
    CHECK(p0.eval(Vec2(0.2, 0.3)) == doctest::Approx(p0.eval(Vec2(0.2, -0.3))));
}

TEST_CASE("one-sided signs on dense region samples") {
    for (const auto& [theta, t, sigma] : std::vector<std::tuple<double, double, double>>{
             {kPi / 3, 0.3, 0.5}, {0.3, 0.9, 0.5}, {0.5, 0.4, 0.0}}) {
        const TargetConcept c = plane_concept(theta, t, sigma, 0.02);
        const auto pos = sample_region(c, RegionSide::Positive, 200000, 1);
        const auto neg = sample_region(c, RegionSide::Negative, 200000, 2);
        CHECK(one_sided_verify(lemma3_poly(c), pos, SignSide::NonNegative).pass);
        CHECK(one_sided_verify(lemma4_poly(c), neg, SignSide::NonPositive).pass);
    }
}

TEST_CASE("lemma4 polynomial is positive at the origin, so the wrong side fails") {
    const TargetConcept c = plane_concept(kPi / 3, 0.3, 0.5, 0.05);
    std::vector<Vec2> pts = sample_region(c, RegionSide::Positive, 1000, 3);
    pts.push_back(Vec2::Zero());
    const OneSidedReport r = one_sided_verify(lemma4_poly(c), pts, SignSide::NonPositive);
    CHECK_FALSE(r.pass);
    CHECK(r.max_violation >= lemma4_poly(c).a0 - 1e-15);
    REQUIRE(r.worst_point.has_value());
}

TEST_CASE("variance LP optima match an external HiGHS solve") {
    // Frozen from scipy's HiGHS on the same grid (gamma = 0.02, step 0.02, refine 1).
    struct Row {
        double theta, t, sigma, pos, neg;
        std::size_t n_pos, n_neg;
    };
    const std::vector<Row> rows = {
        {0.3, 0.9, 0.5, 0.0603075040, 0.2242259698, 3061, 4407},
        {0.4, 0.6, 0.5, 0.0454459018, 0.2631424818, 2773, 4697},
        {0.5, 0.4, 0.5, 0.0291619459, 0.3861118537, 2551, 4910},
        {0.2, 0.9, 0.5, 0.0246361085, 0.0733764934, 2016, 5438},
        {0.4, 0.4, 0.0, 0.0167585799, 0.0590796909, 1784, 5672},
    };
    const GridSpec g{0.02, 1};
    for (const Row& r : rows) {
        const TargetConcept c = plane_concept(r.theta, r.t, r.sigma, 0.02);
        const VarianceBoundReport p = variance_bound_lp(c, RegionSide::Positive, 0.0, g);
        const VarianceBoundReport n = variance_bound_lp(c, RegionSide::Negative, 0.0, g);
        REQUIRE(p.status == LpStatus::Optimal);
        REQUIRE(n.status == LpStatus::Optimal);
        CHECK(p.points.size() == r.n_pos);
        CHECK(n.points.size() == r.n_neg);
        CHECK(p.value == doctest::Approx(r.pos).epsilon(1e-7));
        CHECK(n.value == doctest::Approx(r.neg).epsilon(1e-7));
        CHECK(p.max_residual < 1e-9);
        // Closed forms bound the two sides, and weak duality holds for the certificates.
        const double slack = 0.02;
        CHECK(p.value <= p.closed_form + slack);
        CHECK(n.value >= n.closed_form - slack);
        CHECK(p.value <= p.dual_value + 1e-6);
        CHECK(n.value >= n.dual_value - 1e-6);
        CHECK(p.closed_form == doctest::Approx(r.t * r.t * std::sin(r.theta) * std::sin(r.theta)));
        CHECK(n.closed_form == doctest::Approx((1 + r.sigma) * r.t * r.t * std::tan(r.theta) * std::tan(r.theta)));
        CHECK(n.value - p.value >= n.closed_form - p.closed_form - 2 * slack);
        CHECK(p.weights.minCoeff() >= -1e-12);
        CHECK(p.weights.sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("variance LP on the pi/3 concept at a finer grid") {
    const TargetConcept c = plane_concept(kPi / 3, 0.3, 0.5, 0.02);
    const VarianceBoundReport p = variance_bound_lp(c, RegionSide::Positive, 0.0, GridSpec{0.01, 1});
    REQUIRE(p.status == LpStatus::Optimal);
    CHECK(p.value == doctest::Approx(0.05747).epsilon(1e-3));
    CHECK(p.value <= 0.0675 + 0.02);
    // The negative region of this concept cannot host a mean-zero isotropic distribution.
    const VarianceBoundReport n = variance_bound_lp(c, RegionSide::Negative, 0.0, GridSpec{0.01, 1});
    CHECK(n.status == LpStatus::Infeasible);
}

TEST_CASE("perturbed variance LP respects weak duality") {
    for (double b : {0.001, 0.01}) {
        const TargetConcept c = plane_concept(0.4, 0.6, 0.5, 0.02);
        const VarianceBoundReport p = variance_bound_lp(c, RegionSide::Positive, b, GridSpec{0.02, 1});
        const VarianceBoundReport n = variance_bound_lp(c, RegionSide::Negative, b, GridSpec{0.02, 1});
        REQUIRE(p.status == LpStatus::Optimal);
        REQUIRE(n.status == LpStatus::Optimal);
        CHECK(p.value <= p.dual_value + 1e-6);
        CHECK(n.value >= n.dual_value - 1e-6);
    }
}

TEST_CASE("variance LP with a single positive point is infeasible") {
    const TargetConcept c = plane_concept(kPi / 3, 0.3, 0.5, 0.02);
    const VarianceBoundReport r = variance_bound_lp(c, RegionSide::Positive, 0.0, std::vector<Vec2>{Vec2(0.1, 0.0)});
    CHECK(r.status == LpStatus::Infeasible);
}

TEST_CASE("certificate dual values") {
    const TargetConcept c = plane_concept(0.3, 0.9, 0.5, 0.02);
    const OneSidedPoly p3 = lemma3_poly(c);
    CHECK(certificate_dual_value(p3, RegionSide::Positive, 0.0) == doctest::Approx(p3.a0));
    const OneSidedPoly p4 = lemma4_poly(c);
    CHECK(certificate_dual_value(p4, RegionSide::Negative, 0.0) == doctest::Approx(p4.a0));
    // Perturbed monomials: x1, x2, x1 x2 and the four cubes, from the factored form.
    const Vec2 u = c.u2();
    const double ts = c.t * std::sin(c.theta);
    const double s = ts * (std::abs(u[0]) + std::abs(u[1])) + 2 * std::abs(u[0] * u[1]) +
                     (std::pow(std::abs(u[0]), 3) + 3 * u[0] * u[0] * std::abs(u[1]) +
                      3 * std::abs(u[0]) * u[1] * u[1] + std::pow(std::abs(u[1]), 3)) / ts;
    CHECK(certificate_dual_value(p3, RegionSide::Positive, 0.01) == doctest::Approx(p3.a0 + 0.01 * s).epsilon(1e-12));
    CHECK(certificate_dual_value(p4, RegionSide::Negative, 0.01) ==
          doctest::Approx(p4.a0 - 0.01 * (std::abs(p4.A1[0]) + std::abs(p4.A1[1]))).epsilon(1e-12));
}

TEST_CASE("exclusion check examples") {
    OneSidedPoly sq;
    sq.A2(0, 0) = 1.0;
    MomentTarget tgt;
    tgt.T2 = 0.5 * Eigen::Matrix2d::Identity();
    tgt.tau = 0.0;
    const std::vector<Vec2> pts = {Vec2(0.5, 0.5), Vec2(-0.5, -0.5), Vec2(0.5, -0.5), Vec2(-0.5, 0.5)};
    const std::vector<double> w(4, 0.25);
    const ExclusionReport r = exclusion_check(sq, tgt, pts, w);
    CHECK(r.inner == doctest::Approx(0.5));
    CHECK(r.poly_nonnegative);
    CHECK(r.pass);

    // Exact moments of a distribution on which the polynomial is nonnegative.
    const TargetConcept c = plane_concept(kPi / 3, 0.3, 0.5, 0.05);
    const auto region = sample_region(c, RegionSide::Positive, 50, 4);
    const std::vector<double> uw(region.size(), 1.0 / region.size());
    const OneSidedPoly p = lemma3_poly(c).normalized();
    MomentTarget exact;
    for (std::size_t i = 0; i < region.size(); ++i) {
        exact.T1 += uw[i] * region[i];
        exact.T2 += uw[i] * region[i] * region[i].transpose();
        exact.T3 += uw[i] * Tensor3::cube(Vec(region[i]));
    }
    const ExclusionReport e = exclusion_check(p, exact, region, uw);
    CHECK(e.moments_within);
    CHECK(e.poly_nonnegative);
    CHECK(e.inner >= -1e-12);
    CHECK(e.pass);
    CHECK_THROWS_AS(exclusion_check(lemma3_poly(c), exact, region, uw), ParameterError);
}

TEST_CASE("exclusion fuzz over random cubics") {
    const TargetConcept c = plane_concept(kPi / 3, 0.3, 0.5, 0.05);
    const auto pts = sample_region(c, RegionSide::Positive, 200, 5);
    Rng rng(6);
    std::vector<double> w(pts.size());
    double tot = 0.0;
    for (double& x : w) tot += (x = uniform01(rng));
    for (double& x : w) x /= tot;
    const ExclusionFuzzReport r = exclusion_fuzz(pts, w, 0.05, 1000, 7);
    CHECK(r.trials == 1000);
    CHECK(r.failures == 0);
    CHECK(r.pass());
    CHECK(r.min_margin >= 0.0);
}

TEST_CASE("lemma1: class second moments on matched instances") {
    // kappa1 calibration: over matched instances (theta = pi/3, t = 0.3, sigma = 0.5,
    // gamma = 0.1, seeds 0..19) the smallest class second-moment eigenvalue computed
    // from the LP weights is 0.00838 = 83.8 gamma^4. Frozen at half that.
    const double kappa1 = 40.0;
    InstanceParams ip;
    ip.family = "matched";
    ip.d = 6;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Instance inst = make_instance(ip, seed);
        const LabeledDataset ds = draw_train(inst, 100000, seed);
        Lemma1Config cfg;
        cfg.kappa1 = kappa1;
        const Lemma1Report r = lemma1_empirical(ds, &inst.target, cfg);
        REQUIRE_FALSE(r.skipped);
        CHECK(r.floor == doctest::Approx(kappa1 * 1e-4));
        CHECK(r.pass);
    }
}

TEST_CASE("lemma1: guard and isotropic construction") {
    const Instance planted = make_instance(InstanceParams{}, 1);
    Lemma1Config strict;
    strict.gap_tol = 0.05;
    const Lemma1Report skip = lemma1_empirical(draw_train(planted, 20000, 1), &planted.target, strict);
    CHECK(skip.skipped);
    CHECK_FALSE(skip.pass);

    // Both classes uniform on the four points (+-a, 0), (0, +-a): second moment a^2/2 I.
    const double a = 0.4;
    Rng rng(2);
    LabeledDataset ds;
    ds.gamma = 0.1;
    ds.X.resize(8000, 2);
    ds.y.resize(8000);
    const Vec2 pts[4] = {Vec2(a, 0), Vec2(-a, 0), Vec2(0, a), Vec2(0, -a)};
    for (Eigen::Index i = 0; i < 8000; ++i) {
        ds.X.row(i) = pts[rng() % 4].transpose();
        ds.y[static_cast<std::size_t>(i)] = i % 2 ? 1 : -1;
    }
    const Lemma1Report r = lemma1_empirical(ds, nullptr, {});
    REQUIRE_FALSE(r.skipped);
    const double v = a * a / 2;
    CHECK(std::abs(r.lambda_min_pos - v) <= 3 * a * a / std::sqrt(4000.0));
    CHECK(std::abs(r.lambda_min_neg - v) <= 3 * a * a / std::sqrt(4000.0));
}

TEST_CASE("theorem22: third moments on matched instances") {
    InstanceParams ip;
    ip.family = "matched";
    ip.d = 6;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Instance inst = make_instance(ip, seed);
        const std::size_t n = 100000;
        const LabeledDataset ds = draw_train(inst, n, seed);
        const Theorem22Report r = theorem22_empirical(ds, &inst.target, {});
        REQUIRE_FALSE(r.skipped);
        CHECK(r.pass);
        CHECK(r.third_pos >= 1e-4);
        CHECK(r.third_neg >= 1e-4);
        std::size_t np = 0;
        for (int y : ds.y) np += y > 0;
        CHECK(std::abs(r.third_pos - atom_third_norm(inst.target, inst.dist, 1)) <= 3.0 / std::sqrt(double(np)));
        CHECK(std::abs(r.third_neg - atom_third_norm(inst.target, inst.dist, -1)) <= 3.0 / std::sqrt(double(n - np)));
    }
    const Instance planted = make_instance(InstanceParams{}, 2);
    Theorem22Config strict;
    strict.gap_tol = 0.05;
    CHECK(theorem22_empirical(draw_train(planted, 20000, 2), &planted.target, strict).skipped);
}

TEST_CASE("lemma2 guard") {
    const std::vector<Vec2> iso = {Vec2(0.3, 0), Vec2(-0.3, 0), Vec2(0, 0.3), Vec2(0, -0.3)};
    const Lemma2Guard g = lemma2_guard(iso, iso, 1e-9);
    CHECK(g.holds());
    CHECK(g.alpha2 == doctest::Approx(0.045));
    const std::vector<Vec2> shifted = {Vec2(0.5, 0), Vec2(0.1, 0)};
    const Lemma2Guard h = lemma2_guard(iso, shifted, 0.01);
    CHECK_FALSE(h.means_small);
    CHECK_FALSE(h.holds());
    CHECK_THROWS_AS(lemma2_guard({}, iso, 0.1), ClassMissingError);
}
