#include "hsi/certificates.hpp"

#include "hsi/errors.hpp"
#include "hsi/moments.hpp"
#include "hsi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hsi {

namespace {

const std::vector<std::pair<int, int>>& cubic_monomials() {
    static const std::vector<std::pair<int, int>> m = plane_monomials(3);
    return m;
}

int binom3(int a) { return a == 0 || a == 3 ? 1 : 3; }

double inner3(const Tensor3& a, const Tensor3& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

// Plane moments of a weighted point set.
struct PlaneStats {
    Vec2 m1 = Vec2::Zero();
    Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
    Tensor3 m3{2};
};

PlaneStats plane_stats(const std::vector<Vec2>& pts, const std::vector<double>& w) {
    PlaneStats s;
    double total = 0.0;
    for (std::size_t n = 0; n < pts.size(); ++n) {
        const double wn = w.empty() ? 1.0 : w[n];
        total += wn;
        const Vec2& z = pts[n];
        s.m1 += wn * z;
        s.m2 += wn * z * z.transpose();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) s.m3(i, j, k) += wn * z[i] * z[j] * z[k];
    }
    if (total > 0.0) {
        s.m1 /= total;
        s.m2 /= total;
        s.m3 *= 1.0 / total;
    }
    return s;
}

// Rows of one class, mapped to frame coordinates when a concept is attached.
RowMat class_view(const LabeledDataset& ds, int target, const TargetConcept* c) {
    RowMat X = class_rows(ds, target);
    if (!c) return X;
    if (c->frame.rows() != X.cols()) throw ParameterError("concept dimension does not match the dataset");
    return X * c->frame;
}

std::array<double, 3> class_gaps(const RowMat& P, const RowMat& N) {
    std::array<double, 3> g{};
    g[0] = (empirical_moment(P, 1).vec() - empirical_moment(N, 1).vec()).norm();
    g[1] = (empirical_moment(P, 2).mat() - empirical_moment(N, 2).mat()).norm();
    g[2] = frob_norm(empirical_moment(P, 3).ten() - empirical_moment(N, 3).ten());
    return g;
}

}  // namespace

double OneSidedPoly::eval(const Vec2& x) const {
    double v = a0 + A1.dot(x) + x.dot(A2 * x);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) v += A3(i, j, k) * x[i] * x[j] * x[k];
    return v;
}

std::vector<double> OneSidedPoly::monomial_coeffs() const {
    std::vector<double> out;
    for (const auto& [a, b] : cubic_monomials()) {
        const int deg = a + b;
        double c = 0.0;
        if (deg == 1) {
            c = a == 1 ? A1[0] : A1[1];
        } else if (deg == 2) {
            c = a == 2 ? A2(0, 0) : (b == 2 ? A2(1, 1) : A2(0, 1) + A2(1, 0));
        } else {
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k)
                        if (i + j + k == b) c += A3(i, j, k);
        }
        out.push_back(c);
    }
    return out;
}

double OneSidedPoly::norm_sum() const { return A1.norm() + A2.norm() + frob_norm(A3); }

OneSidedPoly OneSidedPoly::normalized() const {
    const double s = norm_sum();
    if (!(s > 0.0)) throw ParameterError("cannot normalize a constant polynomial");
    OneSidedPoly p = *this;
    p.a0 /= s;
    p.A1 /= s;
    p.A2 /= s;
    p.A3 *= 1.0 / s;
    return p;
}

OneSidedPoly OneSidedPoly::from_monomials(double a0, const std::vector<double>& coeffs) {
    const auto& mons = cubic_monomials();
    if (coeffs.size() != mons.size()) throw ParameterError("expected 9 monomial coefficients");
    OneSidedPoly p;
    p.a0 = a0;
    for (std::size_t n = 0; n < mons.size(); ++n) {
        const auto [a, b] = mons[n];
        const double c = coeffs[n];
        if (a + b == 1) {
            p.A1[a == 1 ? 0 : 1] = c;
        } else if (a + b == 2) {
            if (a == 2) p.A2(0, 0) = c;
            else if (b == 2) p.A2(1, 1) = c;
            else p.A2(0, 1) = p.A2(1, 0) = c / 2.0;
        } else {
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k)
                        if (i + j + k == b) p.A3(i, j, k) = c / binom3(a);
        }
    }
    p.A3.set_symmetric(true);
    return p;
}

OneSidedPoly lemma3_poly(const TargetConcept& c, double shift) {
    if (!(std::abs(shift) > 0.0)) throw DegenerateConceptError("lemma3 polynomial needs t sin(theta) != 0");
    const Vec2 u = c.u2();
    // (s - a)^2 (s + a) / a = s^3 / a - s^2 - a s + a^2 with s = u . x.
    OneSidedPoly p;
    p.a0 = shift * shift;
    p.A1 = -shift * u;
    p.A2 = -u * u.transpose();
    p.A3 = Tensor3::cube(Vec(u));
    p.A3 *= 1.0 / shift;
    p.A3.set_symmetric(true);
    return p;
}

OneSidedPoly lemma3_poly(const TargetConcept& c) { return lemma3_poly(c, c.t * std::sin(c.theta)); }

OneSidedPoly lemma4_poly(const TargetConcept& c) {
    if (!(c.theta < std::numbers::pi / 2.0)) throw DegenerateConceptError("lemma4 polynomial needs theta < pi/2");
    const double tn = std::tan(c.theta);
    OneSidedPoly p;
    p.a0 = (1.0 + c.sigma) * tn * tn * c.t * c.t;
    p.A1 = Vec2((2.0 + c.sigma) * tn * tn * c.t, -c.sigma * tn * c.t);
    p.A2(1, 1) = -1.0;
    p.A3.set_symmetric(true);
    return p;
}

OneSidedReport one_sided_verify(const OneSidedPoly& p, const std::vector<Vec2>& points, SignSide side,
                                double tol) {
    OneSidedReport r;
    r.n_points = points.size();
    for (const auto& z : points) {
        const double v = p.eval(z);
        const double viol = side == SignSide::NonNegative ? -v : v;
        if (viol > r.max_violation) {
            r.max_violation = viol;
            r.worst_point = z;
        }
    }
    r.pass = r.max_violation <= tol;
    return r;
}

ExclusionReport exclusion_check(const OneSidedPoly& poly, const MomentTarget& target,
                                const std::vector<Vec2>& points, const std::vector<double>& weights) {
    if (poly.norm_sum() > 1.0 + 1e-12) throw ParameterError("exclusion_check needs a normalized polynomial");
    if (points.empty() || points.size() != weights.size())
        throw ParameterError("exclusion_check needs one weight per support point");
    ExclusionReport r;
    const PlaneStats s = plane_stats(points, weights);
    r.deviation[0] = (s.m1 - target.T1).norm();
    r.deviation[1] = (s.m2 - target.T2).norm();
    r.deviation[2] = frob_norm(s.m3 - target.T3);
    r.moments_within = std::all_of(r.deviation.begin(), r.deviation.end(),
                                   [&](double dv) { return dv <= target.tau + 1e-12; });
    r.min_value = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < points.size(); ++n)
        if (weights[n] > 0.0) r.min_value = std::min(r.min_value, poly.eval(points[n]));
    r.poly_nonnegative = r.min_value >= -1e-12;
    r.inner = poly.a0 + poly.A1.dot(target.T1) + (poly.A2.array() * target.T2.array()).sum() +
              inner3(poly.A3, target.T3);
    r.pass = !(r.moments_within && r.poly_nonnegative && r.inner < -target.tau);
    return r;
}

ExclusionFuzzReport exclusion_fuzz(const std::vector<Vec2>& points, const std::vector<double>& weights,
                                   double tau, int trials, std::uint64_t seed) {
    if (!(tau >= 0.0)) throw ParameterError("tau must be nonnegative");
    const PlaneStats exact = plane_stats(points, weights);
    Rng rng(derive_seed(seed, 0xE5C));
    ExclusionFuzzReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    const std::size_t k = cubic_monomials().size();
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<double> coeffs(k);
        for (double& x : coeffs) x = std_normal(rng);
        OneSidedPoly p = OneSidedPoly::from_monomials(0.0, coeffs).normalized();
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& z : points) lo = std::min(lo, p.eval(z));
        p.a0 = -lo;
        // Each moment moved by a random direction of norm at most tau.
        MomentTarget tg;
        tg.tau = tau;
        Vec2 d1(std_normal(rng), std_normal(rng));
        tg.T1 = exact.m1 + tau * uniform01(rng) * d1 / d1.norm();
        Eigen::Matrix2d d2;
        d2 << std_normal(rng), std_normal(rng), std_normal(rng), std_normal(rng);
        tg.T2 = exact.m2 + tau * uniform01(rng) * d2 / d2.norm();
        Tensor3 d3(2);
        for (double& x : d3.data()) x = std_normal(rng);
        tg.T3 = exact.m3 + (tau * uniform01(rng) / frob_norm(d3)) * d3;
        const ExclusionReport r = exclusion_check(p, tg, points, weights);
        ++rep.trials;
        if (!r.pass) ++rep.failures;
        rep.min_margin = std::min(rep.min_margin, r.inner + tau);
    }
    return rep;
}

double certificate_dual_value(const OneSidedPoly& p, RegionSide side, double b) {
    // The pure squares carry the unperturbed alpha^2 (beta^2) constraints.
    const auto mono = plane_monomials(3);
    const std::vector<double> coeffs = p.monomial_coeffs();
    double s = 0.0;
    for (std::size_t k = 0; k < mono.size(); ++k) {
        const auto [a, b2] = mono[k];
        if ((a == 2 && b2 == 0) || (a == 0 && b2 == 2)) continue;
        s += std::abs(coeffs[k]);
    }
    return side == RegionSide::Positive ? p.a0 + b * s : p.a0 - b * s;
}

VarianceBoundReport variance_bound_lp(const TargetConcept& c, RegionSide side, double b,
                                      const std::vector<Vec2>& points) {
    if (!(b >= 0.0)) throw ParameterError("perturbation b must be nonnegative");
    VarianceBoundReport r;
    r.points = points;
    const double tn = std::tan(c.theta), s1 = c.t * std::sin(c.theta);
    r.closed_form = side == RegionSide::Positive ? s1 * s1 : (1.0 + c.sigma) * c.t * c.t * tn * tn;
    r.dual_value = side == RegionSide::Positive ? certificate_dual_value(lemma3_poly(c), side, b)
                                                : certificate_dual_value(lemma4_poly(c), side, b);
    if (points.empty()) {
        r.status = LpStatus::Infeasible;
        return r;
    }
    const int N = static_cast<int>(points.size());
    // Variables: p_1..p_N, then alpha^2 = a_plus - a_minus.
    LinearProgram lp(N + 2);
    for (const auto& mono : cubic_monomials()) {
        Vec row = Vec::Zero(N + 2);
        for (int n = 0; n < N; ++n) row[n] = eval_monomial(mono, points[static_cast<std::size_t>(n)]);
        if (mono == std::make_pair(2, 0) || mono == std::make_pair(0, 2)) {
            row[N] = -1.0;
            row[N + 1] = 1.0;
        }
        if (b == 0.0) {
            lp.add_row(row, RowSense::Eq, 0.0);
        } else {
            lp.add_row(row, RowSense::Le, b);
            lp.add_row(row, RowSense::Ge, -b);
        }
    }
    Vec ones = Vec::Zero(N + 2);
    ones.head(N).setOnes();
    lp.add_row(ones, RowSense::Eq, 1.0);
    const double dir = side == RegionSide::Positive ? -1.0 : 1.0;
    lp.cost[N] = dir;
    lp.cost[N + 1] = -dir;
    const LpResult res = solve_lp(lp);
    r.status = res.status;
    r.max_residual = res.max_residual;
    if (res.status == LpStatus::Optimal) {
        r.value = res.x[N] - res.x[N + 1];
        r.weights = res.x.head(N);
    }
    return r;
}

VarianceBoundReport variance_bound_lp(const TargetConcept& c, RegionSide side, double b, const GridSpec& grid) {
    const RegionGrid g = region_grid(c, grid);
    return variance_bound_lp(c, side, b, side == RegionSide::Positive ? g.positive : g.negative);
}

std::vector<Vec2> sample_region(const TargetConcept& c, RegionSide side, std::size_t n, std::uint64_t seed) {
    const int want = side == RegionSide::Positive ? 1 : -1;
    std::vector<Vec2> out;
    out.reserve(n);
    Rng rng(derive_seed(seed, 0x5E6));
    std::size_t tries = 0;
    const std::size_t max_tries = 1000 * n + 1000000;
    while (out.size() < n) {
        if (++tries > max_tries) throw GenerationError("region too small to sample");
        const Vec2 z(2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0);
        if (z.squaredNorm() > 1.0) continue;
        if (plane_slack(c, z) < c.gamma) continue;
        if (label_plane(c, z) != want) continue;
        out.push_back(z);
    }
    return out;
}

Lemma1Report lemma1_empirical(const LabeledDataset& ds, const TargetConcept* c, const Lemma1Config& cfg) {
    Lemma1Report r;
    const RowMat P = class_view(ds, 1, c), N = class_view(ds, -1, c);
    if (P.rows() == 0 || N.rows() == 0) {
        r.skipped = true;
        r.reason = "a class is missing";
        return r;
    }
    const auto gaps = class_gaps(P, N);
    const double mp = empirical_moment(P, 1).vec().norm(), mn = empirical_moment(N, 1).vec().norm();
    if (gaps[0] > cfg.gap_tol || gaps[1] > cfg.gap_tol || mp > cfg.mean_tol || mn > cfg.mean_tol) {
        r.skipped = true;
        r.reason = "moment preconditions not met";
        return r;
    }
    auto lmin = [](const Mat& S) { return Eigen::SelfAdjointEigenSolver<Mat>(S).eigenvalues().minCoeff(); };
    r.lambda_min_pos = lmin(empirical_moment(P, 2).mat());
    r.lambda_min_neg = lmin(empirical_moment(N, 2).mat());
    r.floor = cfg.kappa1 * std::pow(ds.gamma, 4);
    r.pass = r.lambda_min_pos >= r.floor && r.lambda_min_neg >= r.floor;
    return r;
}

Theorem22Report theorem22_empirical(const LabeledDataset& ds, const TargetConcept* c, const Theorem22Config& cfg) {
    Theorem22Report r;
    const RowMat P = class_view(ds, 1, c), N = class_view(ds, -1, c);
    if (P.rows() == 0 || N.rows() == 0) {
        r.skipped = true;
        r.reason = "a class is missing";
        return r;
    }
    const auto gaps = class_gaps(P, N);
    const double mp = empirical_moment(P, 1).vec().norm();
    if (gaps[0] > cfg.gap_tol || gaps[1] > cfg.gap_tol || gaps[2] > cfg.gap_tol || mp > cfg.mean_tol) {
        r.skipped = true;
        r.reason = "moment preconditions not met";
        return r;
    }
    r.third_pos = frob_norm(empirical_moment(P, 3).ten());
    r.third_neg = frob_norm(empirical_moment(N, 3).ten());
    r.floor = cfg.floor;
    r.pass = r.third_pos >= r.floor && r.third_neg >= r.floor;
    return r;
}

Lemma2Guard lemma2_guard(const std::vector<Vec2>& pos, const std::vector<Vec2>& neg, double tol) {
    if (pos.empty() || neg.empty()) throw ClassMissingError("lemma2_guard needs both classes");
    const PlaneStats p = plane_stats(pos, {}), n = plane_stats(neg, {});
    Lemma2Guard g;
    g.means_small = p.m1.norm() <= tol && n.m1.norm() <= tol;
    g.mean_gap_small = (p.m1 - n.m1).norm() <= tol;
    g.alpha2 = (p.m2.trace() + n.m2.trace()) / 4.0;
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    g.isotropic = g.alpha2 > 0.0 && (p.m2 - g.alpha2 * I).norm() <= tol && (n.m2 - g.alpha2 * I).norm() <= tol;
    g.third_gap_small = frob_norm(p.m3 - n.m3) <= tol;
    return g;
}

}  // namespace hsi
