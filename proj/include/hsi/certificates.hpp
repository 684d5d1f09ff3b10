#pragma once

#include "hsi/instance.hpp"
#include "hsi/linalg.hpp"
#include "hsi/lp.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsi {

// p(x) = a0 + A1 . x + A2 . x(x)x + A3 . x(x)x(x)x on the plane.
struct OneSidedPoly {
    double a0 = 0.0;
    Vec2 A1 = Vec2::Zero();
    Eigen::Matrix2d A2 = Eigen::Matrix2d::Zero();
    Tensor3 A3{2};

    double eval(const Vec2& x) const;
    // Coefficients of the monomials of plane_monomials(3), in that order.
    std::vector<double> monomial_coeffs() const;
    // sum of Frobenius norms of A1..A3.
    double norm_sum() const;
    // Scaled copy with norm_sum() == 1 (the constant term scales along).
    OneSidedPoly normalized() const;
    static OneSidedPoly from_monomials(double a0, const std::vector<double>& coeffs);
};

struct MomentTarget {
    Vec2 T1 = Vec2::Zero();
    Eigen::Matrix2d T2 = Eigen::Matrix2d::Zero();
    Tensor3 T3{2};
    double tau = 0.0;
};

// (1/tau)(u.x - tau)^2 (u.x + tau) with tau = t sin(theta), expanded.
OneSidedPoly lemma3_poly(const TargetConcept& c);
// Same cubic with tau replaced by `shift` (the gamma/2-shifted variant uses t sin(theta) - gamma/2).
OneSidedPoly lemma3_poly(const TargetConcept& c, double shift);
// a0 + a1 x1 + a2 x2 - x2^2.
OneSidedPoly lemma4_poly(const TargetConcept& c);

enum class SignSide { NonNegative, NonPositive };

struct OneSidedReport {
    bool pass = false;
    double max_violation = 0.0;
    std::optional<Vec2> worst_point;
    std::size_t n_points = 0;
};

OneSidedReport one_sided_verify(const OneSidedPoly& p, const std::vector<Vec2>& points, SignSide side,
                                double tol = 1e-10);

struct ExclusionReport {
    bool pass = true;               // false only if both alternatives hold at once
    bool moments_within = false;
    bool poly_nonnegative = false;
    double inner = 0.0;             // a0 + sum A_i . T_i
    std::array<double, 3> deviation{};
    double min_value = 0.0;
};

// `points`/`weights` describe a discrete distribution on the region C.
ExclusionReport exclusion_check(const OneSidedPoly& poly, const MomentTarget& target,
                                const std::vector<Vec2>& points, const std::vector<double>& weights);

struct ExclusionFuzzReport {
    int trials = 0;
    int failures = 0;          // trials where both alternatives held at once
    double min_margin = 0.0;   // smallest inner + tau over all trials
    bool pass() const { return failures == 0; }
};

// Random normalized cubics made nonnegative on the support of (points, weights), checked
// against targets drawn within tau of the exact moments of that distribution.
ExclusionFuzzReport exclusion_fuzz(const std::vector<Vec2>& points, const std::vector<double>& weights,
                                   double tau, int trials, std::uint64_t seed);

enum class RegionSide { Positive, Negative };

struct VarianceBoundReport {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;         // LP optimum (alpha^2 on the positive side, beta^2 on the negative)
    double closed_form = 0.0;   // t^2 sin^2 theta, or (1 + sigma) t^2 tan^2 theta
    double dual_value = 0.0;    // objective of the explicit certificate polynomial
    std::vector<Vec2> points;
    Vec weights;
    double max_residual = 0.0;
};

// Weak-duality value of a certificate polynomial with a11 + a22 = -1:
// positive side a0 + b sum|a_k|, negative side a0 - b sum|a_k| over the perturbed monomials
// (every non-constant one except x1^2 and x2^2).
double certificate_dual_value(const OneSidedPoly& p, RegionSide side, double b);

// LP over grid points of one region: optimize the common second moment subject to all
// first/third moments and the off-diagonal second moment lying in [-b, b].
VarianceBoundReport variance_bound_lp(const TargetConcept& c, RegionSide side, double b, const GridSpec& grid);
VarianceBoundReport variance_bound_lp(const TargetConcept& c, RegionSide side, double b,
                                      const std::vector<Vec2>& points);

// Uniform points of the gamma-slack region of one label inside the unit disk.
std::vector<Vec2> sample_region(const TargetConcept& c, RegionSide side, std::size_t n, std::uint64_t seed);

struct Lemma1Config {
    double gap_tol = 0.25;   // bound on matching gaps m = 1, 2
    double mean_tol = 0.25;  // bound on each class mean
    double kappa1 = 1.0;     // floor is kappa1 * gamma^4
};

struct Lemma1Report {
    bool skipped = false;
    std::string reason;
    double lambda_min_pos = 0.0;
    double lambda_min_neg = 0.0;
    double floor = 0.0;
    bool pass = false;
};

// Smallest eigenvalues of the class second moments, in frame coordinates when a concept is given.
Lemma1Report lemma1_empirical(const LabeledDataset& ds, const TargetConcept* c, const Lemma1Config& cfg);

struct Theorem22Config {
    double gap_tol = 0.25;   // bound on matching gaps m = 1, 2, 3
    double mean_tol = 0.25;  // bound on the positive class mean
    double floor = 1e-4;
};

struct Theorem22Report {
    bool skipped = false;
    std::string reason;
    double third_pos = 0.0;
    double third_neg = 0.0;
    double floor = 0.0;
    bool pass = false;
};

Theorem22Report theorem22_empirical(const LabeledDataset& ds, const TargetConcept* c, const Theorem22Config& cfg);

// Hypotheses of the robust variance-separation lemma, checked on a plane dataset
// (class means, their difference, near-isotropic second moments, third-moment gap).
struct Lemma2Guard {
    bool means_small = false;
    bool mean_gap_small = false;
    bool isotropic = false;
    bool third_gap_small = false;
    double alpha2 = 0.0;
    bool holds() const { return means_small && mean_gap_small && isotropic && third_gap_small; }
};
Lemma2Guard lemma2_guard(const std::vector<Vec2>& pos, const std::vector<Vec2>& neg, double tol);

}  // namespace hsi
