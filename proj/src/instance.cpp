#include "hsi/instance.hpp"

#include "hsi/errors.hpp"
#include "hsi/lp.hpp"
#include "hsi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace hsi {

namespace {

constexpr std::size_t kBlock = 4096;

}  // namespace

double TargetConcept::t1() const { return t * std::sin(theta); }
double TargetConcept::t2() const { return (1.0 + sigma) * t * std::sin(theta); }
Vec2 TargetConcept::u2() const { return {std::sin(theta), -std::cos(theta)}; }
Vec2 TargetConcept::v2() const { return {std::sin(theta), std::cos(theta)}; }

Vec2 TargetConcept::margins(const Vec2& z) const {
    return {u2().dot(z) + t1(), v2().dot(z) + t2()};
}

Mat TargetConcept::complement() const {
    Eigen::HouseholderQR<Mat> qr(frame);
    const Mat q = qr.householderQ() * Mat::Identity(d, d);
    return q.rightCols(d - 2);
}

void validate_concept(double theta, double t, double sigma, double gamma, int d) {
    if (d < 2) throw ParameterError("dimension must be at least 2");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
    if (!(theta > 0.0 && theta < std::numbers::pi / 2)) throw ParameterError("theta must lie in (0, pi/2)");
    if (!(t >= 0.0) || !(sigma >= 0.0)) throw ParameterError("t and sigma must be nonnegative");
    if (std::sin(theta) * std::cos(theta) < 1e-6)
        throw ParameterError("degenerate concept: halfspaces are nearly parallel");
    const double t1 = t * std::sin(theta);
    if (t1 < gamma) throw ParameterError("t sin(theta) must be at least gamma");
    if (t1 > 1.0 || (1.0 + sigma) * t1 > 1.0) throw ParameterError("thresholds must not exceed 1");
}

TargetConcept make_concept(double theta, double t, double sigma, double gamma, int d,
                           std::uint64_t seed) {
    validate_concept(theta, t, sigma, gamma, d);
    TargetConcept c;
    c.theta = theta;
    c.t = t;
    c.sigma = sigma;
    c.gamma = gamma;
    c.d = d;
    c.seed = seed;
    Rng rng(derive_seed(seed, 0xC0));
    Mat g(d, 2);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < d; ++i) g(i, j) = std_normal(rng);
    Eigen::HouseholderQR<Mat> qr(g);
    c.frame = qr.householderQ() * Mat::Identity(d, 2);
    return c;
}

int label_plane(const TargetConcept& c, const Vec2& z) {
    const Vec2 m = c.margins(z);
    return (m[0] >= 0.0 && m[1] >= 0.0) ? 1 : -1;
}

int label(const TargetConcept& c, const Vec& x) { return label_plane(c, c.to_plane(x)); }

double plane_slack(const TargetConcept& c, const Vec2& z) {
    const Vec2 m = c.margins(z);
    return std::min(std::abs(m[0]), std::abs(m[1]));
}

DistSpec2D DistSpec2D::atoms(std::vector<Vec2> pts, std::vector<double> w) {
    DistSpec2D s;
    s.kind = DistKind::GridWeighted;
    s.points = std::move(pts);
    s.weights = std::move(w);
    return s;
}

DistSpec2D DistSpec2D::blobs(std::vector<Vec2> centers, std::vector<double> radii,
                             std::vector<double> w) {
    DistSpec2D s;
    s.kind = DistKind::BlobMixture;
    s.points = std::move(centers);
    s.radii = std::move(radii);
    s.weights = std::move(w);
    return s;
}

double DistSpec2D::support_radius() const {
    double r = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        r = std::max(r, points[i].norm() + (radii.empty() ? 0.0 : radii[i]));
    }
    return r;
}

DistSpec2D DistSpec2D::mixture(const DistSpec2D& a, const DistSpec2D& b, double p) {
    if (a.kind != b.kind) throw ParameterError("cannot mix distributions of different kinds");
    DistSpec2D s;
    s.kind = a.kind;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        s.points.push_back(a.points[i]);
        s.weights.push_back(p * a.weights[i]);
        if (!a.radii.empty()) s.radii.push_back(a.radii[i]);
    }
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        s.points.push_back(b.points[i]);
        s.weights.push_back((1.0 - p) * b.weights[i]);
        if (!b.radii.empty()) s.radii.push_back(b.radii[i]);
    }
    return s;
}

void validate_dist(const TargetConcept& c, const DistSpec2D& dv) {
    if (dv.points.empty()) throw GenerationError("distribution has no support");
    if (dv.weights.size() != dv.points.size())
        throw GenerationError("distribution weights do not match its support");
    if (dv.kind == DistKind::BlobMixture && dv.radii.size() != dv.points.size())
        throw GenerationError("blob radii do not match blob centers");
    double total = 0.0;
    for (double w : dv.weights) {
        if (!(w >= 0.0)) throw GenerationError("negative distribution weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw GenerationError("distribution weights do not sum to 1");
    for (std::size_t i = 0; i < dv.points.size(); ++i) {
        if (dv.weights[i] == 0.0) continue;
        const double r = dv.radii.empty() ? 0.0 : dv.radii[i];
        if (dv.points[i].norm() + r > 1.0 + 1e-12)
            throw GenerationError("distribution support leaves the unit disk");
        const Vec2 m = c.margins(dv.points[i]);
        // Margins are 1-Lipschitz, so a disk keeps its sign and slack shrinks by r.
        if (std::abs(m[0]) - r < c.gamma - 1e-12 || std::abs(m[1]) - r < c.gamma - 1e-12)
            throw GenerationError("distribution support violates the margin");
    }
}

std::string to_string(DwKind k) {
    switch (k) {
        case DwKind::GaussianTruncated: return "gaussian-truncated";
        case DwKind::UniformBall: return "uniform-ball";
        case DwKind::RademacherScaled: return "product-rademacher-scaled";
    }
    return "unknown";
}

DwKind dw_kind_from_string(const std::string& s) {
    if (s == "gaussian-truncated") return DwKind::GaussianTruncated;
    if (s == "uniform-ball") return DwKind::UniformBall;
    if (s == "product-rademacher-scaled") return DwKind::RademacherScaled;
    throw ParameterError("unknown W distribution: " + s);
}

LabeledDataset LabeledDataset::slice(std::size_t begin, std::size_t end) const {
    end = std::min(end, size());
    begin = std::min(begin, end);
    LabeledDataset out;
    out.X = X.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
    out.y.assign(y.begin() + static_cast<std::ptrdiff_t>(begin),
                 y.begin() + static_cast<std::ptrdiff_t>(end));
    out.gamma = gamma;
    out.concept_id = concept_id;
    return out;
}

namespace {

void draw_w(DwKind dw, int dim, double radius, Rng& rng, double* out) {
    if (dim == 0) return;
    switch (dw) {
        case DwKind::GaussianTruncated: {
            const double sd = 0.5 / std::sqrt(static_cast<double>(dim));
            for (;;) {
                double s = 0.0;
                for (int i = 0; i < dim; ++i) {
                    out[i] = sd * std_normal(rng);
                    s += out[i] * out[i];
                }
                if (s <= 1.0) break;
            }
            for (int i = 0; i < dim; ++i) out[i] *= radius;
            break;
        }
        case DwKind::UniformBall: {
            double s = 0.0;
            for (int i = 0; i < dim; ++i) {
                out[i] = std_normal(rng);
                s += out[i] * out[i];
            }
            const double r = radius * std::pow(uniform01(rng), 1.0 / dim) / std::sqrt(s);
            for (int i = 0; i < dim; ++i) out[i] *= r;
            break;
        }
        case DwKind::RademacherScaled: {
            const double a = radius / std::sqrt(static_cast<double>(dim));
            for (int i = 0; i < dim; ++i) out[i] = (rng() >> 63) ? a : -a;
            break;
        }
    }
}

Vec2 draw_v(const DistSpec2D& dv, const std::vector<double>& cum, Rng& rng) {
    const double u = uniform01(rng) * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()),
                                                dv.points.size() - 1);
    if (dv.kind == DistKind::GridWeighted) return dv.points[k];
    const double r = dv.radii[k] * std::sqrt(uniform01(rng));
    const double a = 2.0 * std::numbers::pi * uniform01(rng);
    return dv.points[k] + Vec2(r * std::cos(a), r * std::sin(a));
}

}  // namespace

RowMat sample_dw(DwKind dw, int dim, double radius, std::size_t n, std::uint64_t seed) {
    RowMat out(static_cast<Eigen::Index>(n), dim);
    for (std::size_t b0 = 0; b0 < n; b0 += kBlock) {
        Rng rng(derive_seed(seed, b0 / kBlock));
        for (std::size_t i = b0; i < std::min(n, b0 + kBlock); ++i)
            draw_w(dw, dim, radius, rng, out.row(static_cast<Eigen::Index>(i)).data());
    }
    return out;
}

LabeledDataset sample_dataset(const TargetConcept& c, const DistSpec2D& dv, DwKind dw, std::size_t n,
                              std::uint64_t seed) {
    validate_dist(c, dv);
    const double rho = std::min(1.0, dv.support_radius());
    // Shrink by a hair so that rounding can never push a sample outside the ball.
    const double radius = std::sqrt(std::max(0.0, 1.0 - rho * rho)) * (1.0 - 1e-12);
    const int dim_w = c.d - 2;
    const Mat wb = c.complement();
    std::vector<double> cum(dv.weights.size());
    std::partial_sum(dv.weights.begin(), dv.weights.end(), cum.begin());

    LabeledDataset ds;
    ds.X.resize(static_cast<Eigen::Index>(n), c.d);
    ds.y.resize(n);
    ds.gamma = c.gamma;
    std::vector<double> zw(static_cast<std::size_t>(std::max(dim_w, 1)));
    // Fixed-size blocks with per-block derived seeds make the output independent of
    // how blocks are distributed over workers.
    for (std::size_t b0 = 0; b0 < n; b0 += kBlock) {
        Rng rng(derive_seed(seed, b0 / kBlock));
        for (std::size_t i = b0; i < std::min(n, b0 + kBlock); ++i) {
            const Vec2 z = draw_v(dv, cum, rng);
            draw_w(dw, dim_w, radius, rng, zw.data());
            Vec x = c.frame * z;
            for (int k = 0; k < dim_w; ++k) x += zw[static_cast<std::size_t>(k)] * wb.col(k);
            ds.X.row(static_cast<Eigen::Index>(i)) = x.transpose();
            ds.y[i] = label_plane(c, z);
        }
    }
    return ds;
}

RegionGrid region_grid(const TargetConcept& c, const GridSpec& g) {
    const double step = g.step > 0.0 ? g.step : c.gamma / 2.0;
    const int k = std::max(1, g.boundary_refine);
    const double h = step / k;
    const int lim = static_cast<int>(std::ceil(1.0 / h));
    RegionGrid out;
    for (int i = -lim; i <= lim; ++i)
        for (int j = -lim; j <= lim; ++j) {
            const Vec2 z(i * h, j * h);
            if (z.norm() > 1.0) continue;
            const double slack = plane_slack(c, z);
            if (slack < c.gamma) continue;
            const bool coarse = (i % k == 0) && (j % k == 0);
            if (!coarse && slack > 2.0 * c.gamma) continue;
            (label_plane(c, z) > 0 ? out.positive : out.negative).push_back(z);
        }
    return out;
}

std::vector<std::pair<int, int>> plane_monomials(int m_max) {
    std::vector<std::pair<int, int>> out;
    for (int deg = 1; deg <= m_max; ++deg)
        for (int a = deg; a >= 0; --a) out.emplace_back(a, deg - a);
    return out;
}

double eval_monomial(const std::pair<int, int>& mono, const Vec2& z) {
    return std::pow(z[0], mono.first) * std::pow(z[1], mono.second);
}

namespace {

// Frobenius norm of the symmetric third-moment tensor of weighted plane atoms.
double third_norm(const std::vector<Vec2>& pts, const Vec& w) {
    double m[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double a = pts[i][0], b = pts[i][1];
        m[0] += w[static_cast<Eigen::Index>(i)] * a * a * a;
        m[1] += w[static_cast<Eigen::Index>(i)] * a * a * b;
        m[2] += w[static_cast<Eigen::Index>(i)] * a * b * b;
        m[3] += w[static_cast<Eigen::Index>(i)] * b * b * b;
    }
    return std::sqrt(m[0] * m[0] + 3 * m[1] * m[1] + 3 * m[2] * m[2] + m[3] * m[3]);
}

// Variables: w+ (P), w- (Q), and optionally a shared mismatch bound s.
LinearProgram matching_lp(const std::vector<Vec2>& pos, const std::vector<Vec2>& neg, int m_max,
                          double tol, bool free_tol) {
    const int P = static_cast<int>(pos.size()), Q = static_cast<int>(neg.size());
    const int n = P + Q + (free_tol ? 1 : 0);
    LinearProgram lp(n);
    auto add_pair = [&](const Vec& a) {
        Vec up = a, lo = -a;
        if (free_tol) {
            up[n - 1] = -1.0;
            lo[n - 1] = -1.0;
        }
        lp.add_row(up, RowSense::Le, free_tol ? 0.0 : tol);
        lp.add_row(lo, RowSense::Le, free_tol ? 0.0 : tol);
    };
    for (const auto& mono : plane_monomials(m_max)) {
        Vec a = Vec::Zero(n);
        for (int i = 0; i < P; ++i) a[i] = eval_monomial(mono, pos[static_cast<std::size_t>(i)]);
        for (int j = 0; j < Q; ++j) a[P + j] = -eval_monomial(mono, neg[static_cast<std::size_t>(j)]);
        add_pair(a);
    }
    for (int k = 0; k < 2; ++k) {
        Vec a = Vec::Zero(n);
        for (int i = 0; i < P; ++i) a[i] = pos[static_cast<std::size_t>(i)][k];
        add_pair(a);
    }
    Vec sp = Vec::Zero(n), sn = Vec::Zero(n);
    sp.head(P).setOnes();
    sn.segment(P, Q).setOnes();
    lp.add_row(sp, RowSense::Eq, 1.0);
    lp.add_row(sn, RowSense::Eq, 1.0);
    return lp;
}

DistSpec2D atoms_from(const std::vector<Vec2>& pts, const Vec& w) {
    std::vector<Vec2> p;
    std::vector<double> ww;
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (w[static_cast<Eigen::Index>(i)] > 1e-12) {
            p.push_back(pts[i]);
            ww.push_back(w[static_cast<Eigen::Index>(i)]);
            total += ww.back();
        }
    for (double& x : ww) x /= total;
    return DistSpec2D::atoms(std::move(p), std::move(ww));
}

}  // namespace

MatchedInstance build_matched_instance(const std::vector<Vec2>& pos, const std::vector<Vec2>& neg,
                                       int m_max, double tol, std::uint64_t seed) {
    if (pos.empty() || neg.empty()) throw GenerationError("matched instance needs both regions");
    if (m_max < 1 || m_max > 3) throw ParameterError("m_max must be 1, 2 or 3");
    const int P = static_cast<int>(pos.size()), Q = static_cast<int>(neg.size());
    MatchedInstance out;

    LinearProgram probe = matching_lp(pos, neg, m_max, 0.0, true);
    probe.cost[P + Q] = 1.0;
    const LpResult pr = solve_lp(probe);
    if (pr.status != LpStatus::Optimal) throw std::runtime_error("mismatch LP failed: " + to_string(pr.status));
    out.min_mismatch = pr.objective;
    if (pr.objective > tol) {
        out.feasible = false;
        out.positive = atoms_from(pos, pr.x.head(P));
        out.negative = atoms_from(neg, pr.x.segment(P, Q));
        out.third_moment_norm = third_norm(pos, pr.x.head(P));
        return out;
    }

    // Among feasible weightings, favour a large positive third moment: maximize its
    // projection on several directions and keep the best.
    std::vector<Eigen::Vector4d> dirs;
    for (int k = 0; k < 4; ++k)
        for (double s : {1.0, -1.0}) {
            Eigen::Vector4d e = Eigen::Vector4d::Zero();
            e[k] = s;
            dirs.push_back(e);
        }
    Rng rng(derive_seed(seed, 0x3A7));
    for (int r = 0; r < 4; ++r) {
        Eigen::Vector4d e;
        for (int k = 0; k < 4; ++k) e[k] = std_normal(rng);
        dirs.push_back(e.normalized());
    }
    LinearProgram lp = matching_lp(pos, neg, m_max, tol, false);
    Vec best_w;
    double best = -1.0;
    for (const auto& e : dirs) {
        for (int i = 0; i < P; ++i) {
            const Vec2& z = pos[static_cast<std::size_t>(i)];
            const double a = z[0], b = z[1];
            lp.cost[i] = -(e[0] * a * a * a + e[1] * a * a * b + e[2] * a * b * b + e[3] * b * b * b);
        }
        const LpResult r = solve_lp(lp);
        if (r.status != LpStatus::Optimal || r.max_residual > 1e-8) continue;
        const double nrm = third_norm(pos, r.x.head(P));
        if (nrm > best) {
            best = nrm;
            best_w = r.x;
        }
    }
    if (best < 0.0) {
        // Fall back to the probe solution, which is feasible at this tolerance.
        best_w = pr.x.head(P + Q);
        best = third_norm(pos, best_w.head(P));
    }
    out.feasible = true;
    out.positive = atoms_from(pos, best_w.head(P));
    out.negative = atoms_from(neg, best_w.segment(P, Q));
    out.third_moment_norm = best;
    return out;
}

MatchedInstance build_matched_instance(const TargetConcept& c, int m_max, double tol,
                                       const GridSpec& g, std::uint64_t seed) {
    const RegionGrid grid = region_grid(c, g);
    return build_matched_instance(grid.positive, grid.negative, m_max, tol, seed);
}

DistSpec2D planted_mismatched(const TargetConcept& c, double mean_gap, double blob_radius,
                              double prior, std::uint64_t seed) {
    if (!(prior > 0.0 && prior < 1.0)) throw ParameterError("prior must lie in (0, 1)");
    if (!(blob_radius >= 0.0)) throw ParameterError("blob radius must be nonnegative");
    const double need = c.gamma + blob_radius;
    std::vector<Vec2> pos, neg;
    const double h = 0.05;
    const int lim = static_cast<int>(std::ceil(1.0 / h));
    for (int i = -lim; i <= lim; ++i)
        for (int j = -lim; j <= lim; ++j) {
            const Vec2 z(i * h, j * h);
            if (z.norm() + blob_radius > 0.95) continue;
            if (plane_slack(c, z) < need) continue;
            (label_plane(c, z) > 0 ? pos : neg).push_back(z);
        }
    if (pos.empty() || neg.empty()) throw GenerationError("regions too thin for the requested blobs");
    const int P = static_cast<int>(pos.size()), Q = static_cast<int>(neg.size());
    // Spread each class over several blobs by capping individual weights.
    const double cap = 0.2;
    Rng rng(derive_seed(seed, 0x91A));
    for (int attempt = 0; attempt < 64; ++attempt) {
        const double a = 2.0 * std::numbers::pi * uniform01(rng);
        const Vec2 g(mean_gap * std::cos(a), mean_gap * std::sin(a));
        LinearProgram lp(P + Q);
        for (int k = 0; k < 2; ++k) {
            Vec row = Vec::Zero(P + Q);
            for (int i = 0; i < P; ++i) row[i] = pos[static_cast<std::size_t>(i)][k];
            for (int j = 0; j < Q; ++j) row[P + j] = -neg[static_cast<std::size_t>(j)][k];
            lp.add_row(row, RowSense::Eq, g[k]);
        }
        Vec sp = Vec::Zero(P + Q), sn = Vec::Zero(P + Q);
        sp.head(P).setOnes();
        sn.tail(Q).setOnes();
        lp.add_row(sp, RowSense::Eq, 1.0);
        lp.add_row(sn, RowSense::Eq, 1.0);
        for (int i = 0; i < P + Q; ++i) {
            Vec e = Vec::Zero(P + Q);
            e[i] = 1.0;
            lp.add_row(e, RowSense::Le, cap);
            lp.cost[i] = uniform01(rng);
        }
        const LpResult r = solve_lp(lp);
        if (r.status != LpStatus::Optimal || r.max_residual > 1e-9) continue;
        DistSpec2D dp = atoms_from(pos, r.x.head(P));
        DistSpec2D dn = atoms_from(neg, r.x.tail(Q));
        auto to_blobs = [&](DistSpec2D s) {
            s.kind = DistKind::BlobMixture;
            s.radii.assign(s.points.size(), blob_radius);
            return s;
        };
        return DistSpec2D::mixture(to_blobs(dp), to_blobs(dn), prior);
    }
    throw GenerationError("no blob placement achieves the requested mean gap");
}

PlaneMoments plane_class_moments(const TargetConcept& c, const DistSpec2D& dv, int target) {
    PlaneMoments pm;
    for (std::size_t i = 0; i < dv.points.size(); ++i) {
        const Vec2& z = dv.points[i];
        if (label_plane(c, z) != target) continue;
        const double w = dv.weights[i];
        const double r2 = dv.radii.empty() ? 0.0 : dv.radii[i] * dv.radii[i];
        pm.mass += w;
        pm.mean += w * z;
        // Uniform disk of radius r: E[e e^T] = r^2/4 I, odd central moments vanish.
        pm.second += w * (z * z.transpose() + 0.25 * r2 * Eigen::Matrix2d::Identity());
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int k = 0; k < 2; ++k) {
                    double v = z[a] * z[b] * z[k];
                    v += 0.25 * r2 * ((a == b) * z[k] + (a == k) * z[b] + (b == k) * z[a]);
                    pm.third[a][b][k] += w * v;
                }
    }
    if (pm.mass > 0.0) {
        pm.mean /= pm.mass;
        pm.second /= pm.mass;
        for (auto& x : pm.third)
            for (auto& y : x)
                for (double& v : y) v /= pm.mass;
    }
    return pm;
}

}  // namespace hsi
