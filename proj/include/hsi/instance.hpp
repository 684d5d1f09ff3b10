#pragma once

#include "hsi/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsi {

using Vec2 = Eigen::Vector2d;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Intersection of two halfspaces whose normals lie in the plane V spanned by `frame`.
// In frame coordinates: u = (sin th, -cos th), v = (sin th, cos th),
// t1 = t sin th, t2 = (1 + sigma) t sin th.
struct TargetConcept {
    double theta = 0.0;
    double t = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    int d = 0;
    Mat frame;  // d x 2, orthonormal columns
    std::uint64_t seed = 0;

    double t1() const;
    double t2() const;
    Vec2 u2() const;
    Vec2 v2() const;
    Vec u() const { return frame * u2(); }
    Vec v() const { return frame * v2(); }
    // d x (d-2) orthonormal basis of W, the complement of the frame.
    Mat complement() const;
    Vec2 to_plane(const Vec& x) const { return frame.transpose() * x; }
    // Signed margins (u.x + t1, v.x + t2) of a plane point.
    Vec2 margins(const Vec2& z) const;
};

void validate_concept(double theta, double t, double sigma, double gamma, int d);
TargetConcept make_concept(double theta, double t, double sigma, double gamma, int d,
                           std::uint64_t seed);

int label(const TargetConcept& c, const Vec& x);
int label_plane(const TargetConcept& c, const Vec2& z);
// Smallest absolute margin of a plane point over both halfspaces.
double plane_slack(const TargetConcept& c, const Vec2& z);

enum class DistKind { GridWeighted, BlobMixture };

// A distribution on the plane: weighted atoms, or a mixture of uniform disks.
struct DistSpec2D {
    DistKind kind = DistKind::GridWeighted;
    std::vector<Vec2> points;  // atoms or blob centers
    std::vector<double> radii; // blob radii (empty for atoms)
    std::vector<double> weights;

    static DistSpec2D atoms(std::vector<Vec2> pts, std::vector<double> w);
    static DistSpec2D blobs(std::vector<Vec2> centers, std::vector<double> radii,
                            std::vector<double> w);
    // Largest norm of any point of the support.
    double support_radius() const;
    // Merge two specs with mixture weights p and 1 - p; both must share a kind.
    static DistSpec2D mixture(const DistSpec2D& a, const DistSpec2D& b, double p);
};

// Throws GenerationError when the spec is empty, not normalized, leaves the unit
// disk, or puts mass within gamma of a boundary.
void validate_dist(const TargetConcept& c, const DistSpec2D& dv);

enum class DwKind { GaussianTruncated, UniformBall, RademacherScaled };

std::string to_string(DwKind k);
DwKind dw_kind_from_string(const std::string& s);

struct LabeledDataset {
    RowMat X;  // n x d
    std::vector<int> y;
    double gamma = 0.0;
    std::optional<std::string> concept_id;

    std::size_t size() const { return y.size(); }
    int dim() const { return static_cast<int>(X.cols()); }
    LabeledDataset slice(std::size_t begin, std::size_t end) const;
};

LabeledDataset sample_dataset(const TargetConcept& c, const DistSpec2D& dv, DwKind dw, std::size_t n,
                              std::uint64_t seed);

// Samples the W part alone: n points of R^(d-2) inside a ball of the given radius.
RowMat sample_dw(DwKind dw, int dim, double radius, std::size_t n, std::uint64_t seed);

struct GridSpec {
    double step = 0.0;        // 0 selects gamma / 2
    int boundary_refine = 1;  // extra subdivision within 2 gamma of a boundary
};

// Axis-aligned grid over the unit disk restricted to points with slack >= gamma,
// split by label.
struct RegionGrid {
    std::vector<Vec2> positive;
    std::vector<Vec2> negative;
};
RegionGrid region_grid(const TargetConcept& c, const GridSpec& g);

struct MatchedInstance {
    bool feasible = false;
    double min_mismatch = 0.0;  // smallest achievable max-entry mismatch on this grid
    DistSpec2D positive;
    DistSpec2D negative;
    double third_moment_norm = 0.0;  // Frobenius norm of the positive third moment
};

MatchedInstance build_matched_instance(const TargetConcept& c, int m_max, double tol,
                                       const GridSpec& g, std::uint64_t seed);
// Same, on explicitly given support points.
MatchedInstance build_matched_instance(const std::vector<Vec2>& pos, const std::vector<Vec2>& neg,
                                       int m_max, double tol, std::uint64_t seed);

// Monomials x1^a x2^b with 1 <= a + b <= m_max, ordered by degree then by a descending.
std::vector<std::pair<int, int>> plane_monomials(int m_max);
double eval_monomial(const std::pair<int, int>& mono, const Vec2& z);

}  // namespace hsi

namespace hsi {

// Blob-mixture plane distribution with class prior `prior` whose class-conditional
// means differ by exactly `mean_gap`. Blobs of radius `blob_radius` keep slack >= gamma.
DistSpec2D planted_mismatched(const TargetConcept& c, double mean_gap, double blob_radius,
                              double prior, std::uint64_t seed);

// Class-conditional means and raw moments of a plane distribution restricted to one label.
struct PlaneMoments {
    double mass = 0.0;
    Vec2 mean = Vec2::Zero();
    Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
    double third[2][2][2] = {};
};
PlaneMoments plane_class_moments(const TargetConcept& c, const DistSpec2D& dv, int target);

}  // namespace hsi
