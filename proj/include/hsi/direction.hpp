#pragma once

#include "hsi/linalg.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hsi {

enum class DirectionSource { TensorPca, Gradient, SqList };
std::string to_string(DirectionSource s);

struct DirectionCandidate {
    Vec w;
    DirectionSource source = DirectionSource::TensorPca;
    double score = 0.0;
    std::map<std::string, double> diagnostics;
};

struct ApproxSolutionParams {
    double alpha = 0.0;
    double eta = 0.0;
};

struct GradientConfig {
    double step_const = 0.1;   // c'' in lambda = c'' min(1, 1 / |g|)
    long max_iters = 100000;
    int max_restarts = 200;
    double init_floor = 0.0;   // zeta; <= 0 selects 0.1 * alpha / d
    double kappa = 2.0;
    double eps_t = 0.0;        // tensor-estimation budget in the leakage bound
    double leak_cap = 0.01;    // absolute cap on the accepted leakage bound
    int max_halvings = 20;
};

struct GradientResult {
    bool success = false;
    DirectionCandidate candidate;  // the accepted solution, or the best iterate on failure
    std::string reason;
};

// Sign-aware sphere objective: f(u) = T . u^{(x)m}.
bool is_approx_solution(const MomentTensor& t, int m, const Vec& u, const ApproxSolutionParams& p);

// Returns u with its largest-magnitude coordinate made positive.
Vec canonicalize(Vec u);

std::vector<DirectionCandidate> tensor_pca_directions(const Tensor3& t_hat, std::uint64_t seed);

// Projected gradient ascent on the sphere. Iterates are kept orthogonal to every
// vector in `deflate` (which must be orthonormal).
GradientResult gradient_direction(const MomentTensor& t_hat, int m, double alpha,
                                  const GradientConfig& cfg, std::uint64_t seed,
                                  const std::vector<Vec>& deflate = {});

struct SqListConfig {
    GradientConfig grad;
    double alpha = 0.0;        // <= 0 selects gamma / d
    double ortho_tol = 0.05;
    int max_list = 0;          // <= 0 selects ceil(d / gamma)
};

std::vector<DirectionCandidate> sq_list_directions(const Tensor3& t_hat, double gamma,
                                                   const SqListConfig& cfg, std::uint64_t seed);

}  // namespace hsi
