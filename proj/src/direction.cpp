#include "hsi/direction.hpp"

#include "hsi/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hsi {

std::string to_string(DirectionSource s) {
    switch (s) {
        case DirectionSource::TensorPca: return "tensor-pca";
        case DirectionSource::Gradient: return "gradient";
        case DirectionSource::SqList: return "sq-list";
    }
    return "unknown";
}

Vec canonicalize(Vec u) {
    Eigen::Index k = 0;
    u.cwiseAbs().maxCoeff(&k);
    if (u[k] < 0.0) u = -u;
    return u;
}

bool is_approx_solution(const MomentTensor& t, int m, const Vec& u, const ApproxSolutionParams& p) {
    const double f = apply_power(t, u, m);
    const double eta = tangent_project(power_gradient(t, u), u).norm();
    return eta <= p.eta && std::abs(f) >= p.alpha;
}

std::vector<DirectionCandidate> tensor_pca_directions(const Tensor3& t_hat, std::uint64_t seed) {
    const int d = t_hat.dim();
    Rng rng(derive_seed(seed, 0x7E5));
    const Vec v = gaussian_vec(d, rng, 1.0 / std::sqrt(static_cast<double>(d)));
    Mat m = contract_vec(t_hat, v);
    m = 0.5 * (m + m.transpose());
    const EigenDecomp eig = sym_eigen(m);
    std::vector<DirectionCandidate> out;
    out.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        DirectionCandidate c;
        c.w = canonicalize(eig.vectors.col(i));
        c.source = DirectionSource::TensorPca;
        c.score = std::abs(eig.values[i]);
        c.diagnostics["eigenvalue"] = eig.values[i];
        c.diagnostics["rank"] = i;
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

Vec deflated(Vec x, const std::vector<Vec>& basis) {
    for (const Vec& o : basis) x -= x.dot(o) * o;
    return x;
}

struct Eval {
    double f = 0.0;     // signed objective times the ascent sign
    Vec grad;           // Euclidean gradient times the ascent sign
};

Eval evaluate(const MomentTensor& t, const Vec& u, double sgn) {
    Eval e;
    if (t.order() == 3) {
        const Mat m = contract_vec(t.ten(), u);
        const Vec mu = m * u;
        e.f = sgn * u.dot(mu);
        e.grad = sgn * 3.0 * mu;
    } else {
        e.f = sgn * apply_power(t, u, t.order());
        e.grad = sgn * power_gradient(t, u);
    }
    return e;
}

}  // namespace

GradientResult gradient_direction(const MomentTensor& t_hat, int m, double alpha,
                                  const GradientConfig& cfg, std::uint64_t seed,
                                  const std::vector<Vec>& deflate) {
    if (m != t_hat.order()) throw std::invalid_argument("gradient_direction: order mismatch");
    if (!(alpha > 0.0)) throw std::invalid_argument("gradient_direction: alpha must be positive");
    const int d = t_hat.dim();
    const double zeta = cfg.init_floor > 0.0 ? cfg.init_floor : 0.1 * alpha / d;
    const double target = std::min(cfg.kappa * alpha, cfg.leak_cap);
    Rng rng(derive_seed(seed, 0x6AD));

    GradientResult res;
    res.candidate.source = DirectionSource::Gradient;

    // Initialization: accept the first draw with |f(u0)| >= zeta. Odd orders flip u0
    // so that f(u0) > 0; even orders ascend sign(f(u0)) * f.
    Vec u;
    double sgn = 1.0;
    int restarts = 0;
    Vec best_init;
    double best_abs = -1.0;
    for (; restarts < cfg.max_restarts; ++restarts) {
        Vec u0 = deflated(random_unit(d, rng), deflate);
        const double n0 = u0.norm();
        if (n0 < 1e-12) continue;
        u0 /= n0;
        const double f0 = apply_power(t_hat, u0, m);
        if (std::abs(f0) > best_abs) {
            best_abs = std::abs(f0);
            best_init = u0;
        }
        if (std::abs(f0) >= zeta) {
            if (f0 < 0.0) {
                if (m % 2 == 1) u0 = -u0;
                else sgn = -1.0;
            }
            u = u0;
            break;
        }
    }
    if (u.size() == 0) {
        res.reason = "no initialization reached the value floor";
        res.candidate.w = best_init.size() ? canonicalize(best_init) : Vec::Unit(d, 0);
        res.candidate.score = std::max(best_abs, 0.0);
        res.candidate.diagnostics["restarts"] = restarts;
        return res;
    }

    double c = cfg.step_const;
    int halvings = 0;
    Eval cur = evaluate(t_hat, u, sgn);
    Vec best_u = u;
    double best_f = cur.f;
    double last_eta = 0.0, last_bound = 0.0;
    long it = 0;
    for (; it <= cfg.max_iters; ++it) {
        Vec g = deflated(tangent_project(cur.grad, u), deflate);
        const double eta = g.norm();
        const double ap = std::abs(cur.f);
        // Leakage bound under an estimation error eps_t; the error enters the gradient m times.
        const double bound = ap > cfg.eps_t ? (eta + m * cfg.eps_t) / (m * (ap - cfg.eps_t))
                                            : std::numeric_limits<double>::infinity();
        last_eta = eta;
        last_bound = bound;
        if (bound <= target) {
            res.success = true;
            break;
        }
        if (it == cfg.max_iters) break;
        const double lambda = c * std::min(1.0, 1.0 / eta);
        Vec next = deflated(u + lambda * g, deflate);
        next.normalize();
        Eval ne = evaluate(t_hat, next, sgn);
        if (ne.f < cur.f) {
            if (++halvings > cfg.max_halvings) {
                res.reason = "monotonicity could not be restored by step halving";
                break;
            }
            c *= 0.5;
            continue;
        }
        u = std::move(next);
        cur = std::move(ne);
        if (cur.f > best_f) {
            best_f = cur.f;
            best_u = u;
        }
    }
    if (!res.success && res.reason.empty()) res.reason = "iteration budget exhausted";
    const Vec out = res.success ? u : best_u;
    res.candidate.w = canonicalize(out);
    res.candidate.score = std::abs(apply_power(t_hat, out, m));
    auto& dg = res.candidate.diagnostics;
    dg["iterations"] = static_cast<double>(it);
    dg["restarts"] = restarts;
    dg["halvings"] = halvings;
    dg["alpha_prime"] = std::abs(apply_power(t_hat, out, m));
    dg["eta"] = res.success ? last_eta : tangent_project(power_gradient(t_hat, out), out).norm();
    dg["bound"] = last_bound;
    dg["ascent_sign"] = sgn;
    return res;
}

std::vector<DirectionCandidate> sq_list_directions(const Tensor3& t_hat, double gamma,
                                                   const SqListConfig& cfg, std::uint64_t seed) {
    const int d = t_hat.dim();
    const double alpha = cfg.alpha > 0.0 ? cfg.alpha : gamma / d;
    const int cap = cfg.max_list > 0 ? cfg.max_list
                                     : static_cast<int>(std::ceil(static_cast<double>(d) / gamma));
    const MomentTensor t(t_hat);
    std::vector<DirectionCandidate> out;
    std::vector<Vec> found;
    for (int k = 0; k < std::min(cap, d); ++k) {
        GradientResult r = gradient_direction(t, 3, alpha, cfg.grad, derive_seed(seed, static_cast<std::uint64_t>(k)), found);
        if (!r.success) break;
        double worst = 0.0;
        for (const Vec& o : found) worst = std::max(worst, std::abs(r.candidate.w.dot(o)));
        if (worst > cfg.ortho_tol) break;
        r.candidate.source = DirectionSource::SqList;
        r.candidate.diagnostics["max_overlap"] = worst;
        // Orthonormalize against earlier outputs for exact deflation in later searches.
        Vec q = deflated(r.candidate.w, found);
        found.push_back(q.normalized());
        out.push_back(std::move(r.candidate));
    }
    return out;
}

}  // namespace hsi
