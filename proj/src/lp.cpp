#include "hsi/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hsi {

void LinearProgram::add_row(Vec a, RowSense s, double b) {
    if (a.size() != num_vars) throw std::invalid_argument("LP row has wrong length");
    rows.push_back(std::move(a));
    sense.push_back(s);
    rhs.push_back(b);
}

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-10;
constexpr double kHarrisTol = 1e-9;
constexpr int kRefactorEvery = 64;
constexpr int kDegenerateSwitch = 50;

struct Simplex {
    Mat A;  // m x N standard-form matrix
    Vec b;
    int m = 0;
    int N = 0;
    std::vector<int> basis;
    std::vector<char> in_basis;
    std::vector<char> allowed;  // may enter the basis
    Mat Binv;
    Vec xB;
    int iterations = 0;

    void refactor() {
        Mat B(m, m);
        for (int i = 0; i < m; ++i) B.col(i) = A.col(basis[i]);
        Binv = B.partialPivLu().inverse();
        xB = Binv * b;
        for (int i = 0; i < m; ++i)
            if (xB[i] < 0.0 && xB[i] > -1e-11) xB[i] = 0.0;
    }

    void pivot(int r, int q, const Vec& a) {
        const double ar = a[r];
        Binv.row(r) /= ar;
        xB[r] /= ar;
        for (int i = 0; i < m; ++i) {
            if (i == r || a[i] == 0.0) continue;
            Binv.row(i) -= a[i] * Binv.row(r);
            xB[i] -= a[i] * xB[r];
        }
        in_basis[basis[r]] = 0;
        basis[r] = q;
        in_basis[q] = 1;
        if (++iterations % kRefactorEvery == 0) refactor();
    }

    // Returns Optimal, Unbounded or IterationLimit.
    LpStatus run(const Vec& c, int max_iterations) {
        int degenerate = 0;
        while (iterations < max_iterations) {
            Vec cB(m);
            for (int i = 0; i < m; ++i) cB[i] = c[basis[i]];
            const Vec y = Binv.transpose() * cB;
            const Vec d = c - A.transpose() * y;
            const bool bland = degenerate > kDegenerateSwitch;
            int q = -1;
            double best = -kOptTol;
            for (int j = 0; j < N; ++j) {
                if (in_basis[j] || !allowed[j]) continue;
                if (d[j] < best) {
                    q = j;
                    if (bland) break;
                    best = d[j];
                }
            }
            if (q < 0) return LpStatus::Optimal;
            const Vec a = Binv * A.col(q);
            // Harris two-pass ratio test: bound the step with slightly relaxed primal
            // feasibility, then take the largest pivot among the rows that attain it.
            // Tiny pivots otherwise drive the basis towards singularity.
            // Artificials left basic at zero after phase one must stay at zero, so they
            // block in either direction.
            const double tol = kPivotTol * std::max(1.0, a.cwiseAbs().maxCoeff());
            auto step = [&](int i) { return allowed[basis[i]] ? a[i] : std::abs(a[i]); };
            double bound = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i)
                if (step(i) > tol) bound = std::min(bound, (std::max(xB[i], 0.0) + kHarrisTol) / step(i));
            if (!std::isfinite(bound)) return LpStatus::Unbounded;
            int r = -1;
            for (int i = 0; i < m; ++i) {
                if (step(i) <= tol || std::max(xB[i], 0.0) / step(i) > bound) continue;
                if (r < 0) {
                    r = i;
                    continue;
                }
                const bool better = bland ? basis[i] < basis[r] : std::abs(a[i]) > std::abs(a[r]);
                if (better) r = i;
            }
            const double ratio = std::max(xB[r], 0.0) / step(r);
            degenerate = ratio <= 1e-14 ? degenerate + 1 : 0;
            pivot(r, q, a);
        }
        return LpStatus::IterationLimit;
    }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, int max_iterations) {
    const int n = lp.num_vars;
    const int m = static_cast<int>(lp.rows.size());
    int n_slack = 0, n_art = 0;
    std::vector<double> sign(m, 1.0);
    std::vector<RowSense> sense(m);
    for (int i = 0; i < m; ++i) {
        sense[i] = lp.sense[i];
        if (lp.rhs[i] < 0.0) {
            sign[i] = -1.0;
            if (sense[i] == RowSense::Le) sense[i] = RowSense::Ge;
            else if (sense[i] == RowSense::Ge) sense[i] = RowSense::Le;
        }
        if (sense[i] != RowSense::Eq) ++n_slack;
        if (sense[i] != RowSense::Le) ++n_art;
    }

    Simplex s;
    s.m = m;
    s.N = n + n_slack + n_art;
    s.A = Mat::Zero(m, s.N);
    s.b = Vec(m);
    s.basis.assign(m, -1);
    s.in_basis.assign(s.N, 0);
    s.allowed.assign(s.N, 1);
    int slack_col = n, art_col = n + n_slack;
    const int first_art = art_col;
    for (int i = 0; i < m; ++i) {
        s.A.row(i).head(n) = sign[i] * lp.rows[i].transpose();
        s.b[i] = sign[i] * lp.rhs[i];
        if (sense[i] == RowSense::Le) {
            s.A(i, slack_col) = 1.0;
            s.basis[i] = slack_col++;
        } else {
            if (sense[i] == RowSense::Ge) s.A(i, slack_col++) = -1.0;
            s.A(i, art_col) = 1.0;
            s.basis[i] = art_col++;
        }
    }
    for (int i = 0; i < m; ++i) s.in_basis[s.basis[i]] = 1;
    s.refactor();

    LpResult res;
    if (n_art > 0) {
        Vec c1 = Vec::Zero(s.N);
        c1.tail(n_art).setOnes();
        const LpStatus st = s.run(c1, max_iterations);
        if (st == LpStatus::IterationLimit) {
            res.status = st;
            res.iterations = s.iterations;
            return res;
        }
        s.refactor();
        double infeas = 0.0;
        for (int i = 0; i < m; ++i)
            if (s.basis[i] >= first_art) infeas += std::abs(s.xB[i]);
        const double scale = 1.0 + s.b.cwiseAbs().maxCoeff();
        if (infeas > 1e-9 * scale) {
            res.status = LpStatus::Infeasible;
            res.iterations = s.iterations;
            return res;
        }
        // Drive zero-level artificials out of the basis where possible.
        for (int i = 0; i < m; ++i) {
            if (s.basis[i] < first_art) continue;
            const Vec row = s.Binv.row(i) * s.A;
            int q = -1;
            double bestv = 1e-7;
            for (int j = 0; j < first_art; ++j)
                if (!s.in_basis[j] && std::abs(row[j]) > bestv) {
                    bestv = std::abs(row[j]);
                    q = j;
                }
            if (q >= 0) s.pivot(i, q, s.Binv * s.A.col(q));
        }
        for (int j = first_art; j < s.N; ++j) s.allowed[j] = 0;
        s.refactor();
    }

    Vec c2 = Vec::Zero(s.N);
    c2.head(n) = lp.cost;
    const LpStatus st = s.run(c2, max_iterations);
    s.refactor();
    res.status = st;
    res.iterations = s.iterations;
    Vec x = Vec::Zero(s.N);
    for (int i = 0; i < m; ++i) x[s.basis[i]] = std::max(s.xB[i], 0.0);
    res.x = x.head(n);
    res.objective = lp.cost.dot(res.x);
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        const double lhs = lp.rows[i].dot(res.x);
        double v = 0.0;
        switch (lp.sense[i]) {
            case RowSense::Le: v = lhs - lp.rhs[i]; break;
            case RowSense::Ge: v = lp.rhs[i] - lhs; break;
            case RowSense::Eq: v = std::abs(lhs - lp.rhs[i]); break;
        }
        worst = std::max(worst, v);
    }
    res.max_residual = worst;
    return res;
}

}  // namespace hsi
