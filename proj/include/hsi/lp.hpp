#pragma once

#include "hsi/linalg.hpp"

#include <string>
#include <vector>

namespace hsi {

enum class RowSense { Le, Ge, Eq };

// minimize c.x  subject to  A_i . x (sense_i) b_i,  x >= 0.
// Rows are stored dense; the solver targets many columns and few rows.
struct LinearProgram {
    int num_vars = 0;
    Vec cost;
    std::vector<Vec> rows;
    std::vector<RowSense> sense;
    std::vector<double> rhs;

    explicit LinearProgram(int n = 0) : num_vars(n), cost(Vec::Zero(n)) {}
    void add_row(Vec a, RowSense s, double b);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    Vec x;
    double max_residual = 0.0;  // worst constraint violation of x
    int iterations = 0;
};

std::string to_string(LpStatus s);

// Two-phase revised simplex with an explicit basis inverse that is refactored
// periodically; Dantzig pricing with a Bland fallback against cycling.
LpResult solve_lp(const LinearProgram& lp, int max_iterations = 200000);

}  // namespace hsi
