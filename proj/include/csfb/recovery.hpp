// SPDX-License-Identifier: Apache-2.0
//
// csfb - compressive-sensing differential channel feedback simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CSFB_RECOVERY_HPP
#define CSFB_RECOVERY_HPP

#include "csfb/errors.hpp"
#include "csfb/numerics.hpp"
#include "csfb/sensing.hpp"

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace csfb {

// Number of non-zeros the solver targets. Valid for an M-row operator when
// 1 <= k <= M/2.
struct SparsityBudget {
    std::size_t k = 1;
};

struct RecoveryOptions {
    std::size_t max_iters = 0; // 0 selects k
    double tol = 1e-6;         // stop once ||r|| <= tol * ||y||
};

struct RecoveryResult {
    ComplexVector x_hat;
    std::vector<std::size_t> support; // ascending, x_hat is zero elsewhere
    double residual_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> residual_history; // one entry per accepted iterate
};

// Subspace Pursuit for complex measurements y ~ Phi x with x k-sparse.
//
// 1. support <- k largest |Phi^H y|, least squares on it, residual r.
// 2. repeat: merge the support with the k largest |Phi^H r| (at most 2k
//    candidates), least squares on the candidates, keep the k largest
//    coefficients, least squares again on those, new residual.
// 3. stop when the residual fails to decrease (the previous iterate is
//    returned), drops below tol * ||y||, or after max_iters refinements.
//
// Magnitude ties go to the lower index. A rank-deficient candidate system
// sheds its weakest-correlated columns until it is solvable; if nothing is
// left the zero vector is returned with converged = false.
RecoveryResult subspace_pursuit(const ComplexMatrix& phi, const ComplexVector& y, SparsityBudget budget,
                                const RecoveryOptions& opts = {});

RecoveryResult subspace_pursuit(const SensingMatrix& phi, const ComplexVector& y, SparsityBudget budget,
                                const RecoveryOptions& opts = {});

enum class BudgetMode { oracle, fixed, energy };

struct BudgetRule {
    BudgetMode mode = BudgetMode::oracle;
    std::size_t fixed_k = 1;        // fixed mode; fallback for energy mode without a profile
    double energy_fraction = 0.99;  // energy mode
};

struct BudgetContext {
    const ComplexVector* truth = nullptr;   // target signal, oracle mode only
    std::span<const double> reference_energy; // per-entry energies, energy mode only
    std::size_t max_k = std::numeric_limits<std::size_t>::max();
};

// Resolves a rule into a budget clamped to [1, ctx.max_k].
//   oracle: non-zero count of *ctx.truth (ConfigError if absent)
//   fixed:  rule.fixed_k
//   energy: smallest k whose largest entries hold energy_fraction of the profile
SparsityBudget estimate_budget(const BudgetRule& rule, const BudgetContext& ctx);

// Default budget for differential slots: ceil(1.5 * mu * L * (p01 + margin)).
std::size_t default_differential_budget(double mu, std::size_t taps, double p01, double margin = 0.05);

std::string to_string(BudgetMode mode);
BudgetMode budget_mode_from_string(const std::string& s);

// "oracle", "fixed:12", "energy:0.99"
std::string describe(const BudgetRule& rule);

} // namespace csfb

#endif // CSFB_RECOVERY_HPP
