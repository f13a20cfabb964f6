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

#include "csfb/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace csfb {

namespace {

// k indices of `candidates` with the largest score; ties go to the lower
// index. Returned in ascending index order.
std::vector<std::size_t> top_k(const std::vector<double>& score, std::vector<std::size_t> candidates, std::size_t k) {
    k = std::min(k, candidates.size());
    auto better = [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b])
            return score[a] > score[b];
        return a < b;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                      better);
    candidates.resize(k);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

std::vector<double> abs_values(const ComplexVector& v) {
    std::vector<double> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out[static_cast<std::size_t>(i)] = std::abs(v[i]);
    return out;
}

ComplexMatrix gather(const ComplexMatrix& phi, const std::vector<std::size_t>& cols) {
    ComplexMatrix sub(phi.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        sub.col(static_cast<Eigen::Index>(c)) = phi.col(static_cast<Eigen::Index>(cols[c]));
    return sub;
}

struct Fit {
    std::vector<std::size_t> support;
    ComplexVector coeffs;
    ComplexVector residual;
    double residual_norm = 0.0;
};

// Least squares of y on the columns in `support`. Rank-deficient systems lose
// their lowest-priority column until the solve succeeds.
Fit fit_on(const ComplexMatrix& phi, const ComplexVector& y, std::vector<std::size_t> support,
           const std::vector<double>& priority) {
    while (!support.empty()) {
        const ComplexMatrix sub = gather(phi, support);
        try {
            Fit f;
            f.coeffs = least_squares(sub, y);
            f.residual = y - sub * f.coeffs;
            f.residual_norm = f.residual.norm();
            f.support = std::move(support);
            return f;
        } catch (const RankDeficientError&) {
            auto weakest = std::min_element(support.begin(), support.end(), [&](std::size_t a, std::size_t b) {
                if (priority[a] != priority[b])
                    return priority[a] < priority[b];
                return a > b;
            });
            support.erase(weakest);
        }
    }
    Fit empty;
    empty.residual = y;
    empty.residual_norm = y.norm();
    return empty;
}

ComplexVector scatter(const Fit& fit, Eigen::Index length) {
    ComplexVector x = ComplexVector::Zero(length);
    for (std::size_t c = 0; c < fit.support.size(); ++c)
        x[static_cast<Eigen::Index>(fit.support[c])] = fit.coeffs[static_cast<Eigen::Index>(c)];
    return x;
}

} // namespace

RecoveryResult subspace_pursuit(const ComplexMatrix& phi, const ComplexVector& y, SparsityBudget budget,
                                const RecoveryOptions& opts) {
    const auto m = static_cast<std::size_t>(phi.rows());
    const auto l = static_cast<std::size_t>(phi.cols());
    if (static_cast<std::size_t>(y.size()) != m)
        throw DimensionError("subspace_pursuit: measurement length does not match operator rows");
    const std::size_t k = budget.k;
    if (k < 1 || k > m / 2)
        throw DimensionError("subspace_pursuit: budget k=" + std::to_string(k) + " outside [1, M/2] for M=" +
                             std::to_string(m));
    if ((phi.colwise().squaredNorm().array() == 0.0).any())
        throw DimensionError("subspace_pursuit: operator has a zero column");
    const std::size_t max_iters = opts.max_iters == 0 ? k : opts.max_iters;

    RecoveryResult result;
    const double y_norm = y.norm();
    if (y_norm == 0.0) {
        result.x_hat = ComplexVector::Zero(static_cast<Eigen::Index>(l));
        result.iterations = 1;
        result.converged = true;
        result.residual_history = {0.0};
        return result;
    }
    const double stop_level = opts.tol * y_norm;

    std::vector<std::size_t> all(l);
    std::iota(all.begin(), all.end(), std::size_t{0});

    const std::vector<double> corr_y = abs_values(phi.adjoint() * y);
    Fit current = fit_on(phi, y, top_k(corr_y, all, k), corr_y);
    if (current.support.empty()) {
        result.x_hat = ComplexVector::Zero(static_cast<Eigen::Index>(l));
        result.residual_norm = y_norm;
        result.iterations = 1;
        result.converged = false;
        result.residual_history = {y_norm};
        return result;
    }
    result.residual_history.push_back(current.residual_norm);
    result.iterations = 1;
    bool converged = current.residual_norm <= stop_level;

    for (std::size_t iter = 0; iter < max_iters && !converged; ++iter) {
        std::vector<double> corr_r = abs_values(phi.adjoint() * current.residual);
        const std::vector<std::size_t> extra = top_k(corr_r, all, k);

        std::vector<std::size_t> merged;
        merged.reserve(2 * k);
        std::set_union(current.support.begin(), current.support.end(), extra.begin(), extra.end(),
                       std::back_inserter(merged));
        // the retained support outranks fresh picks when columns must be shed
        for (auto idx : current.support)
            corr_r[idx] = std::numeric_limits<double>::infinity();

        const Fit wide = fit_on(phi, y, merged, corr_r);
        std::vector<double> coeff_mag(l, 0.0);
        for (std::size_t c = 0; c < wide.support.size(); ++c)
            coeff_mag[wide.support[c]] = std::abs(wide.coeffs[static_cast<Eigen::Index>(c)]);
        Fit next = fit_on(phi, y, top_k(coeff_mag, wide.support, k), coeff_mag);

        if (next.support.empty() || next.residual_norm >= current.residual_norm) {
            converged = true;
            break;
        }
        current = std::move(next);
        result.residual_history.push_back(current.residual_norm);
        ++result.iterations;
        if (current.residual_norm <= stop_level)
            converged = true;
    }

    result.x_hat = scatter(current, static_cast<Eigen::Index>(l));
    result.support = current.support;
    result.residual_norm = current.residual_norm;
    result.converged = converged;
    return result;
}

RecoveryResult subspace_pursuit(const SensingMatrix& phi, const ComplexVector& y, SparsityBudget budget,
                                const RecoveryOptions& opts) {
    return subspace_pursuit(phi.matrix, y, budget, opts);
}

SparsityBudget estimate_budget(const BudgetRule& rule, const BudgetContext& ctx) {
    std::size_t k = 1;
    switch (rule.mode) {
    case BudgetMode::oracle: {
        if (ctx.truth == nullptr)
            throw ConfigError("estimate_budget: oracle mode requires the target signal");
        k = 0;
        for (Eigen::Index i = 0; i < ctx.truth->size(); ++i)
            k += (*ctx.truth)[i] != cdouble(0.0, 0.0) ? 1 : 0;
        break;
    }
    case BudgetMode::fixed:
        k = rule.fixed_k;
        break;
    case BudgetMode::energy: {
        if (!(rule.energy_fraction > 0.0 && rule.energy_fraction <= 1.0))
            throw ConfigError("estimate_budget: energy fraction must lie in (0, 1]");
        std::vector<double> profile(ctx.reference_energy.begin(), ctx.reference_energy.end());
        const double total = std::accumulate(profile.begin(), profile.end(), 0.0);
        if (profile.empty() || !(total > 0.0)) {
            k = rule.fixed_k;
            break;
        }
        std::sort(profile.begin(), profile.end(), std::greater<>());
        const double target = rule.energy_fraction * total;
        double acc = 0.0;
        k = profile.size();
        for (std::size_t i = 0; i < profile.size(); ++i) {
            acc += profile[i];
            if (acc >= target) {
                k = i + 1;
                break;
            }
        }
        break;
    }
    }
    k = std::max<std::size_t>(k, 1);
    k = std::min(k, std::max<std::size_t>(ctx.max_k, 1));
    return SparsityBudget{k};
}

std::size_t default_differential_budget(double mu, std::size_t taps, double p01, double margin) {
    const double raw = 1.5 * mu * static_cast<double>(taps) * (p01 + margin);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw - 1e-12)));
}

std::string to_string(BudgetMode mode) {
    switch (mode) {
    case BudgetMode::oracle: return "oracle";
    case BudgetMode::fixed: return "fixed";
    case BudgetMode::energy: return "energy";
    }
    return "unknown";
}

BudgetMode budget_mode_from_string(const std::string& s) {
    if (s == "oracle")
        return BudgetMode::oracle;
    if (s == "fixed")
        return BudgetMode::fixed;
    if (s == "energy")
        return BudgetMode::energy;
    throw ConfigError("unknown budget mode '" + s + "'");
}

std::string describe(const BudgetRule& rule) {
    switch (rule.mode) {
    case BudgetMode::oracle: return "oracle";
    case BudgetMode::fixed: return "fixed:" + std::to_string(rule.fixed_k);
    case BudgetMode::energy: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "energy:%.4g", rule.energy_fraction);
        return buf;
    }
    }
    return "unknown";
}

} // namespace csfb
