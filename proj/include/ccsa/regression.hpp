#pragma once

// Least-squares estimate of conditional expectations over a polynomial
// basis in (short rate, intensity).

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ccsa {

class RegressionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Feature { constant, rate, intensity, rate_sq, intensity_sq, rate_intensity };

inline std::string to_string(Feature f) {
    switch (f) {
        case Feature::constant: return "1";
        case Feature::rate: return "r";
        case Feature::intensity: return "lambda";
        case Feature::rate_sq: return "r^2";
        case Feature::intensity_sq: return "lambda^2";
        case Feature::rate_intensity: return "r*lambda";
    }
    return "?";
}

inline double evaluate(Feature f, double r, double lambda) noexcept {
    switch (f) {
        case Feature::constant: return 1.0;
        case Feature::rate: return r;
        case Feature::intensity: return lambda;
        case Feature::rate_sq: return r * r;
        case Feature::intensity_sq: return lambda * lambda;
        case Feature::rate_intensity: return r * lambda;
    }
    return 0.0;
}

struct RegressionBasis {
    std::vector<Feature> features;

    /// Quadratic in (r, lambda).
    static RegressionBasis rate_and_intensity() {
        return {{Feature::constant, Feature::rate, Feature::intensity, Feature::rate_sq, Feature::intensity_sq,
                 Feature::rate_intensity}};
    }
    /// Quadratic in r.
    static RegressionBasis rate_only() { return {{Feature::constant, Feature::rate, Feature::rate_sq}}; }
};

struct RegressionOptions {
    /// Drop features linearly dependent on earlier ones instead of failing.
    bool prune_collinear = true;
    /// Keep at most samples / min_samples_per_feature features.
    int min_samples_per_feature = 10;
};

struct RegressionFit {
    std::vector<Feature> kept;          // features that entered the fit, in basis order
    std::vector<double> coefficients;   // on the raw (unscaled) features in `kept`
    std::vector<double> fitted;         // one value per sample
    std::vector<Feature> pruned;        // constant, collinear, or dropped for lack of samples
};

/// Ordinary least squares of target on basis(rate, intensity), returning
/// fitted values at every sample. Columns are standardized before a
/// column-pivoted QR; degenerate features are pruned.
inline RegressionFit regress_continuation(std::span<const double> rate, std::span<const double> intensity,
                                          std::span<const double> target, const RegressionBasis& basis,
                                          const RegressionOptions& opts = {}) {
    const auto n = static_cast<Eigen::Index>(target.size());
    if (rate.size() != target.size() || intensity.size() != target.size())
        throw RegressionError("feature and target lengths differ");
    if (n == 0) throw RegressionError("no samples");
    if (basis.features.empty() || basis.features.front() != Feature::constant)
        throw RegressionError("basis must start with the constant feature");

    RegressionFit fit;
    const double mean_y = Eigen::Map<const Eigen::VectorXd>(target.data(), n).mean();

    // Candidate columns: non-constant features with spread, within the sample budget.
    const auto budget = std::max<std::size_t>(1, target.size() / static_cast<std::size_t>(std::max(1, opts.min_samples_per_feature)));
    std::vector<Feature> candidates;
    std::vector<Eigen::VectorXd> columns;
    std::vector<double> means, scales;
    for (std::size_t k = 1; k < basis.features.size(); ++k) {
        const Feature f = basis.features[k];
        if (candidates.size() + 1 >= budget) {
            fit.pruned.push_back(f);
            continue;
        }
        Eigen::VectorXd col(n);
        for (Eigen::Index i = 0; i < n; ++i) col[i] = evaluate(f, rate[static_cast<std::size_t>(i)], intensity[static_cast<std::size_t>(i)]);
        const double m = col.mean();
        const double s = std::sqrt((col.array() - m).square().mean());
        if (!(s > 1e-12 * std::max(1.0, std::abs(m)))) {
            fit.pruned.push_back(f);
            continue;
        }
        candidates.push_back(f);
        columns.push_back((col.array() - m) / s);
        means.push_back(m);
        scales.push_back(s);
    }

    // Centered columns are orthogonal to the intercept; regress the
    // centered target on them, then restore the intercept.
    Eigen::VectorXd yc = Eigen::Map<const Eigen::VectorXd>(target.data(), n).array() - mean_y;
    Eigen::VectorXd beta_std;
    std::vector<std::size_t> active;
    if (!candidates.empty()) {
        Eigen::MatrixXd x(n, static_cast<Eigen::Index>(candidates.size()));
        for (std::size_t k = 0; k < candidates.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = columns[k];
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        qr.setThreshold(1e-10);
        const auto rank = qr.rank();
        if (rank < x.cols()) {
            std::vector<bool> keep(candidates.size(), false);
            for (Eigen::Index r = 0; r < rank; ++r) keep[static_cast<std::size_t>(qr.colsPermutation().indices()[r])] = true;
            std::string offending;
            for (std::size_t k = 0; k < candidates.size(); ++k)
                if (!keep[k]) offending += (offending.empty() ? "" : ", ") + to_string(candidates[k]);
            if (!opts.prune_collinear) throw RegressionError("rank-deficient design; collinear features: " + offending);
            for (std::size_t k = 0; k < candidates.size(); ++k) {
                if (keep[k]) active.push_back(k);
                else fit.pruned.push_back(candidates[k]);
            }
            Eigen::MatrixXd xr(n, static_cast<Eigen::Index>(active.size()));
            for (std::size_t a = 0; a < active.size(); ++a) xr.col(static_cast<Eigen::Index>(a)) = columns[active[a]];
            beta_std = xr.colPivHouseholderQr().solve(yc);
        } else {
            for (std::size_t k = 0; k < candidates.size(); ++k) active.push_back(k);
            beta_std = qr.solve(yc);
        }
    }

    double intercept = mean_y;
    fit.kept.push_back(Feature::constant);
    fit.coefficients.push_back(0.0);
    for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t k = active[a];
        const double b = beta_std[static_cast<Eigen::Index>(a)] / scales[k];
        intercept -= b * means[k];
        fit.kept.push_back(candidates[k]);
        fit.coefficients.push_back(b);
    }
    fit.coefficients[0] = intercept;

    fit.fitted.assign(target.size(), mean_y);
    for (std::size_t a = 0; a < active.size(); ++a) {
        const double b = beta_std[static_cast<Eigen::Index>(a)];
        const auto& col = columns[active[a]];
        for (Eigen::Index i = 0; i < n; ++i) fit.fitted[static_cast<std::size_t>(i)] += b * col[i];
    }
    return fit;
}

}  // namespace ccsa
