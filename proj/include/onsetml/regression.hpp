#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "onsetml/dataset.hpp"
#include "onsetml/error.hpp"
#include "onsetml/numerics.hpp"

namespace onsetml {

/// Ordinary least squares fit y = intercept + coefficients . x. The reference
/// pipeline fits raw (unstandardized) engineered features, so coefficient
/// units are target units per feature unit.
struct LinearModel {
    std::string target;
    std::vector<std::string> features;
    double intercept = 0.0;
    Vector coefficients;
    bool standardized = false;
    std::optional<double> train_r2;
    std::optional<double> train_mse;
};

/// Least-squares fit via the normal equations. Exactly collinear or constant
/// feature columns are rejected up front; a Cholesky failure earns one ridge
/// retry (1e-10 on the normal-matrix diagonal) before SingularDesign.
inline LinearModel fit_mlr(const Matrix& x, const Vector& y,
                           const std::vector<std::string>& feature_names,
                           const std::string& target_name = "y") {
    const std::size_t n = x.rows(), p = x.cols();
    if (feature_names.size() != p)
        raise(errc::dimension_mismatch, "fit_mlr: one name per feature column required");
    if (y.size() != n) raise(errc::dimension_mismatch, "fit_mlr: target length mismatch");
    if (n < p + 1)
        raise(errc::too_few_rows, "fit_mlr needs at least " + std::to_string(p + 1) +
                                      " rows for " + std::to_string(p) + " features");

    for (std::size_t j = 0; j < p; ++j) {
        const Vector cj = x.col(j);
        if (mean_std(cj).std == 0.0)
            raise(errc::singular_design, "feature '" + feature_names[j] + "' is constant");
        for (std::size_t k = j + 1; k < p; ++k) {
            const double r = pearson_corr(cj, x.col(k));
            if (std::abs(r) >= 1.0 - 1e-12)
                raise(errc::singular_design, "features '" + feature_names[j] + "' and '" +
                                                 feature_names[k] + "' are collinear");
        }
    }

    // normal equations over the design [1 X]
    Matrix normal(p + 1, p + 1);
    Vector rhs(p + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Vector row(p + 1);
        row[0] = 1.0;
        for (std::size_t j = 0; j < p; ++j) row[j + 1] = x(i, j);
        for (std::size_t a = 0; a <= p; ++a) {
            rhs[a] += row[a] * y[i];
            for (std::size_t b = a; b <= p; ++b) normal(a, b) += row[a] * row[b];
        }
    }
    for (std::size_t a = 0; a <= p; ++a)
        for (std::size_t b = 0; b < a; ++b) normal(a, b) = normal(b, a);

    Vector beta;
    try {
        beta = solve_spd(normal, rhs);
    } catch (const Error& e) {
        if (e.code() != errc::singular_matrix) throw;
        Matrix ridged = normal;
        for (std::size_t a = 0; a <= p; ++a) ridged(a, a) += 1e-10;
        try {
            beta = solve_spd(ridged, rhs);
        } catch (const Error&) {
            raise(errc::singular_design, "normal equations singular even after ridge retry");
        }
    }
    for (double c : beta)
        if (!std::isfinite(c)) raise(errc::singular_design, "non-finite coefficients");

    LinearModel model;
    model.target = target_name;
    model.features = feature_names;
    model.intercept = beta[0];
    model.coefficients.assign(beta.begin() + 1, beta.end());
    return model;
}

inline double predict_mlr(const LinearModel& model, const Vector& features) {
    if (features.size() != model.coefficients.size())
        raise(errc::feature_mismatch, "predict_mlr: expected " +
                                          std::to_string(model.coefficients.size()) +
                                          " features, got " + std::to_string(features.size()));
    double y = model.intercept;
    for (std::size_t j = 0; j < features.size(); ++j) y += model.coefficients[j] * features[j];
    return y;
}

inline double predict_mlr(const LinearModel& model, const EngineeredFeatures& f) {
    if (model.features != engineered_feature_names())
        raise(errc::feature_mismatch, "model was not fit on the engineered rain products");
    return predict_mlr(model, f.as_vector());
}

inline double r2(const Vector& actual, const Vector& predicted) {
    if (actual.size() != predicted.size()) raise(errc::dimension_mismatch, "r2 length mismatch");
    if (actual.size() < 2) raise(errc::too_few_values, "r2 needs at least 2 values");
    const double mean =
        std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
    }
    if (ss_tot == 0.0) raise(errc::constant_target, "r2: target vector is constant");
    return 1.0 - ss_res / ss_tot;
}

inline double mse(const Vector& actual, const Vector& predicted) {
    if (actual.size() != predicted.size()) raise(errc::dimension_mismatch, "mse length mismatch");
    if (actual.empty()) raise(errc::empty_input, "mse of empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        s += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    return s / static_cast<double>(actual.size());
}

inline double mae(const Vector& actual, const Vector& predicted) {
    if (actual.size() != predicted.size()) raise(errc::dimension_mismatch, "mae length mismatch");
    if (actual.empty()) raise(errc::empty_input, "mae of empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) s += std::abs(actual[i] - predicted[i]);
    return s / static_cast<double>(actual.size());
}

/// Engineered-feature design matrix of a table, one row per record.
inline Matrix engineered_matrix(const ExperimentTable& table) {
    Matrix x(table.size(), 3);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto f = engineer_features(table.records[i]);
        x(i, 0) = f.x1;
        x(i, 1) = f.x2;
        x(i, 2) = f.x3;
    }
    return x;
}

/// Fits the discharge/erosion regression on a table: engineered features
/// against the named target column ("td_l_m2", "te_g_m2" or any interval).
inline LinearModel train_mlr(const ExperimentTable& table, const std::string& target) {
    const Matrix x = engineered_matrix(table);
    const Vector y = numeric_column(table, target);
    LinearModel model = fit_mlr(x, y, engineered_feature_names(), target);
    Vector predicted(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) predicted[i] = predict_mlr(model, x.row(i));
    model.train_r2 = r2(y, predicted);
    model.train_mse = mse(y, predicted);
    return model;
}

}  // namespace onsetml
