#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "error.hpp"
#include "series.hpp"

namespace dfactor {

/// Automatic Newey-West lag, floor(4 (n/100)^(2/9)).
inline std::size_t newey_west_auto_lag(std::size_t n) {
    return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

/// Stars for a two-sided p-value: *** below 0.001, ** below 0.01, * below 0.05.
inline std::string significance_stars(double p_value) {
    if (p_value < 0.001)
        return "***";
    if (p_value < 0.01)
        return "**";
    if (p_value < 0.05)
        return "*";
    return "";
}

/// Two-sided Student-t p-value.
inline double t_p_value(double t, double dof) {
    if (!(dof > 0.0))
        throw NumericalError("t distribution needs positive degrees of freedom");
    if (std::isinf(t))
        return 0.0;
    boost::math::students_t dist(dof);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

namespace detail {

/// (X'X)^-1 through the R factor of a Householder QR of X.
inline Eigen::MatrixXd inverse_gram(const Eigen::MatrixXd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const auto k = X.cols();
    Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    return Rinv * Rinv.transpose();
}

struct LeastSquares {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd inv_gram;
};

/// Column-pivoted QR solve. A rank-deficient X is an error naming every
/// column that takes part in a linear dependency (the support of the null
/// space).
inline LeastSquares least_squares(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                  const std::vector<std::string>& names) {
    const auto n = X.rows(), k = X.cols();
    if (n <= k)
        throw NumericalError("regression needs more observations than coefficients (n=" + std::to_string(n) +
                             ", k=" + std::to_string(k) + ")");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeFullV);
        const Eigen::MatrixXd null = svd.matrixV().rightCols(k - qr.rank());
        std::string cols;
        for (Eigen::Index j = 0; j < k; ++j)
            if (null.row(j).cwiseAbs().maxCoeff() > 1e-8)
                cols += (cols.empty() ? "" : ", ") + names[static_cast<std::size_t>(j)];
        throw NumericalError("rank-deficient design: collinear columns " + cols);
    }
    LeastSquares ls;
    ls.coef = qr.solve(y);
    ls.residuals = y - X * ls.coef;
    ls.inv_gram = inverse_gram(X);
    return ls;
}

} // namespace detail

/// Newey-West covariance of OLS coefficients with Bartlett weights
/// w_l = 1 - l/(L+1). `lag` = 0 gives the White estimator.
inline Eigen::MatrixXd hac_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals, std::size_t lag) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (static_cast<std::size_t>(residuals.size()) != n)
        throw DataError("residual count does not match design rows");
    if (lag >= n)
        throw NumericalError("HAC lag " + std::to_string(lag) + " must be below n=" + std::to_string(n));
    const Eigen::MatrixXd U = X.array().colwise() * residuals.array();
    Eigen::MatrixXd meat = U.transpose() * U;
    for (std::size_t l = 1; l <= lag; ++l) {
        const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
        const auto m = static_cast<Eigen::Index>(n - l);
        Eigen::MatrixXd gamma = U.bottomRows(m).transpose() * U.topRows(m);
        meat += w * (gamma + gamma.transpose());
    }
    const Eigen::MatrixXd bread = detail::inverse_gram(X);
    Eigen::MatrixXd v = bread * meat * bread;
    return 0.5 * (v + v.transpose());
}

inline Eigen::MatrixXd hac_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals) {
    return hac_covariance(X, residuals, newey_west_auto_lag(static_cast<std::size_t>(X.rows())));
}

struct OlsOptions {
    bool intercept = true;
    std::optional<std::size_t> hac_lag; // empty = automatic
};

/// One estimated equation. The intercept, when present, is the last
/// coefficient and is named "_cons".
struct RegressionResult {
    std::string dependent;
    std::vector<std::string> regressor_names;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd hac_covariance;
    Eigen::VectorXd std_errors;            // HAC
    std::vector<std::optional<double>> t_stats;  // empty where the standard error is zero
    std::vector<std::optional<double>> p_values;
    Eigen::VectorXd classical_std_errors;  // s^2 (X'X)^-1
    Eigen::VectorXd residuals;
    std::vector<Date> dates;
    double r_squared = 0.0;
    std::size_t n_obs = 0;
    std::size_t lag_used = 0;
    bool intercept = true;

    std::size_t k() const noexcept { return regressor_names.size(); }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t j = 0; j < regressor_names.size(); ++j)
            if (regressor_names[j] == name)
                return j;
        throw DataError("no regressor named '" + name + "'");
    }
    double coef(const std::string& name) const { return coefficients[static_cast<Eigen::Index>(index_of(name))]; }
    double se(const std::string& name) const { return std::sqrt(hac_covariance(index_of(name), index_of(name))); }
};

/// OLS of y on the columns of `regressors` (plus an intercept column when
/// requested), solved by orthogonal decomposition, with HAC inference.
inline RegressionResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors, std::vector<std::string> names,
                            const OlsOptions& opt = {}) {
    if (regressors.rows() != y.size())
        throw DataError("regressor rows do not match dependent length");
    if (static_cast<std::size_t>(regressors.cols()) != names.size())
        throw DataError("regressor name count does not match columns");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (!std::isfinite(y[i]) || !regressors.row(i).allFinite())
            throw DataError("non-finite value in regression inputs at row " + std::to_string(i));
    const auto n = y.size();
    Eigen::MatrixXd X(n, regressors.cols() + (opt.intercept ? 1 : 0));
    X.leftCols(regressors.cols()) = regressors;
    if (opt.intercept) {
        X.col(X.cols() - 1).setOnes();
        names.push_back("_cons");
    }
    auto ls = detail::least_squares(y, X, names);

    RegressionResult r;
    r.regressor_names = std::move(names);
    r.intercept = opt.intercept;
    r.n_obs = static_cast<std::size_t>(n);
    r.coefficients = ls.coef;
    r.residuals = ls.residuals;
    r.lag_used = opt.hac_lag ? *opt.hac_lag : newey_west_auto_lag(r.n_obs);
    r.hac_covariance = hac_covariance(X, ls.residuals, r.lag_used);

    const double ssr = ls.residuals.squaredNorm();
    const double sst = opt.intercept ? (y.array() - y.mean()).matrix().squaredNorm() : y.squaredNorm();
    r.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;

    const auto k = X.cols();
    const double dof = static_cast<double>(n - k);
    const double s2 = ssr / dof;
    r.classical_std_errors = (s2 * ls.inv_gram.diagonal().array()).sqrt();
    r.std_errors = r.hac_covariance.diagonal().array().max(0.0).sqrt();
    for (Eigen::Index j = 0; j < k; ++j) {
        if (r.std_errors[j] > 0.0) {
            double t = r.coefficients[j] / r.std_errors[j];
            r.t_stats.emplace_back(t);
            r.p_values.emplace_back(t_p_value(t, dof));
        } else {
            r.t_stats.emplace_back();
            r.p_values.emplace_back();
        }
    }
    return r;
}

/// Dated front end: aligns y and every regressor on their common dates first.
inline RegressionResult ols(const DatedSeries& y, const std::vector<const DatedSeries*>& regressors,
                            const OlsOptions& opt = {}) {
    std::vector<const DatedSeries*> all{&y};
    all.insert(all.end(), regressors.begin(), regressors.end());
    auto a = align_series(all);
    const auto n = static_cast<Eigen::Index>(a.dates.size());
    Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(a.columns[0].data(), n);
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(regressors.size()));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < regressors.size(); ++j) {
        X.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(a.columns[j + 1].data(), n);
        names.push_back(regressors[j]->name);
    }
    auto r = ols(yy, X, std::move(names), opt);
    r.dependent = y.name;
    r.dates = std::move(a.dates);
    return r;
}

struct AlphaTest {
    double alpha = 0.0;
    double beta = 0.0;
    std::optional<double> t_stat; // HAC t of alpha
};

/// Jensen-style alpha: intercept of the asset regressed on the market.
inline AlphaTest capm_alpha_test(std::span<const double> asset, std::span<const double> market,
                                 std::optional<std::size_t> hac_lag = std::nullopt) {
    if (asset.size() != market.size())
        throw DataError("asset and market series differ in length");
    const auto n = static_cast<Eigen::Index>(asset.size());
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(asset.data(), n);
    Eigen::MatrixXd X = Eigen::Map<const Eigen::VectorXd>(market.data(), n);
    auto r = ols(y, X, {"market"}, {true, hac_lag});
    return {r.coefficients[1], r.coefficients[0], r.t_stats[1]};
}

} // namespace dfactor
