#include "salab/fitting.hpp"

#include "salab/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace salab {

std::string_view to_string(GrowthModel model) {
    switch (model) {
    case GrowthModel::FactorialGeometric: return "factorial_geometric";
    case GrowthModel::ExpInverseEps: return "exp_inverse_eps";
    case GrowthModel::StretchedExp: return "stretched_exp";
    case GrowthModel::PowerLaw: return "power_law";
    }
    return "unknown";
}

GrowthModel parse_growth_model(std::string_view tag) {
    for (const auto m : {GrowthModel::FactorialGeometric, GrowthModel::ExpInverseEps, GrowthModel::StretchedExp,
                         GrowthModel::PowerLaw}) {
        if (to_string(m) == tag) {
            return m;
        }
    }
    fail(ErrorKind::Config, "unknown growth model '" + std::string(tag) + "'");
}

double SeriesPoint::log() const {
    return value > 0.0 ? std::log(value) + log_scale : -std::numeric_limits<double>::infinity();
}

double GrowthFit::param(const std::string& name) const {
    const auto it = params.find(name);
    if (it == params.end()) {
        fail(ErrorKind::InvalidArgument, "fit has no parameter '" + name + "'");
    }
    return it->second;
}

nlohmann::json GrowthFit::to_json() const {
    nlohmann::json j;
    j["model"] = std::string(to_string(model));
    j["params"] = params;
    j["r_squared"] = r_squared;
    j["bounded"] = bounded;
    j["points"] = points;
    return j;
}

LinearFit linear_regression(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "linear_regression: size mismatch");
    require(x.size() >= 2, "linear_regression: need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        fail(ErrorKind::DegenerateData, "linear_regression: all abscissae coincide");
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = (syy == 0.0) ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    return f;
}

namespace {

struct LogSeries {
    std::vector<double> eps;
    std::vector<double> logv;
};

LogSeries prepare(std::span<const SeriesPoint> series) {
    if (series.size() < 4) {
        fail(ErrorKind::InsufficientData, "need at least 4 points, got " + std::to_string(series.size()));
    }
    LogSeries s;
    for (const auto& p : series) {
        require(p.epsilon > 0.0, "fit: epsilon must be positive");
        const double l = p.log();
        if (!std::isfinite(l)) {
            fail(ErrorKind::DegenerateData, "fit: non-positive magnitude at eps = " + std::to_string(p.epsilon));
        }
        s.eps.push_back(p.epsilon);
        s.logv.push_back(l);
    }
    const auto [lo, hi] = std::minmax_element(s.logv.begin(), s.logv.end());
    if (*hi - *lo <= 1e-12) {
        fail(ErrorKind::DegenerateData, "fit: all values are equal");
    }
    return s;
}

double r_squared(std::span<const double> y, const Eigen::VectorXd& residual) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double tot = 0.0;
    for (const double v : y) {
        tot += (v - mean) * (v - mean);
    }
    return tot == 0.0 ? 1.0 : std::clamp(1.0 - residual.squaredNorm() / tot, 0.0, 1.0);
}

struct StretchedSolve {
    Eigen::VectorXd coeffs; // log c, [p], d
    double sse = 0.0;
    Eigen::VectorXd residual;
};

StretchedSolve solve_stretched(const LogSeries& s, double beta, bool power) {
    const Eigen::Index n = static_cast<Eigen::Index>(s.eps.size());
    const Eigen::Index cols = power ? 3 : 2;
    Eigen::MatrixXd a(n, cols);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = s.eps[static_cast<std::size_t>(i)];
        a(i, 0) = 1.0;
        if (power) {
            a(i, 1) = -std::log(e);
        }
        a(i, cols - 1) = std::pow(e, -beta);
        y(i) = s.logv[static_cast<std::size_t>(i)];
    }
    StretchedSolve out;
    out.coeffs = a.colPivHouseholderQr().solve(y);
    out.residual = y - a * out.coeffs;
    out.sse = out.residual.squaredNorm();
    return out;
}

GrowthFit fit_stretched(const LogSeries& s) {
    const bool power = s.eps.size() >= 5;
    double best_beta = 0.05;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int k = 5; k <= 95; ++k) {
        const double beta = 0.01 * k;
        const double sse = solve_stretched(s, beta, power).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best_beta = beta;
        }
    }
    // Golden-section refinement on the bracket around the best grid point.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = std::max(0.05, best_beta - 0.01);
    double hi = std::min(0.95, best_beta + 0.01);
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = solve_stretched(s, x1, power).sse;
    double f2 = solve_stretched(s, x2, power).sse;
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = solve_stretched(s, x1, power).sse;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = solve_stretched(s, x2, power).sse;
        }
    }
    const double beta = 0.5 * (lo + hi);
    const StretchedSolve sol = solve_stretched(s, beta, power);
    GrowthFit f;
    f.model = GrowthModel::StretchedExp;
    f.params["log_c"] = sol.coeffs(0);
    f.params["c"] = std::exp(sol.coeffs(0));
    f.params["p"] = power ? sol.coeffs(1) : 0.0;
    f.params["d"] = sol.coeffs(power ? 2 : 1);
    f.params["beta"] = beta;
    f.r_squared = r_squared(s.logv, sol.residual);
    f.points = static_cast<int>(s.eps.size());
    return f;
}

} // namespace

GrowthFit fit(std::span<const SeriesPoint> series, GrowthModel model) {
    if (model == GrowthModel::FactorialGeometric) {
        fail(ErrorKind::InvalidArgument, "factorial_geometric is fitted over q; use fit_factorial");
    }
    const LogSeries s = prepare(series);
    if (model == GrowthModel::StretchedExp) {
        return fit_stretched(s);
    }
    std::vector<double> x;
    for (const double e : s.eps) {
        x.push_back(model == GrowthModel::ExpInverseEps ? 1.0 / e : -std::log(e));
    }
    const LinearFit lf = linear_regression(x, s.logv);
    GrowthFit f;
    f.model = model;
    f.points = static_cast<int>(s.eps.size());
    f.r_squared = lf.r_squared;
    f.params["log_c"] = lf.intercept;
    if (model == GrowthModel::ExpInverseEps) {
        f.params["C"] = std::exp(lf.intercept);
        f.params["kappa"] = -lf.slope;
    } else {
        f.params["c"] = std::exp(lf.intercept);
        f.params["p"] = lf.slope;
    }
    return f;
}

GrowthFit fit_factorial(std::span<const double> deltas, double epsilon, int first_q) {
    require(epsilon > 0.0, "fit_factorial: epsilon must be positive");
    if (deltas.size() < 3) {
        fail(ErrorKind::InsufficientData, "fit_factorial: need at least 3 levels");
    }
    // log delta_q - log q! = log b + q (log eps - 1 - log g)
    std::vector<double> q, y;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) {
            fail(ErrorKind::DegenerateData, "fit_factorial: non-positive delta");
        }
        const int qi = first_q + static_cast<int>(i);
        q.push_back(qi);
        y.push_back(std::log(deltas[i]) - std::lgamma(qi + 1.0));
    }
    const LinearFit lf = linear_regression(q, y);
    GrowthFit f;
    f.model = GrowthModel::FactorialGeometric;
    f.points = static_cast<int>(deltas.size());
    f.r_squared = lf.r_squared;
    f.params["b"] = std::exp(lf.intercept);
    f.params["g"] = std::exp(std::log(epsilon) - 1.0 - lf.slope);
    return f;
}

GrowthFit fit_growth_law(std::span<const SeriesPoint> series) {
    if (series.size() < 4) {
        fail(ErrorKind::InsufficientData, "need at least 4 points, got " + std::to_string(series.size()));
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : series) {
        lo = std::min(lo, p.log());
        hi = std::max(hi, p.log());
    }
    if (std::isfinite(lo) && hi - lo < std::log(1.1)) {
        GrowthFit f;
        f.model = GrowthModel::StretchedExp;
        f.bounded = true;
        f.points = static_cast<int>(series.size());
        f.params["c"] = std::exp(hi);
        f.params["log_c"] = hi;
        f.params["d"] = 0.0;
        f.params["beta"] = 0.0;
        f.params["p"] = 0.0;
        f.r_squared = 1.0;
        return f;
    }
    return fit(series, GrowthModel::StretchedExp);
}

} // namespace salab
